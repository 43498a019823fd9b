#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "copulalab/copula.hpp"
#include "copulalab/empirical.hpp"
#include "copulalab/grid.hpp"
#include "copulalab/sample.hpp"

namespace copulalab {

enum class KernelShape {
  Epanechnikov,
  Quartic,
  GaussianTruncated,
  HigherOrderPolynomial
};

// Symmetric univariate kernel, applied in product form across axes.
// Polynomial shapes carry exact coefficients so definite integrals are
// evaluated analytically.
class Kernel {
 public:
  static Kernel epanechnikov();
  static Kernel quartic();
  static Kernel gaussian_truncated(double radius = 3.0);
  // Even order s >= 2: (1-x^2)^2 times the even polynomial solving the
  // vanishing-moment conditions up to degree s-1.
  static Kernel higher_order_polynomial(int order);

  // Scaled copy (breaks the unit integral); negative control for the order
  // verifier.
  Kernel rescaled(double factor) const;

  KernelShape shape() const { return shape_; }
  int order() const { return order_; }
  double support_radius() const { return radius_; }
  bool nonnegative() const;
  std::string name() const;

  double eval1d(double x) const;
  double integral1d(double a, double b) const;  // exact antiderivative
  double eval(std::span<const double> v) const; // product over coordinates

 private:
  Kernel(KernelShape shape, int order, double radius,
         std::vector<double> coeffs, double scale);

  KernelShape shape_;
  int order_;
  double radius_;
  std::vector<double> coeffs_;  // even polynomial coefficients c0 + c1 x^2 + ...
  double scale_ = 1.0;
};

struct MomentReport {
  struct Entry {
    std::vector<int> powers;
    double value = 0.0;
    double target = 0.0;
    bool pass = false;
  };
  std::vector<Entry> entries;
  bool quadrature_converged = true;
  double max_residual = 0.0;
  bool pass = false;
  std::string summary() const;
};

// Numerically integrates all mixed moments up to total degree s and checks
// the order conditions with tolerance 1e-8. Fails loudly when the two
// quadrature resolutions disagree.
MomentReport verify_order(const Kernel& k, int dimension);

// Volume-scale bandwidth h with per-axis scale h^{1/d}.
struct Bandwidth {
  double h = 0.0;
  std::size_t n = 0;
  int s = 2;
  int d = 2;

  double axis_scale() const;

  struct Flags {
    bool h_in_range = false;
    bool nh_large = false;
    bool root_n_bias_small = false;
    bool admissible() const { return h_in_range && nh_large && root_n_bias_small; }
  };
  Flags flags() const;

  static double default_h(std::size_t n, int s, int d);
};

// Mass of the bandwidth-scaled kernel centred at u and clipped to the cube;
// exactly 1 when the support stays interior.
double kernel_mass(const Kernel& k, const Bandwidth& bw,
                   std::span<const double> u);

// Convolution of the cube-restricted step function C_n with the scaled
// kernel. Gauss-Legendre tensor quadrature by default; exact cell summation
// for d = 2 with small n.
double smoothed_copula(const Sample& s, const Kernel& k, const Bandwidth& bw,
                       std::span<const double> u);
double smoothed_copula_quadrature(const Sample& s, const Kernel& k,
                                  const Bandwidth& bw,
                                  std::span<const double> u,
                                  int nodes_per_axis = 32);
double smoothed_copula_exact_cells(const Sample& s, const Kernel& k,
                                   const Bandwidth& bw,
                                   std::span<const double> u);

// Same convolution applied to an arbitrary function on the cube (used for
// the smoothed true copula and in tests).
double smoothed_function(const std::function<double(std::span<const double>)>& f,
                         const Kernel& k, const Bandwidth& bw,
                         std::span<const double> u, int nodes_per_axis = 32);

ProcessEvaluation smoothed_process(const Sample& s, const Kernel& k,
                                   const Bandwidth& bw,
                                   const CopulaModel& model, const Grid& grid);

struct SmoothingDecomposition {
  double modulus_term = 0.0;    // smoothing applied to the empirical process
  double mass_term = 0.0;       // boundary mass deficit against the process
  double bias_term = 0.0;       // sqrt(n) * smoothing bias of C itself
  double c_mass_term = 0.0;     // boundary mass deficit against C
};

// Sup-norm terms of the error split between the smoothed and raw process,
// evaluated over the grid points selected by `interior_mask` (empty mask:
// all points).
SmoothingDecomposition decompose_smoothing_error(
    const Sample& s, const Kernel& k, const Bandwidth& bw,
    const CopulaModel& model, const Grid& grid,
    const std::vector<bool>& interior_mask = {});

// Sample-independent inputs of the decomposition (smoothed true copula,
// kernel mass, true copula on the grid); studies reuse them across
// replicates.
struct SmoothingGridRefs {
  std::vector<double> smoothed_c;
  std::vector<double> mass;
  std::vector<double> c;
};
SmoothingGridRefs precompute_smoothing_refs(const Kernel& k, const Bandwidth& bw,
                                            const CopulaModel& model,
                                            const Grid& grid,
                                            int nodes_per_axis = 32);
struct SmoothingReplicateStats {
  SmoothingDecomposition decomposition;
  double sup_smoothed_minus_raw = 0.0;  // over the mask
  double corner_gap = 0.0;              // |smoothed - raw| at (1,...,1)
};
SmoothingReplicateStats smoothing_replicate_stats(
    const Sample& s, const Kernel& k, const Bandwidth& bw, const Grid& grid,
    const SmoothingGridRefs& refs, const std::vector<bool>& interior_mask);

// Grid points whose kernel window stays inside the cube at axis scale b.
std::vector<bool> interior_window_mask(const Grid& grid, double b,
                                       double support_radius);

}  // namespace copulalab
