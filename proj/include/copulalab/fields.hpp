#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "copulalab/copula.hpp"
#include "copulalab/grid.hpp"

namespace copulalab {

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Covariance of the copula Brownian bridge: C(u ^ v) - C(u) C(v).
double bridge_covariance(const CopulaModel& model, std::span<const double> u,
                         std::span<const double> v);

enum class FieldTag { BridgeBC, KieferKC, KStar };

struct FieldSample {
  std::vector<double> values;  // aligned with grid point order
  int time_index = 1;
  FieldTag tag = FieldTag::BridgeBC;
  std::uint64_t seed = 0;
};

// Lower-triangular factor of the bridge covariance restricted to grid points
// with positive variance; boundary points are pinned to zero.
struct CovarianceFactor {
  Grid grid;
  std::vector<std::size_t> active;      // grid indices in the factor
  std::vector<std::size_t> degenerate;  // zero-variance grid indices
  Eigen::MatrixXd factor;               // lower triangular
  double jitter_used = 0.0;
};

Eigen::MatrixXd assemble_covariance(const CopulaModel& model, const Grid& grid,
                                    const std::vector<std::size_t>& active);
Eigen::MatrixXd assemble_covariance_serial(
    const CopulaModel& model, const Grid& grid,
    const std::vector<std::size_t>& active);

// Builds and factorizes the covariance, escalating diagonal jitter through
// {0, 1e-12, 1e-10, 1e-8}; throws NumericalError naming the most negative
// eigenvalue estimate when all levels fail.
CovarianceFactor build_factor(const CopulaModel& model, const Grid& grid);

FieldSample sample_bridge(const CovarianceFactor& factor, std::uint64_t seed);

// Kiefer field at integer times 0..t_max via i.i.d. bridge increments;
// element k holds K(., k).
std::vector<FieldSample> sample_kiefer(const CovarianceFactor& factor,
                                       int t_max, std::uint64_t seed);

// Precomputed margin-correction transform: out(u) = k(u) - sum_j
// k(margin_j(u_j)) dC/du_j. Requires every margin point to be present in the
// grid.
class KStarTransform {
 public:
  KStarTransform(const CopulaModel& model, const Grid& grid);
  void apply(std::span<const double> field, std::span<double> out) const;
  int dimension() const { return d_; }

 private:
  int d_;
  std::size_t npts_;
  std::vector<double> partials_;          // npts x d
  std::vector<std::size_t> margin_idx_;   // npts x d
};

FieldSample sample_kstar(const CovarianceFactor& factor,
                         const KStarTransform& transform, int time,
                         std::uint64_t seed);
FieldSample sample_kstar(const CopulaModel& model, const Grid& grid, int time,
                         std::uint64_t seed);

// Covariance of the corrected field at time 1, assembled by bilinear
// expansion of the margin correction from bridge covariances and bivariate
// margins.
double kstar_covariance(const CopulaModel& model, std::span<const double> u,
                        std::span<const double> v);

// Grid maximum of the corrected-field variance followed by coordinatewise
// step-halving refinement down to step 1e-6.
std::pair<double, Point> kstar_variance_sup(const CopulaModel& model,
                                            const Grid& grid);

}  // namespace copulalab
