#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "copulalab/copula.hpp"
#include "copulalab/grid.hpp"
#include "copulalab/sample.hpp"

namespace copulalab {

enum class ProcessTag { An, AlphaN, SmoothedAn };

struct ProcessEvaluation {
  Grid grid;
  std::vector<double> values;  // aligned with grid point order
  ProcessTag tag;
  std::size_t n;

  double max_abs() const;
};

// Tolerant ceil(n*u): immune to the last-bit noise of lattice arguments like
// u = j/m. Shared by every rank-threshold computation so the rank-based and
// compositional estimator definitions agree bit for bit.
std::size_t ceil_n_u(std::size_t n, double u);

// Joint ECDF in data space, exact step function.
double joint_ecdf(const Sample& s, std::span<const double> x);
double marginal_ecdf(const Sample& s, int axis, double x);

// Generalized-inverse marginal quantile: k-th order statistic with
// k = ceil(n t), the column minimum at t = 0 and maximum at t = 1.
double marginal_quantile(const Sample& s, int axis, double t);

// Rank-based empirical copula with threshold convention ceil(n*0) = 0.
double empirical_copula(const Sample& s, std::span<const double> u);
// Compositional definition (joint ECDF of marginal quantiles); reference
// implementation for equality testing, valid on (0,1]^d.
double empirical_copula_composed(const Sample& s, std::span<const double> u);

// Counts rows with rank_j <= t_j for every threshold tuple of the tensor
// lattice; thresholds per axis must be nondecreasing values in 0..n.
// Histogram + d-dimensional prefix sums, O(n d + prod(sizes)).
std::vector<std::uint32_t> rank_count_tensor(
    const Sample& s, const std::vector<std::vector<std::size_t>>& thresholds);

// Empirical copula at every grid point (product part via the count tensor,
// margin extras via single-axis counts).
std::vector<double> empirical_copula_on_grid(const Sample& s, const Grid& g);

// sqrt(n) (C_n - C) on a grid. Uses ranks only, so values are invariant
// under strictly increasing marginal transforms of a raw sample.
ProcessEvaluation copula_process(const Sample& s, const CopulaModel& model,
                                 const Grid& grid);

// sqrt(n) (uniform ECDF - C); requires pseudo-uniform data since it compares
// values, not ranks.
ProcessEvaluation alpha_process(const Sample& s, const CopulaModel& model,
                                const Grid& grid);

// sqrt(n) (G_n^-(u) - u) for one axis of a pseudo-uniform sample.
double beta_process(const Sample& s, int axis, double u);

}  // namespace copulalab
