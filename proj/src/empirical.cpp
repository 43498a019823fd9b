#include "copulalab/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace copulalab {

double ProcessEvaluation::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::fmax(m, std::fabs(v));
  return m;
}

std::size_t ceil_n_u(std::size_t n, double u) {
  // ceil(n*u) with a tolerance absorbing the representation error of
  // lattice arguments like j/m; clamped to [0, n].
  const double x = static_cast<double>(n) * u;
  double c = std::ceil(x - 1e-9 * std::fmax(1.0, x));
  if (c < 0.0) c = 0.0;
  if (c > static_cast<double>(n)) c = static_cast<double>(n);
  return static_cast<std::size_t>(c);
}

double joint_ecdf(const Sample& s, std::span<const double> x) {
  if (x.size() != s.dimension())
    throw std::invalid_argument("joint_ecdf: dimension mismatch");
  const std::size_t n = s.size(), d = s.dimension();
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    bool in = true;
    for (std::size_t j = 0; j < d; ++j)
      if (!(s(i, j) <= x[j])) {
        in = false;
        break;
      }
    count += in;
  }
  return static_cast<double>(count) / n;
}

double marginal_ecdf(const Sample& s, int axis, double x) {
  const auto& col = s.sorted_column(axis);
  const auto it = std::upper_bound(col.begin(), col.end(), x);
  return static_cast<double>(it - col.begin()) / s.size();
}

double marginal_quantile(const Sample& s, int axis, double t) {
  if (!(t >= 0.0 && t <= 1.0))
    throw std::invalid_argument("marginal_quantile: t must lie in [0,1]");
  const auto& col = s.sorted_column(axis);
  std::size_t k = ceil_n_u(s.size(), t);
  if (k == 0) k = 1;  // t = 0: the limit from above is the column minimum
  return col[k - 1];
}

double empirical_copula(const Sample& s, std::span<const double> u) {
  if (u.size() != s.dimension())
    throw std::invalid_argument("empirical_copula: dimension mismatch");
  const std::size_t n = s.size(), d = s.dimension();
  std::vector<std::size_t> t(d);
  for (std::size_t j = 0; j < d; ++j) {
    if (!(u[j] >= 0.0 && u[j] <= 1.0))
      throw std::invalid_argument("empirical_copula: u must lie in [0,1]");
    t[j] = ceil_n_u(n, u[j]);
  }
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    bool in = true;
    for (std::size_t j = 0; j < d; ++j)
      if (s.ranks(j)[i] > t[j]) {
        in = false;
        break;
      }
    count += in;
  }
  return static_cast<double>(count) / n;
}

double empirical_copula_composed(const Sample& s, std::span<const double> u) {
  const std::size_t d = s.dimension();
  std::vector<double> q(d);
  for (std::size_t j = 0; j < d; ++j)
    q[j] = marginal_quantile(s, static_cast<int>(j), u[j]);
  return joint_ecdf(s, q);
}

std::vector<std::uint32_t> rank_count_tensor(
    const Sample& s, const std::vector<std::vector<std::size_t>>& thresholds) {
  const std::size_t n = s.size(), d = s.dimension();
  if (thresholds.size() != d)
    throw std::invalid_argument("rank_count_tensor: dimension mismatch");

  std::vector<std::size_t> sizes(d), strides(d, 1);
  std::size_t total = 1;
  for (std::size_t j = 0; j < d; ++j) {
    sizes[j] = thresholds[j].size();
    if (sizes[j] == 0)
      throw std::invalid_argument("rank_count_tensor: empty threshold list");
    total *= sizes[j];
  }
  for (std::size_t j = d; j-- > 1;) strides[j - 1] = strides[j] * sizes[j];

  // Bucket each row at the first threshold index covering its rank, then
  // accumulate d-dimensional suffix coverage by prefix sums along each axis.
  std::vector<std::uint32_t> cells(total, 0u);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t idx = 0;
    bool counted = true;
    for (std::size_t j = 0; j < d; ++j) {
      const auto& tj = thresholds[j];
      const std::size_t r = s.ranks(j)[i];
      const auto it = std::lower_bound(tj.begin(), tj.end(), r);
      if (it == tj.end()) {
        counted = false;
        break;
      }
      idx += strides[j] * static_cast<std::size_t>(it - tj.begin());
    }
    if (counted) ++cells[idx];
  }
  for (std::size_t j = 0; j < d; ++j) {
    const std::size_t stride = strides[j];
    const std::size_t block = stride * sizes[j];
    for (std::size_t base = 0; base < total; base += block)
      for (std::size_t k = stride; k < block; ++k)
        cells[base + k] += cells[base + k - stride];
  }
  return cells;
}

std::vector<double> empirical_copula_on_grid(const Sample& s, const Grid& g) {
  const std::size_t n = s.size();
  const std::size_t d = s.dimension();
  if (static_cast<int>(d) != g.dimension())
    throw std::invalid_argument("empirical_copula_on_grid: dimension mismatch");

  std::vector<std::vector<std::size_t>> thresholds(d);
  for (std::size_t j = 0; j < d; ++j) {
    thresholds[j].reserve(g.axes()[j].size());
    for (double v : g.axes()[j]) thresholds[j].push_back(ceil_n_u(n, v));
  }
  const auto cells = rank_count_tensor(s, thresholds);

  std::vector<double> out(g.size());
  for (std::size_t idx = 0; idx < g.product_size(); ++idx)
    out[idx] = static_cast<double>(cells[idx]) / n;
  // Margin extras: single-axis counts, exactly ceil(n u)/n without ties.
  for (std::size_t idx = g.product_size(); idx < g.size(); ++idx) {
    const auto pt = g.point(idx);
    double value = 1.0;
    for (std::size_t j = 0; j < d; ++j)
      if (pt[j] < 1.0)
        value = static_cast<double>(ceil_n_u(n, pt[j])) / n;
    out[idx] = value;
  }
  return out;
}

ProcessEvaluation copula_process(const Sample& s, const CopulaModel& model,
                                 const Grid& grid) {
  if (model.dimension() != grid.dimension() ||
      s.dimension() != static_cast<std::size_t>(grid.dimension()))
    throw std::invalid_argument("copula_process: dimension mismatch");
  const double root_n = std::sqrt(static_cast<double>(s.size()));
  auto cn = empirical_copula_on_grid(s, grid);
  ProcessEvaluation ev{grid, std::move(cn), ProcessTag::An, s.size()};
  for (std::size_t i = 0; i < ev.values.size(); ++i)
    ev.values[i] = root_n * (ev.values[i] - model.cdf(grid.point(i)));
  return ev;
}

ProcessEvaluation alpha_process(const Sample& s, const CopulaModel& model,
                                const Grid& grid) {
  if (s.kind() != SampleKind::PseudoUniform)
    throw std::invalid_argument("alpha_process: requires pseudo-uniform data");
  if (model.dimension() != grid.dimension() ||
      s.dimension() != static_cast<std::size_t>(grid.dimension()))
    throw std::invalid_argument("alpha_process: dimension mismatch");
  const double root_n = std::sqrt(static_cast<double>(s.size()));
  ProcessEvaluation ev{grid, std::vector<double>(grid.size()), ProcessTag::AlphaN,
                       s.size()};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto pt = grid.point(i);
    ev.values[i] = root_n * (joint_ecdf(s, pt) - model.cdf(pt));
  }
  return ev;
}

double beta_process(const Sample& s, int axis, double u) {
  if (s.kind() != SampleKind::PseudoUniform)
    throw std::invalid_argument("beta_process: requires pseudo-uniform data");
  if (!(u >= 0.0 && u <= 1.0))
    throw std::invalid_argument("beta_process: u must lie in [0,1]");
  const double root_n = std::sqrt(static_cast<double>(s.size()));
  return root_n * (marginal_quantile(s, axis, u) - u);
}

}  // namespace copulalab
