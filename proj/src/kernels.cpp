#include "copulalab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "copulalab/normal.hpp"

namespace copulalab {

namespace {

// Legendre nodes/weights on [-1,1], generated by Newton iteration on the
// recurrence; cached per order.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::fabs(z - z1) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
}

struct GlRule {
  std::vector<double> x, w;
};

GlRule gl_rule(int n) {
  GlRule r;
  gauss_legendre(n, r.x, r.w);
  return r;
}

}  // namespace

Kernel::Kernel(KernelShape shape, int order, double radius,
               std::vector<double> coeffs, double scale)
    : shape_(shape), order_(order), radius_(radius), coeffs_(std::move(coeffs)),
      scale_(scale) {}

Kernel Kernel::epanechnikov() {
  return Kernel(KernelShape::Epanechnikov, 2, 1.0, {0.75, -0.75}, 1.0);
}

Kernel Kernel::quartic() {
  return Kernel(KernelShape::Quartic, 2, 1.0,
                {15.0 / 16.0, -30.0 / 16.0, 15.0 / 16.0}, 1.0);
}

Kernel Kernel::gaussian_truncated(double radius) {
  if (!(radius > 0.0))
    throw std::invalid_argument("gaussian_truncated: radius must be > 0");
  return Kernel(KernelShape::GaussianTruncated, 2, radius, {}, 1.0);
}

Kernel Kernel::higher_order_polynomial(int order) {
  if (order < 2 || order % 2 != 0)
    throw std::invalid_argument(
        "higher_order_polynomial: order must be even and >= 2");
  const int m = order / 2;
  // Solve for p(y) = sum c_a y^a with q(x) = (1-x^2)^2 p(x^2) satisfying
  // integral x^{2t} q dx = delta_{t0}, t = 0..m-1. Moments of x^{2e}(1-x^2)^2
  // over [-1,1] are rational: 2 (1/(2e+1) - 2/(2e+3) + 1/(2e+5)).
  auto base_moment = [](int e) {
    return 2.0 * (1.0 / (2 * e + 1) - 2.0 / (2 * e + 3) + 1.0 / (2 * e + 5));
  };
  std::vector<std::vector<double>> A(m, std::vector<double>(m + 1, 0.0));
  for (int t = 0; t < m; ++t) {
    for (int a = 0; a < m; ++a) A[t][a] = base_moment(t + a);
    A[t][m] = (t == 0) ? 1.0 : 0.0;
  }
  for (int col = 0; col < m; ++col) {  // Gaussian elimination, partial pivot
    int piv = col;
    for (int r2 = col + 1; r2 < m; ++r2)
      if (std::fabs(A[r2][col]) > std::fabs(A[piv][col])) piv = r2;
    std::swap(A[col], A[piv]);
    for (int r2 = 0; r2 < m; ++r2) {
      if (r2 == col) continue;
      const double f = A[r2][col] / A[col][col];
      for (int c2 = col; c2 <= m; ++c2) A[r2][c2] -= f * A[col][c2];
    }
  }
  std::vector<double> p(m);
  for (int a = 0; a < m; ++a) p[a] = A[a][m] / A[a][a];
  // Expand (1 - 2y + y^2) p(y), y = x^2.
  std::vector<double> coeffs(m + 2, 0.0);
  for (int a = 0; a < m; ++a) {
    coeffs[a] += p[a];
    coeffs[a + 1] -= 2.0 * p[a];
    coeffs[a + 2] += p[a];
  }
  return Kernel(KernelShape::HigherOrderPolynomial, order, 1.0,
                std::move(coeffs), 1.0);
}

Kernel Kernel::rescaled(double factor) const {
  Kernel k = *this;
  k.scale_ *= factor;
  return k;
}

bool Kernel::nonnegative() const {
  if (scale_ <= 0.0) return false;
  if (shape_ == KernelShape::GaussianTruncated) return true;
  return order_ <= 2;
}

std::string Kernel::name() const {
  switch (shape_) {
    case KernelShape::Epanechnikov: return "epanechnikov";
    case KernelShape::Quartic: return "quartic";
    case KernelShape::GaussianTruncated: return "gaussian_truncated";
    case KernelShape::HigherOrderPolynomial:
      return "poly_order_" + std::to_string(order_);
  }
  return "?";
}

double Kernel::eval1d(double x) const {
  if (std::fabs(x) > radius_) return 0.0;
  if (shape_ == KernelShape::GaussianTruncated) {
    const double z = 2.0 * normal_cdf(radius_) - 1.0;
    return scale_ * normal_pdf(x) / z;
  }
  const double y = x * x;
  double v = 0.0;
  for (std::size_t a = coeffs_.size(); a-- > 0;) v = v * y + coeffs_[a];
  return scale_ * v;
}

double Kernel::integral1d(double a, double b) const {
  a = std::clamp(a, -radius_, radius_);
  b = std::clamp(b, -radius_, radius_);
  if (b <= a) return 0.0;
  if (shape_ == KernelShape::GaussianTruncated) {
    const double z = 2.0 * normal_cdf(radius_) - 1.0;
    return scale_ * (normal_cdf(b) - normal_cdf(a)) / z;
  }
  auto anti = [&](double t) {
    double v = 0.0;
    for (std::size_t c = coeffs_.size(); c-- > 0;)
      v = v * t * t + coeffs_[c] / (2.0 * c + 1.0);
    return v * t;
  };
  return scale_ * (anti(b) - anti(a));
}

double Kernel::eval(std::span<const double> v) const {
  double prod = 1.0;
  for (double x : v) prod *= eval1d(x);
  return prod;
}

std::string MomentReport::summary() const {
  std::ostringstream os;
  os << (pass ? "pass" : "FAIL") << " (max residual " << max_residual;
  if (!quadrature_converged) os << ", quadrature did not converge";
  os << ")";
  for (const auto& e : entries) {
    if (e.pass) continue;
    os << "\n  moment (";
    for (std::size_t i = 0; i < e.powers.size(); ++i)
      os << (i ? "," : "") << e.powers[i];
    os << ") = " << e.value << ", expected " << e.target;
  }
  return os.str();
}

MomentReport verify_order(const Kernel& k, int dimension) {
  MomentReport report;
  const int s = k.order();
  const double R = k.support_radius();

  // 1-D raw moments at two quadrature resolutions; product kernels make the
  // mixed moments factor across axes.
  auto moments_at = [&](int nodes) {
    GlRule rule = gl_rule(nodes);
    std::vector<double> m(s + 1, 0.0), mabs(s + 1, 0.0);
    for (int i = 0; i < nodes; ++i) {
      const double x = R * rule.x[i];
      const double w = R * rule.w[i];
      const double kv = k.eval1d(x);
      double px = 1.0;
      for (int t = 0; t <= s; ++t) {
        m[t] += w * kv * px;
        mabs[t] += w * std::fabs(kv * px);
        px *= x;
      }
    }
    return std::make_pair(m, mabs);
  };
  const auto [m64, a64] = moments_at(64);
  const auto [m96, a96] = moments_at(96);
  double qdiff = 0.0;
  for (int t = 0; t <= s; ++t) qdiff = std::fmax(qdiff, std::fabs(m64[t] - m96[t]));
  report.quadrature_converged = qdiff < 1e-11;

  // Enumerate multi-indices of total degree 0..s.
  std::vector<int> powers(dimension, 0);
  std::function<void(int, int)> walk = [&](int axis, int remaining) {
    if (axis == dimension) {
      int total = std::accumulate(powers.begin(), powers.end(), 0);
      MomentReport::Entry e;
      e.powers = powers;
      if (total < s) {
        double v = 1.0;
        for (int p : powers) v *= m96[p];
        e.value = v;
        e.target = (total == 0) ? 1.0 : 0.0;
        e.pass = std::fabs(e.value - e.target) < 1e-8;
        report.max_residual = std::fmax(report.max_residual,
                                        std::fabs(e.value - e.target));
      } else {
        // Degree-s condition: absolute moments finite.
        double v = 1.0;
        for (int p : powers) v *= a96[p];
        e.value = v;
        e.target = v;
        e.pass = std::isfinite(v);
      }
      report.entries.push_back(std::move(e));
      return;
    }
    for (int p = 0; p <= remaining; ++p) {
      powers[axis] = p;
      walk(axis + 1, remaining - p);
    }
    powers[axis] = 0;
  };
  walk(0, s);

  report.pass = report.quadrature_converged;
  for (const auto& e : report.entries) report.pass = report.pass && e.pass;
  return report;
}

double Bandwidth::axis_scale() const {
  return std::pow(h, 1.0 / static_cast<double>(d));
}

Bandwidth::Flags Bandwidth::flags() const {
  Flags f;
  f.h_in_range = h > 0.0 && h < 1.0;
  f.nh_large = static_cast<double>(n) * h >= 2.0;
  f.root_n_bias_small =
      std::sqrt(static_cast<double>(n)) *
          std::pow(h, static_cast<double>(s) / d) <=
      0.5;
  return f;
}

double Bandwidth::default_h(std::size_t n, int s, int d) {
  return std::pow(static_cast<double>(n),
                  -static_cast<double>(d) / (2.0 * s)) /
         std::log(static_cast<double>(n));
}

double kernel_mass(const Kernel& k, const Bandwidth& bw,
                   std::span<const double> u) {
  const double b = bw.axis_scale();
  double mass = 1.0;
  for (double uj : u) mass *= k.integral1d((uj - 1.0) / b, uj / b);
  return mass;
}

namespace {

// Per-axis quadrature data for the window support(u_j) intersected with
// [0,1]: node positions and weights already multiplied by the scaled kernel.
struct AxisNodes {
  std::vector<double> v;  // positions in [0,1]
  std::vector<double> f;  // weight * k((u - v)/b)/b
};

AxisNodes axis_nodes(const Kernel& k, double b, double uj, const GlRule& rule) {
  AxisNodes out;
  const double lo = std::fmax(0.0, uj - b * k.support_radius());
  const double hi = std::fmin(1.0, uj + b * k.support_radius());
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  const std::size_t n = rule.x.size();
  out.v.resize(n);
  out.f.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.v[i] = mid + half * rule.x[i];
    out.f[i] = half * rule.w[i] * k.eval1d((uj - out.v[i]) / b) / b;
  }
  return out;
}

}  // namespace

double smoothed_function(const std::function<double(std::span<const double>)>& f,
                         const Kernel& k, const Bandwidth& bw,
                         std::span<const double> u, int nodes_per_axis) {
  const double b = bw.axis_scale();
  const std::size_t d = u.size();
  const GlRule rule = gl_rule(nodes_per_axis);
  std::vector<AxisNodes> axes(d);
  for (std::size_t j = 0; j < d; ++j) axes[j] = axis_nodes(k, b, u[j], rule);

  std::size_t total = 1;
  for (std::size_t j = 0; j < d; ++j) total *= axes[j].v.size();
  std::vector<double> pt(d);
  double acc = 0.0;
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    double wgt = 1.0;
    for (std::size_t j = d; j-- > 0;) {
      const std::size_t a = rem % axes[j].v.size();
      rem /= axes[j].v.size();
      pt[j] = axes[j].v[a];
      wgt *= axes[j].f[a];
    }
    acc += wgt * f(pt);
  }
  return acc;
}

double smoothed_copula_quadrature(const Sample& s, const Kernel& k,
                                  const Bandwidth& bw,
                                  std::span<const double> u,
                                  int nodes_per_axis) {
  const double b = bw.axis_scale();
  const std::size_t d = s.dimension();
  if (u.size() != d)
    throw std::invalid_argument("smoothed_copula: dimension mismatch");
  const GlRule rule = gl_rule(nodes_per_axis);
  std::vector<AxisNodes> axes(d);
  std::vector<std::vector<std::size_t>> thresholds(d);
  for (std::size_t j = 0; j < d; ++j) {
    axes[j] = axis_nodes(k, b, u[j], rule);
    thresholds[j].reserve(axes[j].v.size());
    for (double v : axes[j].v) thresholds[j].push_back(ceil_n_u(s.size(), v));
  }
  const auto cells = rank_count_tensor(s, thresholds);

  std::size_t total = 1;
  for (std::size_t j = 0; j < d; ++j) total *= axes[j].v.size();
  double acc = 0.0;
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    double wgt = 1.0;
    for (std::size_t j = d; j-- > 0;) {
      const std::size_t a = rem % axes[j].v.size();
      rem /= axes[j].v.size();
      wgt *= axes[j].f[a];
    }
    acc += wgt * cells[flat];
  }
  return acc / static_cast<double>(s.size());
}

double smoothed_copula_exact_cells(const Sample& s, const Kernel& k,
                                   const Bandwidth& bw,
                                   std::span<const double> u) {
  const std::size_t d = s.dimension();
  if (d != 2)
    throw std::invalid_argument("smoothed_copula_exact_cells: d must be 2");
  const double b = bw.axis_scale();
  const std::size_t n = s.size();

  // Edges of the step-function cells of C_n inside the window; the kernel
  // integrates exactly over each constant piece.
  struct AxisCells {
    std::vector<double> weight;
    std::vector<std::size_t> threshold;
  };
  std::vector<AxisCells> axes(2);
  for (std::size_t j = 0; j < 2; ++j) {
    const double lo = std::fmax(0.0, u[j] - b * k.support_radius());
    const double hi = std::fmin(1.0, u[j] + b * k.support_radius());
    std::vector<double> edges{lo};
    const std::size_t k_lo = ceil_n_u(n, lo);
    for (std::size_t t = k_lo; t <= n; ++t) {
      const double e = static_cast<double>(t) / n;
      if (e > lo && e < hi) edges.push_back(e);
      if (e >= hi) break;
    }
    edges.push_back(hi);
    auto& ax = axes[j];
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
      ax.weight.push_back(
          k.integral1d((u[j] - edges[i + 1]) / b, (u[j] - edges[i]) / b));
      ax.threshold.push_back(ceil_n_u(n, 0.5 * (edges[i] + edges[i + 1])));
    }
  }
  const auto cells = rank_count_tensor(
      s, {axes[0].threshold, axes[1].threshold});
  const std::size_t m2 = axes[1].threshold.size();
  double acc = 0.0;
  for (std::size_t a = 0; a < axes[0].threshold.size(); ++a)
    for (std::size_t c = 0; c < m2; ++c)
      acc += axes[0].weight[a] * axes[1].weight[c] * cells[a * m2 + c];
  return acc / static_cast<double>(n);
}

double smoothed_copula(const Sample& s, const Kernel& k, const Bandwidth& bw,
                       std::span<const double> u) {
  if (s.dimension() == 2 && s.size() <= 600)
    return smoothed_copula_exact_cells(s, k, bw, u);
  return smoothed_copula_quadrature(s, k, bw, u);
}

ProcessEvaluation smoothed_process(const Sample& s, const Kernel& k,
                                   const Bandwidth& bw,
                                   const CopulaModel& model, const Grid& grid) {
  const double root_n = std::sqrt(static_cast<double>(s.size()));
  ProcessEvaluation ev{grid, std::vector<double>(grid.size()),
                       ProcessTag::SmoothedAn, s.size()};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto pt = grid.point(i);
    ev.values[i] = root_n * (smoothed_copula(s, k, bw, pt) - model.cdf(pt));
  }
  return ev;
}

std::vector<bool> interior_window_mask(const Grid& grid, double b,
                                       double support_radius) {
  std::vector<bool> mask(grid.size());
  const double margin = b * support_radius;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    bool ok = true;
    for (double x : grid.point(i))
      if (x < margin || x > 1.0 - margin) ok = false;
    mask[i] = ok;
  }
  return mask;
}

SmoothingGridRefs precompute_smoothing_refs(const Kernel& k, const Bandwidth& bw,
                                            const CopulaModel& model,
                                            const Grid& grid,
                                            int nodes_per_axis) {
  SmoothingGridRefs refs;
  refs.smoothed_c.resize(grid.size());
  refs.mass.resize(grid.size());
  refs.c.resize(grid.size());
  auto cdf = [&](std::span<const double> v) { return model.cdf(v); };
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto pt = grid.point(i);
    refs.smoothed_c[i] = smoothed_function(cdf, k, bw, pt, nodes_per_axis);
    refs.mass[i] = kernel_mass(k, bw, pt);
    refs.c[i] = model.cdf(pt);
  }
  return refs;
}

SmoothingReplicateStats smoothing_replicate_stats(
    const Sample& s, const Kernel& k, const Bandwidth& bw, const Grid& grid,
    const SmoothingGridRefs& refs, const std::vector<bool>& interior_mask) {
  const double root_n = std::sqrt(static_cast<double>(s.size()));
  const auto cn = empirical_copula_on_grid(s, grid);

  SmoothingReplicateStats out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto pt = grid.point(i);
    const double chat = smoothed_copula(s, k, bw, pt);
    const double a_n = root_n * (cn[i] - refs.c[i]);
    const double gap = root_n * (chat - refs.c[i]) - a_n;  // smoothed - raw
    bool corner = true;
    for (double x : pt) corner = corner && x == 1.0;
    if (corner) out.corner_gap = std::fabs(gap);
    if (!interior_mask.empty() && !interior_mask[i]) continue;

    const double smoothed_an = root_n * (chat - refs.smoothed_c[i]);
    const double m = refs.mass[i];
    out.sup_smoothed_minus_raw = std::fmax(out.sup_smoothed_minus_raw,
                                           std::fabs(gap));
    out.decomposition.modulus_term = std::fmax(
        out.decomposition.modulus_term, std::fabs(smoothed_an - m * a_n));
    out.decomposition.mass_term = std::fmax(
        out.decomposition.mass_term, std::fabs(a_n) * std::fabs(m - 1.0));
    out.decomposition.bias_term =
        std::fmax(out.decomposition.bias_term,
                  root_n * std::fabs(refs.smoothed_c[i] - m * refs.c[i]));
    out.decomposition.c_mass_term =
        std::fmax(out.decomposition.c_mass_term,
                  root_n * refs.c[i] * std::fabs(m - 1.0));
  }
  return out;
}

SmoothingDecomposition decompose_smoothing_error(
    const Sample& s, const Kernel& k, const Bandwidth& bw,
    const CopulaModel& model, const Grid& grid,
    const std::vector<bool>& interior_mask) {
  const auto refs = precompute_smoothing_refs(k, bw, model, grid);
  return smoothing_replicate_stats(s, k, bw, grid, refs, interior_mask)
      .decomposition;
}

}  // namespace copulalab
