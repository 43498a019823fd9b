#include "copulalab/rankstats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "copulalab/empirical.hpp"
#include "copulalab/fields.hpp"

namespace copulalab {

namespace {

void gauss_legendre01(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
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
    x[i] = 0.5 * (1.0 - z);
    x[n - 1 - i] = 0.5 * (1.0 + z);
    w[i] = 1.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
}

double radical_inverse(std::uint64_t i, std::uint64_t base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

// Conditional quantile along the second coordinate by bisection on the
// first partial derivative (an increasing conditional CDF in v).
double conditional_inverse(const CopulaModel& model, double u, double w) {
  double lo = 0.0, hi = 1.0;
  Point p{u, 0.5};
  for (int it = 0; it < 60; ++it) {
    p[1] = 0.5 * (lo + hi);
    if (model.partial(p, 0) < w)
      lo = p[1];
    else
      hi = p[1];
  }
  return 0.5 * (lo + hi);
}

}  // namespace

ScoreFunction::ScoreFunction(Kind kind, std::vector<Term> terms, double bound)
    : kind_(kind), terms_(std::move(terms)), z_bound_(bound) {}

ScoreFunction ScoreFunction::spearman() {
  return ScoreFunction(Kind::SpearmanJ,
                       {{0, 0, 1, 12.0}, {0, 0, 0, -3.0}}, 12.0);
}

ScoreFunction ScoreFunction::kendall() {
  return ScoreFunction(Kind::KendallJ, {{0, 0, 1, 4.0}, {0, 0, 0, -1.0}}, 4.0);
}

ScoreFunction ScoreFunction::custom(std::vector<Term> terms) {
  double bound = 0.0;
  for (const auto& t : terms)
    if (t.pz >= 1) bound += std::fabs(t.coeff) * t.pz;
  return ScoreFunction(Kind::Custom, std::move(terms), bound);
}

ScoreFunction ScoreFunction::custom_unbounded(std::vector<Term> terms) {
  return ScoreFunction(Kind::Custom, std::move(terms),
                       std::numeric_limits<double>::infinity());
}

double ScoreFunction::operator()(double u, double v, double z) const {
  double total = 0.0;
  for (const auto& t : terms_)
    total += t.coeff * std::pow(u, t.pu) * std::pow(v, t.pv) * std::pow(z, t.pz);
  return total;
}

double ScoreFunction::dz(double u, double v, double z) const {
  double total = 0.0;
  for (const auto& t : terms_) {
    if (t.pz == 0) continue;
    total += t.coeff * t.pz * std::pow(u, t.pu) * std::pow(v, t.pv) *
             std::pow(z, t.pz - 1);
  }
  return total;
}

bool ScoreFunction::bounded_derivative() const {
  return std::isfinite(z_bound_);
}

bool ScoreFunction::linear_in_z() const {
  for (const auto& t : terms_)
    if (t.pz > 1) return false;
  return true;
}

RankScore RankScore::constant_one() {
  return RankScore{[](std::span<const double>) { return 1.0; }};
}

RankScore RankScore::product() {
  return RankScore{[](std::span<const double> u) {
    double p = 1.0;
    for (double x : u) p *= x;
    return p;
  }};
}

RankScore RankScore::spearman_pair() {
  return RankScore{[](std::span<const double> u) {
    return 12.0 * u[0] * u[1] - 3.0;
  }};
}

double spearman_functional(const CopulaModel& model, const ScoreFunction& J,
                           int quad_nodes) {
  if (model.dimension() != 2)
    throw std::invalid_argument("spearman_functional: d must be 2");
  std::vector<double> x, w;
  gauss_legendre01(quad_nodes, x, w);
  double total = 0.0;
  Point p(2);
  for (int i = 0; i < quad_nodes; ++i) {
    for (int j = 0; j < quad_nodes; ++j) {
      p[0] = x[i];
      p[1] = x[j];
      total += w[i] * w[j] * J(x[i], x[j], model.cdf(p));
    }
  }
  return total;
}

double spearman_functional(const Sample& s, const ScoreFunction& J) {
  if (s.dimension() != 2)
    throw std::invalid_argument("spearman_functional: d must be 2");
  const std::size_t n = s.size();
  const auto& r1 = s.ranks(0);
  const auto& r2 = s.ranks(1);

  bool pure_z = J.linear_in_z();
  for (const auto& t : J.terms())
    if (t.pu > 0 || t.pv > 0) pure_z = false;
  if (pure_z) {
    // J = a + b z integrates to a + b * sum over rows of the upper-cell
    // areas (1 - (R-1)/n) per axis.
    double a = 0.0, b = 0.0;
    for (const auto& t : J.terms())
      (t.pz == 0 ? a : b) += t.coeff;
    double integral_cn = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      integral_cn += (1.0 - (r1[i] - 1.0) / n) * (1.0 - (r2[i] - 1.0) / n);
    return a + b * integral_cn / n;
  }

  // Exact cell sum: C_n is constant on ((a-1)/n, a/n] x ((b-1)/n, b/n];
  // monomials integrate in closed form over each cell.
  std::vector<std::uint32_t> perm(n);  // rank2 of the row with rank1 = a
  for (std::size_t i = 0; i < n; ++i) perm[r1[i] - 1] = r2[i];

  auto cell_table = [n](int power) {
    std::vector<double> tab(n + 1, 0.0);
    for (std::size_t c = 1; c <= n; ++c) {
      const double hi = static_cast<double>(c) / n;
      const double lo = static_cast<double>(c - 1) / n;
      tab[c] = (std::pow(hi, power + 1) - std::pow(lo, power + 1)) / (power + 1);
    }
    return tab;
  };
  const auto& terms = J.terms();
  std::vector<std::vector<double>> iu(terms.size()), iv(terms.size());
  for (std::size_t t = 0; t < terms.size(); ++t) {
    iu[t] = cell_table(terms[t].pu);
    iv[t] = cell_table(terms[t].pv);
  }

  std::vector<std::uint8_t> present(n + 1, 0);
  double total = 0.0;
  for (std::size_t a = 1; a <= n; ++a) {
    present[perm[a - 1]] = 1;
    std::uint32_t cum = 0;
    for (std::size_t b = 1; b <= n; ++b) {
      cum += present[b];
      const double z = static_cast<double>(cum) / n;
      for (std::size_t t = 0; t < terms.size(); ++t) {
        double zp = 1.0;
        for (int e = 0; e < terms[t].pz; ++e) zp *= z;
        total += terms[t].coeff * iu[t][a] * iv[t][b] * zp;
      }
    }
  }
  return total;
}

KendallEstimate kendall_functional(const CopulaModel& model,
                                   const ScoreFunction& J, std::size_t points) {
  if (model.dimension() != 2)
    throw std::invalid_argument("kendall_functional: d must be 2");
  double sum = 0.0, sumsq = 0.0;
  Point p(2);
  for (std::size_t i = 0; i < points; ++i) {
    const double u = radical_inverse(i + 1, 2);
    const double w = radical_inverse(i + 1, 3);
    const double v = conditional_inverse(model, std::fmax(u, 1e-12), w);
    p[0] = u;
    p[1] = v;
    const double val = J(u, v, model.cdf(p));
    sum += val;
    sumsq += val * val;
  }
  const double mean = sum / points;
  const double var = std::fmax(0.0, sumsq / points - mean * mean);
  return {mean, std::sqrt(var / points)};
}

KendallEstimate kendall_functional(const Sample& s, const ScoreFunction& J) {
  if (s.dimension() != 2)
    throw std::invalid_argument("kendall_functional: d must be 2");
  const std::size_t n = s.size();
  const auto& r1 = s.ranks(0);
  const auto& r2 = s.ranks(1);
  std::vector<std::uint32_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[r1[i] - 1] = r2[i];

  // Fenwick tree over second ranks: C_n at the atom with first rank a is the
  // count of inserted rows with rank2 <= perm[a-1].
  std::vector<std::uint32_t> fen(n + 1, 0);
  auto add = [&](std::size_t pos) {
    for (; pos <= n; pos += pos & (~pos + 1)) ++fen[pos];
  };
  auto query = [&](std::size_t pos) {
    std::uint32_t c = 0;
    for (; pos > 0; pos -= pos & (~pos + 1)) c += fen[pos];
    return c;
  };
  double total = 0.0;
  for (std::size_t a = 1; a <= n; ++a) {
    add(perm[a - 1]);
    const double cn = static_cast<double>(query(perm[a - 1])) / n;
    total += J(static_cast<double>(a) / n,
               static_cast<double>(perm[a - 1]) / n, cn);
  }
  return {total / n, 0.0};
}

double delta_method_width(const ScoreFunction& J, const CopulaModel& model,
                          std::size_t /*n*/, int quad_nodes) {
  if (!J.bounded_derivative())
    throw std::invalid_argument(
        "delta_method_width: score has unbounded z-derivative");
  if (model.dimension() != 2)
    throw std::invalid_argument("delta_method_width: d must be 2");

  std::vector<double> x, w;
  gauss_legendre01(quad_nodes, x, w);
  const int m = quad_nodes;
  std::vector<double> jz(m * m), wt(m * m);
  std::vector<Point> pts(m * m, Point(2));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const int idx = i * m + j;
      pts[idx][0] = x[i];
      pts[idx][1] = x[j];
      jz[idx] = J.dz(x[i], x[j], model.cdf(pts[idx]));
      wt[idx] = w[i] * w[j];
    }
  }
  double var = 0.0;
  for (int a = 0; a < m * m; ++a) {
    var += wt[a] * wt[a] * jz[a] * jz[a] *
           kstar_covariance(model, pts[a], pts[a]);
    for (int b = a + 1; b < m * m; ++b) {
      var += 2.0 * wt[a] * wt[b] * jz[a] * jz[b] *
             kstar_covariance(model, pts[a], pts[b]);
    }
  }
  return std::sqrt(std::fmax(0.0, var));
}

double rank_statistic(const Sample& s, const RankScore& score) {
  const std::size_t n = s.size(), d = s.dimension();
  std::vector<double> u(d);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j)
      u[j] = static_cast<double>(s.ranks(j)[i]) / n;
    total += score.eval(u);
  }
  return total / n;
}

double lil_rho(const CopulaModel& model, const Grid& grid) {
  return std::sqrt(kstar_variance_sup(model, grid).first);
}

}  // namespace copulalab
