#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "copulalab/copula.hpp"
#include "copulalab/empirical.hpp"
#include "copulalab/rng.hpp"

using namespace copulalab;

namespace {

std::vector<CopulaModel> all_test_models() {
  return {
      CopulaModel(CopulaFamily::Independence, 2),
      CopulaModel(CopulaFamily::Independence, 3),
      CopulaModel(CopulaFamily::Clayton, 2, {2.0}),
      CopulaModel(CopulaFamily::Clayton, 3, {0.8}),
      CopulaModel(CopulaFamily::Gumbel, 2, {1.7}),
      CopulaModel(CopulaFamily::Frank, 2, {4.0}),
      CopulaModel(CopulaFamily::Frank, 2, {-3.0}),
      CopulaModel(CopulaFamily::Frank, 3, {2.5}),
      CopulaModel(CopulaFamily::Gaussian, 2, {0.6}),
      CopulaModel(CopulaFamily::Gaussian, 2, {-0.4}),
      CopulaModel(CopulaFamily::Gaussian, 3, {0.5}),
      CopulaModel(CopulaFamily::Fgm, 2, {0.5}),
      CopulaModel(CopulaFamily::Fgm, 3, {-0.7}),
  };
}

Point random_point(Rng& rng, int d, double lo = 0.0, double hi = 1.0) {
  Point p(d);
  for (auto& x : p) x = lo + (hi - lo) * rng.uniform();
  return p;
}

double fd_partial(const CopulaModel& m, const Point& u, int axis, double h) {
  Point p = u;
  p[axis] = u[axis] + h;
  const double up = m.cdf(p);
  p[axis] = u[axis] - h;
  return (up - m.cdf(p)) / (2.0 * h);
}

}  // namespace

TEST_CASE("cdf worked examples") {
  const CopulaModel ind2(CopulaFamily::Independence, 2);
  CHECK(ind2.cdf({0.5, 0.5}) == 0.25);
  CHECK(ind2.cdf({0.0, 0.7}) == 0.0);

  const CopulaModel clay(CopulaFamily::Clayton, 2, {2.0});
  CHECK(clay.cdf({0.5, 0.5}) ==
        doctest::Approx(1.0 / std::sqrt(7.0)).epsilon(1e-12));
  CHECK(clay.cdf({0.0, 0.3}) == 0.0);

  const CopulaModel fgm(CopulaFamily::Fgm, 2, {0.5});
  CHECK(fgm.cdf({0.5, 0.5}) == doctest::Approx(0.28125).epsilon(1e-14));

  for (const auto& m : all_test_models()) {
    Point ones(m.dimension(), 1.0);
    CHECK(m.cdf(ones) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("construction rejects out-of-domain parameters") {
  CHECK_THROWS_AS(CopulaModel(CopulaFamily::Clayton, 2, {-1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(CopulaModel(CopulaFamily::Gumbel, 2, {0.5}),
                  std::invalid_argument);
  CHECK_THROWS_AS(CopulaModel(CopulaFamily::Frank, 2, {0.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(CopulaModel(CopulaFamily::Frank, 3, {-2.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(CopulaModel(CopulaFamily::Fgm, 2, {1.5}),
                  std::invalid_argument);
  CHECK_THROWS_AS(CopulaModel(CopulaFamily::Gaussian, 2, {1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(CopulaModel(CopulaFamily::Independence, 1, {}),
                  std::invalid_argument);
  CHECK_THROWS_AS(CopulaModel(CopulaFamily::Independence, 2, {0.3}),
                  std::invalid_argument);
}

TEST_CASE("cdf rejects bad points") {
  const CopulaModel m(CopulaFamily::Clayton, 2, {1.0});
  CHECK_THROWS_AS(m.cdf({0.5}), std::invalid_argument);
  CHECK_THROWS_AS(m.cdf({0.5, 1.5}), std::invalid_argument);
  CHECK_THROWS_AS(m.cdf({-0.1, 0.5}), std::invalid_argument);
}

TEST_CASE("uniform margins and Frechet-Hoeffding bounds") {
  Rng rng(101);
  for (const auto& m : all_test_models()) {
    const int d = m.dimension();
    for (int rep = 0; rep < 400; ++rep) {
      const Point u = random_point(rng, d);
      const double c = m.cdf(u);
      double lower = 0.0, upper = 1.0;
      double sum = 0.0;
      for (double x : u) {
        sum += x;
        upper = std::fmin(upper, x);
      }
      lower = std::fmax(0.0, sum - d + 1);
      CHECK(c >= lower - 1e-9);
      CHECK(c <= upper + 1e-9);
    }
    // uniform margins on each axis
    for (int j = 0; j < d; ++j) {
      for (double v : {0.1, 0.35, 0.8}) {
        Point u(d, 1.0);
        u[j] = v;
        CHECK(m.cdf(u) == doctest::Approx(v).epsilon(1e-8));
      }
    }
  }
}

TEST_CASE("cdf is coordinatewise nondecreasing") {
  Rng rng(55);
  for (const auto& m : all_test_models()) {
    const int d = m.dimension();
    for (int rep = 0; rep < 200; ++rep) {
      Point u = random_point(rng, d);
      Point v = u;
      for (int j = 0; j < d; ++j)
        v[j] = u[j] + (1.0 - u[j]) * rng.uniform();
      CHECK(m.cdf(v) >= m.cdf(u) - 1e-10);
    }
  }
}

TEST_CASE("two-increasing rectangle inequality for d = 2") {
  Rng rng(77);
  for (const auto& m : all_test_models()) {
    if (m.dimension() != 2) continue;
    for (int rep = 0; rep < 300; ++rep) {
      double u1 = rng.uniform(), u2 = rng.uniform();
      double v1 = rng.uniform(), v2 = rng.uniform();
      if (u1 > u2) std::swap(u1, u2);
      if (v1 > v2) std::swap(v1, v2);
      const double mass = m.cdf({u2, v2}) - m.cdf({u1, v2}) -
                          m.cdf({u2, v1}) + m.cdf({u1, v1});
      CHECK(mass >= -1e-12);
    }
  }
}

TEST_CASE("partial derivative worked examples") {
  const CopulaModel ind2(CopulaFamily::Independence, 2);
  CHECK(ind2.partial({0.3, 0.8}, 0) == doctest::Approx(0.8));
  const CopulaModel ind3(CopulaFamily::Independence, 3);
  CHECK(ind3.partial({0.5, 0.5, 0.5}, 1) == doctest::Approx(0.25));

  const CopulaModel clay(CopulaFamily::Clayton, 2, {2.0});
  CHECK(clay.partial({0.5, 0.5}, 0) ==
        doctest::Approx(fd_partial(clay, {0.5, 0.5}, 0, 1e-6)).epsilon(1e-6));
}

TEST_CASE("analytic partials agree with central differences") {
  Rng rng(303);
  for (const auto& m : all_test_models()) {
    const int d = m.dimension();
    for (int rep = 0; rep < 60; ++rep) {
      const Point u = random_point(rng, d, 0.05, 0.95);
      for (int j = 0; j < d; ++j) {
        const auto info = m.partial_detail(u, j);
        CHECK(info.value >= 0.0);
        CHECK(info.value <= 1.0);
        const double fd = fd_partial(m, u, j, 1e-5);
        CHECK(std::fabs(info.value - fd) <= 1e-5 + 2e-5 * std::fabs(fd));
      }
    }
  }
}

TEST_CASE("partial paths: analytic interior, differences on the boundary") {
  const CopulaModel clay(CopulaFamily::Clayton, 2, {2.0});
  CHECK(clay.partial_detail({0.4, 0.6}, 0).path == DerivativePath::Analytic);
  CHECK(clay.partial_detail({0.0, 0.6}, 0).path ==
        DerivativePath::OneSidedDifference);
  const CopulaModel g3(CopulaFamily::Gaussian, 3, {0.5});
  CHECK(g3.partial_detail({0.4, 0.6, 0.5}, 0).path ==
        DerivativePath::CentralDifference);
  CHECK_THROWS_AS(clay.partial_detail({0.4, 0.6}, 2), std::invalid_argument);
}

TEST_CASE("bivariate margin examples") {
  const CopulaModel ind3(CopulaFamily::Independence, 3);
  CHECK(ind3.bivariate_margin(0, 2, 0.4, 0.5) == doctest::Approx(0.2));
  const CopulaModel fgm(CopulaFamily::Fgm, 2, {0.5});
  CHECK(fgm.bivariate_margin(0, 1, 0.5, 0.5) == doctest::Approx(0.28125));
  for (const auto& m : all_test_models()) {
    if (m.dimension() < 2) continue;
    CHECK(m.bivariate_margin(0, 1, 1.0, 0.37) == doctest::Approx(0.37).epsilon(1e-8));
    CHECK_THROWS_AS(m.bivariate_margin(1, 1, 0.5, 0.5), std::invalid_argument);
  }
}

TEST_CASE("gaussian d=3 margin consistency with the bivariate algorithm") {
  const CopulaModel g3(CopulaFamily::Gaussian, 3, {0.5});
  const CopulaModel g2(CopulaFamily::Gaussian, 2, {0.5});
  for (auto [s, t] : std::vector<std::pair<double, double>>{
           {0.3, 0.7}, {0.5, 0.5}, {0.9, 0.2}}) {
    CHECK(g3.cdf({s, t, 1.0}) == doctest::Approx(g2.cdf({s, t})).epsilon(1e-8));
  }
}

TEST_CASE("sampler determinism and independence correlation") {
  const CopulaModel ind(CopulaFamily::Independence, 2);
  const Sample a = ind.sample(1000, 99);
  const Sample b = ind.sample(1000, 99);
  CHECK(a.data() == b.data());
  const Sample c = ind.sample(1000, 100);
  CHECK(a.data() != c.data());

  double mx = 0, my = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    mx += a(i, 0);
    my += a(i, 1);
  }
  mx /= a.size();
  my /= a.size();
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sxy += (a(i, 0) - mx) * (a(i, 1) - my);
    sxx += (a(i, 0) - mx) * (a(i, 0) - mx);
    syy += (a(i, 1) - my) * (a(i, 1) - my);
  }
  const double corr = sxy / std::sqrt(sxx * syy);
  CHECK(corr > -0.1);
  CHECK(corr < 0.1);
}

TEST_CASE("clayton sample Kendall tau matches theta/(theta+2)") {
  const CopulaModel clay(CopulaFamily::Clayton, 2, {2.0});
  const Sample s = clay.sample(20000, 12345);
  // Concordance count via the rank permutation and a merge-count of
  // discordant pairs (O(n log n) inversion count).
  const std::size_t n = s.size();
  const auto& r1 = s.ranks(0);
  const auto& r2 = s.ranks(1);
  std::vector<std::uint32_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[r1[i] - 1] = r2[i];
  std::vector<std::uint32_t> work = perm;
  std::function<std::uint64_t(std::vector<std::uint32_t>&)> inversions =
      [&](std::vector<std::uint32_t>& v) -> std::uint64_t {
    if (v.size() < 2) return 0;
    std::vector<std::uint32_t> left(v.begin(), v.begin() + v.size() / 2);
    std::vector<std::uint32_t> right(v.begin() + v.size() / 2, v.end());
    std::uint64_t cnt = inversions(left) + inversions(right);
    std::size_t i = 0, j = 0, k = 0;
    while (i < left.size() && j < right.size()) {
      if (left[i] <= right[j]) {
        v[k++] = left[i++];
      } else {
        cnt += left.size() - i;
        v[k++] = right[j++];
      }
    }
    while (i < left.size()) v[k++] = left[i++];
    while (j < right.size()) v[k++] = right[j++];
    return cnt;
  };
  const std::uint64_t discordant = inversions(work);
  const double pairs = 0.5 * n * (n - 1.0);
  const double tau = 1.0 - 2.0 * static_cast<double>(discordant) / pairs;
  CHECK(std::fabs(tau - 0.5) < 0.02);
}

TEST_CASE("sample margins are uniform (one-sample KS below 1% critical value)") {
  // Seeds fixed once; the 1% critical value for n = 10000 is 1.6276/sqrt(n).
  const double crit = 1.6276 / std::sqrt(10000.0);
  for (const auto& m : all_test_models()) {
    const Sample s = m.sample(10000, 2024);
    for (std::size_t j = 0; j < s.dimension(); ++j) {
      const auto& col = s.sorted_column(j);
      double d = 0.0;
      for (std::size_t i = 0; i < col.size(); ++i) {
        const double f = static_cast<double>(i + 1) / col.size();
        d = std::fmax(d, std::fabs(f - col[i]));
        d = std::fmax(d, std::fabs(static_cast<double>(i) / col.size() - col[i]));
      }
      INFO(m.name(), " column ", j);
      CHECK(d < crit);
    }
  }
}

TEST_CASE("samples match their copula on a coarse grid") {
  // sup |C_n - C| should be near the n^{-1/2} scale for every family.
  for (const auto& m : all_test_models()) {
    const std::size_t n = 8000;
    const Sample s = m.sample(n, 321);
    const Grid g = Grid::regular(m.dimension(), 9);
    const auto cn = empirical_copula_on_grid(s, g);
    double sup = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
      sup = std::fmax(sup, std::fabs(cn[i] - m.cdf(g.point(i))));
    INFO(m.name(), " d=", m.dimension(), " sup=", sup);
    CHECK(sup < 4.0 / std::sqrt(static_cast<double>(n)));
  }
}
