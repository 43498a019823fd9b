#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "copulalab/normal.hpp"
#include "copulalab/rng.hpp"

using namespace copulalab;

namespace {

// Composite-Simpson oracle for the correlation integral behind the
// bivariate normal CDF; slow but independent of the production path.
double bvn_simpson(double h, double k, double rho, int steps) {
  const double a = std::asin(rho);
  const double hk = h * k;
  const double hs = 0.5 * (h * h + k * k);
  auto f = [&](double theta) {
    const double st = std::sin(theta);
    return std::exp((st * hk - hs) / (1.0 - st * st));
  };
  double sum = f(0.0) + f(a);
  for (int i = 1; i < steps; ++i)
    sum += f(a * i / steps) * (i % 2 ? 4.0 : 2.0);
  return normal_cdf(h) * normal_cdf(k) +
         sum * (a / steps) / 3.0 / (2.0 * M_PI);
}

}  // namespace

TEST_CASE("normal quantile inverts the CDF") {
  for (double p : {1e-10, 1e-6, 0.001, 0.025, 0.2, 0.5, 0.8, 0.975, 0.999,
                   1.0 - 1e-9}) {
    CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
  }
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-13));
  CHECK(normal_quantile(0.5) == 0.0);
  CHECK(normal_quantile(0.841344746068543) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(normal_quantile(0.0), std::domain_error);
  CHECK_THROWS_AS(normal_quantile(1.0), std::domain_error);
}

TEST_CASE("bivariate normal CDF closed forms and oracle") {
  // At the origin: 1/4 + asin(rho)/(2 pi), exactly.
  for (double rho : {-0.999, -0.9, -0.5, -0.05, 0.05, 0.3, 0.8, 0.95, 0.999}) {
    const double expect = 0.25 + std::asin(rho) / (2.0 * M_PI);
    CHECK(bivariate_normal_cdf(0.0, 0.0, rho) ==
          doctest::Approx(expect).epsilon(1e-12));
  }
  // Margins: k -> +inf gives Phi(h).
  CHECK(bivariate_normal_cdf(0.7, 8.5, 0.6) ==
        doctest::Approx(normal_cdf(0.7)).epsilon(1e-10));
  // Independence factorizes.
  CHECK(bivariate_normal_cdf(0.3, -0.4, 0.0) ==
        doctest::Approx(normal_cdf(0.3) * normal_cdf(-0.4)));
  // Against the Simpson oracle at general arguments.
  for (double rho : {-0.95, -0.4, 0.2, 0.6, 0.9, 0.99}) {
    for (auto [h, k] : std::vector<std::pair<double, double>>{
             {0.5, -0.3}, {1.2, 1.4}, {-2.0, 0.7}, {0.0, 2.5}}) {
      CHECK(bivariate_normal_cdf(h, k, rho) ==
            doctest::Approx(bvn_simpson(h, k, rho, 400000)).epsilon(1e-9));
    }
  }
  CHECK_THROWS_AS(bivariate_normal_cdf(0.0, 0.0, 0.9999), std::domain_error);
}

TEST_CASE("rng streams are deterministic and distinct") {
  Rng a(42), b(42), c(43);
  std::vector<double> va, vb, vc;
  for (int i = 0; i < 32; ++i) {
    va.push_back(a.uniform());
    vb.push_back(b.uniform());
    vc.push_back(c.uniform());
  }
  CHECK(va == vb);
  CHECK(va != vc);
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
  CHECK(derive_seed(1, 2, 3) != derive_seed(2, 2, 3));
}

TEST_CASE("rng marginal moments") {
  Rng rng(7);
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0, se = 0, sg = 0;
  for (int i = 0; i < n; ++i) {
    su += rng.uniform();
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
    se += rng.exponential();
    sg += rng.gamma(2.5);
  }
  CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(std::fabs(sn / n) < 0.01);
  CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.02));
  CHECK(se / n == doctest::Approx(1.0).epsilon(0.02));
  CHECK(sg / n == doctest::Approx(2.5).epsilon(0.02));
}

TEST_CASE("positive stable frailty has the right Laplace transform") {
  // E exp(-t V) = exp(-t^alpha); spot-check two alphas and two t values.
  Rng rng(11);
  const int n = 400000;
  for (double alpha : {0.5, 0.8}) {
    double s1 = 0.0, s2 = 0.0;
    Rng local(derive_seed(11, static_cast<std::uint64_t>(alpha * 100)));
    for (int i = 0; i < n; ++i) {
      const double v = local.stable_positive(alpha);
      s1 += std::exp(-v);
      s2 += std::exp(-2.0 * v);
    }
    CHECK(s1 / n == doctest::Approx(std::exp(-1.0)).epsilon(0.01));
    CHECK(s2 / n ==
          doctest::Approx(std::exp(-std::pow(2.0, alpha))).epsilon(0.01));
  }
}

TEST_CASE("log-series generator matches its pmf") {
  const double p = 0.7;
  Rng rng(5);
  const int n = 300000;
  std::vector<int> counts(8, 0);
  for (int i = 0; i < n; ++i) {
    const auto k = rng.log_series(p);
    if (k < counts.size()) ++counts[k];
  }
  const double norm = -1.0 / std::log1p(-p);
  for (int k = 1; k <= 5; ++k) {
    const double pmf = norm * std::pow(p, k) / k;
    CHECK(static_cast<double>(counts[k]) / n ==
          doctest::Approx(pmf).epsilon(0.03));
  }
}
