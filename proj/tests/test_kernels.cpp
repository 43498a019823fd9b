#include <doctest.h>

#include <cmath>
#include <vector>

#include "copulalab/empirical.hpp"
#include "copulalab/kernels.hpp"
#include "copulalab/rng.hpp"

using namespace copulalab;

TEST_CASE("kernel point values and compact support") {
  const Kernel epa = Kernel::epanechnikov();
  CHECK(epa.eval1d(0.0) == doctest::Approx(0.75));
  CHECK(epa.eval1d(1.5) == 0.0);
  CHECK(epa.eval(std::vector<double>{2.0, 0.0}) == 0.0);

  const Kernel qua = Kernel::quartic();
  const double q05 = 15.0 / 16.0 * 0.5625;
  CHECK(qua.eval1d(0.5) == doctest::Approx(q05));
  CHECK(qua.eval(std::vector<double>{0.5, 0.5}) == doctest::Approx(q05 * q05));

  const Kernel g = Kernel::gaussian_truncated();
  CHECK(g.eval1d(3.5) == 0.0);
  CHECK(g.eval1d(0.0) > 0.39);  // renormalized standard normal density
}

TEST_CASE("kernel exact integrals match quadrature") {
  Rng rng(3);
  for (const Kernel& k :
       {Kernel::epanechnikov(), Kernel::quartic(),
        Kernel::higher_order_polynomial(4), Kernel::gaussian_truncated()}) {
    for (int rep = 0; rep < 20; ++rep) {
      double a = -k.support_radius() + 2 * k.support_radius() * rng.uniform();
      double b = -k.support_radius() + 2 * k.support_radius() * rng.uniform();
      if (a > b) std::swap(a, b);
      // midpoint-rule oracle
      double sum = 0.0;
      const int steps = 20000;
      for (int i = 0; i < steps; ++i)
        sum += k.eval1d(a + (b - a) * (i + 0.5) / steps) * (b - a) / steps;
      CHECK(k.integral1d(a, b) == doctest::Approx(sum).epsilon(1e-6).scale(1.0));
    }
    CHECK(k.integral1d(-k.support_radius(), k.support_radius()) ==
          doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("verify_order: builtin kernels pass, negative control fails") {
  for (int d : {1, 2}) {
    CHECK(verify_order(Kernel::epanechnikov(), d).pass);
    CHECK(verify_order(Kernel::quartic(), d).pass);
    const auto rep4 = verify_order(Kernel::higher_order_polynomial(4), d);
    CHECK(rep4.pass);
    CHECK(rep4.max_residual < 1e-8);
  }
  const auto bad = verify_order(Kernel::quartic().rescaled(1.05), 2);
  CHECK_FALSE(bad.pass);
  CHECK(bad.summary().find("FAIL") != std::string::npos);

  // order-4 kernel: degree-2 moment vanishes, so it cannot be order-2-only
  const Kernel k4 = Kernel::higher_order_polynomial(4);
  double m2 = 0.0;
  for (int i = 0; i < 200000; ++i) {
    const double x = -1.0 + 2.0 * (i + 0.5) / 200000;
    m2 += x * x * k4.eval1d(x) * (2.0 / 200000);
  }
  CHECK(std::fabs(m2) < 1e-9);
  CHECK(k4.eval1d(0.0) == doctest::Approx(105.0 / 64.0));
}

TEST_CASE("higher-order kernels take negative values; order-2 do not") {
  CHECK(Kernel::higher_order_polynomial(4).eval1d(0.8) < 0.0);
  CHECK_FALSE(Kernel::higher_order_polynomial(4).nonnegative());
  CHECK(Kernel::epanechnikov().nonnegative());
  for (double x = -1.0; x <= 1.0; x += 0.01)
    CHECK(Kernel::quartic().eval1d(x) >= 0.0);
}

TEST_CASE("bandwidth flags and the default rule") {
  const double h = Bandwidth::default_h(2000, 2, 2);
  CHECK(h == doctest::Approx(std::pow(2000.0, -0.5) / std::log(2000.0)));
  const Bandwidth bw{h, 2000, 2, 2};
  CHECK(bw.flags().admissible());
  const Bandwidth fixed{0.5, 2000, 2, 2};
  CHECK_FALSE(fixed.flags().root_n_bias_small);
  CHECK_FALSE(fixed.flags().admissible());
  CHECK(bw.axis_scale() == doctest::Approx(std::sqrt(h)));
}

TEST_CASE("kernel mass: one in the interior, deficit at corners") {
  const Kernel k = Kernel::quartic();
  const Bandwidth bw{0.01, 500, 2, 2};
  CHECK(kernel_mass(k, bw, std::vector<double>{0.5, 0.5}) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(kernel_mass(k, bw, std::vector<double>{1.0, 1.0}) ==
        doctest::Approx(0.25).epsilon(1e-12));
  CHECK(kernel_mass(k, bw, std::vector<double>{1.0, 0.5}) ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("smoothing a constant function returns the kernel mass") {
  const Kernel k = Kernel::quartic();
  const Bandwidth bw{0.02, 1000, 2, 2};
  auto one = [](std::span<const double>) { return 1.0; };
  CHECK(smoothed_function(one, k, bw, std::vector<double>{0.5, 0.5}) ==
        doctest::Approx(1.0).epsilon(1e-10));
  CHECK(smoothed_function(one, k, bw, std::vector<double>{1.0, 1.0}) ==
        doctest::Approx(0.25).epsilon(1e-10));
}

TEST_CASE("quadrature path equals the exact-cell path at small n") {
  const CopulaModel ind(CopulaFamily::Independence, 2);
  const Sample s = ind.sample(120, 8);
  const Kernel k = Kernel::quartic();
  const Bandwidth bw{0.02, 120, 2, 2};
  Rng rng(12);
  for (int rep = 0; rep < 40; ++rep) {
    const Point u{rng.uniform(), rng.uniform()};
    const double exact = smoothed_copula_exact_cells(s, k, bw, u);
    // quadrature noise on a step function scales like the 1/n step height
    const double quad = smoothed_copula_quadrature(s, k, bw, u, 64);
    CHECK(std::fabs(quad - exact) < 1.5e-3);
  }
}

TEST_CASE("approximate identity: smoothed value approaches the step function") {
  const CopulaModel ind(CopulaFamily::Independence, 2);
  const Kernel k = Kernel::quartic();

  // h -> 0 at a continuity point (mid-cell, window inside one cell)
  // recovers C_n within 1e-3
  const Sample s30 = ind.sample(30, 21);
  const Point u{15.5 / 30.0, 19.5 / 30.0};
  const Bandwidth tiny{1e-4, 30, 2, 2};
  CHECK(smoothed_copula(s30, k, tiny, u) ==
        doctest::Approx(empirical_copula(s30, u)).epsilon(1e-3));

  const Sample s = ind.sample(60, 21);

  // interior sup decreases monotonically along a shrinking h sequence
  const Grid g({{0.3, 0.4, 0.5, 0.6, 0.7}, {0.3, 0.4, 0.5, 0.6, 0.7}}, false);
  double prev = 1e9;
  for (double h : {0.04, 0.01, 0.0025, 0.000625}) {
    const Bandwidth bw{h, 60, 2, 2};
    double sup = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto pt = g.point(i);
      sup = std::fmax(sup, std::fabs(smoothed_copula(s, k, bw, pt) -
                                     empirical_copula(s, pt)));
    }
    CHECK(sup <= prev + 1e-6);
    prev = sup;
  }
}

TEST_CASE("interior smoothing deviation obeys the Lipschitz window bound") {
  const CopulaModel ind(CopulaFamily::Independence, 2);
  const std::size_t n = 500;
  const Sample s = ind.sample(n, 99);
  const Kernel k = Kernel::quartic();
  const double h = 1.0 / std::sqrt(static_cast<double>(n));
  const Bandwidth bw{h, n, 2, 2};
  const double b = bw.axis_scale();
  const Grid g = Grid::regular(2, 21);
  double sup = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto pt = g.point(i);
    bool interior = true;
    for (double x : pt) interior = interior && x >= b && x <= 1.0 - b;
    if (!interior) continue;
    sup = std::fmax(sup, std::fabs(smoothed_copula(s, k, bw, pt) -
                                   empirical_copula(s, pt)));
  }
  CHECK(sup < 2.0 * std::sqrt(h));
}

TEST_CASE("smoothed copula stays in [0, 1] for nonnegative kernels") {
  const CopulaModel clay(CopulaFamily::Clayton, 2, {1.5});
  const Sample s = clay.sample(200, 4);
  const Kernel k = Kernel::epanechnikov();
  const Bandwidth bw{0.05, 200, 2, 2};
  Rng rng(6);
  for (int rep = 0; rep < 100; ++rep) {
    const Point u{rng.uniform(), rng.uniform()};
    const double v = smoothed_copula(s, k, bw, u);
    CHECK(v >= -1e-8);
    CHECK(v <= 1.0 + 1e-8);
  }
}

TEST_CASE("smoothed copula is monotone below the upper boundary band") {
  const CopulaModel ind(CopulaFamily::Independence, 2);
  const Sample s = ind.sample(150, 10);
  const Kernel k = Kernel::quartic();
  const Bandwidth bw{0.04, 150, 2, 2};
  const double cap = 1.0 - bw.axis_scale();
  Rng rng(14);
  for (int rep = 0; rep < 100; ++rep) {
    Point u{cap * rng.uniform(), cap * rng.uniform()};
    Point v{u[0] + (cap - u[0]) * rng.uniform(),
            u[1] + (cap - u[1]) * rng.uniform()};
    CHECK(smoothed_copula(s, k, bw, v) >=
          smoothed_copula(s, k, bw, u) - 1e-10);
  }
}

TEST_CASE("smoothed process tags and the corner boundary-loss artifact") {
  const CopulaModel ind(CopulaFamily::Independence, 2);
  const Sample s = ind.sample(400, 3);
  const Kernel k = Kernel::quartic();
  const Bandwidth bw{Bandwidth::default_h(400, 2, 2), 400, 2, 2};
  const Grid g = Grid::regular(2, 5);
  const auto ev = smoothed_process(s, k, bw, ind, g);
  CHECK(ev.tag == ProcessTag::SmoothedAn);
  // at (1,1) the smoothed estimator loses kernel mass: strictly negative
  CHECK(ev.values.back() < 0.0);
  CHECK(ev.values.back() >=
        -std::sqrt(400.0));  // bounded below by -sqrt(n) (C_hat >= 0)
}

TEST_CASE("bias term: plugging C for C_n scales as sqrt(n) h^{s/d}") {
  const CopulaModel fgm(CopulaFamily::Fgm, 2, {1.0});
  const Kernel k = Kernel::quartic();  // s = 2, d = 2
  const std::size_t n = 1000;
  const Grid g = Grid::regular(2, 11);

  auto bias_sup = [&](double h) {
    const Bandwidth bw{h, n, 2, 2};
    const auto refs = precompute_smoothing_refs(k, bw, fgm, g);
    const auto mask = interior_window_mask(g, bw.axis_scale(), 1.0);
    double sup = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!mask[i]) continue;
      sup = std::fmax(sup, std::sqrt(static_cast<double>(n)) *
                               std::fabs(refs.smoothed_c[i] -
                                         refs.mass[i] * refs.c[i]));
    }
    return sup;
  };
  const double b1 = bias_sup(0.02);
  const double b2 = bias_sup(0.01);  // h halved: ratio 2^{s/d} = 2
  CHECK(b1 / b2 == doctest::Approx(2.0).epsilon(0.1));

  // the ratio sup / h^{s/d} stays bounded as h -> 0
  double prev_ratio = -1.0;
  for (double h : {0.02, 0.01, 0.005}) {
    const double ratio = bias_sup(h) / h;  // h^{s/d} = h for s=2, d=2
    if (prev_ratio > 0.0) CHECK(ratio < 1.5 * prev_ratio);
    prev_ratio = ratio;
  }
}

TEST_CASE("decomposition: interior support kills the mass terms") {
  const CopulaModel ind(CopulaFamily::Independence, 2);
  const Sample s = ind.sample(300, 5);
  const Kernel k = Kernel::quartic();
  const Bandwidth bw{0.01, 300, 2, 2};
  const Grid g({{0.3, 0.5, 0.7}, {0.3, 0.5, 0.7}}, false);
  const auto dec = decompose_smoothing_error(s, k, bw, ind, g);
  CHECK(dec.mass_term == doctest::Approx(0.0).scale(1.0));
  CHECK(dec.c_mass_term == doctest::Approx(0.0).scale(1.0));
  CHECK(dec.modulus_term > 0.0);
}

TEST_CASE("higher-order construction rejects odd orders") {
  CHECK_THROWS_AS(Kernel::higher_order_polynomial(3), std::invalid_argument);
  CHECK_THROWS_AS(Kernel::higher_order_polynomial(0), std::invalid_argument);
  CHECK_NOTHROW(Kernel::higher_order_polynomial(6));
  CHECK(verify_order(Kernel::higher_order_polynomial(6), 1).pass);
}
