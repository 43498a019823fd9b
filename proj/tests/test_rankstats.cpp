#include <doctest.h>

#include <cmath>
#include <vector>

#include "copulalab/empirical.hpp"
#include "copulalab/fields.hpp"
#include "copulalab/rankstats.hpp"
#include "copulalab/rng.hpp"

using namespace copulalab;

namespace {

double classical_spearman(const Sample& s) {
  const std::size_t n = s.size();
  const auto& r1 = s.ranks(0);
  const auto& r2 = s.ranks(1);
  double sum_d2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(r1[i]) - static_cast<double>(r2[i]);
    sum_d2 += d * d;
  }
  return 1.0 - 6.0 * sum_d2 / (n * (static_cast<double>(n) * n - 1.0));
}

double classical_kendall(const Sample& s) {
  const std::size_t n = s.size();
  double concordant_minus_discordant = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double a = (s(i, 0) - s(j, 0)) * (s(i, 1) - s(j, 1));
      concordant_minus_discordant += a > 0 ? 1.0 : -1.0;
    }
  return concordant_minus_discordant / (0.5 * n * (n - 1.0));
}

}  // namespace

TEST_CASE("spearman functional on models") {
  const CopulaModel ind(CopulaFamily::Independence, 2);
  CHECK(spearman_functional(ind, ScoreFunction::spearman()) ==
        doctest::Approx(0.0).scale(1.0));
  for (double theta : {-1.0, -0.4, 0.5, 1.0}) {
    const CopulaModel fgm(CopulaFamily::Fgm, 2, {theta});
    CHECK(spearman_functional(fgm, ScoreFunction::spearman()) ==
          doctest::Approx(theta / 3.0).epsilon(1e-10).scale(1.0));
  }
  const CopulaModel ind3(CopulaFamily::Independence, 3);
  CHECK_THROWS_AS(spearman_functional(ind3, ScoreFunction::spearman()),
                  std::invalid_argument);
}

TEST_CASE("empirical spearman equals the classical estimator up to O(1/n)") {
  // hand sample, n = 5
  const Sample hand({0.1, 0.3, 0.4, 0.2, 0.5, 0.9, 0.7, 0.6, 0.9, 0.85}, 5, 2,
                    SampleKind::Raw);
  // Exact identity: S(C_n) = 12 sum R1 R2 / n^3 - 3, so the gap to the
  // classical estimator is 6/(n-1) - 12 sum R1 R2 / (n^3 (n^2-1)), below
  // 8/n in absolute value.
  const double plug = spearman_functional(hand, ScoreFunction::spearman());
  double sum_r1r2 = 0.0;
  for (std::size_t i = 0; i < 5; ++i)
    sum_r1r2 += static_cast<double>(hand.ranks(0)[i]) * hand.ranks(1)[i];
  CHECK(plug == doctest::Approx(12.0 * sum_r1r2 / 125.0 - 3.0).epsilon(1e-12));
  CHECK(std::fabs(plug - classical_spearman(hand)) <= 8.0 / 5.0);

  const CopulaModel fgm(CopulaFamily::Fgm, 2, {1.0});
  const Sample big = fgm.sample(2000, 4);
  CHECK(std::fabs(spearman_functional(big, ScoreFunction::spearman()) -
                  classical_spearman(big)) <= 8.0 / 2000.0);
}

TEST_CASE("fast linear-z path equals the generic cell sum") {
  const CopulaModel clay(CopulaFamily::Clayton, 2, {1.5});
  const Sample s = clay.sample(150, 14);
  // appending a zero-coefficient monomial in u forces the generic path
  const auto generic = ScoreFunction::custom(
      {{0, 0, 1, 12.0}, {0, 0, 0, -3.0}, {1, 0, 0, 0.0}});
  CHECK(spearman_functional(s, ScoreFunction::spearman()) ==
        doctest::Approx(spearman_functional(s, generic)).epsilon(1e-12));

  // pure monomial in (u, v): exact value 1/4 independent of the data
  const auto uv = ScoreFunction::custom({{1, 1, 0, 1.0}});
  CHECK(spearman_functional(s, uv) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("kendall functional on models") {
  const CopulaModel ind(CopulaFamily::Independence, 2);
  const auto e0 = kendall_functional(ind, ScoreFunction::kendall(), 40000);
  CHECK(std::fabs(e0.value) < 0.01);
  CHECK(e0.std_error > 0.0);
  CHECK(e0.std_error < 0.02);

  const CopulaModel clay(CopulaFamily::Clayton, 2, {2.0});
  const auto e1 = kendall_functional(clay, ScoreFunction::kendall(), 100000);
  CHECK(std::fabs(e1.value - 0.5) < 0.01);
}

TEST_CASE("empirical kendall: atom sum vs concordance oracle, invariance") {
  const Sample hand({0.12, 0.3, 0.45, 0.21, 0.5, 0.9, 0.71, 0.66, 0.9, 0.61,
                     0.05, 0.02, 0.33, 0.35, 0.6, 0.59},
                    8, 2, SampleKind::Raw);
  // Exact identity: T(C_n) = tau_hat + (3 - tau_hat)/n, hence within 4/n
  // of the concordance estimator.
  const double atom = kendall_functional(hand, ScoreFunction::kendall()).value;
  const double tau = classical_kendall(hand);
  CHECK(atom == doctest::Approx(tau + (3.0 - tau) / 8.0).epsilon(1e-12));
  CHECK(std::fabs(atom - tau) <= 4.0 / 8.0);

  // rank invariance under strictly increasing transforms: exact equality
  std::vector<double> cubed = hand.data();
  for (auto& v : cubed) v = v * v * v;
  const Sample hand3(cubed, 8, 2, SampleKind::Raw);
  CHECK(kendall_functional(hand3, ScoreFunction::kendall()).value == atom);

  const CopulaModel clay(CopulaFamily::Clayton, 2, {2.0});
  const Sample big = clay.sample(4000, 9);
  CHECK(std::fabs(kendall_functional(big, ScoreFunction::kendall()).value -
                  classical_kendall(big)) <= 4.0 / 4000.0);
}

TEST_CASE("delta-method width: exact value 1 for spearman under independence") {
  const CopulaModel ind(CopulaFamily::Independence, 2);
  const double width = delta_method_width(ScoreFunction::spearman(), ind, 1000, 24);
  CHECK(width == doctest::Approx(1.0).epsilon(0.01));
  // no n-dependence
  CHECK(delta_method_width(ScoreFunction::spearman(), ind, 10000, 24) == width);
  // degenerate score: dJ/dz = 0 gives width 0
  const auto flat = ScoreFunction::custom({{1, 1, 0, 2.0}});
  CHECK(delta_method_width(flat, ind, 1000, 12) == doctest::Approx(0.0).scale(1.0));
  // unbounded custom scores are refused
  const auto bad = ScoreFunction::custom_unbounded({{0, 0, 1, 1.0}});
  CHECK_FALSE(bad.bounded_derivative());
  CHECK_THROWS_AS(delta_method_width(bad, ind, 100), std::invalid_argument);
}

TEST_CASE("delta-method width matches simulation") {
  const CopulaModel ind(CopulaFamily::Independence, 2);
  const double width = delta_method_width(ScoreFunction::spearman(), ind, 0, 24);
  const std::size_t n = 2000, reps = 300;
  double sum = 0.0, sumsq = 0.0;
  for (std::size_t r = 0; r < reps; ++r) {
    const Sample s = ind.sample(n, derive_seed(515, 2, r));
    const double stat = std::sqrt(static_cast<double>(n)) *
                        spearman_functional(s, ScoreFunction::spearman());
    sum += stat;
    sumsq += stat * stat;
  }
  const double mc_sd =
      std::sqrt(sumsq / reps - (sum / reps) * (sum / reps));
  CHECK(std::fabs(mc_sd - width) < 0.15);
}

TEST_CASE("rank statistic basics") {
  const CopulaModel ind3(CopulaFamily::Independence, 3);
  const Sample s = ind3.sample(10000, 5);
  CHECK(rank_statistic(s, RankScore::constant_one()) == doctest::Approx(1.0));
  CHECK(rank_statistic(s, RankScore::product()) ==
        doctest::Approx(0.125).epsilon(0.08));

  const CopulaModel ind2(CopulaFamily::Independence, 2);
  const Sample t = ind2.sample(500, 6);
  CHECK(std::fabs(rank_statistic(t, RankScore::spearman_pair()) -
                  classical_spearman(t)) < 3.0 / 500.0 + 12.0 / 500.0);
}

TEST_CASE("lil rho: independence value, family audit, exchangeability") {
  const Grid g = Grid::regular(2, 21);
  const CopulaModel ind(CopulaFamily::Independence, 2);
  CHECK(lil_rho(ind, g) == doctest::Approx(0.25).epsilon(4e-4));

  for (const CopulaModel& m :
       {CopulaModel(CopulaFamily::Clayton, 2, {2.0}),
        CopulaModel(CopulaFamily::Gumbel, 2, {1.5}),
        CopulaModel(CopulaFamily::Frank, 2, {3.0}),
        CopulaModel(CopulaFamily::Fgm, 2, {0.5}),
        CopulaModel(CopulaFamily::Gaussian, 2, {0.4})}) {
    const double rho = lil_rho(m, g);
    INFO(m.name());
    CHECK(rho > 0.0);
    CHECK(rho <= 0.5 + 1e-9);
  }

  // exchangeable family: the variance field is symmetric, and refinement
  // from permuted starting grids lands on the same supremum
  const CopulaModel clay(CopulaFamily::Clayton, 2, {2.0});
  Rng rng(21);
  for (int rep = 0; rep < 50; ++rep) {
    const double a = rng.uniform(), b = rng.uniform();
    CHECK(kstar_covariance(clay, Point{a, b}, Point{a, b}) ==
          doctest::Approx(kstar_covariance(clay, Point{b, a}, Point{b, a}))
              .epsilon(1e-12)
              .scale(1.0));
  }
  const Grid ga({{0.2, 0.5, 0.8}, {0.3, 0.55, 0.7}}, true);
  const Grid gb({{0.3, 0.55, 0.7}, {0.2, 0.5, 0.8}}, true);
  CHECK(std::fabs(lil_rho(clay, ga) - lil_rho(clay, gb)) < 1e-9);
}
