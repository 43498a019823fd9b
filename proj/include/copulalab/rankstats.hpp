#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "copulalab/copula.hpp"
#include "copulalab/grid.hpp"
#include "copulalab/sample.hpp"

namespace copulalab {

// Score J(u,v,z) as a polynomial coefficient table (no embedded scripting);
// the z-derivative and its sup bound follow analytically.
class ScoreFunction {
 public:
  enum class Kind { SpearmanJ, KendallJ, Custom };

  struct Term {
    int pu = 0, pv = 0, pz = 0;
    double coeff = 0.0;
  };

  static ScoreFunction spearman();  // 12 z - 3
  static ScoreFunction kendall();   // 4 z - 1
  static ScoreFunction custom(std::vector<Term> terms);
  // Declares an unbounded z-derivative; accepted with a warning flag, the
  // delta-method width refuses it.
  static ScoreFunction custom_unbounded(std::vector<Term> terms);

  Kind kind() const { return kind_; }
  double operator()(double u, double v, double z) const;
  double dz(double u, double v, double z) const;
  double z_derivative_bound() const { return z_bound_; }
  bool bounded_derivative() const;
  // True when J = a(u,v) + b z, enabling O(n) evaluation on empirical data.
  bool linear_in_z() const;
  const std::vector<Term>& terms() const { return terms_; }

 private:
  ScoreFunction(Kind kind, std::vector<Term> terms, double bound);
  Kind kind_;
  std::vector<Term> terms_;
  double z_bound_;
};

// Multivariate rank score on [0,1]^d.
struct RankScore {
  std::function<double(std::span<const double>)> eval;
  static RankScore constant_one();
  static RankScore product();
  static RankScore spearman_pair();  // 12 u v - 3, d = 2
};

// Integral of J(u,v,C(u,v)) du dv against Lebesgue measure, d = 2 only.
double spearman_functional(const CopulaModel& model, const ScoreFunction& J,
                           int quad_nodes = 64);
// Exact cell sum for the piecewise-constant empirical copula.
double spearman_functional(const Sample& s, const ScoreFunction& J);

struct KendallEstimate {
  double value = 0.0;
  double std_error = 0.0;  // 0 for exact empirical sums
};

// Integral of J(u,v,C(u,v)) dC(u,v): atom sum over the sample for the
// empirical measure, fixed-count QMC with reported standard error for a
// model.
KendallEstimate kendall_functional(const CopulaModel& model,
                                   const ScoreFunction& J,
                                   std::size_t points = 100000);
KendallEstimate kendall_functional(const Sample& s, const ScoreFunction& J);

// Asymptotic standard deviation of sqrt(n)(S(C_n) - S(C)): the double
// quadrature of dJ/dz against the corrected-field covariance. Independent of
// n; the argument is kept for symmetry with the simulation side.
double delta_method_width(const ScoreFunction& J, const CopulaModel& model,
                          std::size_t n = 0, int quad_nodes = 20);

// R_n = mean of score at rank/n coordinates.
double rank_statistic(const Sample& s, const RankScore& score);

// sqrt of the grid-refined supremum of the corrected-field variance.
double lil_rho(const CopulaModel& model, const Grid& grid);

}  // namespace copulalab
