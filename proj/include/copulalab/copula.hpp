#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "copulalab/sample.hpp"

namespace copulalab {

using Point = std::vector<double>;

enum class CopulaFamily { Independence, Clayton, Gumbel, Frank, Gaussian, Fgm };

enum class DerivativePath { Analytic, CentralDifference, OneSidedDifference };

struct PartialInfo {
  double value = 0.0;
  DerivativePath path = DerivativePath::Analytic;
};

// A parametric copula: exact CDF, first partials, bivariate margins and an
// i.i.d. sampler. Immutable after construction; parameters are validated
// here so evaluation is total.
class CopulaModel {
 public:
  CopulaModel(CopulaFamily family, int dimension,
              std::vector<double> params = {});

  static CopulaModel from_name(const std::string& family, int dimension,
                               const std::vector<double>& params);

  CopulaFamily family() const { return family_; }
  int dimension() const { return d_; }
  const std::vector<double>& params() const { return params_; }
  double theta() const { return params_.empty() ? 0.0 : params_[0]; }
  std::string name() const;

  // True when second partials blow up at cube corners, violating the
  // smoothness hypothesis of the limit theory; reported in study output.
  bool corner_derivative_blowup() const;

  double cdf(std::span<const double> u) const;
  double cdf(const Point& u) const { return cdf(std::span<const double>(u)); }

  double partial(std::span<const double> u, int axis) const;
  double partial(const Point& u, int axis) const {
    return partial(std::span<const double>(u), axis);
  }
  PartialInfo partial_detail(std::span<const double> u, int axis) const;
  PartialInfo partial_detail(const Point& u, int axis) const {
    return partial_detail(std::span<const double>(u), axis);
  }

  // C evaluated at the point with coordinate i = s, j = t, all others 1.
  double bivariate_margin(int i, int j, double s, double t) const;

  Sample sample(std::size_t n, std::uint64_t seed) const;

  // Fills one pseudo-uniform row; used by the sampler and by samplers that
  // grow an existing sample.
  void sample_row(class Rng& rng, std::span<double> out) const;

  static constexpr double kFdStep = 1e-5;

 private:
  double cdf_unchecked(std::span<const double> u) const;
  double analytic_partial(std::span<const double> u, int axis) const;
  bool has_analytic_partial() const;

  CopulaFamily family_;
  int d_;
  std::vector<double> params_;
};

}  // namespace copulalab
