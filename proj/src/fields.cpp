#include "copulalab/fields.hpp"

#include <Eigen/Cholesky>
#include <limits>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "copulalab/parallel.hpp"
#include "copulalab/rng.hpp"

namespace copulalab {

double bridge_covariance(const CopulaModel& model, std::span<const double> u,
                         std::span<const double> v) {
  const std::size_t d = u.size();
  std::vector<double> meet(d);
  for (std::size_t j = 0; j < d; ++j) meet[j] = std::fmin(u[j], v[j]);
  return model.cdf(meet) - model.cdf(u) * model.cdf(v);
}

Eigen::MatrixXd assemble_covariance_serial(
    const CopulaModel& model, const Grid& grid,
    const std::vector<std::size_t>& active) {
  const Eigen::Index m = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd sigma(m, m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const auto pu = grid.point(active[r]);
    for (Eigen::Index c = r; c < m; ++c) {
      const double cov = bridge_covariance(model, pu, grid.point(active[c]));
      sigma(r, c) = cov;
      sigma(c, r) = cov;
    }
  }
  return sigma;
}

Eigen::MatrixXd assemble_covariance(const CopulaModel& model, const Grid& grid,
                                    const std::vector<std::size_t>& active) {
  const Eigen::Index m = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd sigma(m, m);
  parallel_for(active.size(), [&](std::size_t r) {
    const auto pu = grid.point(active[r]);
    for (std::size_t c = r; c < active.size(); ++c) {
      const double cov = bridge_covariance(model, pu, grid.point(active[c]));
      sigma(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = cov;
      sigma(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r)) = cov;
    }
  });
  return sigma;
}

CovarianceFactor build_factor(const CopulaModel& model, const Grid& grid) {
  if (model.dimension() != grid.dimension())
    throw std::invalid_argument("build_factor: dimension mismatch");

  CovarianceFactor out{grid, {}, {}, {}, 0.0};
  constexpr double kDegenerateTol = 1e-14;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto pt = grid.point(i);
    if (bridge_covariance(model, pt, pt) > kDegenerateTol)
      out.active.push_back(i);
    else
      out.degenerate.push_back(i);
  }
  if (out.active.empty()) {
    out.factor.resize(0, 0);
    return out;
  }

  Eigen::MatrixXd sigma = assemble_covariance(model, grid, out.active);
  const Eigen::Index m = sigma.rows();
  for (double jitter : {0.0, 1e-12, 1e-10, 1e-8}) {
    Eigen::MatrixXd trial = sigma;
    if (jitter > 0.0) trial.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(trial);
    if (llt.info() == Eigen::Success) {
      out.factor = llt.matrixL();
      out.jitter_used = jitter;
      return out;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
  const double min_eig = es.eigenvalues().minCoeff();
  throw NumericalError(
      "build_factor: covariance not factorizable at max jitter 1e-8; most "
      "negative eigenvalue estimate " +
      std::to_string(min_eig) + " over " + std::to_string(m) + " points");
}

namespace {

std::vector<double> draw_active_field(const CovarianceFactor& f, Rng& rng) {
  const Eigen::Index m = f.factor.rows();
  Eigen::VectorXd z(m);
  for (Eigen::Index i = 0; i < m; ++i) z(i) = rng.normal();
  Eigen::VectorXd y = f.factor * z;
  std::vector<double> values(f.grid.size(), 0.0);
  for (std::size_t i = 0; i < f.active.size(); ++i)
    values[f.active[i]] = y(static_cast<Eigen::Index>(i));
  return values;
}

}  // namespace

FieldSample sample_bridge(const CovarianceFactor& factor, std::uint64_t seed) {
  Rng rng(seed);
  return FieldSample{draw_active_field(factor, rng), 1, FieldTag::BridgeBC,
                     seed};
}

std::vector<FieldSample> sample_kiefer(const CovarianceFactor& factor,
                                       int t_max, std::uint64_t seed) {
  if (t_max < 1) throw std::invalid_argument("sample_kiefer: t_max must be >= 1");
  std::vector<FieldSample> out;
  out.reserve(static_cast<std::size_t>(t_max) + 1);
  out.push_back(FieldSample{std::vector<double>(factor.grid.size(), 0.0), 0,
                            FieldTag::KieferKC, seed});
  std::vector<double> running(factor.grid.size(), 0.0);
  for (int k = 1; k <= t_max; ++k) {
    // Independent bridge increments give the min(z,t) time covariance at
    // integer times.
    Rng rng(derive_seed(seed, 0x4b49, static_cast<std::uint64_t>(k)));
    const auto inc = draw_active_field(factor, rng);
    for (std::size_t i = 0; i < running.size(); ++i) running[i] += inc[i];
    out.push_back(FieldSample{running, k, FieldTag::KieferKC, seed});
  }
  return out;
}

KStarTransform::KStarTransform(const CopulaModel& model, const Grid& grid)
    : d_(grid.dimension()), npts_(grid.size()) {
  partials_.resize(npts_ * d_);
  margin_idx_.resize(npts_ * d_);
  // Fail on missing margin points up front rather than interpolating.
  std::vector<std::vector<std::size_t>> axis_lookup(d_);
  for (int j = 0; j < d_; ++j) {
    const auto& ax = grid.axes()[j];
    axis_lookup[j].resize(ax.size());
    for (std::size_t a = 0; a < ax.size(); ++a)
      axis_lookup[j][a] = grid.margin_point_index(j, a);
  }
  constexpr std::size_t kPinned = std::numeric_limits<std::size_t>::max();
  for (std::size_t i = 0; i < npts_; ++i) {
    const auto pt = grid.point(i);
    for (int j = 0; j < d_; ++j) {
      partials_[i * d_ + j] = model.partial(pt, j);
      // The margin bridge vanishes identically at 0 and 1, so those
      // coordinates need no lookup.
      if (pt[j] == 0.0 || pt[j] == 1.0) {
        margin_idx_[i * d_ + j] = kPinned;
        continue;
      }
      const auto& ax = grid.axes()[j];
      const auto it = std::lower_bound(ax.begin(), ax.end(), pt[j]);
      if (it == ax.end() || *it != pt[j])
        throw std::invalid_argument(
            "KStarTransform: grid point coordinate missing from its axis");
      margin_idx_[i * d_ + j] =
          axis_lookup[j][static_cast<std::size_t>(it - ax.begin())];
    }
  }
}

void KStarTransform::apply(std::span<const double> field,
                           std::span<double> out) const {
  constexpr std::size_t kPinned = std::numeric_limits<std::size_t>::max();
  for (std::size_t i = 0; i < npts_; ++i) {
    double v = field[i];
    for (int j = 0; j < d_; ++j) {
      const std::size_t idx = margin_idx_[i * d_ + j];
      if (idx != kPinned) v -= field[idx] * partials_[i * d_ + j];
    }
    out[i] = v;
  }
}

FieldSample sample_kstar(const CovarianceFactor& factor,
                         const KStarTransform& transform, int time,
                         std::uint64_t seed) {
  if (time < 1) throw std::invalid_argument("sample_kstar: time must be >= 1");
  std::vector<double> k_field(factor.grid.size(), 0.0);
  for (int step = 1; step <= time; ++step) {
    Rng rng(derive_seed(seed, 0x4b49, static_cast<std::uint64_t>(step)));
    const auto inc = draw_active_field(factor, rng);
    for (std::size_t i = 0; i < k_field.size(); ++i) k_field[i] += inc[i];
  }
  FieldSample out{std::vector<double>(factor.grid.size(), 0.0), time,
                  FieldTag::KStar, seed};
  transform.apply(k_field, out.values);
  return out;
}

FieldSample sample_kstar(const CopulaModel& model, const Grid& grid, int time,
                         std::uint64_t seed) {
  const CovarianceFactor factor = build_factor(model, grid);
  const KStarTransform transform(model, grid);
  return sample_kstar(factor, transform, time, seed);
}

double kstar_covariance(const CopulaModel& model, std::span<const double> u,
                        std::span<const double> v) {
  const int d = model.dimension();
  if (static_cast<int>(u.size()) != d || static_cast<int>(v.size()) != d)
    throw std::invalid_argument("kstar_covariance: dimension mismatch");

  const double cu = model.cdf(u);
  const double cv = model.cdf(v);
  double cov = bridge_covariance(model, u, v);

  std::vector<double> du(d), dv(d);
  for (int j = 0; j < d; ++j) {
    du[j] = model.partial(u, j);
    dv[j] = model.partial(v, j);
  }

  // Cross terms between the field and each margin bridge: the joint point
  // u ^ (1,..,v_j,..,1) replaces coordinate j of u by min(u_j, v_j).
  std::vector<double> tmp(u.begin(), u.end());
  for (int j = 0; j < d; ++j) {
    const double saved = tmp[j];
    tmp[j] = std::fmin(u[j], v[j]);
    cov -= dv[j] * (model.cdf(tmp) - cu * v[j]);
    tmp[j] = saved;
  }
  tmp.assign(v.begin(), v.end());
  for (int i = 0; i < d; ++i) {
    const double saved = tmp[i];
    tmp[i] = std::fmin(u[i], v[i]);
    cov -= du[i] * (model.cdf(tmp) - cv * u[i]);
    tmp[i] = saved;
  }

  // Margin-bridge cross covariances: standard one-dimensional bridges on the
  // diagonal, bivariate margins off it.
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      double mb;
      if (i == j)
        mb = std::fmin(u[i], v[i]) - u[i] * v[i];
      else
        mb = model.bivariate_margin(i, j, u[i], v[j]) - u[i] * v[j];
      cov += du[i] * dv[j] * mb;
    }
  }
  return cov;
}

std::pair<double, Point> kstar_variance_sup(const CopulaModel& model,
                                            const Grid& grid) {
  if (model.dimension() != grid.dimension())
    throw std::invalid_argument("kstar_variance_sup: dimension mismatch");
  const int d = model.dimension();

  double best = -1.0;
  Point best_pt(d, 0.5);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto pt = grid.point(i);
    const double var = kstar_covariance(model, pt, pt);
    if (var > best) {
      best = var;
      best_pt.assign(pt.begin(), pt.end());
    }
  }

  // Coordinatewise step-halving refinement; the variance is smooth in the
  // interior for the families in scope.
  double step = 0.0;
  for (int j = 0; j < d; ++j) {
    const auto& ax = grid.axes()[j];
    for (std::size_t a = 1; a < ax.size(); ++a)
      step = std::fmax(step, ax[a] - ax[a - 1]);
  }
  if (step <= 0.0) step = 0.25;
  Point trial = best_pt;
  while (step > 1e-6) {
    bool improved = false;
    for (int j = 0; j < d; ++j) {
      for (double dir : {-1.0, 1.0}) {
        trial = best_pt;
        trial[j] = std::clamp(best_pt[j] + dir * step, 0.0, 1.0);
        const double var = kstar_covariance(model, trial, trial);
        if (var > best) {
          best = var;
          best_pt = trial;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return {best, best_pt};
}

}  // namespace copulalab
