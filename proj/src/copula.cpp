#include "copulalab/copula.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include "copulalab/normal.hpp"
#include "copulalab/rng.hpp"

namespace copulalab {

namespace {

constexpr double kFrankThetaMax = 35.0;

void check_point(std::span<const double> u, int d) {
  if (static_cast<int>(u.size()) != d)
    throw std::invalid_argument("point dimension does not match the model");
  for (double x : u)
    if (!(x >= 0.0 && x <= 1.0))
      throw std::invalid_argument("point coordinates must lie in [0,1]");
}

// One-factor representation of the exchangeable Gaussian copula, rho >= 0:
// X_j = sqrt(rho) Z0 + sqrt(1-rho) e_j. Conditioning on Z0 factorizes the
// orthant probability into a smooth one-dimensional integral.
double gaussian_exchangeable_cdf(const std::vector<double>& x, double rho) {
  if (rho == 0.0) {
    double p = 1.0;
    for (double xi : x) p *= normal_cdf(xi);
    return p;
  }
  const double sr = std::sqrt(rho);
  const double sc = std::sqrt(1.0 - rho);
  // 32 panels x 20-node Gauss-Legendre on z in [-9, 9].
  static const double gx[10] = {
      0.0765265211334973, 0.2277858511416451, 0.3737060887154196,
      0.5108670019508271, 0.6360536807265150, 0.7463319064601508,
      0.8391169718222188, 0.9122344282513259, 0.9639719272779138,
      0.9931285991850949};
  static const double gw[10] = {
      0.1527533871307258, 0.1491729864726037, 0.1420961093183821,
      0.1316886384491766, 0.1181945319615184, 0.1019301198172404,
      0.0832767415767048, 0.0626720483341091, 0.0406014298003869,
      0.0176140071391521};
  const int panels = 32;
  const double lo = -9.0, hi = 9.0;
  const double panel_w = (hi - lo) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = lo + (p + 0.5) * panel_w;
    const double half = 0.5 * panel_w;
    for (int i = 0; i < 10; ++i) {
      for (int sgn = -1; sgn <= 1; sgn += 2) {
        const double z = mid + sgn * half * gx[i];
        double prod = normal_pdf(z);
        for (double xi : x) prod *= normal_cdf((xi - sr * z) / sc);
        total += half * gw[i] * prod;
      }
    }
  }
  return std::fmin(1.0, std::fmax(0.0, total));
}

}  // namespace

CopulaModel::CopulaModel(CopulaFamily family, int dimension,
                         std::vector<double> params)
    : family_(family), d_(dimension), params_(std::move(params)) {
  if (d_ < 2) throw std::invalid_argument("copula dimension must be >= 2");
  const double th = params_.empty() ? 0.0 : params_[0];
  switch (family_) {
    case CopulaFamily::Independence:
      if (!params_.empty())
        throw std::invalid_argument("independence copula takes no parameters");
      break;
    case CopulaFamily::Clayton:
      if (params_.size() != 1 || !(th > 0.0))
        throw std::invalid_argument("clayton requires theta > 0");
      break;
    case CopulaFamily::Gumbel:
      if (params_.size() != 1 || !(th >= 1.0))
        throw std::invalid_argument("gumbel requires theta >= 1");
      break;
    case CopulaFamily::Frank:
      if (params_.size() != 1 || th == 0.0 || !(std::fabs(th) <= kFrankThetaMax))
        throw std::invalid_argument(
            "frank requires theta != 0 with |theta| <= 35");
      if (d_ > 2 && !(th > 0.0))
        throw std::invalid_argument("frank requires theta > 0 when d > 2");
      break;
    case CopulaFamily::Gaussian:
      if (params_.size() != 1)
        throw std::invalid_argument("gaussian requires a correlation rho");
      if (d_ == 2) {
        if (!(std::fabs(th) <= 0.999))
          throw std::invalid_argument("gaussian d=2 requires |rho| <= 0.999");
      } else {
        // Exchangeable correlation only; the one-factor evaluation needs
        // rho >= 0.
        if (!(th >= 0.0 && th <= 0.95))
          throw std::invalid_argument(
              "gaussian d>2 requires exchangeable rho in [0, 0.95]");
      }
      break;
    case CopulaFamily::Fgm:
      if (params_.size() != 1 || !(th >= -1.0 && th <= 1.0))
        throw std::invalid_argument("fgm requires theta in [-1, 1]");
      break;
  }
}

CopulaModel CopulaModel::from_name(const std::string& family, int dimension,
                                   const std::vector<double>& params) {
  std::string f;
  for (char c : family) f.push_back(static_cast<char>(std::tolower(c)));
  if (f == "independence" || f == "indep")
    return CopulaModel(CopulaFamily::Independence, dimension, params);
  if (f == "clayton") return CopulaModel(CopulaFamily::Clayton, dimension, params);
  if (f == "gumbel") return CopulaModel(CopulaFamily::Gumbel, dimension, params);
  if (f == "frank") return CopulaModel(CopulaFamily::Frank, dimension, params);
  if (f == "gaussian" || f == "normal")
    return CopulaModel(CopulaFamily::Gaussian, dimension, params);
  if (f == "fgm") return CopulaModel(CopulaFamily::Fgm, dimension, params);
  throw std::invalid_argument("unknown copula family: " + family);
}

std::string CopulaModel::name() const {
  switch (family_) {
    case CopulaFamily::Independence: return "independence";
    case CopulaFamily::Clayton: return "clayton";
    case CopulaFamily::Gumbel: return "gumbel";
    case CopulaFamily::Frank: return "frank";
    case CopulaFamily::Gaussian: return "gaussian";
    case CopulaFamily::Fgm: return "fgm";
  }
  return "?";
}

bool CopulaModel::corner_derivative_blowup() const {
  switch (family_) {
    case CopulaFamily::Clayton:
    case CopulaFamily::Gumbel:
      return true;
    case CopulaFamily::Gaussian:
      return theta() != 0.0;
    default:
      return false;
  }
}

double CopulaModel::cdf(std::span<const double> u) const {
  check_point(u, d_);
  return cdf_unchecked(u);
}

double CopulaModel::cdf_unchecked(std::span<const double> u) const {
  for (double x : u)
    if (x <= 0.0) return 0.0;
  const double th = theta();
  switch (family_) {
    case CopulaFamily::Independence: {
      double p = 1.0;
      for (double x : u) p *= x;
      return p;
    }
    case CopulaFamily::Clayton: {
      double s = 1.0;
      for (double x : u) s += std::pow(x, -th) - 1.0;
      return std::pow(s, -1.0 / th);
    }
    case CopulaFamily::Gumbel: {
      double s = 0.0;
      for (double x : u) s += std::pow(-std::log(x), th);
      if (s == 0.0) return 1.0;  // all coordinates at 1
      return std::exp(-std::pow(s, 1.0 / th));
    }
    case CopulaFamily::Frank: {
      double prod = 1.0;
      for (double x : u) prod *= std::expm1(-th * x);
      const double denom = std::pow(std::expm1(-th), d_ - 1);
      return -std::log1p(prod / denom) / th;
    }
    case CopulaFamily::Gaussian: {
      // Coordinates at 1 drop out: the margins of the Gaussian copula are
      // Gaussian with the same exchangeable correlation.
      std::vector<double> x;
      x.reserve(u.size());
      for (double v : u)
        if (v < 1.0) x.push_back(normal_quantile(v));
      if (x.empty()) return 1.0;
      if (x.size() == 1) return normal_cdf(x[0]);
      if (x.size() == 2) {
        return std::fmax(0.0, bivariate_normal_cdf(x[0], x[1], th));
      }
      return gaussian_exchangeable_cdf(x, th);
    }
    case CopulaFamily::Fgm: {
      double p = 1.0, q = 1.0;
      for (double x : u) {
        p *= x;
        q *= 1.0 - x;
      }
      return p * (1.0 + th * q);
    }
  }
  return 0.0;
}

bool CopulaModel::has_analytic_partial() const {
  return !(family_ == CopulaFamily::Gaussian && d_ > 2);
}

double CopulaModel::analytic_partial(std::span<const double> u,
                                     int axis) const {
  const double th = theta();
  const std::size_t j = static_cast<std::size_t>(axis);
  switch (family_) {
    case CopulaFamily::Independence: {
      double p = 1.0;
      for (std::size_t i = 0; i < u.size(); ++i)
        if (i != j) p *= u[i];
      return p;
    }
    case CopulaFamily::Clayton: {
      double s = 1.0;
      for (double x : u) s += std::pow(x, -th) - 1.0;
      return std::pow(s, -1.0 / th - 1.0) * std::pow(u[j], -th - 1.0);
    }
    case CopulaFamily::Gumbel: {
      double s = 0.0;
      for (double x : u) s += std::pow(-std::log(x), th);
      if (s == 0.0) return 1.0;
      const double c = std::exp(-std::pow(s, 1.0 / th));
      return c * std::pow(s, 1.0 / th - 1.0) *
             std::pow(-std::log(u[j]), th - 1.0) / u[j];
    }
    case CopulaFamily::Frank: {
      double prod_others = 1.0;
      for (std::size_t i = 0; i < u.size(); ++i)
        if (i != j) prod_others *= std::expm1(-th * u[i]);
      const double denom = std::pow(std::expm1(-th), d_ - 1);
      const double full = prod_others * std::expm1(-th * u[j]);
      return std::exp(-th * u[j]) * prod_others / (denom + full);
    }
    case CopulaFamily::Gaussian: {
      // d = 2: conditional normal CDF.
      const double xj = normal_quantile(u[j]);
      const double xo = normal_quantile(u[1 - j]);
      return normal_cdf((xo - th * xj) / std::sqrt(1.0 - th * th));
    }
    case CopulaFamily::Fgm: {
      double p = 1.0, q = 1.0;
      for (std::size_t i = 0; i < u.size(); ++i) {
        if (i != j) p *= u[i];
        q *= 1.0 - u[i];
      }
      double q_others = 1.0;
      for (std::size_t i = 0; i < u.size(); ++i)
        if (i != j) q_others *= 1.0 - u[i];
      return p * (1.0 + th * q - th * u[j] * q_others);
    }
  }
  return 0.0;
}

PartialInfo CopulaModel::partial_detail(std::span<const double> u,
                                        int axis) const {
  check_point(u, d_);
  if (axis < 0 || axis >= d_)
    throw std::invalid_argument("partial: axis out of range");

  bool interior = true;
  for (double x : u)
    if (x <= 0.0 || x >= 1.0) interior = false;

  PartialInfo info;
  if (interior && has_analytic_partial()) {
    info.value = analytic_partial(u, axis);
    info.path = DerivativePath::Analytic;
  } else {
    // Finite differences on the coordinate clamped to [h, 1-h]; one-sided
    // when the point touches the boundary.
    const double h = kFdStep;
    Point p(u.begin(), u.end());
    const double uj = std::clamp(u[axis], h, 1.0 - h);
    p[axis] = uj + h;
    const double up = cdf_unchecked(p);
    p[axis] = uj - h;
    const double dn = cdf_unchecked(p);
    info.value = (up - dn) / (2.0 * h);
    info.path = interior ? DerivativePath::CentralDifference
                         : DerivativePath::OneSidedDifference;
  }
  info.value = std::clamp(info.value, 0.0, 1.0);
  return info;
}

double CopulaModel::partial(std::span<const double> u, int axis) const {
  return partial_detail(u, axis).value;
}

double CopulaModel::bivariate_margin(int i, int j, double s, double t) const {
  if (i == j) throw std::invalid_argument("bivariate_margin: axes must differ");
  if (i < 0 || i >= d_ || j < 0 || j >= d_)
    throw std::invalid_argument("bivariate_margin: axis out of range");
  Point p(static_cast<std::size_t>(d_), 1.0);
  p[i] = s;
  p[j] = t;
  return cdf(p);
}

void CopulaModel::sample_row(Rng& rng, std::span<double> out) const {
  const double th = theta();
  const std::size_t d = static_cast<std::size_t>(d_);
  switch (family_) {
    case CopulaFamily::Independence: {
      for (auto& x : out) x = rng.uniform();
      return;
    }
    case CopulaFamily::Clayton: {
      // Gamma(1/theta) frailty.
      const double v = rng.gamma(1.0 / th);
      for (auto& x : out) x = std::pow(1.0 + rng.exponential() / v, -1.0 / th);
      return;
    }
    case CopulaFamily::Gumbel: {
      if (th == 1.0) {
        for (auto& x : out) x = rng.uniform();
        return;
      }
      // Positive stable frailty with alpha = 1/theta.
      const double alpha = 1.0 / th;
      const double v = rng.stable_positive(alpha);
      for (auto& x : out)
        x = std::exp(-std::pow(rng.exponential() / v, alpha));
      return;
    }
    case CopulaFamily::Frank: {
      if (d == 2) {
        // Conditional inversion, valid for either sign of theta.
        const double u = rng.uniform();
        const double p = rng.uniform();
        const double g =
            p * std::expm1(-th) / ((1.0 - p) * std::exp(-th * u) + p);
        out[0] = u;
        out[1] = -std::log1p(g) / th;
        return;
      }
      // Logarithmic-series frailty, theta > 0.
      const double v = static_cast<double>(rng.log_series(-std::expm1(-th)));
      for (auto& x : out) {
        const double psi_arg = std::exp(-rng.exponential() / v);
        x = -std::log1p(std::expm1(-th) * psi_arg) / th;
        x = std::clamp(x, 0.0, 1.0);
      }
      return;
    }
    case CopulaFamily::Gaussian: {
      const double rho = th;
      std::vector<double> z(d);
      for (auto& zi : z) zi = rng.normal();
      if (rho != 0.0) {
        if (d == 2) {
          const double z1 = z[1];
          z[1] = rho * z[0] + std::sqrt(1.0 - rho * rho) * z1;
        } else {
          // Exchangeable one-factor construction.
          const double z0 = rng.normal();
          for (auto& zi : z)
            zi = std::sqrt(rho) * z0 + std::sqrt(1.0 - rho) * zi;
        }
      }
      for (std::size_t i = 0; i < d; ++i) out[i] = normal_cdf(z[i]);
      return;
    }
    case CopulaFamily::Fgm: {
      // All but the last coordinate are independent uniforms; the last is
      // inverted from its conditional CDF t + b t (1 - t).
      double b = th;
      for (std::size_t i = 0; i + 1 < d; ++i) {
        out[i] = rng.uniform();
        b *= 1.0 - 2.0 * out[i];
      }
      const double p = rng.uniform();
      const double disc = (1.0 + b) * (1.0 + b) - 4.0 * b * p;
      out[d - 1] = 2.0 * p / (1.0 + b + std::sqrt(disc));
      return;
    }
  }
}

Sample CopulaModel::sample(std::size_t n, std::uint64_t seed) const {
  if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
  const std::size_t d = static_cast<std::size_t>(d_);
  std::vector<double> data(n * d);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i)
    sample_row(rng, {data.data() + i * d, d});
  return Sample(std::move(data), n, d, SampleKind::PseudoUniform);
}

}  // namespace copulalab
