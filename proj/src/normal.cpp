#include "copulalab/normal.hpp"

#include <cmath>
#include <stdexcept>

namespace copulalab {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779;
constexpr double kTwoPi = 6.2831853071795864769;

// 20-point Gauss-Legendre nodes/weights on [-1,1] (positive half; symmetric).
constexpr double kGl20X[10] = {
    0.0765265211334973, 0.2277858511416451, 0.3737060887154196,
    0.5108670019508271, 0.6360536807265150, 0.7463319064601508,
    0.8391169718222188, 0.9122344282513259, 0.9639719272779138,
    0.9931285991850949};
constexpr double kGl20W[10] = {
    0.1527533871307258, 0.1491729864726037, 0.1420961093183821,
    0.1316886384491766, 0.1181945319615184, 0.1019301198172404,
    0.0832767415767048, 0.0626720483341091, 0.0406014298003869,
    0.0176140071391521};

}  // namespace

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

double normal_quantile(double p) {
  if (!(p > 0.0) || !(p < 1.0))
    throw std::domain_error("normal_quantile: p must lie in (0,1)");
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2509.0809287301226727 * r + 33430.575583588128105) * r +
                 67265.770927008700853) *
                    r +
                45921.953931549871457) *
                   r +
               13731.693765509461125) *
                  r +
              1971.5909503065514427) *
                 r +
             133.14166789178437745) *
                r +
            3.387132872796366608) /
           (((((((5226.495278852545703 * r + 28729.085735721942674) * r +
                 39307.89580009271061) *
                    r +
                21213.794301586595867) *
                   r +
               5394.1960214247511077) *
                  r +
              687.1870074920579083) *
                 r +
             42.313330701600911252) *
                r +
            1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r +
                  0.24178072517745061177) *
                     r +
                 1.27045825245236838258) *
                    r +
                3.64784832476320460504) *
                   r +
               5.7694972214606914055) *
                  r +
              4.6303378461565452959) *
                 r +
             1.42343711074968357734) /
            (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r +
                  0.0151986665636164571966) *
                     r +
                 0.14810397642748007459) *
                    r +
                0.68976733498510000455) *
                   r +
               1.6763848301838038494) *
                  r +
              2.05319162663775882187) *
                 r +
             1.0);
  } else {
    r -= 5.0;
    value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  0.0012426609473880784386) *
                     r +
                 0.026532189526576123093) *
                    r +
                0.29656057182850489123) *
                   r +
               1.7848265399172913358) *
                  r +
              5.4637849111641143699) *
                 r +
             6.6579046435011037772) /
            (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r +
                  1.8463183175100546818e-5) *
                     r +
                 7.868691311456132591e-4) *
                    r +
                0.0148753612908506148525) *
                   r +
               0.13692988092273580531) *
                  r +
              0.59983220655588793769) *
                 r +
             1.0);
  }
  return q < 0.0 ? -value : value;
}

double bivariate_normal_cdf(double h, double k, double rho) {
  if (!(std::fabs(rho) <= 0.999))
    throw std::domain_error("bivariate_normal_cdf: |rho| must be <= 0.999");
  const double ph = normal_cdf(h);
  const double pk = normal_cdf(k);
  if (rho == 0.0) return ph * pk;

  // Plackett identity: dPhi2/drho is the bivariate density; substituting
  // rho = sin(theta) gives an analytic integrand on [0, asin(rho)].
  const double a = std::asin(rho);
  const double hk = h * k;
  const double hs = 0.5 * (h * h + k * k);

  const int panels = std::fabs(rho) > 0.8 ? 24 : 8;
  double sum = 0.0;
  double edge_prev = 0.0;
  for (int p = 0; p < panels; ++p) {
    // Quadratic clustering toward asin(rho), where the integrand steepens.
    const double frac = static_cast<double>(p + 1) / panels;
    const double edge = a * (1.0 - (1.0 - frac) * (1.0 - frac));
    const double mid = 0.5 * (edge + edge_prev);
    const double half = 0.5 * (edge - edge_prev);
    for (int i = 0; i < 10; ++i) {
      for (int sgn = -1; sgn <= 1; sgn += 2) {
        const double theta = mid + sgn * half * kGl20X[i];
        const double st = std::sin(theta);
        const double ct2 = 1.0 - st * st;
        sum += half * kGl20W[i] * std::exp((st * hk - hs) / ct2);
      }
    }
    edge_prev = edge;
  }

  double value = ph * pk + sum / kTwoPi;
  const double lower = std::fmax(0.0, ph + pk - 1.0);
  const double upper = std::fmin(ph, pk);
  return std::fmin(std::fmax(value, lower), upper);
}

}  // namespace copulalab
