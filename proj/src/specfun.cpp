#include "cogcap/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace cogcap {

namespace {

constexpr int kMaxIterations = 100000;
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = std::numeric_limits<double>::min() / kEps;

void check_domain(double a, double x) {
  if (!(a > 0.0) || !std::isfinite(a))
    throw std::domain_error("regularized gamma: shape must be positive, got " + std::to_string(a));
  if (!(x >= 0.0))
    throw std::domain_error("regularized gamma: argument must be nonnegative, got " +
                            std::to_string(x));
}

// lgamma(a) - [(a - 1/2) ln a - a + ln(2 pi)/2], Stirling tail for a >= 10.
double stirling_remainder(double a) {
  const double r = 1.0 / a;
  const double r2 = r * r;
  return r * (1.0 / 12 +
              r2 * (-1.0 / 360 +
                    r2 * (1.0 / 1260 +
                          r2 * (-1.0 / 1680 +
                                r2 * (1.0 / 1188 + r2 * (-691.0 / 360360 + r2 / 156))))));
}

// log of x^a e^-x / Gamma(a). For large shapes lgamma alone carries an
// absolute error of order a*eps, so the leading terms are cancelled
// analytically first.
double log_prefactor(double a, double x) {
  if (a < 10.0) return a * std::log(x) - x - std::lgamma(a);
  const double d = x - a;
  return a * std::log1p(d / a) - d + 0.5 * std::log(a) - 0.5 * std::log(2.0 * std::numbers::pi) -
         stirling_remainder(a);
}

// P(a, x) by the power series sum x^n / (a (a+1) ... (a+n)).
double lower_series(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int n = 0; n < kMaxIterations; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps)
      return sum * std::exp(log_prefactor(a, x));
  }
  throw std::runtime_error("regularized gamma: series failed to converge for a=" +
                           std::to_string(a) + ", x=" + std::to_string(x));
}

// Q(a, x) by the Legendre continued fraction, modified Lentz evaluation.
double upper_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps)
      return std::exp(log_prefactor(a, x)) * h;
  }
  throw std::runtime_error("regularized gamma: continued fraction failed to converge for a=" +
                           std::to_string(a) + ", x=" + std::to_string(x));
}

}  // namespace

double reg_lower_gamma(double a, double x) {
  check_domain(a, x);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return lower_series(a, x);
  return 1.0 - upper_fraction(a, x);
}

double reg_upper_gamma(double a, double x) {
  check_domain(a, x);
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - lower_series(a, x);
  return upper_fraction(a, x);
}

DetectorSamples detector_samples(const ValidatedParams& params) {
  const double nb = params->sensing_duration_s * params->bandwidth_hz;
  DetectorSamples out;
  out.count = std::max<std::int64_t>(1, std::llround(nb));
  out.rounded = std::abs(nb - static_cast<double>(out.count)) > 1e-9 * std::max(1.0, nb);
  return out;
}

SensingProbs sensing_probs(const ValidatedParams& params) {
  const auto nb = static_cast<double>(detector_samples(params).count);
  const double lambda = params->detector_threshold;
  const double h0_var = params->noise_psd;
  const double h1_var = params->noise_psd + params->pu_signal_var;
  return {reg_upper_gamma(nb, nb * lambda / h0_var), reg_upper_gamma(nb, nb * lambda / h1_var)};
}

SensingProbs perfect_sensing_override(const ValidatedParams&) { return {0.0, 1.0}; }

}  // namespace cogcap
