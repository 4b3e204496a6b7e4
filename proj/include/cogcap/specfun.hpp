#pragma once

#include <cstdint>

#include "cogcap/params.hpp"

namespace cogcap {

/// Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a),
/// shape first. Series for x < a + 1, continued fraction otherwise.
/// Throws std::domain_error for a <= 0 or x < 0 and std::runtime_error if
/// the expansion fails to converge.
double reg_lower_gamma(double a, double x);

/// Q(a, x) = 1 - P(a, x), evaluated without cancellation in the upper tail.
double reg_upper_gamma(double a, double x);

struct SensingProbs {
  double p_false_alarm = 0.0;
  double p_detection = 1.0;
};

struct DetectorSamples {
  std::int64_t count = 0;  // NB, complex samples in the sensing window
  bool rounded = false;    // N*B was not an integer
};

/// Number of detector samples round(N*B); at least 1.
DetectorSamples detector_samples(const ValidatedParams& params);

/// Energy detector with Y = mean |y|^2 over NB samples:
///   P_f = Q(NB, NB*lambda/sigma_n^2), P_d = Q(NB, NB*lambda/(sigma_n^2 + sigma_sp^2)).
SensingProbs sensing_probs(const ValidatedParams& params);

/// Ideal detector: P_f = 0, P_d = 1.
SensingProbs perfect_sensing_override(const ValidatedParams& params);

}  // namespace cogcap
