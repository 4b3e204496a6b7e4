#pragma once

#include <array>

#include "cogcap/params.hpp"

namespace cogcap {

/// Primary SNR threshold r_p = 2^(rate/B) - 1.
double pu_snr_threshold(const SystemParams& params);

/// Probability the primary packet survives Rayleigh fading when the SU
/// transmits at `level`:
///   exp(-d_pp r_p N0 / P) / (1 + d_pp P_j r_p / (P d_sp)).
double pu_success_prob(const ValidatedParams& params, PowerLevel level);

/// Outage, equivalently NACK, probability: 1 - pu_success_prob.
double pu_outage_prob(const ValidatedParams& params, PowerLevel level);

/// Probability that the SU overhears a NACK: (1 - eps) * outage.
double nack_access_prob(const ValidatedParams& params, PowerLevel level);

struct OutageTriple {
  std::array<double, 3> pr_nack{};  // indexed by SU power level
};

OutageTriple outage_triple(const ValidatedParams& params);

}  // namespace cogcap
