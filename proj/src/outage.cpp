#include "cogcap/outage.hpp"

#include <cmath>

namespace cogcap {

double pu_snr_threshold(const SystemParams& params) {
  return std::exp2(params.pu_rate_bps / params.bandwidth_hz) - 1.0;
}

double pu_success_prob(const ValidatedParams& params, PowerLevel level) {
  const auto& p = params.get();
  const double rp = pu_snr_threshold(p);
  const double interference_free = std::exp(-p.fading_pp * rp * p.noise_psd / p.pu_power_psd);
  const double su = p.su_power(level);
  return interference_free / (1.0 + p.fading_pp * su * rp / (p.pu_power_psd * p.fading_sp));
}

double pu_outage_prob(const ValidatedParams& params, PowerLevel level) {
  const auto& p = params.get();
  const double rp = pu_snr_threshold(p);
  // 1 - e^{-u}/(1+v) = (-expm1(-u) + v) / (1 + v), exact for tiny outages
  const double u = p.fading_pp * rp * p.noise_psd / p.pu_power_psd;
  const double v = p.fading_pp * p.su_power(level) * rp / (p.pu_power_psd * p.fading_sp);
  return (-std::expm1(-u) + v) / (1.0 + v);
}

double nack_access_prob(const ValidatedParams& params, PowerLevel level) {
  return (1.0 - params->feedback_miss_prob) * pu_outage_prob(params, level);
}

OutageTriple outage_triple(const ValidatedParams& params) {
  return {{pu_outage_prob(params, PowerLevel::p0), pu_outage_prob(params, PowerLevel::p1),
           pu_outage_prob(params, PowerLevel::p2)}};
}

}  // namespace cogcap
