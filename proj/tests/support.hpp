#pragma once

#include <algorithm>
#include <cmath>
#include <random>

#include "cogcap/params.hpp"

namespace cogcap::testing {

// Draws a parameter set satisfying every invariant. NB is kept small enough
// for symbol-level Monte Carlo to stay cheap.
inline SystemParams random_params(std::mt19937_64& gen) {
  auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); };
  SystemParams p;
  p.bandwidth_hz = u(2e3, 5e4);
  p.frame_duration_s = u(0.005, 0.02);
  const double samples = std::floor(u(10, 300));
  p.sensing_duration_s = std::min(samples / p.bandwidth_hz, 0.6 * p.frame_duration_s);
  p.pu_prior = u(0.05, 0.95);
  p.noise_psd = u(0.5, 2.0);
  p.pu_signal_var = u(0.0, 2.0);
  p.detector_threshold = p.noise_psd * u(0.8, 1.2) + p.pu_signal_var * u(0.0, 0.5);
  const double p1 = u(0.05, 1.0);
  p.su_power_psd = {p1 * u(0.0, 0.95), p1, p1 * u(1.1, 4.0)};
  p.pu_power_psd = u(20, 200);
  const double r1 = u(200, 3000);
  p.su_rates_bps = {r1 * u(0.3, 1.0), r1, r1 * u(1.0, 3.0)};
  p.pu_rate_bps = p.bandwidth_hz * u(0.3, 1.5);
  p.fading_pp = u(0.05, 1.0);
  p.fading_sp = u(0.05, 1.0);
  p.fading_ss_mean = u(0.5, 2.0);
  p.qos_exponent = u(1e-3, 0.05);
  p.feedback_miss_prob = u(0.0, 1.0);
  return p;
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace cogcap::testing
