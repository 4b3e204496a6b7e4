#include "cogcap/ec.hpp"

#include <cmath>
#include <stdexcept>

namespace cogcap {

StateVector<double> build_phi(const ChainModel& chain, double theta) {
  if (!(theta >= 0.0)) throw std::domain_error("build_phi: theta must be nonnegative");
  const StateVector<double> bits = chain.service_bits();
  StateVector<double> phi;
  for (int i = 0; i < kStateCount; ++i) phi(i) = bits(i) == 0.0 ? 1.0 : std::exp(-theta * bits(i));
  return phi;
}

StateVector<double> build_phi(const ValidatedParams& params, Scheme scheme, double theta) {
  // Phi does not depend on sensing, any probabilities will do.
  return build_phi(build_chain(params, scheme, perfect_sensing_override(params)), theta);
}

double mean_service_bits(const ChainModel& chain, const SteadyState& steady) {
  return steady.pi.dot(chain.service_bits());
}

EcResult effective_capacity(const ValidatedParams& params, const ChainModel& chain, double theta) {
  if (!(theta >= 0.0)) throw std::domain_error("effective_capacity: theta must be nonnegative");
  EcResult out;
  out.theta = theta;
  out.rates_used = params->su_rates_bps;
  if (theta <= kSmallTheta) {
    out.spectral_radius = 1.0;
    out.ec_bits_per_slot = mean_service_bits(chain, steady_state(chain));
  } else {
    const TransitionMatrix weighted = build_phi(chain, theta).asDiagonal() * chain.transition;
    out.spectral_radius = spectral_radius(weighted);
    out.ec_bits_per_slot = -std::log(out.spectral_radius) / theta;
  }
  out.ec_bits_per_sec = out.ec_bits_per_slot / params->frame_duration_s;
  return out;
}

EcResult effective_capacity(const ValidatedParams& params, Scheme scheme,
                            const SensingProbs& sensing) {
  return effective_capacity(params, build_chain(params, scheme, sensing), params->qos_exponent);
}

std::vector<double> RateRange::points() const {
  if (!(step > 0.0) || !(max >= min) || !std::isfinite(min) || !std::isfinite(max))
    throw std::invalid_argument("rate range needs min <= max and step > 0");
  std::vector<double> out;
  const auto count = static_cast<long>(std::floor((max - min) / step + 1e-9)) + 1;
  out.reserve(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) out.push_back(min + static_cast<double>(i) * step);
  return out;
}

RateOptimum optimize_rates(const ValidatedParams& params, Scheme scheme,
                           const SensingProbs& sensing, const RateGrid& grid, bool record_surface,
                           ValidationOptions options) {
  const auto r0s = grid.r0.points();
  const auto r1s = grid.r1.points();
  const auto r2s = grid.r2.points();

  RateOptimum best;
  bool found = false;
  for (double r0 : r0s) {
    for (double r1 : r1s) {
      for (double r2 : r2s) {
        SystemParams trial = params.get();
        trial.su_rates_bps = {r0, r1, r2};
        EcResult ec;
        try {
          ec = effective_capacity(validate(trial, options), scheme, sensing);
        } catch (const ParamError&) {
          continue;
        }
        if (record_surface) best.surface.push_back({trial.su_rates_bps, ec.ec_bits_per_slot});
        // strict comparison keeps the earliest, lexicographically smallest point on ties
        if (!found || ec.ec_bits_per_slot > best.best.ec_bits_per_slot) {
          best.best = ec;
          found = true;
        }
      }
    }
  }
  if (!found) throw std::invalid_argument("optimize_rates: rate grid has no admissible point");
  return best;
}

}  // namespace cogcap
