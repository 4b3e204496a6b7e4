#pragma once

#include <array>
#include <vector>

#include "cogcap/chain.hpp"
#include "cogcap/linalg.hpp"
#include "cogcap/params.hpp"
#include "cogcap/specfun.hpp"

namespace cogcap {

/// Below this QoS exponent the effective capacity is taken as its limit, the
/// stationary mean service per slot.
inline constexpr double kSmallTheta = 1e-8;

/// Diagonal of Phi(-theta): exp(-theta * bits served in the state), so OFF
/// states are exactly 1.
StateVector<double> build_phi(const ValidatedParams& params, Scheme scheme, double theta);
StateVector<double> build_phi(const ChainModel& chain, double theta);

struct EcResult {
  double theta = 0.0;
  double spectral_radius = 1.0;
  double ec_bits_per_slot = 0.0;
  double ec_bits_per_sec = 0.0;
  std::array<double, 3> rates_used{};
};

/// Stationary mean of the per-slot service, sum_i pi_i * bits_i.
double mean_service_bits(const ChainModel& chain, const SteadyState& steady);

/// EC(theta) = -ln sp(Phi(-theta) R) / theta, at params.qos_exponent.
EcResult effective_capacity(const ValidatedParams& params, Scheme scheme,
                            const SensingProbs& sensing);
EcResult effective_capacity(const ValidatedParams& params, const ChainModel& chain, double theta);

struct RateRange {
  double min = 0.0;
  double max = 0.0;
  double step = 0.0;

  std::vector<double> points() const;
};

struct RateGrid {
  RateRange r0, r1, r2;
};

struct RateGridPoint {
  std::array<double, 3> rates{};
  double ec_bits_per_slot = 0.0;
};

struct RateOptimum {
  EcResult best;
  std::vector<RateGridPoint> surface;  // filled only when requested
};

/// Exhaustive search over the rate grid for the largest EC. Ties go to the
/// lexicographically smallest (r0, r1, r2). Grid points that violate the
/// parameter invariants are skipped; throws std::invalid_argument if no
/// point is admissible.
RateOptimum optimize_rates(const ValidatedParams& params, Scheme scheme,
                           const SensingProbs& sensing, const RateGrid& grid,
                           bool record_surface = false, ValidationOptions options = {});

}  // namespace cogcap
