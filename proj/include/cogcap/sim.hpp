#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>

#include "cogcap/chain.hpp"
#include "cogcap/params.hpp"
#include "cogcap/specfun.hpp"

namespace cogcap {

enum class SimMode { chain_sampling, protocol };
enum class SensingModel { bernoulli, symbol_level };

std::string_view to_string(SimMode mode);
std::string_view to_string(SensingModel model);

struct SimConfig {
  SimMode mode = SimMode::chain_sampling;
  std::uint64_t slots = 1'000'000;  // per trajectory
  std::uint64_t trajectories = 1;
  std::uint64_t seed = 0x5eed;
  SensingModel sensing_model = SensingModel::bernoulli;
};

/// Throws std::invalid_argument for zero slots or trajectories.
void check_config(const SimConfig& cfg);

/// Point estimate with a 95% normal-approximation half-width.
struct Estimate {
  double value = std::numeric_limits<double>::quiet_NaN();
  double half_width = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t samples = 0;
  /// False when fewer than 100 successes or failures back a proportion (the
  /// interval is then reported but too wide to trust) or nothing was sampled.
  bool reliable = false;

  bool defined() const { return samples > 0; }
};

Estimate proportion_estimate(std::uint64_t hits, std::uint64_t trials);

struct SimReport {
  SimMode mode = SimMode::chain_sampling;
  std::uint64_t slots_total = 0;
  std::array<std::uint64_t, kStateCount> state_counts{};
  StateVector<double> empirical_pi = StateVector<double>::Zero();
  double theta = 0.0;
  Estimate ec_bits_per_slot;
  Estimate mean_service_bits;
  Estimate success_per_transmission;
  Estimate success_per_packet;
  Estimate p_false_alarm;
  Estimate p_detection;
  std::uint64_t pu_transmissions = 0;
  std::uint64_t packets_completed = 0;
  std::uint64_t trajectory_hash = 0;  // FNV-1a over every visited state, in order
};

/// Runs the Markov chain R directly and reports state frequencies. Throws
/// std::logic_error if two NACK-slot states ever follow each other.
SimReport sample_chain(const ChainModel& chain, const SimConfig& cfg);

/// Chain sampling plus the MGF estimator of the effective capacity at
/// params.qos_exponent: -(1/(theta n)) ln mean_t exp(-theta S_t), computed
/// with log-sum-exp over trajectories.
SimReport estimate_ec(const ChainModel& chain, const ValidatedParams& params, const SimConfig& cfg);

/// Slot-level protocol simulation with true primary retransmissions, fading
/// draws and (optionally) symbol-level energy detection. `sensing` supplies
/// P_f/P_d for the Bernoulli sensing model and is ignored otherwise.
SimReport simulate_protocol(const ValidatedParams& params, Scheme scheme,
                            const SensingProbs& sensing, const SimConfig& cfg);

struct SensingEstimate {
  Estimate p_false_alarm;
  Estimate p_detection;
};

/// Draws NB complex Gaussian samples per trial under H0 and under H1 and
/// thresholds their mean energy.
SensingEstimate monte_carlo_sensing(const ValidatedParams& params, std::uint64_t trials,
                                    std::uint64_t seed);

/// Empirical primary outage frequency with exponential fading gains.
Estimate monte_carlo_outage(const ValidatedParams& params, PowerLevel level, std::uint64_t draws,
                            std::uint64_t seed);

/// One CSV row per estimate (name,value,half_width,samples,reliable).
void write_report_csv(std::ostream& out, const SimReport& report);
std::string report_summary(const SimReport& report);

}  // namespace cogcap
