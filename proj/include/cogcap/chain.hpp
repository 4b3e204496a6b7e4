#pragma once

#include <array>
#include <iosfwd>

#include <Eigen/Dense>

#include "cogcap/params.hpp"
#include "cogcap/specfun.hpp"

namespace cogcap {

inline constexpr int kStateCount = 10;

template <typename Scalar>
using StateMatrix = Eigen::Matrix<Scalar, kStateCount, kStateCount, Eigen::RowMajor>;
template <typename Scalar>
using StateVector = Eigen::Matrix<Scalar, kStateCount, 1>;

using TransitionMatrix = StateMatrix<double>;

enum class SensingOutcome { busy_busy, missed_detection, false_alarm, idle_idle, nack_slot };

std::string_view to_string(SensingOutcome outcome);

/// Meaning of one chain state. `number` is 1-based; arrays are 0-based.
struct StateSemantics {
  int number = 0;
  bool pu_active = false;
  SensingOutcome outcome = SensingOutcome::busy_busy;
  bool channel_on = false;
  PowerLevel power = PowerLevel::p1;
  bool full_slot = false;  // transmits for T rather than T - N
};

/// Fixed ten-state catalog. States 9 and 10 transmit at P0 under TPL and at
/// P1 under DPL.
const std::array<StateSemantics, kStateCount>& state_catalog(Scheme scheme);

/// SNR_1..SNR_5 and the matching ON thresholds alpha_l = (2^(r/B) - 1) / SNR_l.
struct LinkBudget {
  std::array<double, 5> snr{};
  std::array<double, 5> alpha{};
};

LinkBudget snr_and_alpha(const ValidatedParams& params, Scheme scheme);

/// Pr(z > alpha) for z exponential with mean fading_ss_mean.
double on_prob(double alpha, const ValidatedParams& params);

struct ChainModel {
  Scheme scheme = Scheme::tpl;
  TransitionMatrix transition = TransitionMatrix::Zero();
  std::array<StateSemantics, kStateCount> states{};
  LinkBudget link;
  std::array<double, 8> base_probs{};  // p_1 .. p_8
  std::array<double, 2> nack_entry{};  // (1-eps) Pr(NACK_1), (1-eps) Pr(NACK_2)
  StateVector<double> rate_bps = StateVector<double>::Zero();
  StateVector<double> duration_s = StateVector<double>::Zero();

  /// Bits delivered in one slot spent in each state (zero in OFF states).
  StateVector<double> service_bits() const;
};

ChainModel build_chain(const ValidatedParams& params, Scheme scheme, const SensingProbs& sensing);

struct SteadyState {
  StateVector<double> pi = StateVector<double>::Zero();
  /// pi renormalized over the PU-active states {1,2,3,4,9,10}; zero elsewhere.
  StateVector<double> beta = StateVector<double>::Zero();
  double pu_active_mass = 0.0;
  double residual = 0.0;
};

/// Throws StationaryError (see linalg.hpp) if the stationary vector is not
/// unique on the recurrent support.
SteadyState steady_state(const ChainModel& chain);

/// Share of PU transmissions facing each SU power level, from beta.
std::array<double, 3> power_level_shares(const ChainModel& chain, const SteadyState& steady);

/// 1 - sum_j Pr(outage | P_j) Pr(P_sec = P_j). Throws std::domain_error when
/// the PU is never active (pu_prior = 0).
double pu_success_rate(const ValidatedParams& params, const ChainModel& chain,
                       const SteadyState& steady);
double pu_success_rate(const ValidatedParams& params, Scheme scheme, const SensingProbs& sensing);

/// CSV dump of R, pi and beta with 17 significant digits.
void write_chain_csv(std::ostream& out, const ChainModel& chain, const SteadyState& steady);

}  // namespace cogcap
