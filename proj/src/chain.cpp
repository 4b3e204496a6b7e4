#include "cogcap/chain.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "cogcap/linalg.hpp"
#include "cogcap/outage.hpp"

namespace cogcap {

namespace {

using enum SensingOutcome;

constexpr std::array<StateSemantics, kStateCount> make_catalog(PowerLevel nack_power) {
  return {{
      {1, true, busy_busy, true, PowerLevel::p1, false},
      {2, true, busy_busy, false, PowerLevel::p1, false},
      {3, true, missed_detection, true, PowerLevel::p2, false},
      {4, true, missed_detection, false, PowerLevel::p2, false},
      {5, false, false_alarm, true, PowerLevel::p1, false},
      {6, false, false_alarm, false, PowerLevel::p1, false},
      {7, false, idle_idle, true, PowerLevel::p2, false},
      {8, false, idle_idle, false, PowerLevel::p2, false},
      {9, true, nack_slot, true, nack_power, true},
      {10, true, nack_slot, false, nack_power, true},
  }};
}

constexpr auto kTplCatalog = make_catalog(PowerLevel::p0);
constexpr auto kDplCatalog = make_catalog(PowerLevel::p1);

double off_prob(double alpha, const ValidatedParams& params) {
  return -std::expm1(-alpha / params->fading_ss_mean);
}

}  // namespace

std::string_view to_string(SensingOutcome outcome) {
  switch (outcome) {
    case busy_busy: return "B-B";
    case missed_detection: return "MD";
    case false_alarm: return "FA";
    case idle_idle: return "I-I";
    case nack_slot: return "NACK";
  }
  return "?";
}

const std::array<StateSemantics, kStateCount>& state_catalog(Scheme scheme) {
  return scheme == Scheme::tpl ? kTplCatalog : kDplCatalog;
}

LinkBudget snr_and_alpha(const ValidatedParams& params, Scheme scheme) {
  const auto& p = params.get();
  const double interfered = p.noise_psd + p.pu_signal_var;
  const double clean = p.noise_psd;
  const double r0 = p.su_rate(PowerLevel::p0);
  const double r1 = p.su_rate(PowerLevel::p1);
  const double r2 = p.su_rate(PowerLevel::p2);

  LinkBudget lb;
  lb.snr = {p.su_power(PowerLevel::p1) / interfered, p.su_power(PowerLevel::p2) / interfered,
            p.su_power(PowerLevel::p1) / clean, p.su_power(PowerLevel::p2) / clean,
            p.su_power(PowerLevel::p0) / interfered};
  std::array<double, 5> rates = {r1, r2, r1, r2, r0};
  if (scheme == Scheme::dpl) {
    lb.snr[4] = lb.snr[0];
    rates[4] = r1;
  }
  for (std::size_t l = 0; l < 5; ++l) {
    const double needed = std::expm1(rates[l] / p.bandwidth_hz * std::numbers::ln2);
    // needed > 0 always; SNR 0 gives an infinite threshold (never ON)
    lb.alpha[l] = needed == 0.0 ? 0.0 : needed / lb.snr[l];
  }
  return lb;
}

double on_prob(double alpha, const ValidatedParams& params) {
  if (alpha < 0.0) throw std::domain_error("on_prob: threshold must be nonnegative");
  return std::exp(-alpha / params->fading_ss_mean);
}

StateVector<double> ChainModel::service_bits() const {
  StateVector<double> out;
  for (int i = 0; i < kStateCount; ++i)
    out(i) = states[i].channel_on ? rate_bps(i) * duration_s(i) : 0.0;
  return out;
}

ChainModel build_chain(const ValidatedParams& params, Scheme scheme, const SensingProbs& sensing) {
  const auto& p = params.get();
  ChainModel c;
  c.scheme = scheme;
  c.states = state_catalog(scheme);
  c.link = snr_and_alpha(params, scheme);

  const double rho = p.pu_prior;
  const double pd = sensing.p_detection;
  const double pf = sensing.p_false_alarm;
  const auto& a = c.link.alpha;
  const std::array<double, 4> prior = {rho * pd, rho * (1.0 - pd), (1.0 - rho) * pf,
                                       (1.0 - rho) * (1.0 - pf)};
  for (int s = 0; s < 4; ++s) {
    c.base_probs[2 * s] = prior[s] * on_prob(a[s], params);
    c.base_probs[2 * s + 1] = prior[s] * off_prob(a[s], params);
  }

  const double access = 1.0 - p.feedback_miss_prob;
  c.nack_entry = {access * pu_outage_prob(params, PowerLevel::p1),
                  access * pu_outage_prob(params, PowerLevel::p2)};
  const double nack_on = on_prob(a[4], params);
  const double nack_off = off_prob(a[4], params);

  for (int i = 0; i < kStateCount; ++i) {
    // B-B sources transmitted at P1, MD sources at P2; PU-idle and NACK
    // states can never be followed by a NACK slot.
    const double q = i < 2 ? c.nack_entry[0] : i < 4 ? c.nack_entry[1] : 0.0;
    for (int k = 0; k < 8; ++k) c.transition(i, k) = c.base_probs[k] * (1.0 - q);
    c.transition(i, 8) = q * nack_on;
    c.transition(i, 9) = q * nack_off;
  }

  for (int i = 0; i < kStateCount; ++i) {
    const auto& st = c.states[i];
    c.rate_bps(i) = p.su_rate(st.power);
    c.duration_s(i) = st.full_slot ? p.frame_duration_s
                                   : p.frame_duration_s - p.sensing_duration_s;
  }
  return c;
}

SteadyState steady_state(const ChainModel& chain) {
  const auto solve = stationary_distribution(chain.transition);
  SteadyState ss;
  ss.pi = solve.pi;
  ss.residual = solve.residual;
  for (int i = 0; i < kStateCount; ++i)
    if (chain.states[i].pu_active) ss.pu_active_mass += ss.pi(i);
  if (ss.pu_active_mass > 0.0) {
    for (int i = 0; i < kStateCount; ++i)
      if (chain.states[i].pu_active) ss.beta(i) = ss.pi(i) / ss.pu_active_mass;
  }
  return ss;
}

std::array<double, 3> power_level_shares(const ChainModel& chain, const SteadyState& steady) {
  std::array<double, 3> shares{};
  for (int i = 0; i < kStateCount; ++i)
    if (chain.states[i].pu_active)
      shares[static_cast<int>(chain.states[i].power)] += steady.beta(i);
  return shares;
}

double pu_success_rate(const ValidatedParams& params, const ChainModel& chain,
                       const SteadyState& steady) {
  if (!(steady.pu_active_mass > 0.0))
    throw std::domain_error("pu_success_rate: primary user is never active (pu_prior = 0)");
  // summed per state in catalog order so schemes with equal powers agree bit for bit
  double nack = 0.0;
  for (int i = 0; i < kStateCount; ++i)
    if (chain.states[i].pu_active)
      nack += steady.beta(i) * pu_outage_prob(params, chain.states[i].power);
  return 1.0 - nack;
}

double pu_success_rate(const ValidatedParams& params, Scheme scheme, const SensingProbs& sensing) {
  const auto chain = build_chain(params, scheme, sensing);
  return pu_success_rate(params, chain, steady_state(chain));
}

void write_chain_csv(std::ostream& out, const ChainModel& chain, const SteadyState& steady) {
  fmt::print(out, "state,outcome,channel,power_level");
  for (int k = 1; k <= kStateCount; ++k) fmt::print(out, ",R_to_{}", k);
  fmt::print(out, ",pi,beta\n");
  for (int i = 0; i < kStateCount; ++i) {
    const auto& st = chain.states[i];
    fmt::print(out, "{},{},{},P{}", st.number, to_string(st.outcome), st.channel_on ? "ON" : "OFF",
               static_cast<int>(st.power));
    for (int k = 0; k < kStateCount; ++k) fmt::print(out, ",{:.17g}", chain.transition(i, k));
    fmt::print(out, ",{:.17g},{:.17g}\n", steady.pi(i), steady.beta(i));
  }
}

}  // namespace cogcap
