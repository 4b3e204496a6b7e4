#include "cogcap/sim.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <vector>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "cogcap/outage.hpp"
#include "cogcap/rng.hpp"

namespace cogcap {

namespace {

constexpr double kZ95 = 1.959963984540054;
constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;
constexpr std::uint64_t kTrialsPerStream = 1u << 14;
constexpr std::uint64_t kMinTailCount = 100;

using Cumulative = std::array<double, kStateCount>;

std::uint64_t fnv_step(std::uint64_t h, std::uint64_t v) { return (h ^ v) * kFnvPrime; }

Cumulative cumulative(const double* probs) {
  Cumulative c{};
  double acc = 0.0;
  for (int k = 0; k < kStateCount; ++k) c[k] = acc += probs[k];
  return c;
}

int draw_state(const Cumulative& cum, double u) {
  for (int k = 0; k < kStateCount; ++k)
    if (u < cum[k]) return k;
  // u landed in the rounding slack above the final partial sum
  for (int k = kStateCount - 1; k > 0; --k)
    if (cum[k] > cum[k - 1]) return k;
  return 0;
}

bool is_nack_slot(int state) { return state >= 8; }

struct Tally {
  std::array<std::uint64_t, kStateCount> counts{};
  double service = 0.0;
  std::uint64_t hash = kFnvOffset;
  std::uint64_t transmissions = 0;
  std::uint64_t tx_success = 0;
  std::uint64_t packets = 0;
  std::uint64_t delivered = 0;
  std::uint64_t h0_sensed = 0;
  std::uint64_t h0_busy = 0;
  std::uint64_t h1_sensed = 0;
  std::uint64_t h1_busy = 0;
};

Estimate lse_ec_estimate(const std::vector<Tally>& tallies, double theta, std::uint64_t slots) {
  const std::size_t n = tallies.size();
  std::vector<double> w(n);
  for (std::size_t t = 0; t < n; ++t) w[t] = -theta * tallies[t].service;
  const double peak = *std::max_element(w.begin(), w.end());
  if (!std::isfinite(peak))
    throw std::runtime_error("estimate_ec: trajectory log-MGF terms are not finite");
  double sum = 0.0, sum_sq = 0.0;
  for (double v : w) {
    const double e = std::exp(v - peak);
    sum += e;
    sum_sq += e * e;
  }
  const double mean = sum / static_cast<double>(n);
  if (!(mean > 0.0))
    throw std::runtime_error("estimate_ec: every exp(-theta S) underflowed after rescaling");
  const double scale = theta * static_cast<double>(slots);

  Estimate out;
  out.value = -(peak + std::log(mean)) / scale;
  out.samples = n;
  if (n > 1) {
    const double var = std::max(0.0, sum_sq / static_cast<double>(n) - mean * mean) *
                       static_cast<double>(n) / static_cast<double>(n - 1);
    out.half_width = kZ95 * std::sqrt(var / static_cast<double>(n)) / mean / scale;
  }
  out.reliable = n >= kMinTailCount;
  return out;
}

Estimate mean_service_estimate(const std::vector<Tally>& tallies, std::uint64_t slots) {
  const std::size_t n = tallies.size();
  double sum = 0.0, sum_sq = 0.0;
  for (const auto& t : tallies) {
    const double m = t.service / static_cast<double>(slots);
    sum += m;
    sum_sq += m * m;
  }
  Estimate out;
  out.samples = n * slots;
  out.value = sum / static_cast<double>(n);
  if (n > 1) {
    const double var = std::max(0.0, sum_sq / static_cast<double>(n) - out.value * out.value) *
                       static_cast<double>(n) / static_cast<double>(n - 1);
    out.half_width = kZ95 * std::sqrt(var / static_cast<double>(n));
  }
  out.reliable = n >= kMinTailCount;
  return out;
}

SimReport reduce(const std::vector<Tally>& tallies, const SimConfig& cfg) {
  SimReport r;
  r.mode = cfg.mode;
  r.slots_total = cfg.slots * cfg.trajectories;
  Tally sum;
  std::uint64_t hash = kFnvOffset;
  for (const auto& t : tallies) {
    for (int k = 0; k < kStateCount; ++k) sum.counts[k] += t.counts[k];
    hash = fnv_step(hash, t.hash);
    sum.transmissions += t.transmissions;
    sum.tx_success += t.tx_success;
    sum.packets += t.packets;
    sum.delivered += t.delivered;
    sum.h0_sensed += t.h0_sensed;
    sum.h0_busy += t.h0_busy;
    sum.h1_sensed += t.h1_sensed;
    sum.h1_busy += t.h1_busy;
  }
  r.state_counts = sum.counts;
  for (int k = 0; k < kStateCount; ++k)
    r.empirical_pi(k) = static_cast<double>(sum.counts[k]) / static_cast<double>(r.slots_total);
  r.trajectory_hash = hash;
  r.mean_service_bits = mean_service_estimate(tallies, cfg.slots);
  r.pu_transmissions = sum.transmissions;
  r.packets_completed = sum.packets;
  r.success_per_transmission = proportion_estimate(sum.tx_success, sum.transmissions);
  r.success_per_packet = proportion_estimate(sum.delivered, sum.packets);
  r.p_false_alarm = proportion_estimate(sum.h0_busy, sum.h0_sensed);
  r.p_detection = proportion_estimate(sum.h1_busy, sum.h1_sensed);
  return r;
}

std::vector<Tally> run_chain(const ChainModel& chain, const SimConfig& cfg) {
  check_config(cfg);
  std::array<Cumulative, kStateCount> rows;
  for (int i = 0; i < kStateCount; ++i) rows[i] = cumulative(chain.transition.row(i).data());
  // fresh start: the PU-idle rows are exactly the base distribution p_1..p_8
  const Cumulative& start = rows[4];
  const StateVector<double> bits = chain.service_bits();

  std::vector<Tally> tallies(cfg.trajectories);
  const auto n = static_cast<std::int64_t>(cfg.trajectories);
  bool nack_repeat = false;
#pragma omp parallel for schedule(static) reduction(|| : nack_repeat)
  for (std::int64_t t = 0; t < n; ++t) {
    Philox4x32 rng(cfg.seed, static_cast<std::uint64_t>(t));
    Tally& tally = tallies[static_cast<std::size_t>(t)];
    int state = draw_state(start, rng.uniform());
    for (std::uint64_t s = 0; s < cfg.slots; ++s) {
      ++tally.counts[state];
      tally.service += bits(state);
      tally.hash = fnv_step(tally.hash, static_cast<std::uint64_t>(state));
      const int next = draw_state(rows[state], rng.uniform());
      if (s + 1 < cfg.slots && is_nack_slot(state) && is_nack_slot(next)) nack_repeat = true;
      state = next;
    }
  }
  if (nack_repeat)
    throw std::logic_error("sample_chain: NACK-slot states visited in consecutive slots");
  return tallies;
}

bool energy_detect(Philox4x32& rng, std::int64_t samples, double variance, double threshold) {
  double energy = 0.0;
  for (std::int64_t i = 0; i < samples; ++i) {
    const auto g = rng.normal_pair();
    energy += g[0] * g[0] + g[1] * g[1];
  }
  // each complex sample has E|y|^2 = variance, split evenly over I and Q
  return 0.5 * variance * energy / static_cast<double>(samples) > threshold;
}

}  // namespace

std::string_view to_string(SimMode mode) {
  return mode == SimMode::chain_sampling ? "chain-sampling" : "protocol";
}

std::string_view to_string(SensingModel model) {
  return model == SensingModel::bernoulli ? "bernoulli" : "symbol-level";
}

void check_config(const SimConfig& cfg) {
  if (cfg.slots < 1) throw std::invalid_argument("simulation needs at least one slot");
  if (cfg.trajectories < 1) throw std::invalid_argument("simulation needs at least one trajectory");
}

Estimate proportion_estimate(std::uint64_t hits, std::uint64_t trials) {
  Estimate e;
  e.samples = trials;
  if (trials == 0) return e;
  const double n = static_cast<double>(trials);
  e.value = static_cast<double>(hits) / n;
  e.half_width = kZ95 * std::sqrt(e.value * (1.0 - e.value) / n);
  e.reliable = hits >= kMinTailCount && trials - hits >= kMinTailCount;
  return e;
}

SimReport sample_chain(const ChainModel& chain, const SimConfig& cfg) {
  auto report = reduce(run_chain(chain, cfg), cfg);
  report.mode = SimMode::chain_sampling;
  return report;
}

SimReport estimate_ec(const ChainModel& chain, const ValidatedParams& params, const SimConfig& cfg) {
  const double theta = params->qos_exponent;
  if (!(theta > 0.0)) throw std::domain_error("estimate_ec: theta must be positive");
  const auto tallies = run_chain(chain, cfg);
  auto report = reduce(tallies, cfg);
  report.mode = SimMode::chain_sampling;
  report.theta = theta;
  report.ec_bits_per_slot = lse_ec_estimate(tallies, theta, cfg.slots);
  return report;
}

SimReport simulate_protocol(const ValidatedParams& params, Scheme scheme,
                            const SensingProbs& sensing, const SimConfig& cfg) {
  check_config(cfg);
  const auto& p = params.get();
  const PowerLevel nack_level = scheme == Scheme::tpl ? PowerLevel::p0 : PowerLevel::p1;
  const double rp = pu_snr_threshold(p);
  const double short_slot = p.frame_duration_s - p.sensing_duration_s;
  const std::int64_t nb = detector_samples(params).count;
  const double ss_rate = 1.0 / p.fading_ss_mean;

  std::vector<Tally> tallies(cfg.trajectories);
  const auto n = static_cast<std::int64_t>(cfg.trajectories);
#pragma omp parallel for schedule(static)
  for (std::int64_t t = 0; t < n; ++t) {
    Philox4x32 rng(cfg.seed, static_cast<std::uint64_t>(t));
    Tally& tally = tallies[static_cast<std::size_t>(t)];
    bool retransmission_pending = false;
    bool nack_accessed = false;

    for (std::uint64_t s = 0; s < cfg.slots; ++s) {
      const bool pu_active = retransmission_pending || rng.bernoulli(p.pu_prior);
      const bool second_attempt = retransmission_pending;

      PowerLevel level;
      double duration;
      int state_base;
      if (nack_accessed) {
        level = nack_level;
        duration = p.frame_duration_s;
        state_base = 8;
        nack_accessed = false;
      } else {
        bool busy;
        if (cfg.sensing_model == SensingModel::bernoulli) {
          busy = rng.bernoulli(pu_active ? sensing.p_detection : sensing.p_false_alarm);
        } else {
          const double var = p.noise_psd + (pu_active ? p.pu_signal_var : 0.0);
          busy = energy_detect(rng, nb, var, p.detector_threshold);
        }
        if (pu_active) {
          ++tally.h1_sensed;
          tally.h1_busy += busy;
        } else {
          ++tally.h0_sensed;
          tally.h0_busy += busy;
        }
        level = busy ? PowerLevel::p1 : PowerLevel::p2;
        duration = short_slot;
        state_base = pu_active ? (busy ? 0 : 2) : (busy ? 4 : 6);
      }

      const double rate = p.su_rate(level);
      const double su_psd = p.su_power(level);
      const double snr = su_psd / (p.noise_psd + (pu_active ? p.pu_signal_var : 0.0));
      const double z = rng.exponential(ss_rate);
      const bool on = rate < p.bandwidth_hz * std::log2(1.0 + snr * z);
      const int state = state_base + (on ? 0 : 1);
      ++tally.counts[state];
      tally.hash = fnv_step(tally.hash, static_cast<std::uint64_t>(state));
      if (on) tally.service += rate * duration;

      if (pu_active) {
        ++tally.transmissions;
        const double chi_pp = rng.exponential(p.fading_pp);
        const double chi_sp = rng.exponential(p.fading_sp);
        const bool ok = rp < p.pu_power_psd * chi_pp / (p.noise_psd + su_psd * chi_sp);
        if (ok) {
          ++tally.tx_success;
          ++tally.delivered;
          ++tally.packets;
          retransmission_pending = false;
        } else if (!second_attempt) {
          retransmission_pending = true;
          nack_accessed = rng.uniform() >= p.feedback_miss_prob;
        } else {
          // second failure: packet dropped, the NACK is not actionable
          ++tally.packets;
          retransmission_pending = false;
        }
      }
    }
  }

  auto report = reduce(tallies, cfg);
  report.mode = SimMode::protocol;
  if (p.qos_exponent > 0.0) {
    report.theta = p.qos_exponent;
    report.ec_bits_per_slot = lse_ec_estimate(tallies, p.qos_exponent, cfg.slots);
  }
  return report;
}

SensingEstimate monte_carlo_sensing(const ValidatedParams& params, std::uint64_t trials,
                                    std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("monte_carlo_sensing: trials must be >= 1");
  const auto& p = params.get();
  const std::int64_t nb = detector_samples(params).count;
  const auto blocks = static_cast<std::int64_t>((trials + kTrialsPerStream - 1) / kTrialsPerStream);
  std::vector<std::array<std::uint64_t, 2>> hits(static_cast<std::size_t>(blocks));
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t b = 0; b < blocks; ++b) {
    Philox4x32 rng(seed, static_cast<std::uint64_t>(b));
    const std::uint64_t begin = static_cast<std::uint64_t>(b) * kTrialsPerStream;
    const std::uint64_t end = std::min(trials, begin + kTrialsPerStream);
    auto& h = hits[static_cast<std::size_t>(b)];
    for (std::uint64_t i = begin; i < end; ++i) {
      h[0] += energy_detect(rng, nb, p.noise_psd, p.detector_threshold);
      h[1] += energy_detect(rng, nb, p.noise_psd + p.pu_signal_var, p.detector_threshold);
    }
  }
  std::uint64_t fa = 0, det = 0;
  for (const auto& h : hits) {
    fa += h[0];
    det += h[1];
  }
  return {proportion_estimate(fa, trials), proportion_estimate(det, trials)};
}

Estimate monte_carlo_outage(const ValidatedParams& params, PowerLevel level, std::uint64_t draws,
                            std::uint64_t seed) {
  if (draws < 1) throw std::invalid_argument("monte_carlo_outage: draws must be >= 1");
  const auto& p = params.get();
  const double rp = pu_snr_threshold(p);
  const double su = p.su_power(level);
  const auto blocks = static_cast<std::int64_t>((draws + kTrialsPerStream - 1) / kTrialsPerStream);
  std::vector<std::uint64_t> hits(static_cast<std::size_t>(blocks));
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < blocks; ++b) {
    Philox4x32 rng(seed, static_cast<std::uint64_t>(b));
    const std::uint64_t begin = static_cast<std::uint64_t>(b) * kTrialsPerStream;
    const std::uint64_t end = std::min(draws, begin + kTrialsPerStream);
    std::uint64_t h = 0;
    for (std::uint64_t i = begin; i < end; ++i) {
      const double chi_pp = rng.exponential(p.fading_pp);
      const double chi_sp = rng.exponential(p.fading_sp);
      h += rp > p.pu_power_psd * chi_pp / (p.noise_psd + su * chi_sp);
    }
    hits[static_cast<std::size_t>(b)] = h;
  }
  std::uint64_t total = 0;
  for (auto h : hits) total += h;
  return proportion_estimate(total, draws);
}

void write_report_csv(std::ostream& out, const SimReport& r) {
  fmt::print(out, "quantity,value,half_width,samples,reliable\n");
  auto row = [&](std::string_view name, const Estimate& e) {
    fmt::print(out, "{},{:.12g},{:.12g},{},{}\n", name, e.value, e.half_width, e.samples,
               e.reliable ? 1 : 0);
  };
  row("ec_bits_per_slot", r.ec_bits_per_slot);
  row("mean_service_bits", r.mean_service_bits);
  row("success_per_transmission", r.success_per_transmission);
  row("success_per_packet", r.success_per_packet);
  row("p_false_alarm", r.p_false_alarm);
  row("p_detection", r.p_detection);
  for (int k = 0; k < kStateCount; ++k)
    fmt::print(out, "pi_{},{:.12g},,{},1\n", k + 1, r.empirical_pi(k), r.slots_total);
}

std::string report_summary(const SimReport& r) {
  auto fmt_est = [](const Estimate& e) {
    if (!e.defined()) return std::string("n/a (no samples)");
    return fmt::format("{:.6g} +/- {:.2g}{}", e.value, e.half_width, e.reliable ? "" : " [wide]");
  };
  std::string s = fmt::format("mode: {}  slots: {}\n", to_string(r.mode), r.slots_total);
  s += "empirical pi:";
  for (int k = 0; k < kStateCount; ++k) s += fmt::format(" {:.5f}", r.empirical_pi(k));
  s += "\n";
  if (r.ec_bits_per_slot.defined())
    s += fmt::format("EC (theta={}): {} bits/slot\n", r.theta, fmt_est(r.ec_bits_per_slot));
  s += fmt::format("mean service: {} bits/slot\n", fmt_est(r.mean_service_bits));
  if (r.mode == SimMode::protocol) {
    s += fmt::format("PU transmissions: {}  packets: {}\n", r.pu_transmissions,
                     r.packets_completed);
    s += fmt::format("PU success per transmission: {}\n", fmt_est(r.success_per_transmission));
    s += fmt::format("PU success per packet: {}\n", fmt_est(r.success_per_packet));
    s += fmt::format("sensing P_f: {}  P_d: {}\n", fmt_est(r.p_false_alarm),
                     fmt_est(r.p_detection));
  }
  return s;
}

}  // namespace cogcap
