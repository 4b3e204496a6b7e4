#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "cogcap/chain.hpp"
#include "cogcap/ec.hpp"
#include "cogcap/outage.hpp"
#include "cogcap/sim.hpp"
#include "support.hpp"

using namespace cogcap;

namespace {

double total_variation(const StateVector<double>& a, const StateVector<double>& b) {
  return 0.5 * (a - b).cwiseAbs().sum();
}

bool within_3se(const Estimate& e, double truth) {
  const double se = std::sqrt(truth * (1 - truth) / static_cast<double>(e.samples));
  return std::abs(e.value - truth) <= 3 * se;
}

}  // namespace

TEST_CASE("proportion estimates") {
  const auto e = proportion_estimate(500, 1000);
  CHECK(e.value == 0.5);
  CHECK(e.half_width == doctest::Approx(1.959964 * std::sqrt(0.25 / 1000)).epsilon(1e-6));
  CHECK(e.reliable);
  CHECK_FALSE(proportion_estimate(99, 100000).reliable);
  CHECK_FALSE(proportion_estimate(99'950, 100'000).reliable);
  const auto none = proportion_estimate(0, 0);
  CHECK_FALSE(none.defined());
  CHECK(std::isnan(none.value));
}

TEST_CASE("empty runs are rejected") {
  const auto v = validate(default_params());
  const auto c = build_chain(v, Scheme::tpl, sensing_probs(v));
  CHECK_THROWS_AS(sample_chain(c, {.slots = 0}), std::invalid_argument);
  CHECK_THROWS_AS(sample_chain(c, {.trajectories = 0}), std::invalid_argument);
  CHECK_THROWS_AS(monte_carlo_sensing(v, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(monte_carlo_outage(v, PowerLevel::p1, 0, 1), std::invalid_argument);
}

TEST_CASE("chain sampling converges to the stationary vector") {
  std::mt19937_64 gen(31);
  for (int n = 0; n < 3; ++n) {
    const auto v = validate(testing::random_params(gen));
    const auto c = build_chain(v, n % 2 ? Scheme::dpl : Scheme::tpl, sensing_probs(v));
    const auto r = sample_chain(c, {.slots = 200'000, .seed = 5u + n});
    CHECK(total_variation(r.empirical_pi, steady_state(c).pi) <= 0.01);
    std::uint64_t total = 0;
    for (auto k : r.state_counts) total += k;
    CHECK(total == 200'000);
  }
}

TEST_CASE("memoryless chain when every NACK is missed") {
  auto p = default_params();
  p.feedback_miss_prob = 1.0;
  const auto v = validate(p);
  const auto c = build_chain(v, Scheme::tpl, sensing_probs(v));
  const auto r = sample_chain(c, {.slots = 200'000});
  CHECK(r.state_counts[8] == 0);
  CHECK(r.state_counts[9] == 0);
  StateVector<double> base = StateVector<double>::Zero();
  for (int k = 0; k < 8; ++k) base(k) = c.base_probs[k];
  CHECK(total_variation(r.empirical_pi, base) <= 0.01);
}

TEST_CASE("consecutive NACK slots are a logic error") {
  const auto v = validate(default_params());
  auto c = build_chain(v, Scheme::tpl, sensing_probs(v));
  c.transition.row(8).setZero();
  c.transition(8, 8) = 1.0;
  c.transition.row(4).setZero();
  c.transition(4, 8) = 1.0;
  CHECK_THROWS_AS(sample_chain(c, {.slots = 10}), std::logic_error);
}

TEST_CASE("runs are reproducible from the seed") {
  const auto v = validate(default_params());
  const auto c = build_chain(v, Scheme::tpl, sensing_probs(v));
  const SimConfig cfg{.slots = 5000, .trajectories = 8, .seed = 123};
  const auto a = estimate_ec(c, v, cfg);
  const auto b = estimate_ec(c, v, cfg);
  CHECK(a.trajectory_hash == b.trajectory_hash);
  CHECK(a.state_counts == b.state_counts);
  CHECK(a.ec_bits_per_slot.value == b.ec_bits_per_slot.value);
  auto other = cfg;
  other.seed = 124;
  CHECK(estimate_ec(c, v, other).trajectory_hash != a.trajectory_hash);

  const SimConfig proto{.mode = SimMode::protocol, .slots = 5000, .trajectories = 4, .seed = 9};
  const auto pa = simulate_protocol(v, Scheme::tpl, sensing_probs(v), proto);
  const auto pb = simulate_protocol(v, Scheme::tpl, sensing_probs(v), proto);
  CHECK(pa.trajectory_hash == pb.trajectory_hash);
  CHECK(pa.success_per_transmission.value == pb.success_per_transmission.value);
  std::ostringstream sa, sb;
  write_report_csv(sa, pa);
  write_report_csv(sb, pb);
  CHECK(sa.str() == sb.str());
}

TEST_CASE("MGF estimator tracks the spectral value") {
  const auto v = validate(default_params());
  const auto c = build_chain(v, Scheme::dpl, sensing_probs(v));
  const auto r = estimate_ec(c, v, {.slots = 2000, .trajectories = 2000, .seed = 17});
  const double exact = effective_capacity(v, c, v->qos_exponent).ec_bits_per_slot;
  CHECK(testing::rel_diff(r.ec_bits_per_slot.value, exact) <= 0.02);
  CHECK(r.ec_bits_per_slot.half_width > 0.0);
  CHECK(r.mean_service_bits.value >= r.ec_bits_per_slot.value);
}

TEST_CASE("MGF estimator is exact for constant service") {
  const auto v = validate(default_params());
  auto c = build_chain(v, Scheme::tpl, sensing_probs(v));
  for (int i = 0; i < kStateCount; ++i) {
    c.states[i].channel_on = true;
    c.rate_bps(i) = 4.0 / c.duration_s(i);
  }
  const auto r = estimate_ec(c, v, {.slots = 300, .trajectories = 50});
  CHECK(r.ec_bits_per_slot.value == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(r.ec_bits_per_slot.half_width == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("MGF estimator needs a positive exponent") {
  auto p = default_params();
  p.qos_exponent = 0.0;
  const auto v = validate(p);
  const auto c = build_chain(v, Scheme::tpl, sensing_probs(v));
  CHECK_THROWS_AS(estimate_ec(c, v, {.slots = 10}), std::domain_error);
}

TEST_CASE("protocol without a primary") {
  auto p = default_params();
  p.pu_prior = 0.0;
  const auto v = validate(p);
  const auto r = simulate_protocol(v, Scheme::tpl, sensing_probs(v),
                                   {.mode = SimMode::protocol, .slots = 20'000, .trajectories = 2});
  CHECK(r.pu_transmissions == 0);
  CHECK_FALSE(r.success_per_transmission.defined());
  CHECK_FALSE(r.success_per_packet.defined());
  for (int k : {0, 1, 2, 3, 8, 9}) CHECK(r.state_counts[k] == 0);
}

TEST_CASE("protocol with perfect sensing never errs") {
  const auto v = validate(default_params());
  const auto r = simulate_protocol(v, Scheme::tpl, perfect_sensing_override(v),
                                   {.mode = SimMode::protocol, .slots = 50'000, .trajectories = 2});
  for (int k : {2, 3, 4, 5}) CHECK(r.state_counts[k] == 0);
  CHECK(r.p_false_alarm.value == 0.0);
  CHECK(r.p_detection.value == 1.0);
}

TEST_CASE("protocol anchor with error-free feedback") {
  auto p = default_params();
  p.feedback_miss_prob = 0.0;
  p.pu_power_psd = 10.0;  // larger outage, so fewer slots resolve the rate
  const auto v = validate(p);
  const auto r = simulate_protocol(v, Scheme::dpl, perfect_sensing_override(v),
                                   {.mode = SimMode::protocol, .slots = 100'000, .trajectories = 4});
  const double truth = pu_success_rate(v, Scheme::dpl, perfect_sensing_override(v));
  CHECK(truth == doctest::Approx(pu_success_prob(v, PowerLevel::p1)).epsilon(1e-12));
  CHECK(within_3se(r.success_per_transmission, truth));
  CHECK(r.success_per_packet.value >= r.success_per_transmission.value);
}

TEST_CASE("protocol state frequencies follow the chain when feedback is ignored") {
  auto p = default_params();
  p.feedback_miss_prob = 1.0;
  const auto v = validate(p);
  const auto s = sensing_probs(v);
  const auto r = simulate_protocol(v, Scheme::tpl, s,
                                   {.mode = SimMode::protocol, .slots = 200'000, .trajectories = 2});
  // missed NACKs still trigger retransmissions, so only the sensing/ON split is compared
  CHECK(r.state_counts[8] == 0);
  CHECK(r.state_counts[9] == 0);
  CHECK(within_3se(r.p_detection, s.p_detection));
}

TEST_CASE("protocol EC estimate is close to the analytical value") {
  const auto v = validate(default_params());
  const auto s = sensing_probs(v);
  const auto r = simulate_protocol(v, Scheme::dpl, s,
                                   {.mode = SimMode::protocol, .slots = 2000, .trajectories = 500});
  const double exact = effective_capacity(v, Scheme::dpl, s).ec_bits_per_slot;
  CHECK(testing::rel_diff(r.ec_bits_per_slot.value, exact) <= 0.05);
}

TEST_CASE("symbol-level sensing in the protocol") {
  const auto v = validate(default_params());
  const auto s = sensing_probs(v);
  const auto r = simulate_protocol(v, Scheme::tpl, s,
                                   {.mode = SimMode::protocol, .slots = 20'000, .trajectories = 1,
                                    .sensing_model = SensingModel::symbol_level});
  CHECK(r.p_detection.samples > 1000);
  CHECK(within_3se(r.p_detection, s.p_detection));
  CHECK(r.p_false_alarm.value == 0.0);
}

TEST_CASE("sensing Monte Carlo edge cases") {
  auto p = default_params();
  p.detector_threshold = 0.0;
  auto mc = monte_carlo_sensing(validate(p), 2000, 3);
  CHECK(mc.p_false_alarm.value == 1.0);
  CHECK(mc.p_detection.value == 1.0);

  p = default_params();
  p.pu_signal_var = 0.0;
  p.detector_threshold = 1.0;
  mc = monte_carlo_sensing(validate(p), 20'000, 3);
  CHECK(std::abs(mc.p_false_alarm.value - mc.p_detection.value) <
        3 * std::sqrt(2 * 0.25 / 20'000.0) * 1.5);
}

TEST_CASE("outage Monte Carlo is reproducible") {
  const auto v = validate(default_params());
  const auto a = monte_carlo_outage(v, PowerLevel::p2, 50'000, 8);
  const auto b = monte_carlo_outage(v, PowerLevel::p2, 50'000, 8);
  CHECK(a.value == b.value);
  CHECK(a.samples == 50'000);
}

TEST_CASE("report text") {
  const auto v = validate(default_params());
  const auto r = simulate_protocol(v, Scheme::tpl, sensing_probs(v),
                                   {.mode = SimMode::protocol, .slots = 1000, .trajectories = 2});
  const auto text = report_summary(r);
  CHECK(text.find("protocol") != std::string::npos);
  std::ostringstream csv;
  write_report_csv(csv, r);
  CHECK(csv.str().rfind("quantity,value,half_width,samples,reliable\n", 0) == 0);
  CHECK(csv.str().find("pi_10,") != std::string::npos);
}
