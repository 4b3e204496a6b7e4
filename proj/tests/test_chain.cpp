#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cogcap/chain.hpp"
#include "cogcap/linalg.hpp"
#include "cogcap/outage.hpp"
#include "cogcap/sim.hpp"
#include "support.hpp"

using namespace cogcap;

namespace {

// Every row of R is p_k (1 - q_i) on states 1..8 plus q_i (on5, off5), so the
// stationary NACK-entry mass Q solves Q = (1 - Q) s.
StateVector<double> closed_form_pi(const ChainModel& c, const ValidatedParams& v) {
  const auto& p = c.base_probs;
  const double s = (p[0] + p[1]) * c.nack_entry[0] + (p[2] + p[3]) * c.nack_entry[1];
  const double q = s / (1 + s);
  StateVector<double> pi;
  for (int k = 0; k < 8; ++k) pi(k) = p[k] * (1 - q);
  const double on5 = on_prob(c.link.alpha[4], v);
  pi(8) = q * on5;
  pi(9) = q * (1 - on5);
  return pi;
}

ChainModel chain_at(const SystemParams& p, Scheme scheme, bool perfect = false,
                    ValidationOptions opts = {}) {
  const auto v = validate(p, opts);
  return build_chain(v, scheme, perfect ? perfect_sensing_override(v) : sensing_probs(v));
}

double success_at(SystemParams p, Scheme scheme, bool perfect = false) {
  const auto v = validate(p, {.allow_p0_equal_p1 = true});
  return pu_success_rate(v, scheme, perfect ? perfect_sensing_override(v) : sensing_probs(v));
}

}  // namespace

TEST_CASE("state catalog") {
  const auto& tpl = state_catalog(Scheme::tpl);
  const auto& dpl = state_catalog(Scheme::dpl);
  for (int i = 0; i < kStateCount; ++i) {
    CHECK(tpl[i].number == i + 1);
    CHECK(tpl[i].channel_on == (i % 2 == 0));
    CHECK(tpl[i].pu_active == (i < 4 || i >= 8));
    CHECK(tpl[i].full_slot == (i >= 8));
  }
  CHECK(tpl[0].power == PowerLevel::p1);
  CHECK(tpl[2].power == PowerLevel::p2);
  CHECK(tpl[4].power == PowerLevel::p1);
  CHECK(tpl[6].power == PowerLevel::p2);
  CHECK(tpl[8].power == PowerLevel::p0);
  CHECK(dpl[8].power == PowerLevel::p1);
  CHECK(dpl[9].outcome == SensingOutcome::nack_slot);
}

TEST_CASE("nominal link budget") {
  const auto v = validate(default_params());
  const auto tpl = snr_and_alpha(v, Scheme::tpl);
  CHECK(tpl.snr[0] == 0.125);
  CHECK(tpl.snr[1] == 0.5);
  CHECK(tpl.snr[2] == 0.25);
  CHECK(tpl.snr[3] == 1.0);
  CHECK(tpl.snr[4] == 0.05);
  const double step = std::exp2(1000.0 / 1e5) - 1;
  CHECK(tpl.alpha[0] == doctest::Approx(step / 0.125).epsilon(1e-14));
  CHECK(tpl.alpha[4] == doctest::Approx((std::exp2(500.0 / 1e5) - 1) / 0.05).epsilon(1e-14));
  const auto dpl = snr_and_alpha(v, Scheme::dpl);
  CHECK(dpl.snr[4] == dpl.snr[0]);
  CHECK(dpl.alpha[4] == dpl.alpha[0]);
}

TEST_CASE("without cross interference busy and idle SNRs agree") {
  auto p = default_params();
  p.pu_signal_var = 0.0;
  const auto link = snr_and_alpha(validate(p), Scheme::tpl);
  CHECK(link.snr[0] == link.snr[2]);
  CHECK(link.snr[1] == link.snr[3]);
}

TEST_CASE("ON probability") {
  const auto v = validate(default_params());
  CHECK(on_prob(0.0, v) == 1.0);
  CHECK(on_prob(std::log(2.0), v) == doctest::Approx(0.5).epsilon(1e-15));
  const auto c = chain_at(default_params(), Scheme::tpl);
  CHECK(c.transition(5, 0) / c.transition(5, 1) ==
        doctest::Approx(on_prob(c.link.alpha[0], v) / (1 - on_prob(c.link.alpha[0], v))));
}

TEST_CASE("rows are stochastic for random parameters") {
  std::mt19937_64 gen(42);
  for (int n = 0; n < 100; ++n) {
    const auto p = testing::random_params(gen);
    for (auto scheme : {Scheme::dpl, Scheme::tpl}) {
      const auto c = chain_at(p, scheme);
      CHECK((c.transition.array() >= 0.0).all());
      for (int i = 0; i < kStateCount; ++i) CHECK(std::abs(c.transition.row(i).sum() - 1) <= 1e-12);
      for (int i = 4; i < kStateCount; ++i) {
        CHECK(c.transition(i, 8) == 0.0);
        CHECK(c.transition(i, 9) == 0.0);
      }
    }
  }
}

TEST_CASE("stationary vector matches the closed form") {
  std::mt19937_64 gen(43);
  for (int n = 0; n < 100; ++n) {
    const auto p = testing::random_params(gen);
    for (auto scheme : {Scheme::dpl, Scheme::tpl}) {
      const auto c = chain_at(p, scheme);
      const auto ss = steady_state(c);
      CHECK(ss.residual <= 1e-10);
      CHECK(std::abs(ss.pi.sum() - 1) <= 1e-12);
      CHECK((ss.pi - closed_form_pi(c, validate(p))).lpNorm<Eigen::Infinity>() <= 1e-12);
      CHECK(std::abs(ss.beta.sum() - 1) <= 1e-12);
      for (int i = 4; i < 8; ++i) CHECK(ss.beta(i) == 0.0);
    }
  }
}

TEST_CASE("always missing the NACK gives a memoryless chain") {
  auto p = default_params();
  p.feedback_miss_prob = 1.0;
  const auto c = chain_at(p, Scheme::tpl);
  const auto ss = steady_state(c);
  for (int i = 0; i < kStateCount; ++i) {
    CHECK(c.transition(i, 8) == 0.0);
    CHECK(c.transition(i, 9) == 0.0);
    CHECK(c.transition.row(i) == c.transition.row(0));
  }
  for (int k = 0; k < 8; ++k) CHECK(ss.pi(k) == doctest::Approx(c.base_probs[k]).epsilon(1e-13));
  CHECK(ss.pi(8) == doctest::Approx(0.0));
}

TEST_CASE("perfect sensing removes the sensing error states") {
  const auto c = chain_at(default_params(), Scheme::tpl, true);
  for (int k = 2; k < 6; ++k) CHECK(c.base_probs[k] == 0.0);
  const auto ss = steady_state(c);
  for (int k = 2; k < 6; ++k) CHECK(ss.pi(k) == 0.0);
  const auto shares = power_level_shares(c, ss);
  CHECK(shares[2] == 0.0);
  CHECK(shares[0] + shares[1] == doctest::Approx(1.0));
}

TEST_CASE("TPL with P0 = P1 and r0 = r1 is DPL") {
  std::mt19937_64 gen(44);
  for (int n = 0; n < 50; ++n) {
    auto p = testing::random_params(gen);
    p.su_power_psd[0] = p.su_power_psd[1];
    p.su_rates_bps[0] = p.su_rates_bps[1];
    const auto tpl = chain_at(p, Scheme::tpl, false, {.allow_p0_equal_p1 = true});
    const auto dpl = chain_at(p, Scheme::dpl, false, {.allow_p0_equal_p1 = true});
    CHECK(tpl.transition == dpl.transition);
    CHECK(tpl.service_bits() == dpl.service_bits());
    CHECK(steady_state(tpl).pi == steady_state(dpl).pi);
    CHECK(success_at(p, Scheme::tpl) == success_at(p, Scheme::dpl));
  }
}

TEST_CASE("success rate from level shares") {
  const auto v = validate(default_params());
  const auto c = build_chain(v, Scheme::tpl, sensing_probs(v));
  const auto ss = steady_state(c);
  const auto shares = power_level_shares(c, ss);
  double expected = 1.0;
  for (auto level : {PowerLevel::p0, PowerLevel::p1, PowerLevel::p2})
    expected -= pu_outage_prob(v, level) * shares[static_cast<int>(level)];
  CHECK(pu_success_rate(v, c, ss) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(pu_success_rate(v, c, ss) == doctest::Approx(0.995816).epsilon(1e-6));
}

TEST_CASE("DPL with perfect sensing ignores feedback errors") {
  std::mt19937_64 gen(45);
  for (int n = 0; n < 50; ++n) {
    auto p = testing::random_params(gen);
    p.feedback_miss_prob = 0.0;
    const double clean = success_at(p, Scheme::dpl, true);
    for (double eps : {0.1, 0.3, 0.7, 1.0}) {
      p.feedback_miss_prob = eps;
      CHECK(std::abs(success_at(p, Scheme::dpl, true) - clean) <= 1e-12);
    }
    CHECK(std::abs(clean - pu_success_prob(validate(p), PowerLevel::p1)) <= 1e-12);
  }
}

TEST_CASE("success rate orderings") {
  std::mt19937_64 gen(46);
  for (int n = 0; n < 50; ++n) {
    auto p = testing::random_params(gen);
    p.feedback_miss_prob = 0.0;
    const double base_tpl = success_at(p, Scheme::tpl);
    const double base_dpl = success_at(p, Scheme::dpl);
    CHECK(base_tpl >= base_dpl);
    p.feedback_miss_prob = 0.5;
    CHECK(success_at(p, Scheme::tpl) <= base_tpl);
    CHECK(success_at(p, Scheme::dpl) <= base_dpl + 1e-15);

    double prev = 2.0;
    for (double f : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      p.su_power_psd[0] = f * p.su_power_psd[1];
      const double s = success_at(p, Scheme::tpl);
      if (f > 0) CHECK(s < prev);
      CHECK(success_at(p, Scheme::tpl, true) >= s);
      prev = s;
    }
  }
}

TEST_CASE("inactive primary has no success rate") {
  auto p = default_params();
  p.pu_prior = 0.0;
  const auto v = validate(p);
  CHECK_THROWS_AS(pu_success_rate(v, Scheme::tpl, sensing_probs(v)), std::domain_error);
  const auto ss = steady_state(build_chain(v, Scheme::tpl, sensing_probs(v)));
  CHECK(ss.pu_active_mass == 0.0);
}

TEST_CASE("service bits per state") {
  const auto c = chain_at(default_params(), Scheme::tpl);
  const auto bits = c.service_bits();
  CHECK(bits(0) == doctest::Approx(1000 * 0.007));
  CHECK(bits(1) == 0.0);
  CHECK(bits(2) == doctest::Approx(2000 * 0.007));
  CHECK(bits(8) == doctest::Approx(500 * 0.01));
  CHECK(bits(9) == 0.0);
}

TEST_CASE("chain csv round trips at full precision") {
  const auto c = chain_at(default_params(), Scheme::tpl);
  const auto ss = steady_state(c);
  std::ostringstream out;
  write_chain_csv(out, c, ss);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("state,outcome,channel,power_level,R_to_1", 0) == 0);
  for (int i = 0; i < kStateCount; ++i) {
    REQUIRE(std::getline(in, line));
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
    REQUIRE(cells.size() == 4 + kStateCount + 2);
    for (int k = 0; k < kStateCount; ++k) CHECK(std::stod(cells[4 + k]) == c.transition(i, k));
    CHECK(std::stod(cells[14]) == ss.pi(i));
  }
}

TEST_CASE("stationary solver on reducible and periodic chains") {
  Eigen::Matrix3d cycle;
  cycle << 0, 1, 0, 0, 0, 1, 1, 0, 0;
  const auto s = stationary_distribution(cycle);
  CHECK(s.pi(0) == doctest::Approx(1.0 / 3));

  Eigen::Matrix3d absorbing;
  absorbing << 0.5, 0.5, 0, 0, 1, 0, 0, 0.5, 0.5;
  const auto a = stationary_distribution(absorbing);
  CHECK(a.pi(1) == doctest::Approx(1.0));

  Eigen::Matrix3d two_classes;
  two_classes << 1, 0, 0, 0, 1, 0, 0.5, 0, 0.5;
  CHECK_THROWS_AS(stationary_distribution(two_classes), StationaryError);
}
