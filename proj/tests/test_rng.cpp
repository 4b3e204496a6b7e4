#include <doctest.h>

#include <cmath>
#include <set>

#include "cogcap/rng.hpp"

using namespace cogcap;

// Known-answer vectors for Philox4x32-10 from the Random123 distribution.
TEST_CASE("Philox known answers") {
  using B = Philox4x32::Block;
  using K = Philox4x32::Key;
  CHECK(Philox4x32::block(B{0, 0, 0, 0}, K{0, 0}) ==
        B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::block(B{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                          K{0xffffffff, 0xffffffff}) ==
        B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::block(B{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                          K{0xa4093822, 0x299f31d0}) ==
        B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are replayable and distinct") {
  Philox4x32 a(99, 3), b(99, 3), c(99, 4), d(100, 3);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a();
    CHECK(x == b());
    seen.insert(x);
    seen.insert(c());
    seen.insert(d());
  }
  CHECK(seen.size() == 3000);
  CHECK(a.blocks_generated() == 500);
}

TEST_CASE("uniform variates") {
  Philox4x32 g(1, 0);
  double sum = 0, sum2 = 0;
  const int n = 200'000;
  for (int i = 0; i < n; ++i) {
    const double u = g.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    const double v = g.uniform_positive();
    REQUIRE(v > 0.0);
    REQUIRE(v <= 1.0);
    sum += u;
    sum2 += u * u;
  }
  const double mean = sum / n;
  CHECK(std::abs(mean - 0.5) < 4 * std::sqrt(1.0 / 12 / n));
  CHECK(sum2 / n - mean * mean == doctest::Approx(1.0 / 12).epsilon(0.01));
}

TEST_CASE("derived distributions") {
  Philox4x32 g(2, 0);
  const int n = 200'000;
  double exp_sum = 0, norm_sum = 0, norm_sq = 0;
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    exp_sum += g.exponential(4.0);
    const auto z = g.normal_pair();
    norm_sum += z[0] + z[1];
    norm_sq += z[0] * z[0] + z[1] * z[1];
    hits += g.bernoulli(0.3);
  }
  CHECK(exp_sum / n == doctest::Approx(0.25).epsilon(0.01));
  CHECK(std::abs(norm_sum / (2 * n)) < 4 / std::sqrt(2.0 * n));
  CHECK(norm_sq / (2 * n) == doctest::Approx(1.0).epsilon(0.01));
  CHECK(std::abs(hits / double(n) - 0.3) < 4 * std::sqrt(0.21 / n));
  CHECK_FALSE(g.bernoulli(0.0));
  CHECK(g.bernoulli(1.0));
}

TEST_CASE("seed mixing") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t salt = 0; salt < 1000; ++salt) seen.insert(mix_seed(7, salt));
  CHECK(seen.size() == 1000);
  CHECK(mix_seed(7, 1) == mix_seed(7, 1));
  CHECK(mix_seed(7, 1) != mix_seed(8, 1));
}
