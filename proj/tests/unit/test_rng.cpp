#include <cmath>
#include <set>

#include <doctest.h>

#include "kinkflow/rng.hpp"

using namespace kinkflow;

TEST_CASE("philox4x32-10 known-answer vectors") {
  // Published test vectors for the 10-round 4x32 configuration.
  const auto z = Philox4x32::block({0, 0, 0, 0}, {0, 0});
  CHECK(z[0] == 0x6627e8d5u);
  CHECK(z[1] == 0xe169c58du);
  CHECK(z[2] == 0xbc57ac4cu);
  CHECK(z[3] == 0x9b00dbd8u);

  const auto f = Philox4x32::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                   {0xffffffffu, 0xffffffffu});
  CHECK(f[0] == 0x408f276du);
  CHECK(f[1] == 0x41c83b0eu);
  CHECK(f[2] == 0xa20bc7c6u);
  CHECK(f[3] == 0x6d5451fdu);

  const auto p = Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                   {0xa4093822u, 0x299f31d0u});
  CHECK(p[0] == 0xd16cfe09u);
  CHECK(p[1] == 0x94fdccebu);
  CHECK(p[2] == 0x5001e420u);
  CHECK(p[3] == 0x24126ea1u);
}

TEST_CASE("double stream stays in range and reproduces") {
  Rng a(123, 5);
  Rng b(123, 5);
  double sum = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = a.next_double();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(u == b.next_double());
    sum += u;
  }
  // Mean of 20000 uniforms: 5 sigma window around 1/2.
  CHECK(std::abs(sum / 20000.0 - 0.5) < 5.0 * (1.0 / std::sqrt(12.0 * 20000.0)));
}

TEST_CASE("streams and seeds decorrelate") {
  Rng a(1, 0);
  Rng b(1, 1);
  Rng c(2, 0);
  int equal_ab = 0, equal_ac = 0;
  for (int i = 0; i < 100; ++i) {
    const std::uint64_t x = a.next_u64();
    if (x == b.next_u64()) ++equal_ab;
    if (x == c.next_u64()) ++equal_ac;
  }
  CHECK(equal_ab == 0);
  CHECK(equal_ac == 0);
}

TEST_CASE("positive draws never return zero") {
  Rng r(77, 0);
  for (int i = 0; i < 1000; ++i) CHECK(r.next_positive_double() > 0.0);
}

TEST_CASE("derive_seed is a pure injective-in-practice map") {
  CHECK(derive_seed(42, 0) == derive_seed(42, 0));
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 2000; ++i) seen.insert(derive_seed(42, i));
  CHECK(seen.size() == 2000);
  CHECK(derive_seed(42, 0) != derive_seed(43, 0));

  // Pins the derivation to the verified block function.
  const auto w = Philox4x32::block({0, 0, 0x6B696E6Bu, 0x666C6F77u}, {42, 0});
  CHECK(derive_seed(42, 0) == ((static_cast<std::uint64_t>(w[0]) << 32) | w[1]));
}
