#include "kinkflow/rng.hpp"

namespace kinkflow {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

std::array<std::uint32_t, 4> Philox4x32::block(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

std::array<std::uint32_t, 4> Rng::next_block() {
  const std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(counter_),
      static_cast<std::uint32_t>(counter_ >> 32),
      static_cast<std::uint32_t>(stream_),
      static_cast<std::uint32_t>(stream_ >> 32)};
  const std::array<std::uint32_t, 2> key = {
      static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
  ++counter_;
  return Philox4x32::block(ctr, key);
}

std::uint64_t Rng::next_u64() {
  const auto w = next_block();
  return (static_cast<std::uint64_t>(w[0]) << 32) | w[1];
}

double Rng::next_double() {
  // Top 53 bits of a 64-bit word; resolution 2^-53 matches the double mantissa.
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::next_positive_double() {
  for (;;) {
    const double u = next_double();
    if (u > 0.0) return u;
  }
}

std::uint64_t derive_seed(std::uint64_t ensemble_seed, std::uint64_t index) {
  const std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
      0x6B696E6Bu, 0x666C6F77u};
  const std::array<std::uint32_t, 2> key = {
      static_cast<std::uint32_t>(ensemble_seed),
      static_cast<std::uint32_t>(ensemble_seed >> 32)};
  const auto w = Philox4x32::block(ctr, key);
  return (static_cast<std::uint64_t>(w[0]) << 32) | w[1];
}

}  // namespace kinkflow
