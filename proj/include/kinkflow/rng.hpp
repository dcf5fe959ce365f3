#pragma once

#include <array>
#include <cstdint>

namespace kinkflow {

// Philox4x32-10 counter-based generator. Counter-based streams let every
// (seed, stream) pair produce an independent, reproducible sequence without
// shared state, which keeps ensemble runs deterministic under any worker
// scheduling.
struct Philox4x32 {
  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                            std::array<std::uint32_t, 2> key);
};

// Stream of IEEE doubles in [0, 1) drawn from Philox4x32-10.
// Identity of the stream is the 64-bit seed plus a 64-bit stream id; the
// draw index is the block counter, so sequences never collide across streams.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream) {}

  // Uniform on [0, 1) with 53 random bits.
  double next_double();

  // Uniform on (0, 1]; rejects the exact 0.0 draw so log() stays finite.
  double next_positive_double();

  std::uint64_t next_u64();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::array<std::uint32_t, 4> next_block();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

// Derives a child seed for ensemble instance `index` from an ensemble seed.
// Pure function of its arguments, so instance files can record the child
// seed and be regenerated in isolation.
std::uint64_t derive_seed(std::uint64_t ensemble_seed, std::uint64_t index);

}  // namespace kinkflow
