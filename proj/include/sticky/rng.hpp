#pragma once

#include <array>
#include <cstdint>

namespace sticky {

// Philox4x32-10 counter-based generator.
using PhiloxCounter = std::array<uint32_t, 4>;
using PhiloxKey = std::array<uint32_t, 2>;

PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key);

uint64_t splitmix64(uint64_t x);
PhiloxKey derive_key(uint64_t seed, uint64_t stream);

// Counter word 3 separates independent uses of one key.
enum class Domain : uint32_t {
  environment = 0x454e5631u,
  walker = 0x57414c4bu,
  polymer = 0x504f4c59u,
  control = 0x43544c31u,
  gamma = 0x47414d31u,
  extremal = 0x4d415831u,
};

// Uniform in (0, 1) from the top 53 bits of (hi, lo).
inline double to_unit(uint32_t hi, uint32_t lo) {
  const uint64_t b = ((static_cast<uint64_t>(hi) << 32) | lo) >> 11;
  return (static_cast<double>(b) + 0.5) * 0x1.0p-53;
}

// Sequential uniforms from counters (c0, c1, block, domain), block = 0, 1, ...
class CounterStream {
 public:
  CounterStream(PhiloxKey key, uint32_t c0, uint32_t c1, Domain d, uint32_t first_block = 0)
      : key_(key), c0_(c0), c1_(c1), d_(static_cast<uint32_t>(d)), block_(first_block) {}
  double uniform();
  double normal();
  uint32_t blocks_used() const { return block_; }

 private:
  PhiloxKey key_;
  uint32_t c0_, c1_, d_, block_;
  PhiloxCounter buf_{};
  int avail_ = 0;
};

}  // namespace sticky
