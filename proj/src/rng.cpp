#include "sticky/rng.hpp"

#include <cmath>

namespace sticky {

PhiloxCounter philox4x32(PhiloxCounter c, PhiloxKey k) {
  for (int r = 0; r < 10; ++r) {
    const uint64_t p0 = static_cast<uint64_t>(0xD2511F53u) * c[0];
    const uint64_t p1 = static_cast<uint64_t>(0xCD9E8D57u) * c[2];
    c = {static_cast<uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<uint32_t>(p1),
         static_cast<uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<uint32_t>(p0)};
    k[0] += 0x9E3779B9u;
    k[1] += 0xBB67AE85u;
  }
  return c;
}

uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

PhiloxKey derive_key(uint64_t seed, uint64_t stream) {
  const uint64_t h = splitmix64(seed ^ splitmix64(stream ^ 0x5354494b59ull));
  return {static_cast<uint32_t>(h), static_cast<uint32_t>(h >> 32)};
}

double CounterStream::uniform() {
  if (avail_ == 0) {
    buf_ = philox4x32({c0_, c1_, block_++, d_}, key_);
    avail_ = 2;
  }
  --avail_;
  return avail_ == 1 ? to_unit(buf_[0], buf_[1]) : to_unit(buf_[2], buf_[3]);
}

double CounterStream::normal() {
  const double u1 = uniform(), u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace sticky
