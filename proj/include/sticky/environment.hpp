#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sticky/rng.hpp"

namespace sticky {

// iid Beta(alpha, beta) weights w_(x,t), generated on demand as a pure
// function of (seed, stream, domain, x, t).
class Environment {
 public:
  Environment(double alpha, double beta, uint64_t seed, uint64_t stream, Domain domain = Domain::environment);

  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  uint64_t seed() const { return seed_; }
  uint64_t stream() const { return stream_; }

  // w and 1 - w at (x_first + i * x_step, t) for i < n. Both are clamped to
  // [1e-300, 1 - 2^-53]; clamps are tallied.
  void fill(int64_t x_first, int64_t x_step, int64_t t, size_t n, double* w, double* wbar) const;
  double weight(int64_t x, int64_t t) const;
  uint64_t clamp_count() const { return clamps_; }

 private:
  double alpha_, beta_;
  uint64_t seed_, stream_;
  PhiloxKey key_;
  uint32_t tag_;
  bool johnk_;
  mutable uint64_t clamps_ = 0;
};

// Lazily materialized window [x_lo, x_hi] x [0, t_max) of an Environment.
class EnvironmentGrid {
 public:
  EnvironmentGrid(double alpha, double beta, int64_t t_max, int64_t x_lo, int64_t x_hi, uint64_t seed,
                  uint64_t stream);

  const Environment& environment() const { return env_; }
  int64_t t_max() const { return t_max_; }
  int64_t x_lo() const { return x_lo_; }
  int64_t x_hi() const { return x_hi_; }
  bool contains(int64_t x, int64_t t) const { return x >= x_lo_ && x <= x_hi_ && t >= 0 && t < t_max_; }

  double weight(int64_t x, int64_t t) const;
  void fill(int64_t x_first, int64_t x_step, int64_t t, size_t n, double* w, double* wbar) const;
  // Row-major (t outer) weights over the whole window.
  const std::vector<double>& materialize() const;
  bool from_snapshot() const { return snapshot_; }

  // Snapshot overrides (tests construct environments with chosen weights).
  void set_weight(int64_t x, int64_t t, double w);

  void write_sbm1(const std::string& path) const;
  static EnvironmentGrid read_sbm1(const std::string& path);

 private:
  size_t index(int64_t x, int64_t t) const {
    return static_cast<size_t>(t) * static_cast<size_t>(x_hi_ - x_lo_ + 1) + static_cast<size_t>(x - x_lo_);
  }
  Environment env_;
  int64_t t_max_, x_lo_, x_hi_;
  mutable std::vector<double> table_;
  bool snapshot_ = false;
};

}  // namespace sticky
