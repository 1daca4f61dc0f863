// Beta weight generation. One 8-lane kernel serves every cell, and this file
// is built with -ffp-contract=off, so weights do not depend on the target ISA.
#include <algorithm>
#include <cmath>
#include <cstring>

#ifdef __AVX512F__
#include <immintrin.h>
#endif

#include "sticky/environment.hpp"
#include "sticky/errors.hpp"

namespace sticky {
namespace {

typedef double vd __attribute__((vector_size(64)));
typedef uint64_t vu __attribute__((vector_size(64)));
typedef int64_t vi __attribute__((vector_size(64)));
constexpr int kLanes = 8;

// Lanes hold 32-bit values; full 64-bit products.
[[gnu::always_inline]] inline vu mul32(const vu& a, uint64_t m) {
#ifdef __AVX512F__
  return (vu)_mm512_mul_epu32((__m512i)a, _mm512_set1_epi64(static_cast<long long>(m)));
#else
  return a * m;
#endif
}

// The kernels below run C independent 8-lane chains side by side; a single
// chain is latency bound.
constexpr int kWide = 4;
// Largest double below 1.
constexpr double kMaxWeight = 1.0 - 0x1.0p-53;

template <int C>
[[gnu::always_inline]] inline void philox(vu* c0, vu* c1, vu* c2, vu* c3, uint32_t k0, uint32_t k1) {
  const vu lo32 = vu{} + 0xffffffffull;
  for (int r = 0; r < 10; ++r) {
    for (int j = 0; j < C; ++j) {
      const vu p0 = mul32(c0[j], 0xD2511F53ull);
      const vu p1 = mul32(c2[j], 0xCD9E8D57ull);
      const vu n0 = (p1 >> 32) ^ c1[j] ^ static_cast<uint64_t>(k0);
      const vu n2 = (p0 >> 32) ^ c3[j] ^ static_cast<uint64_t>(k1);
      c1[j] = p1 & lo32;
      c3[j] = p0 & lo32;
      c0[j] = n0;
      c2[j] = n2;
    }
    k0 += 0x9E3779B9u;
    k1 += 0xBB67AE85u;
  }
}

[[gnu::always_inline]] inline vd unit8(const vu& hi, const vu& lo) {
  const vu b = ((hi << 32) | lo) >> 11;
  return (__builtin_convertvector(b, vd) + 0.5) * 0x1.0p-53;
}

// Natural log for positive normal arguments, in place.
template <int C>
[[gnu::always_inline]] inline void vlog(vd* x) {
  vd f[C], s[C], hfsq[C], dk[C];
  for (int j = 0; j < C; ++j) {
    const vu bits = (vu)x[j];
    vi e = ((vi)bits >> 52) - 1023;
    const vu mb = (bits & 0x000fffffffffffffull) | 0x3ff0000000000000ull;
    vd m = (vd)mb;
    const vi big = m > 1.41421356237309504880;
    m = big ? m * 0.5 : m;
    e -= big;
    f[j] = m - 1.0;
    dk[j] = __builtin_convertvector(e, vd);
  }
  for (int j = 0; j < C; ++j) {
    hfsq[j] = 0.5 * f[j] * f[j];
    s[j] = f[j] / (2.0 + f[j]);
  }
  for (int j = 0; j < C; ++j) {
    const vd z = s[j] * s[j];
    const vd w = z * z;
    const vd t1 = w * (3.999999999940941908e-01 + w * (2.222219843214978396e-01 + w * 1.531383769920937332e-01));
    const vd t2 = z * (6.666666666666735130e-01 +
                       w * (2.857142874366239149e-01 + w * (1.818357216161805012e-01 + w * 1.479819860511658591e-01)));
    const vd r = t2 + t1;
    x[j] = dk[j] * 6.93147180369123816490e-01 -
           ((hfsq[j] - (s[j] * (hfsq[j] + r) + dk[j] * 1.90821492927058770002e-10)) - f[j]);
  }
}

// exp for x <= 0 in place; results below 2^-1021 flush to zero.
template <int C>
[[gnu::always_inline]] inline void vexp(vd* x) {
  for (int j = 0; j < C; ++j) {
    const vd kd = (x[j] * 1.44269504088896338700 + 0x1.8p52) - 0x1.8p52;
    const vd hi = x[j] - kd * 6.93147180369123816490e-01;
    const vd lo = kd * 1.90821492927058770002e-10;
    const vd r = hi - lo;
    const vd t = r * r;
    const vd c = r - t * (1.66666666666666019037e-01 +
                          t * (-2.77777777770155933842e-03 +
                               t * (6.61375632143793436117e-05 +
                                    t * (-1.65339022054652515390e-06 + t * 4.13813679705723846039e-08))));
    const vd y = 1.0 - ((lo - (r * c) / (2.0 - c)) - hi);
    const vi ki = __builtin_convertvector(kd, vi);
    const vu yb = (vu)y + ((vu)ki << 52);
    x[j] = ki < -1021 ? vd{} : (vd)yb;
  }
}

template <int C>
struct Block {
  vd w[C], wbar[C];
  vi ok[C];
};

// Log-form Johnk: accept when U1^(1/a) + U2^(1/b) <= 1. Each lane depends
// only on its own counter.
struct JohnkParams {
  double ia, ib;          // 1/alpha, 1/beta
  double auto_a, auto_b;  // 2^-alpha, 2^-beta: below both, acceptance is certain
  bool symmetric;
};

template <int C>
[[gnu::always_inline]] inline void johnk(const PhiloxKey& key, uint32_t tag, const vu* xbits, uint32_t t,
                                         const vu* attempt, const JohnkParams& jp, Block<C>& out) {
  vu c0[C], c1[C], c2[C], c3[C];
  for (int j = 0; j < C; ++j) c0[j] = xbits[j], c1[j] = vu{} + t, c2[j] = attempt[j], c3[j] = vu{} + tag;
  philox<C>(c0, c1, c2, c3, key[0], key[1]);
  vd u1[C], u2[C], X[C], Y[C], d[C];
  vi xge[C];
  for (int j = 0; j < C; ++j) u1[j] = unit8(c0[j], c1[j]), u2[j] = unit8(c2[j], c3[j]);
  if (jp.symmetric) {
    for (int j = 0; j < C; ++j) d[j] = u1[j] / u2[j];
    vlog<C>(d);
    for (int j = 0; j < C; ++j) {
      const vd l = d[j] * jp.ia;  // X - Y
      xge[j] = l >= 0.0;
      d[j] = xge[j] ? -l : l;
    }
  } else {
    for (int j = 0; j < C; ++j) X[j] = u1[j], Y[j] = u2[j];
    vlog<C>(X);
    vlog<C>(Y);
    for (int j = 0; j < C; ++j) {
      X[j] *= jp.ia;
      Y[j] *= jp.ib;
      xge[j] = X[j] >= Y[j];
      d[j] = xge[j] ? Y[j] - X[j] : X[j] - Y[j];
    }
  }
  vexp<C>(d);  // q
  bool all = true;
  for (int j = 0; j < C; ++j) {
    const vd inv = 1.0 / (1.0 + d[j]);
    const vd small = d[j] * inv;
    out.w[j] = xge[j] ? inv : small;
    out.wbar[j] = xge[j] ? small : inv;
    out.ok[j] = (u1[j] <= jp.auto_a) & (u2[j] <= jp.auto_b);
    for (int l = 0; l < kLanes; ++l) all = all && out.ok[j][l];
  }
  if (all) return;
  vd M[C];
  if (jp.symmetric) {
    // X >= Y exactly when u1 >= u2
    for (int j = 0; j < C; ++j) M[j] = xge[j] ? u1[j] : u2[j];
    vlog<C>(M);
    for (int j = 0; j < C; ++j) M[j] *= jp.ia;
  } else {
    for (int j = 0; j < C; ++j) M[j] = xge[j] ? X[j] : Y[j];
  }
  vexp<C>(M);
  for (int j = 0; j < C; ++j) out.ok[j] = out.ok[j] | (M[j] * (1.0 + d[j]) <= 1.0);
}

template <int C>
size_t johnk_rows(const PhiloxKey& key, uint32_t tag, const JohnkParams& jp, int64_t x_first, int64_t x_step,
                  uint32_t tt, size_t n, double* w, double* wbar, uint64_t& clamps) {
  constexpr int kBlock = kLanes * C;
  vu lane{}, attempt[C]{};
  for (int l = 0; l < kLanes; ++l) lane[l] = static_cast<uint64_t>(l);
  const vi lane_i = (vi)lane;
  const vd floor = vd{} + 1e-300;
  const vd ceil = vd{} + kMaxWeight;
  alignas(64) double wb[kBlock], bb[kBlock];
  Block<C> r, s;
  // A short last block is padded; lanes past n are computed and dropped.
  for (size_t i0 = 0; i0 < n; i0 += kBlock) {
    const size_t valid = std::min(n - i0, static_cast<size_t>(kBlock));
    vu xb[C];
    for (int j = 0; j < C; ++j) {
      const int64_t base = x_first + static_cast<int64_t>(i0 + j * kLanes) * x_step;
      xb[j] = (lane * static_cast<uint64_t>(x_step) + static_cast<uint64_t>(base)) & 0xffffffffull;
    }
    johnk<C>(key, tag, xb, tt, attempt, jp, r);
    for (int j = 0; j < C; ++j) {
      for (int l = 0; l < kLanes; ++l) {
        if (r.ok[j][l] || static_cast<size_t>(j * kLanes + l) >= valid) continue;
        // Retry attempts 1, 2, ... for this cell and keep the first accepted.
        vu xs[C], at[C];
        for (uint64_t base = 1;; base += kBlock) {
          for (int m = 0; m < C; ++m) xs[m] = vu{} + xb[j][l], at[m] = lane + (base + m * kLanes);
          johnk<C>(key, tag, xs, tt, at, jp, s);
          int hit = -1;
          for (int m = 0; m < kBlock && hit < 0; ++m)
            if (s.ok[m / kLanes][m % kLanes]) hit = m;
          if (hit >= 0) {
            r.w[j][l] = s.w[hit / kLanes][hit % kLanes];
            r.wbar[j][l] = s.wbar[hit / kLanes][hit % kLanes];
            break;
          }
        }
      }
      const vi lw = r.w[j] < floor, lb = r.wbar[j] < floor;
      const vi hw = r.w[j] > ceil, hb = r.wbar[j] > ceil;
      // Masks are 0 or -1; subtracting them counts clamped lanes.
      const vi live = (lane_i + static_cast<int64_t>(j * kLanes)) < static_cast<int64_t>(valid);
      const vi hits = ((lw & live) + (lb & live)) + ((hw & live) + (hb & live));
      for (int l = 0; l < kLanes; ++l) clamps -= static_cast<uint64_t>(hits[l]);
      r.w[j] = lw ? floor : (hw ? ceil : r.w[j]);
      r.wbar[j] = lb ? floor : (hb ? ceil : r.wbar[j]);
    }
    if (valid == static_cast<size_t>(kBlock)) {
      std::memcpy(w + i0, r.w, sizeof r.w);
      std::memcpy(wbar + i0, r.wbar, sizeof r.wbar);
    } else {
      std::memcpy(wb, r.w, sizeof r.w);
      std::memcpy(bb, r.wbar, sizeof r.wbar);
      for (size_t l = 0; l < valid; ++l) w[i0 + l] = wb[l], wbar[i0 + l] = bb[l];
    }
  }
  return n;
}

double log_gamma_variate(CounterStream& rs, double a) {
  // Marsaglia-Tsang; shapes below 1 via G_a = G_{a+1} U^{1/a}.
  double boost_log = 0.0;
  if (a < 1.0) {
    boost_log = std::log(rs.uniform()) / a;
    a += 1.0;
  }
  const double d = a - 1.0 / 3.0, c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double z, v;
    do {
      z = rs.normal();
      v = 1.0 + c * z;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rs.uniform();
    if (std::log(u) < 0.5 * z * z + d - d * v + d * std::log(v)) return std::log(d * v) + boost_log;
  }
}

}  // namespace

Environment::Environment(double alpha, double beta, uint64_t seed, uint64_t stream, Domain domain)
    : alpha_(alpha), beta_(beta), seed_(seed), stream_(stream), key_(derive_key(seed, stream)),
      tag_(static_cast<uint32_t>(domain)), johnk_(alpha <= 1.0 && beta <= 1.0) {
  require(std::isfinite(alpha) && alpha > 0.0 && std::isfinite(beta) && beta > 0.0,
          "beta parameters must be positive");
}

void Environment::fill(int64_t x_first, int64_t x_step, int64_t t, size_t n, double* w, double* wbar) const {
  const uint32_t tt = static_cast<uint32_t>(t);
  if (!johnk_) {
    for (size_t i = 0; i < n; ++i) {
      const int64_t x = x_first + static_cast<int64_t>(i) * x_step;
      CounterStream rs(key_, static_cast<uint32_t>(x), tt, Domain::gamma);
      const double la = log_gamma_variate(rs, alpha_), lb = log_gamma_variate(rs, beta_);
      const double e = std::exp(-std::abs(la - lb));
      const double big = 1.0 / (1.0 + e), small = e / (1.0 + e);
      w[i] = la >= lb ? big : small;
      wbar[i] = la >= lb ? small : big;
      for (double* v : {w + i, wbar + i}) {
        if (*v < 1e-300) *v = 1e-300, ++clamps_;
        if (*v > kMaxWeight) *v = kMaxWeight, ++clamps_;
      }
    }
    return;
  }
  const JohnkParams jp{1.0 / alpha_, 1.0 / beta_, std::exp2(-alpha_), std::exp2(-beta_), alpha_ == beta_};
  if (n > static_cast<size_t>(kLanes))
    johnk_rows<kWide>(key_, tag_, jp, x_first, x_step, tt, n, w, wbar, clamps_);
  else
    johnk_rows<1>(key_, tag_, jp, x_first, x_step, tt, n, w, wbar, clamps_);
}

double Environment::weight(int64_t x, int64_t t) const {
  double w, wb;
  fill(x, 1, t, 1, &w, &wb);
  return w;
}

}  // namespace sticky
