#include <bit>
#include <cstring>
#include <fstream>

#include "sticky/environment.hpp"
#include "sticky/errors.hpp"

namespace sticky {
namespace {

static_assert(std::endian::native == std::endian::little, "SBM1 I/O assumes a little-endian host");

constexpr char kMagic[4] = {'S', 'B', 'M', '1'};
constexpr uint32_t kVersion = 1;

template <class T>
void put(std::ofstream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::ifstream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) fail(ErrorCode::io, "truncated SBM1 header");
  return v;
}

}  // namespace

EnvironmentGrid::EnvironmentGrid(double alpha, double beta, int64_t t_max, int64_t x_lo, int64_t x_hi,
                                 uint64_t seed, uint64_t stream)
    : env_(alpha, beta, seed, stream), t_max_(t_max), x_lo_(x_lo), x_hi_(x_hi) {
  require(t_max >= 0, "t_max must be nonnegative");
  require(x_lo <= x_hi, "empty x window");
}

double EnvironmentGrid::weight(int64_t x, int64_t t) const {
  if (!contains(x, t)) fail(ErrorCode::window, "site outside the environment window");
  if (!table_.empty()) return table_[index(x, t)];
  return env_.weight(x, t);
}

void EnvironmentGrid::fill(int64_t x_first, int64_t x_step, int64_t t, size_t n, double* w, double* wbar) const {
  if (n == 0) return;
  const int64_t x_last = x_first + static_cast<int64_t>(n - 1) * x_step;
  if (!contains(x_first, t) || !contains(x_last, t)) fail(ErrorCode::window, "row leaves the environment window");
  if (table_.empty()) return env_.fill(x_first, x_step, t, n, w, wbar);
  for (size_t i = 0; i < n; ++i) {
    w[i] = table_[index(x_first + static_cast<int64_t>(i) * x_step, t)];
    wbar[i] = 1.0 - w[i];
  }
}

const std::vector<double>& EnvironmentGrid::materialize() const {
  if (table_.empty() && t_max_ > 0) {
    const size_t width = static_cast<size_t>(x_hi_ - x_lo_ + 1);
    table_.resize(width * static_cast<size_t>(t_max_));
    std::vector<double> wbar(width);
    for (int64_t t = 0; t < t_max_; ++t) env_.fill(x_lo_, 1, t, width, &table_[index(x_lo_, t)], wbar.data());
  }
  return table_;
}

void EnvironmentGrid::set_weight(int64_t x, int64_t t, double w) {
  if (!contains(x, t)) fail(ErrorCode::window, "site outside the environment window");
  require(w > 0.0 && w < 1.0, "weights must lie in (0, 1)");
  materialize();
  table_[index(x, t)] = w;
  snapshot_ = true;
}

void EnvironmentGrid::write_sbm1(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorCode::io, "cannot open " + path);
  os.write(kMagic, 4);
  put(os, kVersion);
  put(os, env_.alpha());
  put(os, env_.beta());
  put(os, t_max_);
  put(os, x_lo_);
  put(os, x_hi_);
  put(os, env_.seed());
  put(os, env_.stream());
  const auto& tab = materialize();
  os.write(reinterpret_cast<const char*>(tab.data()), static_cast<std::streamsize>(tab.size() * sizeof(double)));
  if (!os) fail(ErrorCode::io, "write failed: " + path);
}

EnvironmentGrid EnvironmentGrid::read_sbm1(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::io, "cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) fail(ErrorCode::schema, "not an SBM1 file: " + path);
  if (get<uint32_t>(is) != kVersion) fail(ErrorCode::schema, "unsupported SBM1 version");
  const double a = get<double>(is), b = get<double>(is);
  const int64_t t_max = get<int64_t>(is), lo = get<int64_t>(is), hi = get<int64_t>(is);
  const uint64_t seed = get<uint64_t>(is), stream = get<uint64_t>(is);
  if (!(a > 0.0 && b > 0.0 && t_max >= 0 && lo <= hi)) fail(ErrorCode::schema, "invalid SBM1 header");
  EnvironmentGrid g(a, b, t_max, lo, hi, seed, stream);
  g.table_.resize(static_cast<size_t>(hi - lo + 1) * static_cast<size_t>(t_max));
  is.read(reinterpret_cast<char*>(g.table_.data()), static_cast<std::streamsize>(g.table_.size() * sizeof(double)));
  if (!is) fail(ErrorCode::io, "truncated SBM1 payload");
  if (is.peek() != std::char_traits<char>::eof()) fail(ErrorCode::schema, "trailing bytes after SBM1 payload");
  for (double w : g.table_)
    if (!(w > 0.0 && w < 1.0)) fail(ErrorCode::schema, "SBM1 weight outside (0, 1)");
  g.snapshot_ = true;
  return g;
}

}  // namespace sticky
