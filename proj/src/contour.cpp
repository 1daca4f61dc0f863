#include "sticky/contour.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "sticky/errors.hpp"

namespace sticky {

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  require(n >= 1, "gauss_legendre: need at least one node");
  static std::mutex mu;
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) {
      x = it->second.first;
      w = it->second.second;
      return;
    }
  }
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    if (n == 1) p0 = 1.0;
    dp = n * (z * p1 - p0) / (z * z - 1.0);
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  std::lock_guard<std::mutex> lock(mu);
  cache[n] = {x, w};
}

Contour circle_contour(Complex center, double radius, int panels, int nodes_per_panel, double exclude_angle) {
  require(radius > 0.0 && panels >= 1 && nodes_per_panel >= 1, "circle_contour: bad arguments");
  std::vector<double> gx, gw;
  gauss_legendre(nodes_per_panel, gx, gw);
  Contour c;
  c.closed = true;
  c.segments = panels;
  c.nodes_per_segment = nodes_per_panel;
  const double width = 2.0 * std::numbers::pi / panels;
  for (int p = 0; p < panels; ++p) {
    const double a = -std::numbers::pi + p * width;
    for (int i = 0; i < nodes_per_panel; ++i) {
      const double phi = a + 0.5 * width * (gx[i] + 1.0);
      if (std::numbers::pi - std::abs(phi) < exclude_angle) continue;
      const Complex e = std::polar(1.0, phi);
      c.nodes.push_back({center + radius * e, Complex(0.0, 1.0) * radius * e * (0.5 * width * gw[i])});
    }
  }
  return c;
}

Contour vertical_line_contour(double c, double cutoff, int nodes_per_panel) {
  require(cutoff > 0.0 && nodes_per_panel >= 1, "vertical_line_contour: bad arguments");
  std::vector<double> breaks{0.0};
  while (breaks.back() < cutoff) {
    const double b = breaks.back();
    const double step = b < 2.0 ? 0.5 : (b < 6.0 ? 1.0 : (b < 14.0 ? 2.0 : 4.0));
    breaks.push_back(std::min(cutoff, b + step));
  }
  std::vector<double> gx, gw;
  gauss_legendre(nodes_per_panel, gx, gw);
  Contour out;
  out.cutoff = cutoff;
  out.nodes_per_segment = nodes_per_panel;
  out.segments = 2 * static_cast<int>(breaks.size() - 1);
  std::vector<std::pair<double, double>> pos;
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    const double a = breaks[p], b = breaks[p + 1];
    for (int i = 0; i < nodes_per_panel; ++i) pos.push_back({a + 0.5 * (b - a) * (gx[i] + 1.0), 0.5 * (b - a) * gw[i]});
  }
  for (auto it = pos.rbegin(); it != pos.rend(); ++it)
    out.nodes.push_back({Complex(c, -it->first), Complex(0.0, it->second)});
  for (const auto& p : pos) out.nodes.push_back({Complex(c, p.first), Complex(0.0, p.second)});
  return out;
}

Contour ray_pair_contour(Complex vertex, double phi, double cutoff, double panel_width, int nodes_per_panel) {
  require(cutoff > 0.0 && panel_width > 0.0 && nodes_per_panel >= 1, "ray_pair_contour: bad arguments");
  std::vector<double> gx, gw;
  gauss_legendre(nodes_per_panel, gx, gw);
  const int panels = static_cast<int>(std::ceil(cutoff / panel_width));
  const double h = cutoff / panels;
  std::vector<std::pair<double, double>> pos;
  for (int p = 0; p < panels; ++p)
    for (int i = 0; i < nodes_per_panel; ++i) pos.push_back({p * h + 0.5 * h * (gx[i] + 1.0), 0.5 * h * gw[i]});
  Contour out;
  out.cutoff = cutoff;
  out.segments = 2 * panels;
  out.nodes_per_segment = nodes_per_panel;
  const Complex down = std::polar(1.0, -phi), up = std::polar(1.0, phi);
  for (auto it = pos.rbegin(); it != pos.rend(); ++it) out.nodes.push_back({vertex + it->first * down, -down * it->second});
  for (const auto& p : pos) out.nodes.push_back({vertex + p.first * up, up * p.second});
  return out;
}

Contour segment_contour(double a, double b, int panels, int nodes_per_panel) {
  require(b > a && panels >= 1 && nodes_per_panel >= 1, "segment_contour: bad arguments");
  std::vector<double> gx, gw;
  gauss_legendre(nodes_per_panel, gx, gw);
  Contour out;
  out.segments = panels;
  out.nodes_per_segment = nodes_per_panel;
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p)
    for (int i = 0; i < nodes_per_panel; ++i)
      out.nodes.push_back({Complex(a + p * h + 0.5 * h * (gx[i] + 1.0), 0.0), Complex(0.5 * h * gw[i], 0.0)});
  return out;
}

}  // namespace sticky
