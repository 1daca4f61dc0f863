#pragma once

#include <limits>
#include <vector>

#include "sticky/specfun.hpp"

namespace sticky {

struct QuadNode {
  Complex z;
  Complex w;  // includes dz/dtau
};

struct Contour {
  std::vector<QuadNode> nodes;
  int segments = 0;
  int nodes_per_segment = 0;
  bool closed = false;
  double cutoff = std::numeric_limits<double>::infinity();
  double tail_bound = 0.0;
};

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

// Positively oriented circle split into equal angular panels starting at
// angle -pi. Nodes closer than exclude_angle (radians) to angle pi are dropped.
Contour circle_contour(Complex center, double radius, int panels, int nodes_per_panel, double exclude_angle = 0.0);

// Upward line c + i y on [-cutoff, cutoff], graded panels finer near y = 0.
Contour vertical_line_contour(double c, double cutoff, int nodes_per_panel);

// Two rays from vertex: from vertex + R e^{-i phi} in to vertex, then out to
// vertex + R e^{i phi}.
Contour ray_pair_contour(Complex vertex, double phi, double cutoff, double panel_width, int nodes_per_panel);

// Gauss-Legendre panels on the real segment [a, b].
Contour segment_contour(double a, double b, int panels, int nodes_per_panel);

}  // namespace sticky
