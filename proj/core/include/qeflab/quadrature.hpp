#pragma once

#include <vector>

#include "qeflab/linalg.hpp"

namespace qeflab {

/// Composite Gauss–Legendre rule on [0, T]: `panels` equal panels with
/// `per_panel` nodes each. Nodes are strictly interior to their panel.
struct Grid {
  double horizon = 0.0;
  int panels = 0;
  int per_panel = 0;
  Vector nodes;
  Vector weights;
  Vector breaks;  // panels + 1 panel boundaries, breaks(0) = 0

  Eigen::Index size() const { return nodes.size(); }
  bool same_as(const Grid& other) const;
};

Grid make_grid(double horizon, int panels, int per_panel);

/// Nodes and weights of the q-point Gauss–Legendre rule on [-1, 1].
std::pair<Vector, Vector> gauss_legendre(int q);

/// Probabilists' Gauss–Hermite rule: Σ w_i g(x_i) ≈ E g(γ), γ ~ N(0, 1).
/// The Gaussian density is folded into the weights, which sum to one.
std::pair<Vector, Vector> gauss_hermite_normal(int q);

}  // namespace qeflab
