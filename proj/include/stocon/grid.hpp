#pragma once

#include <cstddef>
#include <vector>

#include "stocon/mdp.hpp"

namespace stocon {

struct GridAxis {
  enum class Mode { Nearest, Interp2 };
  Mode mode = Mode::Nearest;
  std::vector<double> points;  // strictly ascending

  static GridAxis nearest(std::vector<double> pts);
  static GridAxis interp2(std::vector<double> pts);
};

struct GridHit {
  std::size_t index;
  double weight;
};

// Product grid over per-axis point sets. Axis 0 is the slowest-varying index.
// Lookup maps a query point to weighted grid nodes: a Nearest axis snaps to
// its closest point (midpoint ties to the lower index), an Interp2 axis
// spreads inverse-distance weights over the two closest points. Per-axis
// weights multiply, sum to 1, and an exact hit collapses to weight 1.
struct StateGrid {
  std::vector<GridAxis> axes;

  static constexpr int kMaxHits = 16;

  static StateGrid product(std::vector<GridAxis> axes);
  static StateGrid single(GridAxis axis);

  int dim() const { return static_cast<int>(axes.size()); }
  std::size_t size() const;
  void node(std::size_t flat, double* out) const;
  int lookup(const double* x, GridHit* hits) const;  // hits holds >= kMaxHits
  std::size_t nearest_node(const double* x) const;
};

// Index of the nearest point in a sorted axis; ties go to the lower index.
std::size_t axis_nearest(const std::vector<double>& points, double x);

// Interpolated table read: sum of weight * table[index] over lookup hits.
double grid_value(const StateGrid& grid, const Vec& table, const double* x);

}  // namespace stocon
