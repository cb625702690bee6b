#pragma once

#include <vector>

#include "stocon/grid.hpp"
#include "stocon/mdp.hpp"

namespace stocon {

// Per-time-step value (and optionally control) tables over state grids.
// Values are stored in the problem's own sense.
struct GridTables {
  std::vector<StateGrid> grids;  // size N + 1
  std::vector<Vec> value;        // value[n][flat], size N + 1
  std::vector<Vec> control;      // control[n][flat * control_dim], size N
  int control_dim = 0;

  int horizon() const { return static_cast<int>(grids.size()) - 1; }
  // Interpolated table read at time n per the grid's axis modes.
  double value_at(int n, const double* x) const;
  // Control stored at the node nearest to x; n < horizon().
  void control_at(int n, const double* x, double* a) const;
};

}  // namespace stocon
