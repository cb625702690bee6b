#include "stocon/tables.hpp"

namespace stocon {

double GridTables::value_at(int n, const double* x) const {
  if (n < 0 || n >= static_cast<int>(value.size()))
    throw SolverError("GridTables::value_at: time index out of range");
  return grid_value(grids[n], value[n], x);
}

void GridTables::control_at(int n, const double* x, double* a) const {
  if (n < 0 || n >= static_cast<int>(control.size()))
    throw SolverError("GridTables::control_at: time index out of range");
  const std::size_t node = grids[n].nearest_node(x);
  for (int k = 0; k < control_dim; ++k)
    a[k] = control[n][node * control_dim + k];
}

}  // namespace stocon
