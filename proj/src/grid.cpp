#include "stocon/grid.hpp"

#include <algorithm>
#include <cmath>

namespace stocon {

namespace {

void check_axis(const std::vector<double>& pts) {
  if (pts.empty()) throw SolverError("grid axis needs at least one point");
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (!(pts[i - 1] < pts[i])) throw SolverError("grid axis points must be strictly ascending");
}

}  // namespace

GridAxis GridAxis::nearest(std::vector<double> pts) {
  check_axis(pts);
  GridAxis a;
  a.mode = Mode::Nearest;
  a.points = std::move(pts);
  return a;
}

GridAxis GridAxis::interp2(std::vector<double> pts) {
  check_axis(pts);
  GridAxis a;
  a.mode = Mode::Interp2;
  a.points = std::move(pts);
  return a;
}

StateGrid StateGrid::product(std::vector<GridAxis> axes) {
  if (axes.empty()) throw SolverError("state grid needs at least one axis");
  int hits = 1;
  for (const auto& a : axes) hits *= a.mode == GridAxis::Mode::Interp2 ? 2 : 1;
  if (hits > kMaxHits) throw SolverError("too many interpolating axes");
  StateGrid g;
  g.axes = std::move(axes);
  return g;
}

StateGrid StateGrid::single(GridAxis axis) {
  std::vector<GridAxis> v;
  v.push_back(std::move(axis));
  return product(std::move(v));
}

std::size_t StateGrid::size() const {
  std::size_t n = 1;
  for (const auto& a : axes) n *= a.points.size();
  return n;
}

void StateGrid::node(std::size_t flat, double* out) const {
  for (int j = dim() - 1; j >= 0; --j) {
    const std::size_t n = axes[j].points.size();
    out[j] = axes[j].points[flat % n];
    flat /= n;
  }
}

std::size_t axis_nearest(const std::vector<double>& points, double x) {
  const auto it = std::lower_bound(points.begin(), points.end(), x);
  if (it == points.begin()) return 0;
  if (it == points.end()) return points.size() - 1;
  const std::size_t hi = static_cast<std::size_t>(it - points.begin());
  const std::size_t lo = hi - 1;
  // Equidistant queries snap to the lower index.
  return (x - points[lo] <= points[hi] - x) ? lo : hi;
}

int StateGrid::lookup(const double* x, GridHit* hits) const {
  GridHit cur[kMaxHits];
  int count = 1;
  cur[0] = {0, 1.0};
  for (int j = 0; j < dim(); ++j) {
    const auto& pts = axes[j].points;
    const std::size_t n = pts.size();
    std::size_t idx[2];
    double w[2];
    int m;
    if (axes[j].mode == GridAxis::Mode::Nearest || n == 1) {
      idx[0] = axis_nearest(pts, x[j]);
      w[0] = 1.0;
      m = 1;
    } else {
      // True two nearest points: the runner-up is always adjacent to the
      // winner in a sorted axis.
      const std::size_t i1 = axis_nearest(pts, x[j]);
      std::size_t i2;
      if (i1 == 0) {
        i2 = 1;
      } else if (i1 == n - 1) {
        i2 = n - 2;
      } else {
        const double dl = std::abs(x[j] - pts[i1 - 1]);
        const double dr = std::abs(x[j] - pts[i1 + 1]);
        i2 = dl <= dr ? i1 - 1 : i1 + 1;
      }
      const double d1 = std::abs(x[j] - pts[i1]);
      const double d2 = std::abs(x[j] - pts[i2]);
      const double tiny = 1e-12 * (1.0 + std::abs(x[j]));
      if (d1 <= tiny) {
        idx[0] = i1;
        w[0] = 1.0;
        m = 1;
      } else {
        idx[0] = i1;
        idx[1] = i2;
        w[0] = d2 / (d1 + d2);
        w[1] = d1 / (d1 + d2);
        m = 2;
      }
    }
    int next = 0;
    GridHit tmp[kMaxHits];
    for (int c = 0; c < count; ++c)
      for (int k = 0; k < m; ++k) tmp[next++] = {cur[c].index * n + idx[k], cur[c].weight * w[k]};
    std::copy_n(tmp, next, cur);
    count = next;
  }
  std::copy_n(cur, count, hits);
  return count;
}

std::size_t StateGrid::nearest_node(const double* x) const {
  std::size_t flat = 0;
  for (int j = 0; j < dim(); ++j)
    flat = flat * axes[j].points.size() + axis_nearest(axes[j].points, x[j]);
  return flat;
}

double grid_value(const StateGrid& grid, const Vec& table, const double* x) {
  GridHit hits[StateGrid::kMaxHits];
  const int m = grid.lookup(x, hits);
  double v = 0.0;
  for (int i = 0; i < m; ++i) v += hits[i].weight * table[hits[i].index];
  return v;
}

}  // namespace stocon
