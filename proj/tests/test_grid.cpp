#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "stocon/grid.hpp"

using namespace stocon;

TEST_CASE("flat index round-trips through node coordinates") {
  auto g = StateGrid::product({GridAxis::nearest({0.0, 1.0, 2.0}), GridAxis::nearest({-1.0, 1.0}),
                               GridAxis::nearest({5.0, 6.0, 7.0, 8.0})});
  CHECK(g.size() == 24);
  double x[3];
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    g.node(flat, x);
    CHECK(g.nearest_node(x) == flat);
    GridHit hits[StateGrid::kMaxHits];
    const int m = g.lookup(x, hits);
    CHECK(m == 1);
    CHECK(hits[0].index == flat);
    CHECK(hits[0].weight == 1.0);
  }
}

TEST_CASE("axis nearest snaps midpoints to the lower index") {
  const std::vector<double> pts = {0.0, 1.0, 3.0};
  CHECK(axis_nearest(pts, -5.0) == 0);
  CHECK(axis_nearest(pts, 0.49) == 0);
  CHECK(axis_nearest(pts, 0.5) == 0);
  CHECK(axis_nearest(pts, 0.51) == 1);
  CHECK(axis_nearest(pts, 2.0) == 1);
  CHECK(axis_nearest(pts, 2.1) == 2);
  CHECK(axis_nearest(pts, 99.0) == 2);
}

TEST_CASE("interp2 uses the true two nearest points") {
  auto g = StateGrid::single(GridAxis::interp2({0.0, 1.0, 10.0}));
  GridHit hits[StateGrid::kMaxHits];
  double x = 1.5;  // nearest 1, runner-up 0 (not 10)
  int m = g.lookup(&x, hits);
  REQUIRE(m == 2);
  CHECK(hits[0].index == 1);
  CHECK(hits[1].index == 0);
  CHECK(hits[0].weight == doctest::Approx(1.5 / 2.0));
  CHECK(hits[1].weight == doctest::Approx(0.5 / 2.0));
  CHECK(hits[0].weight + hits[1].weight == doctest::Approx(1.0));

  x = 1.0;  // exact hit collapses to one node
  m = g.lookup(&x, hits);
  CHECK(m == 1);
  CHECK(hits[0].index == 1);
  CHECK(hits[0].weight == 1.0);

  x = 50.0;  // beyond the end: extrapolation over the last two points
  m = g.lookup(&x, hits);
  REQUIRE(m == 2);
  CHECK(hits[0].index == 2);
  CHECK(hits[1].index == 1);
  CHECK(hits[0].weight > hits[1].weight);
}

TEST_CASE("product lookup multiplies axis weights") {
  auto g = StateGrid::product(
      {GridAxis::interp2({0.0, 1.0}), GridAxis::nearest({0.0, 1.0, 2.0})});
  GridHit hits[StateGrid::kMaxHits];
  double x[2] = {0.25, 1.9};
  const int m = g.lookup(x, hits);
  REQUIRE(m == 2);
  // Axis 0: nearest 0 (w 0.75), runner-up 1 (w 0.25). Axis 1: node 2.
  CHECK(hits[0].index == 0 * 3 + 2);
  CHECK(hits[0].weight == doctest::Approx(0.75));
  CHECK(hits[1].index == 1 * 3 + 2);
  CHECK(hits[1].weight == doctest::Approx(0.25));
}

TEST_CASE("grid_value interpolates a table") {
  auto g = StateGrid::single(GridAxis::interp2({0.0, 2.0}));
  Vec table = {10.0, 30.0};
  double x = 0.5;
  CHECK(grid_value(g, table, &x) == doctest::Approx(0.75 * 10.0 + 0.25 * 30.0));
  x = 0.0;
  CHECK(grid_value(g, table, &x) == 10.0);
}

TEST_CASE("axis points must ascend") {
  CHECK_THROWS_AS(GridAxis::nearest({1.0, 1.0}), SolverError);
  CHECK_THROWS_AS(GridAxis::nearest({2.0, 1.0}), SolverError);
  CHECK_THROWS_AS(GridAxis::nearest({}), SolverError);
}
