#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "stocon/oracles.hpp"
#include "stocon/problems.hpp"
#include "stocon/quant.hpp"

using namespace stocon;

TEST_CASE("log-transform value matches the known reference points") {
  SemilinearSpec spec;
  const double refs[3][2] = {{1.0, -0.464}, {0.5, -0.509}, {0.1, -0.586}};
  for (auto& r : refs) {
    spec.gamma = r[0];
    auto v = hopf_cole_value(spec, 0.0, {0.0}, 2000000, Rng(42));
    CHECK(std::abs(v.value - r[1]) < 0.01);
    CHECK(v.std_error < 0.005);
    CHECK(v.std_error > 0.0);
  }
}

TEST_CASE("log-transform value in dimension 2") {
  SemilinearSpec spec;
  spec.d = 2;
  spec.terminal = SemilinearSpec::Terminal::LogQuadratic;
  auto v = hopf_cole_value(spec, 0.0, {0.0, 0.0}, 1000000, Rng(7));
  CHECK(std::abs(v.value - 0.3992) < 0.01);
}

TEST_CASE("log-transform value is exact at the horizon") {
  SemilinearSpec spec;
  spec.gamma = 0.5;
  auto p = make_semilinear(spec);
  const double x = 0.36;
  auto v = hopf_cole_value(spec, spec.T, {x}, 10000, Rng(1));
  CHECK(v.value == p.terminal_cost(&x));
  CHECK(v.std_error == 0.0);
}

TEST_CASE("log-transform standard error decays at the Monte Carlo rate") {
  SemilinearSpec spec;
  auto coarse = hopf_cole_value(spec, 0.0, {0.0}, 10000, Rng(5));
  auto fine = hopf_cole_value(spec, 0.0, {0.0}, 1000000, Rng(5));
  const double ratio = coarse.std_error / fine.std_error;
  CHECK(ratio > 8.0);
  CHECK(ratio < 12.0);
}

TEST_CASE("log-transform validates inputs") {
  SemilinearSpec spec;
  CHECK_THROWS_AS(hopf_cole_value(spec, 0.0, {0.0}, 100, Rng(1)), SolverError);
  CHECK_THROWS_AS(hopf_cole_value(spec, 2.0, {0.0}, 10000, Rng(1)), SolverError);
  CHECK_THROWS_AS(hopf_cole_value(spec, 0.0, {0.0, 1.0}, 10000, Rng(1)),
                  SolverError);
}

TEST_CASE("riccati solution matches frozen reference values") {
  LqSpec spec;
  spec.d = 10;
  auto sol = riccati_solve(spec, 400);
  CHECK(sol.value_at(0.0, Vec(10, 1.0)) == doctest::Approx(57.13443367).epsilon(2e-4));

  LqSpec s1;
  auto sol1 = riccati_solve(s1, 400);
  CHECK(sol1.value_at(0.0, {1.0}) == doctest::Approx(5.61021047).epsilon(2e-4));
  // Scalar feedback at t = 0 is -K0 / (lambda + K0).
  const double k0 = sol1.K_at_start()[0];
  CHECK(sol1.feedback_at(0.0, {1.0}) ==
        doctest::Approx(-k0 / (1.0 + k0)).epsilon(1e-12));
  CHECK(sol1.value_at(spec.T, {2.0}) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("riccati solution at d = 100") {
  LqSpec spec;
  spec.d = 100;
  auto sol = riccati_solve(spec, 400);
  CHECK(sol.value_at(0.0, Vec(100, 0.5)) ==
        doctest::Approx(142.75027528).epsilon(2e-4));
  CHECK(sol.value_at(0.0, Vec(100, 0.1)) ==
        doctest::Approx(5.71001101).epsilon(2e-4));
}

TEST_CASE("riccati self-convergence under step doubling") {
  LqSpec spec;
  spec.d = 10;
  auto a = riccati_solve(spec, 200);
  auto b = riccati_solve(spec, 400);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double ka = a.K_at_start()[i];
    const double kb = b.K_at_start()[i];
    worst = std::max(worst, std::abs(ka - kb) / (1.0 + std::abs(kb)));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("riccati with zero couplings reduces to linear growth") {
  // With B = 0 and C = 0 the solution is K(t) = P + (T - t) Q.
  std::vector<Vec> q(3, Vec(3, 0.0)), p(3, Vec(3, 0.0));
  for (int i = 0; i < 3; ++i) {
    q[i][i] = 2.0;
    p[i][i] = 0.5;
  }
  auto sol = riccati_solve_general(3, 1.0, 1.0, q, p, 100, true, true);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double expect = i == j ? 0.5 + 2.0 : 0.0;
      CHECK(sol.K_at_start()[i * 3 + j] == doctest::Approx(expect).epsilon(1e-10));
    }
}

TEST_CASE("riccati rejects malformed coefficient matrices") {
  std::vector<Vec> asym = {{1.0, 0.3}, {0.0, 1.0}};
  std::vector<Vec> eye = {{1.0, 0.0}, {0.0, 1.0}};
  std::vector<Vec> neg = {{-1.0, 0.0}, {0.0, 1.0}};
  CHECK_THROWS_AS(riccati_solve_general(2, 1.0, 1.0, asym, eye, 100, false, false),
                  SolverError);
  CHECK_THROWS_AS(riccati_solve_general(2, 1.0, 1.0, eye, neg, 100, false, false),
                  SolverError);
  LqSpec spec;
  CHECK_THROWS_AS(riccati_solve(spec, 50), SolverError);
}

TEST_CASE("hedging recursion matches frozen reference values") {
  HedgingSpec spec;
  auto sol = hedging_recursion(spec);
  CHECK(std::abs(sol.K[0] - 0.531441) < 1e-12);
  for (int n = 0; n < 6; ++n)
    CHECK(sol.K[n] == doctest::Approx(std::pow(0.9, 6 - n)).epsilon(1e-12));
  CHECK(sol.w0_star == doctest::Approx(4.6183315777292355).epsilon(1e-9));
  CHECK(sol.value0_at_w0_star ==
        doctest::Approx(0.10770757833708089).epsilon(1e-9));
  CHECK(sol.value(0, 4.5, 100.0) ==
        doctest::Approx(0.11514900775372006).epsilon(1e-9));
  // The quadratic is minimized at w0_star.
  CHECK(sol.value(0, sol.w0_star + 0.5, 100.0) > sol.value0_at_w0_star);
  CHECK(sol.value(0, sol.w0_star - 0.5, 100.0) > sol.value0_at_w0_star);
}

TEST_CASE("hedging lattice indexing round-trips") {
  HedgingSpec spec;
  auto sol = hedging_recursion(spec);
  for (int n = 0; n <= 6; ++n) {
    int count = 0;
    for (int i = 0; i <= n; ++i)
      for (int j = 0; i + j <= n; ++j) {
        CHECK(sol.node_index(n, i, j) == count);
        ++count;
        int li, lj;
        sol.locate(n, sol.node_price(i, j), &li, &lj);
        CHECK(li == i);
        CHECK(lj == j);
      }
    CHECK(count == sol.nodes(n));
  }
}

TEST_CASE("hedging recursion with zero payoff is identically zero") {
  HedgingSpec spec;
  spec.strike = 1e9;
  auto sol = hedging_recursion(spec);
  CHECK(sol.w0_star == 0.0);
  CHECK(sol.value0_at_w0_star == 0.0);
  CHECK(sol.value(0, 0.0, 100.0) == 0.0);
}

TEST_CASE("hedging recursion rejects a degenerate return") {
  HedgingSpec spec;
  spec.r_up = 0.0;
  spec.r_dn = 0.0;
  CHECK_THROWS_AS(hedging_recursion(spec), SolverError);
}

TEST_CASE("hedging variance factor lies in (0, 1] for random trinomials") {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    HedgingSpec spec;
    spec.N = 3;
    spec.p_up = 0.05 + 0.6 * rng.uniform();
    spec.p_dn = (1.0 - spec.p_up) * (0.1 + 0.8 * rng.uniform());
    spec.r_up = 0.01 + 0.2 * rng.uniform();
    spec.r_dn = -(0.01 + 0.2 * rng.uniform());
    auto sol = hedging_recursion(spec);
    const double factor = sol.K[1] / sol.K[2];
    CHECK(factor > 0.0);
    CHECK(factor <= 1.0);
    CHECK(sol.K[0] > 0.0);
  }
}

namespace {

// Forward Monte Carlo of the hedging problem under a wealth-feedback policy.
double mc_hedging_cost(const HedgingSpec& spec,
                       const std::function<double(int, double, double)>& policy,
                       double w0, int paths, Rng rng, double* se) {
  auto p = make_hedging(spec);
  double sum = 0.0, sumsq = 0.0;
  for (int s = 0; s < paths; ++s) {
    Rng pr = rng.stream(rng_tag::kEval, s);
    double x[2] = {w0, spec.price0};
    for (int n = 0; n < spec.N; ++n) {
      double a = policy(n, x[0], x[1]);
      double u = pr.uniform();
      double y[2];
      p.dynamics(n, x, &a, &u, y);
      x[0] = y[0];
      x[1] = y[1];
    }
    const double c = p.terminal_cost(x);
    sum += c;
    sumsq += c * c;
  }
  const double mean = sum / paths;
  *se = std::sqrt(std::max(0.0, (sumsq - paths * mean * mean) / (paths - 1)) /
                  paths);
  return mean;
}

}  // namespace

TEST_CASE("hedging feedback beats its perturbations under simulation") {
  HedgingSpec spec;
  auto sol = hedging_recursion(spec);
  const double w0 = sol.w0_star;
  double se_opt, se_pert;
  const double opt = mc_hedging_cost(
      spec,
      [&](int n, double w, double p) { return sol.feedback(n, w, p); }, w0,
      200000, Rng(31), &se_opt);
  // Simulated cost agrees with the recursion value.
  CHECK(std::abs(opt - sol.value0_at_w0_star) < 3.0 * se_opt);
  for (double shift : {-0.5, 0.5}) {
    const double pert = mc_hedging_cost(
        spec,
        [&](int n, double w, double p) { return sol.feedback(n, w, p) + shift; },
        w0, 200000, Rng(31), &se_pert);
    CHECK(opt <= pert + 3.0 * (se_opt + se_pert));
  }
}

TEST_CASE("grid dp on the scalar lq problem") {
  ClvqParams qp;
  auto noise = gaussian_grid(1, 21, qp, Rng(88));

  // Two grid artifacts to keep away from the read region: spacing must be
  // well below h * |x| or nearest projection lets the uncontrolled drift
  // round back onto its own node; and the value deficit at the capped domain
  // boundary diffuses inward through the noise tails over the backward
  // sweeps, so the boundary sits far out on a coarse far field.
  Vec pts;
  for (double x = -15.0; x < -4.0 - 1e-9; x += 0.05) pts.push_back(x);
  for (double x = -4.0; x < 4.0 - 1e-9; x += 0.004) pts.push_back(x);
  for (double x = 4.0; x <= 15.0 + 1e-9; x += 0.05) pts.push_back(x);
  auto grid = StateGrid::single(GridAxis::nearest(pts));
  auto controls = uniform_controls(-3.0, 3.0, 101);

  LqSpec spec;
  auto tables = grid_dp_oracle(make_lq(spec), grid, controls, noise);
  const double x0 = 1.0;
  const double v20 = tables.value_at(0, &x0);

  LqSpec half = spec;
  half.N = 40;
  auto tables40 = grid_dp_oracle(make_lq(half), grid, controls, noise);
  const double v40 = tables40.value_at(0, &x0);

  auto ric = riccati_solve(spec, 400);
  const double exact = ric.value_at(0.0, {1.0});
  // Continuous-limit gap is first order in the step, measured by halving it.
  const double allow = 0.03 * exact + 2.0 * std::abs(v20 - v40);
  CHECK(std::abs(v20 - exact) < allow);
  CHECK(v20 > 0.0);
  // Stored feedback is a pure-feedback table: near x = 0 the control is ~0.
  const double origin = 0.0;
  double a0;
  tables.control_at(0, &origin, &a0);
  CHECK(std::abs(a0) < 0.2);
}

TEST_CASE("grid dp on the scalar diffusion problem") {
  ClvqParams qp;
  auto noise = gaussian_grid(1, 51, qp, Rng(89));
  Vec pts;
  for (int i = 0; i < 401; ++i) pts.push_back(-4.0 + 8.0 * i / 400);
  auto grid = StateGrid::single(GridAxis::nearest(pts));
  auto controls = uniform_controls(-4.0, 4.0, 81);

  SemilinearSpec spec;  // gamma = 1
  auto tables = grid_dp_oracle(make_semilinear(spec), grid, controls, noise);
  const double x0 = 0.0;
  CHECK(std::abs(tables.value_at(0, &x0) - (-0.464)) < 0.01);
}

TEST_CASE("grid dp rejects nodes with no admissible control") {
  ControlProblem p;
  p.name = "toy";
  p.dim_state = 1;
  p.dim_noise = 1;
  p.horizon = 2;
  p.control_space = ControlSpace::finite({{0.0}, {1.0}});
  p.dynamics = [](int, const double* x, const double* a, const double*,
                  double* out) { out[0] = x[0] + a[0]; };
  p.running_cost = [](int, const double*, const double*) { return 0.0; };
  p.terminal_cost = [](const double*) { return 0.0; };
  p.noise_sampler = [](Rng& rng, int count, double* out) {
    for (int i = 0; i < count; ++i) out[i] = rng.normal();
  };
  p.admissible = [](int, const double* x, const double*) { return x[0] < 1.5; };

  auto grid = StateGrid::single(GridAxis::nearest({0.0, 1.0, 2.0}));
  auto noise = grid_from_points(1, {0.0}, {1.0});
  CHECK_THROWS_AS(grid_dp_oracle(p, grid, {{0.0}, {1.0}}, noise), SolverError);
  p.admissible = nullptr;
  auto t = grid_dp_oracle(p, grid, {{0.0}, {1.0}}, noise);
  CHECK(t.value[0].size() == 3);
}

TEST_CASE("uniform control lists") {
  auto c = uniform_controls(-1.0, 1.0, 5);
  REQUIRE(c.size() == 5);
  CHECK(c[0][0] == -1.0);
  CHECK(c[2][0] == 0.0);
  CHECK(c[4][0] == 1.0);
  auto single = uniform_controls(2.0, 4.0, 1);
  CHECK(single[0][0] == 3.0);
  CHECK_THROWS_AS(uniform_controls(1.0, 0.0, 3), SolverError);
}
