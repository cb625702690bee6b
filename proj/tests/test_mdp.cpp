#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <limits>

#include "doctest.h"
#include "stocon/mdp.hpp"

using namespace stocon;

namespace {

ControlProblem toy_problem() {
  ControlProblem p;
  p.name = "toy";
  p.dim_state = 1;
  p.dim_noise = 1;
  p.horizon = 2;
  p.control_space = ControlSpace::box({-1.0}, {1.0});
  p.dynamics = [](int, const double* x, const double* a, const double* e, double* out) {
    out[0] = x[0] + a[0] + 0.1 * e[0];
  };
  p.running_cost = [](int, const double* x, const double* a) { return x[0] * x[0] + a[0] * a[0]; };
  p.terminal_cost = [](const double* x) { return x[0]; };
  p.noise_sampler = [](Rng& rng, int count, double* out) {
    for (int i = 0; i < count; ++i) out[i] = rng.normal();
  };
  p.x0 = {0.0};
  return p;
}

}  // namespace

TEST_CASE("control space builders validate and clamp") {
  auto box = ControlSpace::box({-1.0, 0.0}, {1.0, 2.0});
  double a[2] = {5.0, -3.0};
  box.clamp(a);
  CHECK(a[0] == 1.0);
  CHECK(a[1] == 0.0);
  CHECK(box.dim() == 2);

  CHECK_THROWS_AS(ControlSpace::box({1.0}, {0.0}), SolverError);
  CHECK_THROWS_AS(ControlSpace::finite({{1.0}, {1.0}}), SolverError);
  CHECK_THROWS_AS(ControlSpace::finite({}), SolverError);

  auto fin = ControlSpace::finite({{-1.0}, {0.0}, {1.0}});
  CHECK(fin.points.size() == 3);

  auto mixed = ControlSpace::mixed_off_or_box({0.0}, {0.05}, {10.0});
  CHECK(mixed.kind == ControlSpace::Kind::MixedOffOrBox);
  CHECK(mixed.off_value[0] == 0.0);
}

TEST_CASE("penalty values by hand") {
  ConstraintSpec spec;
  spec.equalities.push_back({[](const double*, const double* a) { return a[0]; }, 100.0});
  spec.inequalities.push_back({[](const double* x, const double* a) { return x[0] - a[1]; }, 10.0});

  const double x[1] = {1.0};
  {
    const double a[2] = {0.0, 0.5};  // equality holds, inequality 0.5 >= 0 holds
    CHECK(penalty(spec, x, a) == 0.0);
  }
  {
    const double a[2] = {0.1, 0.5};  // equality violated by 0.1 with mu=100
    CHECK(penalty(spec, x, a) == doctest::Approx(1.0));
  }
  {
    const double a[2] = {0.0, 1.2};  // inequality h=-0.2 with mu=10
    CHECK(penalty(spec, x, a) == doctest::Approx(2.0));
  }
}

TEST_CASE("step and cost wrappers flag divergence") {
  auto p = toy_problem();
  double x = 0.0, a = 0.5, e = 0.0, out = 0.0;
  step(p, 0, &x, &a, &e, &out);
  CHECK(out == doctest::Approx(0.5));
  CHECK(running_cost(p, 0, &x, &a) == doctest::Approx(0.25));
  CHECK(terminal_cost(p, &out) == doctest::Approx(0.5));

  p.dynamics = [](int, const double*, const double*, const double*, double* o) {
    o[0] = std::numeric_limits<double>::infinity();
  };
  CHECK_THROWS_WITH_AS(step(p, 1, &x, &a, &e, &out), doctest::Contains("dynamics diverged"),
                       SolverError);
}

TEST_CASE("deploy_control clamps or repairs") {
  auto p = toy_problem();
  double x = 0.0, a = 3.0;
  deploy_control(p, 0, &x, &a);
  CHECK(a == 1.0);
  p.repair = [](int, const double*, double* a2) { a2[0] = 0.25; };
  a = 3.0;
  deploy_control(p, 0, &x, &a);
  CHECK(a == 0.25);
}

TEST_CASE("scaled gaussian degenerates to a point mass at scale zero") {
  auto m = TrainingMeasure::scaled_gaussian(3, [](int n) { return std::sqrt(n / 40.0); });
  Rng rng(1);
  std::vector<double> out(30);
  sample_training(m, 0, rng, 10, out.data());
  for (double v : out) CHECK(v == 0.0);
  sample_training(m, 5, rng, 10, out.data());
  double nonzero = 0;
  for (double v : out) nonzero += v != 0.0;
  CHECK(nonzero == 30);
}

TEST_CASE("uniform box sampling hits the CLT band") {
  auto m = TrainingMeasure::uniform_box({0.0}, {8.0});
  Rng rng(2);
  const int M = 100000;
  std::vector<double> out(M);
  sample_training(m, 0, rng, M, out.data());
  double mean = 0.0;
  for (double v : out) {
    CHECK(v >= 0.0);
    CHECK(v <= 8.0);
    mean += v;
  }
  mean /= M;
  CHECK(mean == doctest::Approx(4.0).epsilon(0.0125));  // 4 +- 0.05
}

TEST_CASE("sampling is deterministic for a fixed seed") {
  auto m = TrainingMeasure::scaled_gaussian(2, [](int) { return 1.0; });
  std::vector<double> a(20), b(20);
  Rng r1(9), r2(9);
  sample_training(m, 3, r1, 10, a.data());
  sample_training(m, 3, r2, 10, b.data());
  CHECK(a == b);
}

TEST_CASE("empirical forward returns exactly M finite states") {
  auto p = toy_problem();
  auto m = TrainingMeasure::empirical_forward(
      &p, [](int, const double*, double* a) { a[0] = 0.1; },
      [](Rng& rng, double* x) { x[0] = rng.uniform(); }, 4);
  Rng rng(3);
  std::vector<double> out(64);
  sample_training(m, 2, rng, 64, out.data());
  for (double v : out) {
    CHECK(std::isfinite(v));
    CHECK(v > -1.0);
    CHECK(v < 2.0);
  }
}
