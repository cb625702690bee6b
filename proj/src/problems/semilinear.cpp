#include <cmath>
#include <cstddef>
#include <utility>

#include "stocon/problems.hpp"

namespace stocon {

ControlProblem make_semilinear(const SemilinearSpec& spec) {
  if (spec.d < 1) throw SolverError("semilinear: d must be >= 1");
  if (spec.N < 1) throw SolverError("semilinear: N must be >= 1");
  if (spec.T <= 0.0) throw SolverError("semilinear: T must be > 0");
  if (spec.control_bound <= 0.0)
    throw SolverError("semilinear: control_bound must be > 0");

  const int d = spec.d;
  const double h = spec.h();
  const double diff = std::sqrt(2.0 * h);

  ControlProblem p;
  p.name = "semilinear";
  p.dim_state = d;
  p.dim_noise = d;
  p.horizon = spec.N;
  p.sense = ControlProblem::Sense::Minimize;
  p.control_space =
      ControlSpace::box(Vec(d, -spec.control_bound), Vec(d, spec.control_bound));

  p.dynamics = [d, h, diff](int, const double* x, const double* a,
                            const double* eps, double* out) {
    for (int i = 0; i < d; ++i) out[i] = x[i] + 2.0 * a[i] * h + diff * eps[i];
  };
  p.running_cost = [d, h](int, const double*, const double* a) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += a[i] * a[i];
    return h * s;
  };
  if (spec.terminal == SemilinearSpec::Terminal::LogQuadratic) {
    p.terminal_cost = [d](const double* x) {
      double s = 0.0;
      for (int i = 0; i < d; ++i) s += x[i] * x[i];
      return std::log(0.5 * (1.0 + s));
    };
  } else {
    const double gamma = spec.gamma;
    if (d != 1) throw SolverError("semilinear: power terminal requires d = 1");
    p.terminal_cost = [gamma](const double* x) {
      const double v = x[0];
      if (v >= 1.0) return -1.0;
      if (v <= 0.0) return 0.0;
      return -std::pow(v, gamma);
    };
  }
  p.noise_sampler = [d](Rng& rng, int count, double* out) {
    for (int i = 0; i < count * d; ++i) out[i] = rng.normal();
  };
  p.x0 = Vec(d, 0.0);
  return p;
}

TrainingMeasure semilinear_measure(const SemilinearSpec& spec) {
  const double h = spec.h();
  return TrainingMeasure::scaled_gaussian(
      spec.d, [h](int n) { return std::sqrt(n * h); });
}

std::vector<StateGrid> semilinear_state_grids(const SemilinearSpec& spec,
                                              const Vec& g_centers,
                                              int knn_k) {
  if (spec.d != 1)
    throw SolverError("semilinear_state_grids: grids are defined for d = 1");
  if (g_centers.empty())
    throw SolverError("semilinear_state_grids: empty center set");
  const double h = spec.h();
  std::vector<StateGrid> grids;
  grids.reserve(spec.N + 1);
  grids.push_back(StateGrid::single(GridAxis::nearest({0.0})));
  for (int n = 1; n <= spec.N; ++n) {
    const double scale = std::sqrt(2.0 * h * n);
    Vec pts(g_centers.size());
    for (std::size_t i = 0; i < g_centers.size(); ++i)
      pts[i] = scale * g_centers[i];
    grids.push_back(StateGrid::single(knn_k >= 2 ? GridAxis::interp2(std::move(pts))
                                                 : GridAxis::nearest(std::move(pts))));
  }
  return grids;
}

}  // namespace stocon
