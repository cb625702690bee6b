#include <cmath>

#include "stocon/problems.hpp"

namespace stocon {

ControlProblem make_lq(const LqSpec& spec) {
  if (spec.d < 1) throw SolverError("lq: d must be >= 1");
  if (spec.N < 1) throw SolverError("lq: N must be >= 1");
  if (spec.T <= 0.0) throw SolverError("lq: T must be > 0");
  if (spec.lambda <= 0.0) throw SolverError("lq: lambda must be > 0");

  const int d = spec.d;
  const double h = spec.h();
  const double sh = std::sqrt(h);
  const double lambda = spec.lambda;

  ControlProblem p;
  p.name = "lq";
  p.dim_state = d;
  p.dim_noise = d;
  p.horizon = spec.N;
  p.sense = ControlProblem::Sense::Minimize;
  p.control_space =
      ControlSpace::box(Vec(1, -spec.control_bound), Vec(1, spec.control_bound));

  p.dynamics = [d, h, sh](int, const double* x, const double* a,
                          const double* eps, double* out) {
    const double u = a[0];
    for (int i = 0; i < d; ++i)
      out[i] = x[i] + (x[i] + u) * h + u * sh * eps[i];
  };
  p.running_cost = [d, h, lambda](int, const double* x, const double* a) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += x[i] * x[i];
    return (s + lambda * a[0] * a[0]) * h;
  };
  p.terminal_cost = [d](const double* x) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += x[i] * x[i];
    return s;
  };
  p.noise_sampler = [d](Rng& rng, int count, double* out) {
    for (int i = 0; i < count * d; ++i) out[i] = rng.normal();
  };
  p.x0 = Vec(d, spec.x0_scale);
  return p;
}

TrainingMeasure lq_measure(const LqSpec& spec) {
  const int d = spec.d;
  return TrainingMeasure::fixed(d, [d](int, Rng& rng, int M, double* out) {
    for (int i = 0; i < M * d; ++i) out[i] = rng.normal();
  });
}

}  // namespace stocon
