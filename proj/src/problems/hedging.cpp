#include <algorithm>
#include <cmath>

#include "stocon/problems.hpp"

namespace stocon {

namespace {

void validate(const HedgingSpec& spec) {
  if (spec.N < 1) throw SolverError("hedging: N must be >= 1");
  if (spec.p_up < 0.0 || spec.p_dn < 0.0 || spec.p_up + spec.p_dn > 1.0)
    throw SolverError("hedging: return probabilities must form a distribution");
  if (spec.price0 <= 0.0) throw SolverError("hedging: price0 must be > 0");
  if (spec.w_hi <= spec.w_lo) throw SolverError("hedging: empty wealth band");
}

}  // namespace

ControlProblem make_hedging(const HedgingSpec& spec) {
  validate(spec);
  const double strike = spec.strike;

  ControlProblem p;
  p.name = "hedging";
  p.dim_state = 2;  // (wealth, price)
  p.dim_noise = 1;  // one uniform variate per step
  p.horizon = spec.N;
  p.sense = ControlProblem::Sense::Minimize;
  p.control_space =
      ControlSpace::box(Vec(1, -spec.control_bound), Vec(1, spec.control_bound));

  p.dynamics = [spec](int, const double* x, const double* a, const double* eps,
                      double* out) {
    const double r = spec.return_from_uniform(eps[0]);
    out[0] = x[0] + a[0] * r;
    out[1] = x[1] * (1.0 + r);
  };
  p.running_cost = [](int, const double*, const double*) { return 0.0; };
  p.terminal_cost = [strike](const double* x) {
    const double payoff = std::max(x[1] - strike, 0.0);
    const double miss = payoff - x[0];
    return miss * miss;
  };
  p.noise_sampler = [](Rng& rng, int count, double* out) {
    for (int i = 0; i < count; ++i) out[i] = rng.uniform();
  };
  p.x0 = {0.0, spec.price0};
  return p;
}

TrainingMeasure hedging_measure(const HedgingSpec& spec) {
  validate(spec);
  return TrainingMeasure::fixed(2, [spec](int n, Rng& rng, int M, double* out) {
    for (int i = 0; i < M; ++i) {
      double price = spec.price0;
      for (int k = 0; k < n; ++k)
        price *= 1.0 + spec.return_from_uniform(rng.uniform());
      out[2 * i] = spec.w_lo + rng.uniform() * (spec.w_hi - spec.w_lo);
      out[2 * i + 1] = price;
    }
  });
}

QuantizerGrid hedging_noise_grid(const HedgingSpec& spec) {
  validate(spec);
  const double p_mid = spec.p_mid();
  // Uniform-variate representatives placed at the midpoints of the three
  // cells of return_from_uniform.
  return grid_from_points(
      1,
      {0.5 * spec.p_up, spec.p_up + 0.5 * p_mid, spec.p_up + p_mid + 0.5 * spec.p_dn},
      {spec.p_up, p_mid, spec.p_dn});
}

}  // namespace stocon
