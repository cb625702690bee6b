#include <cmath>
#include <vector>

#include "stocon/oracles.hpp"

namespace stocon {

McValue hopf_cole_value(const SemilinearSpec& spec, double t, const Vec& x,
                        long n_samples, Rng rng) {
  if (n_samples < 10000)
    throw SolverError("hopf_cole_value: n_samples must be >= 10^4");
  if (t < 0.0 || t > spec.T)
    throw SolverError("hopf_cole_value: t outside [0, T]");
  if (static_cast<int>(x.size()) != spec.d)
    throw SolverError("hopf_cole_value: state dimension mismatch");
  auto problem = make_semilinear(spec);

  if (t == spec.T) return {problem.terminal_cost(x.data()), 0.0};

  const double scale = std::sqrt(2.0 * (spec.T - t));
  const int d = spec.d;
  Rng draw = rng.stream(rng_tag::kOracle);
  std::vector<double> w(d);
  double sum = 0.0, sumsq = 0.0;
  for (long i = 0; i < n_samples; ++i) {
    for (int k = 0; k < d; ++k) w[k] = x[k] + scale * draw.normal();
    const double y = std::exp(-problem.terminal_cost(w.data()));
    sum += y;
    sumsq += y * y;
  }
  const double mean = sum / n_samples;
  if (!(mean > 0.0))
    throw SolverError("hopf_cole_value: degenerate exponential sample mean");
  const double var =
      std::max(0.0, (sumsq - n_samples * mean * mean) / (n_samples - 1));
  const double se_mean = std::sqrt(var / n_samples);
  return {-std::log(mean), se_mean / mean};
}

}  // namespace stocon
