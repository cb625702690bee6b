#include <atomic>
#include <cmath>
#include <vector>

#include "stocon/oracles.hpp"
#include "stocon/parallel.hpp"

namespace stocon {

std::vector<Vec> uniform_controls(double lo, double hi, int count) {
  if (count < 1) throw SolverError("uniform_controls: count must be >= 1");
  if (hi < lo) throw SolverError("uniform_controls: empty range");
  std::vector<Vec> out;
  out.reserve(count);
  if (count == 1) {
    out.push_back({0.5 * (lo + hi)});
    return out;
  }
  for (int i = 0; i < count; ++i)
    out.push_back({lo + (hi - lo) * i / (count - 1)});
  return out;
}

GridTables grid_dp_oracle(const ControlProblem& problem,
                          const StateGrid& state_grid,
                          const std::vector<Vec>& controls,
                          const QuantizerGrid& noise_grid, int threads) {
  if (controls.empty()) throw SolverError("grid_dp_oracle: empty control list");
  if (state_grid.dim() != problem.dim_state)
    throw SolverError("grid_dp_oracle: state grid dimension mismatch");
  if (noise_grid.dim != problem.dim_noise)
    throw SolverError("grid_dp_oracle: noise grid dimension mismatch");
  const int adim = problem.control_space.dim();
  for (const Vec& a : controls)
    if (static_cast<int>(a.size()) != adim)
      throw SolverError("grid_dp_oracle: control dimension mismatch");

  const int N = problem.horizon;
  const std::size_t S = state_grid.size();
  const double sign = problem.cost_sign();
  const int K = noise_grid.K();

  GridTables t;
  t.grids.assign(N + 1, state_grid);
  t.value.assign(N + 1, Vec(S));
  t.control.assign(N, Vec(S * adim));
  t.control_dim = adim;

  // Internal sign-adjusted values; flipped back to the problem's sense when
  // stored.
  std::vector<Vec> vint(N + 1, Vec(S));
  parallel_for(S, threads, [&](std::size_t b, std::size_t e) {
    std::vector<double> x(problem.dim_state);
    for (std::size_t s = b; s < e; ++s) {
      state_grid.node(s, x.data());
      vint[N][s] = sign * terminal_cost(problem, x.data());
    }
  });

  std::atomic<bool> dead_node{false};
  for (int n = N - 1; n >= 0; --n) {
    parallel_for(S, threads, [&](std::size_t b, std::size_t e) {
      std::vector<double> x(problem.dim_state), y(problem.dim_state);
      for (std::size_t s = b; s < e; ++s) {
        state_grid.node(s, x.data());
        double best = 0.0;
        int best_c = -1;
        for (std::size_t c = 0; c < controls.size(); ++c) {
          const double* a = controls[c].data();
          if (problem.admissible && !problem.admissible(n, x.data(), a)) continue;
          double q = sign * running_cost(problem, n, x.data(), a);
          for (int l = 0; l < K; ++l) {
            step(problem, n, x.data(), a, noise_grid.center(l), y.data());
            q += noise_grid.weights[l] * vint[n + 1][state_grid.nearest_node(y.data())];
          }
          if (best_c < 0 || q < best) {
            best = q;
            best_c = static_cast<int>(c);
          }
        }
        if (best_c < 0) {
          dead_node.store(true);
          continue;
        }
        vint[n][s] = best;
        for (int k = 0; k < adim; ++k)
          t.control[n][s * adim + k] = controls[best_c][k];
      }
    });
    if (dead_node.load())
      throw SolverError("grid_dp_oracle: node with no admissible control");
  }

  for (int n = 0; n <= N; ++n)
    for (std::size_t s = 0; s < S; ++s) t.value[n][s] = sign * vint[n][s];
  return t;
}

}  // namespace stocon
