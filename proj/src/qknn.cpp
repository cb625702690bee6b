#include <atomic>
#include <cmath>
#include <limits>
#include <utility>

#include "solver_common.hpp"
#include "stocon/algos.hpp"
#include "stocon/brent.hpp"
#include "stocon/grid.hpp"
#include "stocon/parallel.hpp"

namespace stocon {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Cost to minimize for control a at (n, x): sign-adjusted running cost plus
// the quantized expectation of the stored step n+1 table.
double one_step_cost(const QknnSolution& sol, int n, const double* x, const double* a,
                     Vec& scratch) {
  const ControlProblem& p = sol.problem;
  const double sign = p.cost_sign();
  double q = sign * running_cost(p, n, x, a);
  for (int l = 0; l < sol.noise.K(); ++l) {
    step(p, n, x, a, sol.noise.center(l), scratch.data());
    q += sol.noise.weights[l] *
         (sign * grid_value(sol.grids[n + 1], sol.value[n + 1], scratch.data()));
  }
  return q;
}

// Best control at an arbitrary state. Returns false when no control is
// admissible there.
bool solve_state(const QknnSolution& sol, int n, const double* x, double* a_out,
                 double* q_out) {
  const ControlProblem& p = sol.problem;
  const ControlSpace& cs = p.control_space;
  Vec scratch(p.dim_state);
  switch (cs.kind) {
    case ControlSpace::Kind::Finite: {
      double best = kInf;
      int best_l = -1;
      for (std::size_t l = 0; l < cs.points.size(); ++l) {
        const Vec& a = cs.points[l];
        if (p.admissible && !p.admissible(n, x, a.data())) continue;
        const double q = one_step_cost(sol, n, x, a.data(), scratch);
        if (q < best) {
          best = q;
          best_l = static_cast<int>(l);
        }
      }
      if (best_l < 0) return false;
      const Vec& a = cs.points[best_l];
      std::copy(a.begin(), a.end(), a_out);
      *q_out = best;
      return true;
    }
    case ControlSpace::Kind::Box: {
      double lo = cs.lower[0], hi = cs.upper[0];
      if (p.admissible_interval) p.admissible_interval(n, x, &lo, &hi);
      if (!(lo <= hi)) return false;
      auto fn = [&](double a) { return one_step_cost(sol, n, x, &a, scratch); };
      const BrentResult br =
          brent_minimize(fn, lo, hi, sol.cfg.brent_tol, sol.cfg.brent_multistart);
      a_out[0] = br.x;
      *q_out = br.fx;
      return true;
    }
    case ControlSpace::Kind::MixedOffOrBox: {
      double best = kInf;
      bool any = false;
      if (!p.admissible || p.admissible(n, x, cs.off_value.data())) {
        best = one_step_cost(sol, n, x, cs.off_value.data(), scratch);
        a_out[0] = cs.off_value[0];
        any = true;
      }
      double lo = cs.lower[0], hi = cs.upper[0];
      if (p.admissible_interval) p.admissible_interval(n, x, &lo, &hi);
      if (lo <= hi) {
        auto fn = [&](double a) { return one_step_cost(sol, n, x, &a, scratch); };
        const BrentResult br =
            brent_minimize(fn, lo, hi, sol.cfg.brent_tol, sol.cfg.brent_multistart);
        if (br.fx < best) {  // tie keeps the off branch
          best = br.fx;
          a_out[0] = br.x;
        }
        any = true;
      }
      if (!any) return false;
      *q_out = best;
      return true;
    }
  }
  return false;
}

}  // namespace

double QknnSolution::value_at(int n, const double* x) const {
  detail::require(n >= 0 && n <= problem.horizon, "value_at: time index out of range");
  return grid_value(grids[n], value[n], x);
}

void QknnSolution::best_control(int n, const double* x, double* a) const {
  detail::require(n >= 0 && n < problem.horizon, "best_control: time index out of range");
  double q = 0.0;
  if (!solve_state(*this, n, x, a, &q))
    throw SolverError("best_control: no admissible control at the query state");
}

GridTables QknnSolution::tables() const {
  GridTables t;
  t.grids = grids;
  t.value = value;
  t.control = control;
  t.control_dim = control_dim;
  return t;
}

std::shared_ptr<QknnSolution> qknn(const ControlProblem& problem,
                                   std::vector<StateGrid> state_grids,
                                   QuantizerGrid noise_grid, const QknnCfg& cfg) {
  detail::require(static_cast<int>(state_grids.size()) == problem.horizon + 1,
                  "qknn needs a state grid per time step 0..N");
  for (const StateGrid& g : state_grids)
    detail::require(g.dim() == problem.dim_state, "qknn state grid dimension mismatch");
  detail::require(noise_grid.dim == problem.dim_noise, "qknn noise grid dimension mismatch");
  detail::require(cfg.brent_tol > 0.0 && cfg.brent_multistart >= 2,
                  "qknn needs brent_tol > 0 and brent_multistart >= 2");
  if (problem.control_space.kind != ControlSpace::Kind::Finite)
    detail::require(problem.control_space.dim() == 1,
                    "qknn optimizes scalar box controls only");

  auto sol = std::make_shared<QknnSolution>();
  sol->problem = problem;
  sol->grids = std::move(state_grids);
  sol->noise = std::move(noise_grid);
  sol->cfg = cfg;
  sol->control_dim = problem.control_space.dim();
  const int N = problem.horizon;
  sol->value.resize(N + 1);
  sol->control.resize(N);

  const std::size_t n_terminal = sol->grids[N].size();
  sol->value[N].resize(n_terminal);
  parallel_for(n_terminal, cfg.threads, [&](std::size_t lo, std::size_t hi) {
    Vec node(problem.dim_state);
    for (std::size_t s = lo; s < hi; ++s) {
      sol->grids[N].node(s, node.data());
      sol->value[N][s] = terminal_cost(problem, node.data());
    }
  });

  const double sign = problem.cost_sign();
  for (int n = N - 1; n >= 0; --n) {
    const std::size_t count = sol->grids[n].size();
    sol->value[n].resize(count);
    sol->control[n].resize(count * sol->control_dim);
    std::atomic<bool> dead{false};
    parallel_for(count, cfg.threads, [&](std::size_t lo, std::size_t hi) {
      Vec node(problem.dim_state), a(sol->control_dim);
      for (std::size_t s = lo; s < hi; ++s) {
        sol->grids[n].node(s, node.data());
        double q = 0.0;
        if (!solve_state(*sol, n, node.data(), a.data(), &q)) {
          dead.store(true, std::memory_order_relaxed);
          continue;
        }
        sol->value[n][s] = sign * q;
        std::copy(a.begin(), a.end(),
                  sol->control[n].begin() + static_cast<std::ptrdiff_t>(s * sol->control_dim));
      }
    });
    if (dead.load())
      throw SolverError("qknn: grid node at step " + std::to_string(n) +
                        " has no admissible control");
  }
  return sol;
}

}  // namespace stocon
