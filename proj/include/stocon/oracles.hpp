#pragma once

#include <vector>

#include "stocon/problems.hpp"
#include "stocon/quant.hpp"
#include "stocon/tables.hpp"

namespace stocon {

struct McValue {
  double value = 0.0;
  double std_error = 0.0;
};

// Exact value of the continuous-time limit of the quadratic-cost diffusion
// via its log-transform: v(t,x) = -ln E[exp(-g(x + sqrt(2) W_{T-t}))],
// estimated by Monte Carlo with a delta-method standard error.  At t = T the
// result is exactly g(x) with zero error.  Requires n_samples >= 10^4.
McValue hopf_cole_value(const SemilinearSpec& spec, double t, const Vec& x,
                        long n_samples, Rng rng);

// Backward matrix Riccati solution for the continuous-time limit of the
// linear-quadratic problem.  The noise loads the control on every coordinate
// independently, so the control cost in the feedback gain carries the trace
// of K.  Solved with fixed-step RK4 from K(T) = P; requires ode_steps >= 100.
struct RiccatiSolution {
  int d = 1;
  double T = 1.0;
  double lambda = 1.0;
  int ode_steps = 0;
  // K[s] is the d x d matrix at time s * T / ode_steps, row-major.
  std::vector<Vec> K;

  const Vec& K_at_start() const { return K.front(); }
  // x' K(t) x by linear interpolation in t between stored steps.
  double value_at(double t, const Vec& x) const;
  // Optimal scalar feedback a*(t, x) = -(1' K x) / (lambda + tr K).
  double feedback_at(double t, const Vec& x) const;
};

RiccatiSolution riccati_solve(const LqSpec& spec, int ode_steps);
// General coefficients: dX = (B X + C a) dt + a D dW with D loading each
// coordinate independently. zero_B / zero_C null out the drift couplings.
RiccatiSolution riccati_solve_general(int d, double T, double lambda,
                                      const std::vector<Vec>& Q_mat,
                                      const std::vector<Vec>& P_mat,
                                      int ode_steps, bool zero_B, bool zero_C);

// Exact quadratic-value recursion for the trinomial hedging problem.  The
// value at time n is K_n w^2 - 2 Z_n(p) w + C_n(p) over the price lattice
// p = price0 * (1+r_up)^i * (1+r_dn)^j, i + j <= n.
struct HedgingSolution {
  HedgingSpec spec;
  std::vector<double> K;        // K_0 .. K_N
  std::vector<Vec> Z;           // Z[n][node], lattice nodes in row order
  std::vector<Vec> C;           // C[n][node]
  double w0_star = 0.0;         // argmin of the time-0 value in w at price0
  double value0_at_w0_star = 0.0;

  int nodes(int n) const { return (n + 1) * (n + 2) / 2; }
  // Node index for i up-moves and j down-moves, i + j <= n.
  int node_index(int n, int i, int j) const;
  double node_price(int i, int j) const;
  // (i, j) of the lattice node nearest to p in log-price at time n.
  void locate(int n, double p, int* i, int* j) const;
  // Value of the exact quadratic at (w, p); p is located on the lattice.
  double value(int n, double w, double p) const;
  // Optimal amount invested at (w, p).
  double feedback(int n, double w, double p) const;
};

HedgingSolution hedging_recursion(const HedgingSpec& spec);

// Brute-force dynamic programming on a fixed state grid: exhaustive scan of
// the control list, quantized noise, nearest-node state projection.  Controls
// are skipped when the problem rejects them; a node with no admissible
// control is an error.
GridTables grid_dp_oracle(const ControlProblem& problem,
                          const StateGrid& state_grid,
                          const std::vector<Vec>& controls,
                          const QuantizerGrid& noise_grid, int threads = 1);

// Uniformly spaced control list over [lo, hi] for scalar control scans.
std::vector<Vec> uniform_controls(double lo, double hi, int count);

}  // namespace stocon
