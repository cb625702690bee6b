#pragma once

#include <vector>

#include "stocon/grid.hpp"
#include "stocon/mdp.hpp"
#include "stocon/quant.hpp"

namespace stocon {

// Controlled diffusion with quadratic running cost; the drift is twice the
// control and the noise variance per step is 2h.  Two terminal costs are
// supported: a log-quadratic well and a clipped power well on [0,1].
struct SemilinearSpec {
  enum class Terminal { LogQuadratic, Power };

  int d = 1;
  double T = 1.0;
  int N = 40;
  Terminal terminal = Terminal::Power;
  double gamma = 1.0;          // exponent of the power terminal
  double control_bound = 4.0;  // symmetric box for solvers; the model is unconstrained

  double h() const { return T / N; }
};

ControlProblem make_semilinear(const SemilinearSpec& spec);
// State distribution sqrt(nT/N) * N_d(0, I); a point mass at 0 when n = 0.
TrainingMeasure semilinear_measure(const SemilinearSpec& spec);
// Per-step state grids: time n carries sqrt(2hn) * g_centers (n = 0 collapses
// to the single point 0).  g_centers must be sorted centers of a standard
// normal quantizer.  d must be 1.
std::vector<StateGrid> semilinear_state_grids(const SemilinearSpec& spec,
                                              const Vec& g_centers, int knn_k);

// Linear state dynamics with scalar control entering every coordinate's drift
// and diffusion; quadratic running and terminal costs.  The per-step noise is
// one standard normal per state coordinate.
struct LqSpec {
  int d = 1;
  double T = 1.0;
  int N = 20;
  double lambda = 1.0;
  double x0_scale = 1.0;       // initial state = x0_scale * (1,..,1)
  double control_bound = 20.0;

  double h() const { return T / N; }
};

ControlProblem make_lq(const LqSpec& spec);
// Standard normal in every coordinate at every time step.
TrainingMeasure lq_measure(const LqSpec& spec);

// Wealth/price pair under a trinomial return; terminal cost is the squared
// replication error of a call payoff, no running cost.
struct HedgingSpec {
  int N = 6;
  double r_up = 0.05;
  double r_dn = -0.05;
  double p_up = 0.6;
  double p_dn = 0.3;
  double price0 = 100.0;
  double strike = 100.0;
  double control_bound = 200.0;  // symmetric box on the amount invested
  double w_lo = 0.0;             // wealth band of the training measure
  double w_hi = 9.0;

  double p_mid() const { return 1.0 - p_up - p_dn; }
  // Maps one uniform variate to a return outcome; cell edges at p_up and
  // p_up + p_mid.
  double return_from_uniform(double u) const {
    if (u < p_up) return r_up;
    if (u < p_up + p_mid()) return 0.0;
    return r_dn;
  }
};

ControlProblem make_hedging(const HedgingSpec& spec);
// Price from its exact forward lattice distribution, wealth uniform on
// [w_lo, w_hi].
TrainingMeasure hedging_measure(const HedgingSpec& spec);
// Exact three-atom noise grid (atoms are uniform-variate representatives of
// the three return outcomes, weighted by their probabilities).
QuantizerGrid hedging_noise_grid(const HedgingSpec& spec);

// Inventory management against a mean-reverting price: inject, hold, or
// withdraw at fixed rates, pay a linear holding cost, and face a terminal
// shortfall penalty.  Rewards are maximized.
struct StorageSpec {
  int N = 30;
  double a_in = 0.06;
  double a_out = 0.25;
  double hold_cost = 0.01;   // per unit of inventory per step
  double c_min = 0.0;
  double c_max = 8.0;
  double c0 = 4.0;
  double p_bar = 5.0;        // stationary price level
  double beta = 0.5;         // price autoregression coefficient
  double sigma2 = 0.05;      // price noise variance
  double shortfall = 2.0;    // terminal penalty coefficient
  double price0 = 4.0;
};

ControlProblem make_storage(const StorageSpec& spec);
// Price from its exact forward marginal, inventory uniform on [c_min, c_max].
TrainingMeasure storage_measure(const StorageSpec& spec);
// Mean and variance of the price at time n started from price0.
void storage_price_moments(const StorageSpec& spec, int n, double* mean,
                           double* var);
// Inventory levels reachable at each time in integer hundredths of a unit.
// Requires a_in, a_out, c_min, c_max, c0 to be exact hundredths.
std::vector<std::vector<int>> storage_reachable_inventory(
    const StorageSpec& spec);
// Per-step grids: price axis from the forward moments scaled onto g_centers
// (single point price0 at n = 0), inventory axis on the reachable set.
// knn_k = 2 interpolates on the price axis only.
std::vector<StateGrid> storage_state_grids(const StorageSpec& spec,
                                           const Vec& g_centers, int knn_k);

// Battery/generator dispatch against a mean-reverting residual demand.  The
// control is either "off" (0) or a generation level in [a_min, a_max]; unmet
// demand is forbidden (a >= r - c), surplus is charged at imbalance_cost, and
// infeasible choices carry a linear penalty for gradient-based solvers.
struct MicrogridSpec {
  int N = 30;
  double r_bar = 0.1;
  double rho = 0.9;
  double sigma = 0.2;
  double c_max = 1.0;
  double c0 = 0.0;
  double fuel_k = 2.0;
  double fuel_gamma = 2.0;
  double switch_cost = 0.2;
  double imbalance_cost = 10.0;   // charged on surplus power
  double penalty_coeff = 1000.0;  // infeasibility penalty for net training
  double a_min = 0.05;
  double a_max = 10.0;
  double r0 = 0.1;
  int m0 = 0;

  // Battery charge after taking action a at (c, r): surplus charges up to
  // capacity, deficit discharges down to empty.
  double next_charge(double c, double r, double a) const;
  // Power imbalance after battery flows; feasibility requires S <= 0.
  double imbalance(double c, double r, double a) const;
};

ControlProblem make_microgrid(const MicrogridSpec& spec);
// Charge uniform on [0, c_max], mode uniform on {0,1}, demand from its exact
// forward marginal.
TrainingMeasure microgrid_measure(const MicrogridSpec& spec);
// Mean and variance of the residual demand at time n started from r0.
void microgrid_r_moments(const MicrogridSpec& spec, int n, double* mean,
                         double* var);
// Per-step grids: charge uniform with 51 nodes, mode {0,1}, demand axis
// rho^n r0 + sigma (1-rho^n)/(1-rho) * g_centers (single point r0 at n = 0).
// All axes use nearest-node lookup.
std::vector<StateGrid> microgrid_state_grids(const MicrogridSpec& spec,
                                             const Vec& g_centers);

}  // namespace stocon
