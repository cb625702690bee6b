#include <algorithm>
#include <cmath>

#include "stocon/problems.hpp"

namespace stocon {

namespace {

constexpr double kFeasTol = 1e-12;

void validate(const MicrogridSpec& spec) {
  if (spec.N < 1) throw SolverError("microgrid: N must be >= 1");
  if (spec.c_max <= 0.0) throw SolverError("microgrid: c_max must be > 0");
  if (spec.c0 < 0.0 || spec.c0 > spec.c_max)
    throw SolverError("microgrid: c0 outside [0, c_max]");
  if (spec.a_min <= 0.0 || spec.a_max <= spec.a_min)
    throw SolverError("microgrid: need 0 < a_min < a_max");
  if (std::abs(spec.rho) >= 1.0) throw SolverError("microgrid: |rho| must be < 1");
  if (spec.sigma < 0.0) throw SolverError("microgrid: sigma must be >= 0");
  if (spec.m0 != 0 && spec.m0 != 1) throw SolverError("microgrid: m0 must be 0 or 1");
}

}  // namespace

double MicrogridSpec::next_charge(double c, double r, double a) const {
  const double charge = std::min(std::max(a - r, 0.0), c_max - c);
  const double discharge = std::min(std::max(r - a, 0.0), c);
  // The clamp only absorbs rounding from the flow arithmetic.
  return std::min(std::max(c + charge - discharge, 0.0), c_max);
}

double MicrogridSpec::imbalance(double c, double r, double a) const {
  const double charge = std::min(std::max(a - r, 0.0), c_max - c);
  const double discharge = std::min(std::max(r - a, 0.0), c);
  return r - a + charge - discharge;
}

ControlProblem make_microgrid(const MicrogridSpec& spec) {
  validate(spec);

  ControlProblem p;
  p.name = "microgrid";
  p.dim_state = 3;  // (charge, mode, demand)
  p.dim_noise = 1;
  p.horizon = spec.N;
  p.sense = ControlProblem::Sense::Minimize;
  p.control_space = ControlSpace::mixed_off_or_box({0.0}, {spec.a_min}, {spec.a_max});

  const double drift = spec.r_bar * (1.0 - spec.rho);
  p.dynamics = [spec, drift](int, const double* x, const double* a,
                             const double* eps, double* out) {
    out[0] = spec.next_charge(x[0], x[2], a[0]);
    out[1] = a[0] != 0.0 ? 1.0 : 0.0;
    out[2] = drift + spec.rho * x[2] + spec.sigma * eps[0];
  };
  p.running_cost = [spec](int, const double* x, const double* a) {
    const double u = a[0];
    const bool on = u != 0.0;
    double cost = on ? spec.fuel_k * std::pow(u, spec.fuel_gamma) : 0.0;
    if ((x[1] > 0.5) != on) cost += spec.switch_cost;
    const double s = spec.imbalance(x[0], x[2], u);
    cost += spec.imbalance_cost * std::max(-s, 0.0);
    cost += spec.penalty_coeff * std::max(s, 0.0);
    return cost;
  };
  p.terminal_cost = [](const double*) { return 0.0; };
  p.noise_sampler = [](Rng& rng, int count, double* out) {
    for (int i = 0; i < count; ++i) out[i] = rng.normal();
  };
  p.admissible = [spec](int, const double* x, const double* a) {
    return spec.imbalance(x[0], x[2], a[0]) <= kFeasTol;
  };
  p.admissible_interval = [spec](int, const double* x, double* lo, double* hi) {
    *lo = std::max(spec.a_min, x[2] - x[0]);
    *hi = spec.a_max;
  };
  p.repair = [spec](int, const double* x, double* a) {
    const double deficit = x[2] - x[0];  // a >= deficit keeps demand covered
    if (a[0] == 0.0) {
      if (deficit <= kFeasTol) return;
      a[0] = std::min(std::max(deficit, spec.a_min), spec.a_max);
      return;
    }
    a[0] = std::min(std::max(a[0], std::max(spec.a_min, deficit)), spec.a_max);
  };
  p.x0 = {spec.c0, static_cast<double>(spec.m0), spec.r0};
  return p;
}

void microgrid_r_moments(const MicrogridSpec& spec, int n, double* mean,
                         double* var) {
  validate(spec);
  if (n < 0) throw SolverError("microgrid_r_moments: n must be >= 0");
  const double rn = std::pow(spec.rho, n);
  *mean = spec.r_bar + rn * (spec.r0 - spec.r_bar);
  const double rho2 = spec.rho * spec.rho;
  *var = spec.sigma * spec.sigma * (1.0 - std::pow(rho2, n)) / (1.0 - rho2);
}

TrainingMeasure microgrid_measure(const MicrogridSpec& spec) {
  validate(spec);
  return TrainingMeasure::fixed(3, [spec](int n, Rng& rng, int M, double* out) {
    double mean, var;
    microgrid_r_moments(spec, n, &mean, &var);
    const double sd = std::sqrt(var);
    for (int i = 0; i < M; ++i) {
      out[3 * i] = spec.c_max * rng.uniform();
      out[3 * i + 1] = rng.uniform() < 0.5 ? 0.0 : 1.0;
      out[3 * i + 2] = mean + sd * rng.normal();
    }
  });
}

std::vector<StateGrid> microgrid_state_grids(const MicrogridSpec& spec,
                                             const Vec& g_centers) {
  if (g_centers.empty())
    throw SolverError("microgrid_state_grids: empty center set");
  constexpr int kChargeNodes = 51;
  Vec charge_pts(kChargeNodes);
  for (int i = 0; i < kChargeNodes; ++i)
    charge_pts[i] = spec.c_max * i / (kChargeNodes - 1);

  std::vector<StateGrid> grids;
  grids.reserve(spec.N + 1);
  for (int n = 0; n <= spec.N; ++n) {
    Vec r_pts;
    if (n == 0) {
      r_pts = {spec.r0};
    } else {
      const double rn = std::pow(spec.rho, n);
      const double center = rn * spec.r0;
      const double scale = spec.sigma * (1.0 - rn) / (1.0 - spec.rho);
      r_pts.resize(g_centers.size());
      for (std::size_t i = 0; i < g_centers.size(); ++i)
        r_pts[i] = center + scale * g_centers[i];
    }
    grids.push_back(StateGrid::product({GridAxis::nearest(charge_pts),
                                        GridAxis::nearest({0.0, 1.0}),
                                        GridAxis::nearest(std::move(r_pts))}));
  }
  return grids;
}

}  // namespace stocon
