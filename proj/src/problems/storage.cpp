#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "stocon/problems.hpp"

namespace stocon {

namespace {

constexpr double kInvTol = 1e-9;

long hundredths(double v, const char* field) {
  const double scaled = v * 100.0;
  const double r = std::nearbyint(scaled);
  if (std::abs(scaled - r) > 1e-9)
    throw SolverError(std::string("storage: ") + field +
                      " must be an exact hundredth");
  return static_cast<long>(r);
}

void validate(const StorageSpec& spec) {
  if (spec.N < 1) throw SolverError("storage: N must be >= 1");
  if (spec.a_in <= 0.0 || spec.a_out <= 0.0)
    throw SolverError("storage: transfer rates must be > 0");
  if (spec.c_max <= spec.c_min) throw SolverError("storage: empty inventory range");
  if (spec.c0 < spec.c_min || spec.c0 > spec.c_max)
    throw SolverError("storage: c0 outside inventory range");
  if (spec.sigma2 < 0.0) throw SolverError("storage: sigma2 must be >= 0");
  if (std::abs(spec.beta) >= 1.0)
    throw SolverError("storage: |beta| must be < 1");
}

// Inventory change for a in {-1, 0, +1}.
double flow(const StorageSpec& spec, double a) {
  if (a > 0.5) return spec.a_in;
  if (a < -0.5) return -spec.a_out;
  return 0.0;
}

}  // namespace

ControlProblem make_storage(const StorageSpec& spec) {
  validate(spec);

  ControlProblem p;
  p.name = "storage";
  p.dim_state = 2;  // (price, inventory)
  p.dim_noise = 1;
  p.horizon = spec.N;
  p.sense = ControlProblem::Sense::Maximize;
  p.control_space = ControlSpace::finite({{-1.0}, {0.0}, {1.0}});

  const double drift = spec.p_bar * (1.0 - spec.beta);
  const double sigma = std::sqrt(spec.sigma2);
  p.dynamics = [spec, drift, sigma](int, const double* x, const double* a,
                                    const double* eps, double* out) {
    out[0] = drift + spec.beta * x[0] + sigma * eps[0];
    // The clamp only absorbs accumulated rounding; admissible moves stay in
    // range by construction.
    out[1] = std::min(std::max(x[1] + flow(spec, a[0]), spec.c_min), spec.c_max);
  };
  p.running_cost = [spec](int, const double* x, const double* a) {
    double reward = -spec.hold_cost * x[1];
    if (a[0] > 0.5)
      reward -= spec.a_in * x[0];
    else if (a[0] < -0.5)
      reward += spec.a_out * x[0];
    return reward;
  };
  p.terminal_cost = [spec](const double* x) {
    return -spec.shortfall * x[0] * std::max(spec.c0 - x[1], 0.0);
  };
  p.noise_sampler = [](Rng& rng, int count, double* out) {
    for (int i = 0; i < count; ++i) out[i] = rng.normal();
  };
  p.admissible = [spec](int, const double* x, const double* a) {
    const double c = x[1] + flow(spec, a[0]);
    return c >= spec.c_min - kInvTol && c <= spec.c_max + kInvTol;
  };
  // Holding keeps the inventory in range, so it repairs any rejected move.
  p.repair = [spec](int, const double* x, double* a) {
    const double c = x[1] + flow(spec, a[0]);
    if (c < spec.c_min - kInvTol || c > spec.c_max + kInvTol) a[0] = 0.0;
  };
  p.x0 = {spec.price0, spec.c0};
  return p;
}

void storage_price_moments(const StorageSpec& spec, int n, double* mean,
                           double* var) {
  validate(spec);
  if (n < 0) throw SolverError("storage_price_moments: n must be >= 0");
  const double bn = std::pow(spec.beta, n);
  *mean = spec.p_bar + bn * (spec.price0 - spec.p_bar);
  const double b2 = spec.beta * spec.beta;
  *var = spec.sigma2 * (1.0 - std::pow(b2, n)) / (1.0 - b2);
}

TrainingMeasure storage_measure(const StorageSpec& spec) {
  validate(spec);
  return TrainingMeasure::fixed(2, [spec](int n, Rng& rng, int M, double* out) {
    double mean, var;
    storage_price_moments(spec, n, &mean, &var);
    const double sd = std::sqrt(var);
    const double span = spec.c_max - spec.c_min;
    for (int i = 0; i < M; ++i) {
      out[2 * i] = mean + sd * rng.normal();
      out[2 * i + 1] = spec.c_min + span * rng.uniform();
    }
  });
}

std::vector<std::vector<int>> storage_reachable_inventory(
    const StorageSpec& spec) {
  validate(spec);
  const long in_h = hundredths(spec.a_in, "a_in");
  const long out_h = hundredths(spec.a_out, "a_out");
  const long lo_h = hundredths(spec.c_min, "c_min");
  const long hi_h = hundredths(spec.c_max, "c_max");
  const long c0_h = hundredths(spec.c0, "c0");

  std::vector<std::vector<int>> sets(spec.N + 1);
  std::set<long> current{c0_h};
  for (int n = 0;; ++n) {
    sets[n].assign(current.begin(), current.end());
    if (n == spec.N) break;
    std::set<long> next;
    for (long c : current) {
      next.insert(c);
      if (c + in_h <= hi_h) next.insert(c + in_h);
      if (c - out_h >= lo_h) next.insert(c - out_h);
    }
    current.swap(next);
  }
  return sets;
}

std::vector<StateGrid> storage_state_grids(const StorageSpec& spec,
                                           const Vec& g_centers, int knn_k) {
  if (g_centers.empty())
    throw SolverError("storage_state_grids: empty center set");
  const auto inventory = storage_reachable_inventory(spec);
  std::vector<StateGrid> grids;
  grids.reserve(spec.N + 1);
  for (int n = 0; n <= spec.N; ++n) {
    Vec price_pts;
    if (n == 0) {
      price_pts = {spec.price0};
    } else {
      double mean, var;
      storage_price_moments(spec, n, &mean, &var);
      const double sd = std::sqrt(var);
      price_pts.resize(g_centers.size());
      for (std::size_t i = 0; i < g_centers.size(); ++i)
        price_pts[i] = mean + sd * g_centers[i];
    }
    GridAxis price = (knn_k >= 2 && price_pts.size() > 1)
                         ? GridAxis::interp2(std::move(price_pts))
                         : GridAxis::nearest(std::move(price_pts));
    Vec inv_pts(inventory[n].size());
    for (std::size_t i = 0; i < inventory[n].size(); ++i)
      inv_pts[i] = inventory[n][i] * 0.01;
    grids.push_back(StateGrid::product(
        {std::move(price), GridAxis::nearest(std::move(inv_pts))}));
  }
  return grids;
}

}  // namespace stocon
