#pragma once

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

#include "stocon/algos.hpp"
#include "stocon/mdp.hpp"
#include "stocon/nn.hpp"
#include "stocon/parallel.hpp"

namespace stocon::detail {

// Frozen sample bundle for one time step: training and validation states with
// `noise_per_sample` noise vectors attached to each state.
struct StepData {
  int M = 0, V = 0;
  Vec x, eps;    // M * dx, M * noise_per_sample * dn
  Vec xv, epsv;  // V * dx, V * noise_per_sample * dn
};

// `salt` separates substreams when one time step draws multiple bundles
// (policy and value phases use different salts for the same n).
inline StepData sample_step_data(const ControlProblem& p, const TrainingMeasure& measure,
                                 int n, std::uint64_t salt, int noise_per_sample,
                                 const TrainConfig& cfg, const Rng& base) {
  StepData d;
  d.M = cfg.batch_size * cfg.max_batches;
  d.V = cfg.validation_size;
  const int dx = p.dim_state;
  const std::size_t per = static_cast<std::size_t>(noise_per_sample) * p.dim_noise;
  d.x.resize(static_cast<std::size_t>(d.M) * dx);
  d.xv.resize(static_cast<std::size_t>(d.V) * dx);
  d.eps.resize(static_cast<std::size_t>(d.M) * per);
  d.epsv.resize(static_cast<std::size_t>(d.V) * per);
  Rng rs = base.stream(rng_tag::kTrainStates, salt);
  sample_training(measure, n, rs, d.M, d.x.data());
  Rng rv = base.stream(rng_tag::kValidStates, salt);
  sample_training(measure, n, rv, d.V, d.xv.data());
  for (int i = 0; i < d.M; ++i) {
    Rng re = base.stream(rng_tag::kTrainNoise, salt, static_cast<std::uint64_t>(i));
    p.noise_sampler(re, noise_per_sample, d.eps.data() + i * per);
  }
  for (int i = 0; i < d.V; ++i) {
    Rng re = base.stream(rng_tag::kValidNoise, salt, static_cast<std::uint64_t>(i));
    p.noise_sampler(re, noise_per_sample, d.epsv.data() + i * per);
  }
  return d;
}

// Full-horizon cost in the internal (minimizing) sense: first action a0 as
// given, later steps from `act`, one frozen noise vector per step in
// eps_path.
struct Rollout {
  const ControlProblem* p = nullptr;
  std::function<void(int k, const double* x, double* a)> act;
  Vec xs, xn, ab;

  explicit Rollout(const ControlProblem& problem,
                   std::function<void(int, const double*, double*)> policy)
      : p(&problem),
        act(std::move(policy)),
        xs(problem.dim_state),
        xn(problem.dim_state),
        ab(problem.control_space.dim()) {}

  double run(int n, const double* x, const double* a0, const double* eps_path) {
    const double sign = p->cost_sign();
    const int dn = p->dim_noise;
    double c = sign * running_cost(*p, n, x, a0);
    step(*p, n, x, a0, eps_path, xs.data());
    for (int k = n + 1; k < p->horizon; ++k) {
      act(k, xs.data(), ab.data());
      c += sign * running_cost(*p, k, xs.data(), ab.data());
      step(*p, k, xs.data(), ab.data(), eps_path + static_cast<std::size_t>(k - n) * dn,
           xn.data());
      xs.swap(xn);
    }
    c += sign * terminal_cost(*p, xs.data());
    return c;
  }
};

inline std::vector<int> net_sizes(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> s;
  s.reserve(hidden.size() + 2);
  s.push_back(in);
  for (int h : hidden) s.push_back(h);
  s.push_back(out);
  return s;
}

// Identity-head control net; outputs are scaled by NnConfig::control_scale at
// the call sites.
inline Mlp make_box_policy_net(const ControlProblem& p, const NnConfig& cfg, Rng rng) {
  Mlp net = Mlp::make(net_sizes(p.dim_state, cfg.hidden, p.control_space.dim()),
                      cfg.activation, Head::Identity);
  glorot_init(net, rng);
  return net;
}

inline Mlp make_value_net(int dim_state, const NnConfig& cfg, Rng rng) {
  Mlp net = Mlp::make(net_sizes(dim_state, cfg.hidden, 1), cfg.activation, Head::Identity);
  glorot_init(net, rng);
  return net;
}

// Warm start copies parameters and the input normalizer from the previous
// step; a cold net gets a normalizer fit on this step's training states.
inline void prepare_net(Mlp& net, const Mlp* prev, bool warm, const double* X, int M) {
  if (warm && prev != nullptr) {
    warm_start(net, *prev);
  } else {
    auto [mean, stdev] = fit_normalizer(X, M, net.in_dim());
    set_normalizer(net, std::move(mean), std::move(stdev));
  }
}

inline double step_lr(const NnConfig& nn_cfg, const TrainConfig& cfg, bool warmed) {
  return warmed ? cfg.lr * nn_cfg.warm_lr_scale : cfg.lr;
}

// Mean and stdev of a target vector; stdev floored so constant targets are
// representable.
inline void target_stats(const Vec& y, double* mean, double* stdev) {
  double m = 0.0;
  for (double v : y) m += v;
  m /= static_cast<double>(y.size());
  double s2 = 0.0;
  for (double v : y) s2 += (v - m) * (v - m);
  double s = std::sqrt(s2 / static_cast<double>(y.size()));
  *mean = m;
  *stdev = s > 1e-12 ? s : 1.0;
}

// Central-difference step for control coordinate value a.
inline double fd_step(double a) { return 1e-4 * (1.0 + std::abs(a)); }

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw SolverError(msg);
}

}  // namespace stocon::detail
