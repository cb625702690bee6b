#include <utility>

#include "solver_common.hpp"
#include "stocon/algos.hpp"

namespace stocon {

PolicyValue classif_hybrid(const ControlProblem& problem, const TrainingMeasure& measure,
                           const NnConfig& nn_cfg, const TrainConfig& train_cfg, Rng rng,
                           SolveTrace* trace, int threads) {
  (void)threads;
  const ControlSpace& cs = problem.control_space;
  detail::require(cs.kind == ControlSpace::Kind::MixedOffOrBox,
                  "classif_hybrid needs an off-or-box control space");
  detail::require(cs.dim() == 1, "classif_hybrid supports scalar on-levels only");
  detail::require(measure.dim == problem.dim_state,
                  "training measure dimension mismatch");
  const int N = problem.horizon;
  const int dx = problem.dim_state;
  const double sign = problem.cost_sign();
  const double a_off = cs.off_value[0];
  if (trace) {
    trace->policy_loss.assign(N, 0.0);
    trace->value_loss.assign(N, 0.0);
  }

  std::vector<Mlp> gates(N), ons(N), vnets(N);
  Vec y_mean(N, 0.0), y_std(N, 1.0);

  auto vint = [&](int k, const double* x) {
    if (k == N) return sign * terminal_cost(problem, x);
    double raw = 0.0;
    mlp_forward(vnets[k], x, &raw);
    return raw * y_std[k] + y_mean[k];
  };

  Vec xn(dx);
  // One-step cost of playing level `a` at (n, x) under noise eps, internal
  // sense. Infeasibility shows up through the penalty terms of running_cost.
  auto branch_cost = [&](int n, const double* x, double a, const double* eps) {
    double q = sign * running_cost(problem, n, x, &a);
    step(problem, n, x, &a, eps, xn.data());
    return q + vint(n + 1, xn.data());
  };

  for (int n = N - 1; n >= 0; --n) {
    const bool warmed = nn_cfg.warm_start && n < N - 1;

    {  // policy phase: gate P(off) and on-level trained jointly on the
       // probability-weighted branch costs, same noise in both branches
      const detail::StepData d = detail::sample_step_data(
          problem, measure, n, 2 * static_cast<std::uint64_t>(n), 1, train_cfg, rng);
      Mlp gate = Mlp::make(detail::net_sizes(dx, nn_cfg.hidden, 1), nn_cfg.activation,
                           Head::Sigmoid);
      Mlp on = Mlp::make(detail::net_sizes(dx, nn_cfg.hidden, 1), nn_cfg.activation,
                         Head::ScaledSigmoid, cs.lower[0], cs.upper[0]);
      {
        Rng gi = rng.stream(rng_tag::kInit, n, 0);
        glorot_init(gate, gi);
        Rng oi = rng.stream(rng_tag::kInit, n, 1);
        glorot_init(on, oi);
      }
      detail::prepare_net(gate, n < N - 1 ? &gates[n + 1] : nullptr, warmed, d.x.data(),
                          d.M);
      detail::prepare_net(on, n < N - 1 ? &ons[n + 1] : nullptr, warmed, d.x.data(), d.M);
      TrainConfig tc = train_cfg;
      tc.lr = detail::step_lr(nn_cfg, train_cfg, warmed);

      MlpWork work_g, work_o;
      LossGradFn loss = [&](const int* idx, int count, std::vector<MlpGrads>* g) {
        double total = 0.0;
        for (int i = 0; i < count; ++i) {
          const double* x = d.x.data() + static_cast<std::size_t>(idx[i]) * dx;
          const double* eps =
              d.eps.data() + static_cast<std::size_t>(idx[i]) * problem.dim_noise;
          double p_off = 0.0, level = 0.0;
          mlp_forward(gate, x, &p_off, work_g);
          mlp_forward(on, x, &level, work_o);
          const double c_off = branch_cost(n, x, a_off, eps);
          const double c_on = branch_cost(n, x, level, eps);
          total += p_off * c_off + (1.0 - p_off) * c_on;
          if (g != nullptr) {
            const double dg = (c_off - c_on) / count;
            mlp_backward(gate, work_g, &dg, g->at(0));
            const double delta = detail::fd_step(level);
            const double up = branch_cost(n, x, level + delta, eps);
            const double down = branch_cost(n, x, level - delta, eps);
            const double da = (1.0 - p_off) * (up - down) / (2.0 * delta) / count;
            mlp_backward(on, work_o, &da, g->at(1));
          }
        }
        return total / count;
      };
      LossFn valid = [&](const int* idx, int count) {
        double total = 0.0;
        for (int i = 0; i < count; ++i) {
          const double* x = d.xv.data() + static_cast<std::size_t>(idx[i]) * dx;
          const double* eps =
              d.epsv.data() + static_cast<std::size_t>(idx[i]) * problem.dim_noise;
          double p_off = 0.0, level = 0.0;
          mlp_forward(gate, x, &p_off, work_g);
          mlp_forward(on, x, &level, work_o);
          total += p_off * branch_cost(n, x, a_off, eps) +
                   (1.0 - p_off) * branch_cost(n, x, level, eps);
        }
        return total / count;
      };
      const TrainResult res = train({&gate, &on}, d.M, loss, d.V, valid, tc,
                                    rng.stream(rng_tag::kShuffle, n, 0));
      if (trace) trace->policy_loss[n] = res.best_valid;
      gates[n] = std::move(gate);
      ons[n] = std::move(on);
    }

    {  // value phase: probability-weighted squared error against both branch
       // targets on fresh states and noise
      const detail::StepData d = detail::sample_step_data(
          problem, measure, n, 2 * static_cast<std::uint64_t>(n) + 1, 1, train_cfg, rng);
      Vec P0(d.M), T0(d.M), T1(d.M), P0v(d.V), T0v(d.V), T1v(d.V);
      auto fill = [&](const Vec& X, const Vec& E, int count, Vec& P, Vec& A, Vec& B) {
        for (int i = 0; i < count; ++i) {
          const double* x = X.data() + static_cast<std::size_t>(i) * dx;
          const double* eps = E.data() + static_cast<std::size_t>(i) * problem.dim_noise;
          double p_off = 0.0, level = 0.0;
          mlp_forward(gates[n], x, &p_off);
          mlp_forward(ons[n], x, &level);
          P[i] = p_off;
          A[i] = branch_cost(n, x, a_off, eps);
          B[i] = branch_cost(n, x, level, eps);
        }
      };
      fill(d.x, d.eps, d.M, P0, T0, T1);
      fill(d.xv, d.epsv, d.V, P0v, T0v, T1v);

      Vec mix(d.M);
      for (int i = 0; i < d.M; ++i) mix[i] = P0[i] * T0[i] + (1.0 - P0[i]) * T1[i];
      double m = 0.0, s = 1.0;
      detail::target_stats(mix, &m, &s);
      auto standardize = [&](Vec& v) {
        for (double& t : v) t = (t - m) / s;
      };
      standardize(T0);
      standardize(T1);
      standardize(T0v);
      standardize(T1v);

      Mlp vnet = detail::make_value_net(dx, nn_cfg, rng.stream(rng_tag::kInit, n, 2));
      detail::prepare_net(vnet, n < N - 1 ? &vnets[n + 1] : nullptr, warmed, d.x.data(),
                          d.M);
      TrainConfig tc = train_cfg;
      tc.lr = detail::step_lr(nn_cfg, train_cfg, warmed);
      MlpWork work;
      LossGradFn loss = [&](const int* idx, int count, std::vector<MlpGrads>* g) {
        double total = 0.0;
        for (int i = 0; i < count; ++i) {
          const int k = idx[i];
          const double* x = d.x.data() + static_cast<std::size_t>(k) * dx;
          double phi = 0.0;
          mlp_forward(vnet, x, &phi, work);
          const double e0 = phi - T0[k], e1 = phi - T1[k];
          total += P0[k] * e0 * e0 + (1.0 - P0[k]) * e1 * e1;
          if (g != nullptr) {
            const double dphi = 2.0 * (P0[k] * e0 + (1.0 - P0[k]) * e1) / count;
            mlp_backward(vnet, work, &dphi, g->at(0));
          }
        }
        return total / count;
      };
      LossFn valid = [&](const int* idx, int count) {
        double total = 0.0;
        for (int i = 0; i < count; ++i) {
          const int k = idx[i];
          const double* x = d.xv.data() + static_cast<std::size_t>(k) * dx;
          double phi = 0.0;
          mlp_forward(vnet, x, &phi, work);
          const double e0 = phi - T0v[k], e1 = phi - T1v[k];
          total += P0v[k] * e0 * e0 + (1.0 - P0v[k]) * e1 * e1;
        }
        return total / count;
      };
      const TrainResult res = train({&vnet}, d.M, loss, d.V, valid, tc,
                                    rng.stream(rng_tag::kShuffle, n, 1));
      if (trace) trace->value_loss[n] = res.best_valid;
      vnets[n] = std::move(vnet);
      y_mean[n] = m;
      y_std[n] = s;
    }
  }

  PolicyValue pv;
  pv.value = ValueSet::network(problem, std::move(vnets), std::move(y_mean), std::move(y_std));
  pv.policy = PolicySet::mixed(problem, std::move(gates), std::move(ons));
  return pv;
}

}  // namespace stocon
