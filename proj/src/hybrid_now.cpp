#include <utility>

#include "solver_common.hpp"
#include "stocon/algos.hpp"

namespace stocon {

PolicyValue hybrid_now(const ControlProblem& problem, const TrainingMeasure& measure,
                       const NnConfig& nn_cfg, const TrainConfig& train_cfg, Rng rng,
                       SolveTrace* trace, int threads) {
  (void)threads;
  detail::require(problem.control_space.kind == ControlSpace::Kind::Box,
                  "hybrid_now needs a box control space");
  detail::require(measure.dim == problem.dim_state,
                  "training measure dimension mismatch");
  const int N = problem.horizon;
  const int dx = problem.dim_state;
  const int da = problem.control_space.dim();
  const double scale = nn_cfg.control_scale;
  const double sign = problem.cost_sign();
  if (trace) {
    trace->policy_loss.assign(N, 0.0);
    trace->value_loss.assign(N, 0.0);
  }

  std::vector<Mlp> nets(N), vnets(N);
  Vec y_mean(N, 0.0), y_std(N, 1.0);

  // Cost-to-go estimate in the internal sense, exact terminal at k = N.
  auto vint = [&](int k, const double* x) {
    if (k == N) return sign * terminal_cost(problem, x);
    double raw = 0.0;
    mlp_forward(vnets[k], x, &raw);
    return raw * y_std[k] + y_mean[k];
  };

  for (int n = N - 1; n >= 0; --n) {
    const bool warmed = nn_cfg.warm_start && n < N - 1;

    {  // policy phase: one-step objective against the step n+1 value
      const detail::StepData d = detail::sample_step_data(
          problem, measure, n, 2 * static_cast<std::uint64_t>(n), 1, train_cfg, rng);
      Mlp net = detail::make_box_policy_net(problem, nn_cfg,
                                            rng.stream(rng_tag::kInit, n, 0));
      detail::prepare_net(net, n < N - 1 ? &nets[n + 1] : nullptr, warmed, d.x.data(), d.M);
      TrainConfig tc = train_cfg;
      tc.lr = detail::step_lr(nn_cfg, train_cfg, warmed);

      MlpWork work;
      Vec a(da), dLdy(da), xn(dx);
      auto one_step = [&](int nn, const double* x, const double* act, const double* eps) {
        double q = sign * running_cost(problem, nn, x, act);
        step(problem, nn, x, act, eps, xn.data());
        return q + vint(nn + 1, xn.data());
      };
      LossGradFn loss = [&](const int* idx, int count, std::vector<MlpGrads>* g) {
        double total = 0.0;
        for (int i = 0; i < count; ++i) {
          const double* x = d.x.data() + static_cast<std::size_t>(idx[i]) * dx;
          const double* eps =
              d.eps.data() + static_cast<std::size_t>(idx[i]) * problem.dim_noise;
          mlp_forward(net, x, a.data(), work);
          for (int j = 0; j < da; ++j) a[j] *= scale;
          total += one_step(n, x, a.data(), eps);
          if (g != nullptr) {
            for (int j = 0; j < da; ++j) {
              const double delta = detail::fd_step(a[j]);
              a[j] += delta;
              const double up = one_step(n, x, a.data(), eps);
              a[j] -= 2.0 * delta;
              const double down = one_step(n, x, a.data(), eps);
              a[j] += delta;
              dLdy[j] = scale * (up - down) / (2.0 * delta) / count;
            }
            mlp_backward(net, work, dLdy.data(), g->at(0));
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
          mlp_forward(net, x, a.data(), work);
          for (int j = 0; j < da; ++j) a[j] *= scale;
          total += one_step(n, x, a.data(), eps);
        }
        return total / count;
      };
      const TrainResult res =
          train({&net}, d.M, loss, d.V, valid, tc, rng.stream(rng_tag::kShuffle, n, 0));
      if (trace) trace->policy_loss[n] = res.best_valid;
      nets[n] = std::move(net);
    }

    {  // value phase: regress the one-step cost of the trained policy on
       // fresh states and noise
      const detail::StepData d = detail::sample_step_data(
          problem, measure, n, 2 * static_cast<std::uint64_t>(n) + 1, 1, train_cfg, rng);
      Vec a(da), xn(dx);
      auto target = [&](const double* x, const double* eps) {
        mlp_forward(nets[n], x, a.data());
        for (int j = 0; j < da; ++j) a[j] *= scale;
        deploy_control(problem, n, x, a.data());
        double q = sign * running_cost(problem, n, x, a.data());
        step(problem, n, x, a.data(), eps, xn.data());
        return q + vint(n + 1, xn.data());
      };
      Vec Y(d.M), Yv(d.V);
      for (int i = 0; i < d.M; ++i)
        Y[i] = target(d.x.data() + static_cast<std::size_t>(i) * dx,
                      d.eps.data() + static_cast<std::size_t>(i) * problem.dim_noise);
      for (int i = 0; i < d.V; ++i)
        Yv[i] = target(d.xv.data() + static_cast<std::size_t>(i) * dx,
                       d.epsv.data() + static_cast<std::size_t>(i) * problem.dim_noise);
      double m = 0.0, s = 1.0;
      detail::target_stats(Y, &m, &s);
      for (double& v : Y) v = (v - m) / s;
      for (double& v : Yv) v = (v - m) / s;

      Mlp vnet = detail::make_value_net(dx, nn_cfg, rng.stream(rng_tag::kInit, n, 1));
      detail::prepare_net(vnet, n < N - 1 ? &vnets[n + 1] : nullptr, warmed, d.x.data(),
                          d.M);
      TrainConfig tc = train_cfg;
      tc.lr = detail::step_lr(nn_cfg, train_cfg, warmed);
      const TrainResult res =
          fit_regression(vnet, d.x.data(), Y.data(), d.M, d.xv.data(), Yv.data(), d.V, tc,
                         rng.stream(rng_tag::kShuffle, n, 1));
      if (trace) trace->value_loss[n] = res.best_valid;
      vnets[n] = std::move(vnet);
      y_mean[n] = m;
      y_std[n] = s;
    }
  }

  PolicyValue pv;
  pv.value = ValueSet::network(problem, std::move(vnets), std::move(y_mean), std::move(y_std));
  pv.policy = PolicySet::network(problem, std::move(nets), scale);
  return pv;
}

}  // namespace stocon
