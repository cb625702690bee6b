#include <utility>

#include "solver_common.hpp"
#include "stocon/algos.hpp"

namespace stocon {

PolicyValue hybrid_laterq(const ControlProblem& problem, const TrainingMeasure& measure,
                          const NnConfig& nn_cfg, const TrainConfig& train_cfg,
                          QuantizerGrid noise_grid, Rng rng, SolveTrace* trace,
                          int threads) {
  (void)threads;
  detail::require(problem.control_space.kind == ControlSpace::Kind::Box,
                  "hybrid_laterq needs a box control space");
  detail::require(measure.dim == problem.dim_state,
                  "training measure dimension mismatch");
  detail::require(noise_grid.dim == problem.dim_noise,
                  "noise grid dimension mismatch");
  const int N = problem.horizon;
  const int dx = problem.dim_state;
  const int da = problem.control_space.dim();
  const double scale = nn_cfg.control_scale;
  const double sign = problem.cost_sign();
  const int K = noise_grid.K();
  if (trace) {
    trace->policy_loss.assign(N, 0.0);
    trace->value_loss.assign(N, 0.0);
  }

  std::vector<Mlp> nets(N), interp(N + 1);
  Vec interp_mean(N + 1, 0.0), interp_std(N + 1, 1.0);

  // Value step k in the internal sense: exact terminal at k = N, otherwise
  // running cost of the deployed step k policy plus the quantized expectation
  // of the step k+1 interpolation net.
  Vec comp_a(da), comp_y(dx);
  auto comp_int = [&](int k, const double* x) {
    if (k == N) return sign * terminal_cost(problem, x);
    mlp_forward(nets[k], x, comp_a.data());
    for (int j = 0; j < da; ++j) comp_a[j] *= scale;
    deploy_control(problem, k, x, comp_a.data());
    double q = sign * running_cost(problem, k, x, comp_a.data());
    for (int l = 0; l < K; ++l) {
      step(problem, k, x, comp_a.data(), noise_grid.center(l), comp_y.data());
      double raw = 0.0;
      mlp_forward(interp[k + 1], comp_y.data(), &raw);
      q += noise_grid.weights[l] * (raw * interp_std[k + 1] + interp_mean[k + 1]);
    }
    return q;
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
      auto one_step = [&](const double* x, const double* act, const double* eps) {
        double q = sign * running_cost(problem, n, x, act);
        step(problem, n, x, act, eps, xn.data());
        return q + comp_int(n + 1, xn.data());
      };
      LossGradFn loss = [&](const int* idx, int count, std::vector<MlpGrads>* g) {
        double total = 0.0;
        for (int i = 0; i < count; ++i) {
          const double* x = d.x.data() + static_cast<std::size_t>(idx[i]) * dx;
          const double* eps =
              d.eps.data() + static_cast<std::size_t>(idx[i]) * problem.dim_noise;
          mlp_forward(net, x, a.data(), work);
          for (int j = 0; j < da; ++j) a[j] *= scale;
          total += one_step(x, a.data(), eps);
          if (g != nullptr) {
            for (int j = 0; j < da; ++j) {
              const double delta = detail::fd_step(a[j]);
              a[j] += delta;
              const double up = one_step(x, a.data(), eps);
              a[j] -= 2.0 * delta;
              const double down = one_step(x, a.data(), eps);
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
          total += one_step(x, a.data(), eps);
        }
        return total / count;
      };
      const TrainResult res =
          train({&net}, d.M, loss, d.V, valid, tc, rng.stream(rng_tag::kShuffle, n, 0));
      if (trace) trace->policy_loss[n] = res.best_valid;
      nets[n] = std::move(net);
    }

    {  // interpolation phase: fit a plain net to the step n+1 value at next
       // states reached by the trained step n policy
      const detail::StepData d = detail::sample_step_data(
          problem, measure, n, 2 * static_cast<std::uint64_t>(n) + 1, 1, train_cfg, rng);
      Vec a(da), xn(dx);
      Vec X(static_cast<std::size_t>(d.M) * dx), Xv(static_cast<std::size_t>(d.V) * dx);
      Vec Y(d.M), Yv(d.V);
      auto next_state = [&](const double* x, const double* eps, double* out) {
        mlp_forward(nets[n], x, a.data());
        for (int j = 0; j < da; ++j) a[j] *= scale;
        deploy_control(problem, n, x, a.data());
        step(problem, n, x, a.data(), eps, out);
      };
      for (int i = 0; i < d.M; ++i) {
        next_state(d.x.data() + static_cast<std::size_t>(i) * dx,
                   d.eps.data() + static_cast<std::size_t>(i) * problem.dim_noise,
                   X.data() + static_cast<std::size_t>(i) * dx);
        Y[i] = comp_int(n + 1, X.data() + static_cast<std::size_t>(i) * dx);
      }
      for (int i = 0; i < d.V; ++i) {
        next_state(d.xv.data() + static_cast<std::size_t>(i) * dx,
                   d.epsv.data() + static_cast<std::size_t>(i) * problem.dim_noise,
                   Xv.data() + static_cast<std::size_t>(i) * dx);
        Yv[i] = comp_int(n + 1, Xv.data() + static_cast<std::size_t>(i) * dx);
      }
      double m = 0.0, s = 1.0;
      detail::target_stats(Y, &m, &s);
      for (double& v : Y) v = (v - m) / s;
      for (double& v : Yv) v = (v - m) / s;

      Mlp tnet = detail::make_value_net(dx, nn_cfg, rng.stream(rng_tag::kInit, n, 1));
      if (nn_cfg.warm_start && n < N - 1) {
        warm_start(tnet, interp[n + 2]);
      } else {
        auto [mean, stdev] = fit_normalizer(X.data(), d.M, dx);
        set_normalizer(tnet, std::move(mean), std::move(stdev));
      }
      TrainConfig tc = train_cfg;
      tc.lr = detail::step_lr(nn_cfg, train_cfg, warmed);
      const TrainResult res =
          fit_regression(tnet, X.data(), Y.data(), d.M, Xv.data(), Yv.data(), d.V, tc,
                         rng.stream(rng_tag::kShuffle, n, 1));
      if (trace) trace->value_loss[n] = res.best_valid;
      interp[n + 1] = std::move(tnet);
      interp_mean[n + 1] = m;
      interp_std[n + 1] = s;
    }
  }

  PolicyValue pv;
  pv.value = ValueSet::composite(problem, nets, scale, std::move(interp),
                                 std::move(interp_mean), std::move(interp_std),
                                 std::move(noise_grid));
  pv.policy = PolicySet::network(problem, std::move(nets), scale);
  return pv;
}

}  // namespace stocon
