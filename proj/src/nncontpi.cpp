#include <utility>

#include "solver_common.hpp"
#include "stocon/algos.hpp"

namespace stocon {

PolicySet nncontpi(const ControlProblem& problem, const TrainingMeasure& measure,
                   const NnConfig& nn_cfg, const TrainConfig& train_cfg, Rng rng,
                   SolveTrace* trace, int threads) {
  (void)threads;  // gradient evaluation is sequential by contract
  detail::require(problem.control_space.kind == ControlSpace::Kind::Box,
                  "nncontpi needs a box control space");
  detail::require(measure.dim == problem.dim_state,
                  "training measure dimension mismatch");
  const int N = problem.horizon;
  const int dx = problem.dim_state;
  const int da = problem.control_space.dim();
  const int dn = problem.dim_noise;
  const double scale = nn_cfg.control_scale;
  if (trace) {
    trace->policy_loss.assign(N, 0.0);
    trace->value_loss.clear();
  }

  std::vector<Mlp> nets(N);
  auto deployed = [&](int k, const double* x, double* a) {
    mlp_forward(nets[k], x, a);
    for (int j = 0; j < da; ++j) a[j] *= scale;
    deploy_control(problem, k, x, a);
  };

  for (int n = N - 1; n >= 0; --n) {
    const int steps_left = N - n;
    const detail::StepData d = detail::sample_step_data(
        problem, measure, n, static_cast<std::uint64_t>(n), steps_left, train_cfg, rng);
    Mlp net = detail::make_box_policy_net(problem, nn_cfg,
                                          rng.stream(rng_tag::kInit, n));
    const bool warmed = nn_cfg.warm_start && n < N - 1;
    detail::prepare_net(net, n < N - 1 ? &nets[n + 1] : nullptr, warmed, d.x.data(), d.M);
    TrainConfig tc = train_cfg;
    tc.lr = detail::step_lr(nn_cfg, train_cfg, warmed);

    detail::Rollout roll(problem, deployed);
    const std::size_t eps_stride = static_cast<std::size_t>(steps_left) * dn;
    MlpWork work;
    Vec a(da), dLdy(da);

    LossGradFn loss = [&](const int* idx, int count, std::vector<MlpGrads>* g) {
      double total = 0.0;
      for (int i = 0; i < count; ++i) {
        const double* x = d.x.data() + static_cast<std::size_t>(idx[i]) * dx;
        const double* eps = d.eps.data() + static_cast<std::size_t>(idx[i]) * eps_stride;
        mlp_forward(net, x, a.data(), work);
        for (int j = 0; j < da; ++j) a[j] *= scale;
        total += roll.run(n, x, a.data(), eps);
        if (g != nullptr) {
          for (int j = 0; j < da; ++j) {
            const double delta = detail::fd_step(a[j]);
            a[j] += delta;
            const double up = roll.run(n, x, a.data(), eps);
            a[j] -= 2.0 * delta;
            const double dn_cost = roll.run(n, x, a.data(), eps);
            a[j] += delta;
            dLdy[j] = scale * (up - dn_cost) / (2.0 * delta) / count;
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
        const double* eps = d.epsv.data() + static_cast<std::size_t>(idx[i]) * eps_stride;
        mlp_forward(net, x, a.data(), work);
        for (int j = 0; j < da; ++j) a[j] *= scale;
        total += roll.run(n, x, a.data(), eps);
      }
      return total / count;
    };

    const TrainResult res =
        train({&net}, d.M, loss, d.V, valid, tc, rng.stream(rng_tag::kShuffle, n));
    if (trace) trace->policy_loss[n] = res.best_valid;
    nets[n] = std::move(net);
  }
  return PolicySet::network(problem, std::move(nets), scale);
}

}  // namespace stocon
