#include <utility>

#include "solver_common.hpp"
#include "stocon/algos.hpp"
#include "stocon/parallel.hpp"

namespace stocon {

namespace {

// Deployed classifier control: argmax label (ties to the lowest index), then
// repair. Each copy owns its probability buffer, so one instance per worker
// is safe.
struct ClassifierDeploy {
  const ControlProblem* p;
  const std::vector<Mlp>* nets;
  Vec probs;

  void operator()(int k, const double* x, double* a) {
    const Mlp& net = (*nets)[k];
    probs.resize(net.out_dim());
    mlp_forward(net, x, probs.data());
    int best = 0;
    for (int l = 1; l < net.out_dim(); ++l)
      if (probs[l] > probs[best]) best = l;
    const Vec& act = p->control_space.points[best];
    std::copy(act.begin(), act.end(), a);
    deploy_control(*p, k, x, a);
  }
};

}  // namespace

PolicySet classifpi(const ControlProblem& problem, const TrainingMeasure& measure,
                    const NnConfig& nn_cfg, const TrainConfig& train_cfg, Rng rng,
                    SolveTrace* trace, int threads) {
  detail::require(problem.control_space.kind == ControlSpace::Kind::Finite,
                  "classifpi needs a finite control space");
  detail::require(measure.dim == problem.dim_state,
                  "training measure dimension mismatch");
  const int N = problem.horizon;
  const int dx = problem.dim_state;
  const int da = problem.control_space.dim();
  const int dn = problem.dim_noise;
  const auto& actions = problem.control_space.points;
  const int L = static_cast<int>(actions.size());
  if (trace) {
    trace->policy_loss.assign(N, 0.0);
    trace->value_loss.clear();
  }

  std::vector<Mlp> nets(N);
  for (int n = N - 1; n >= 0; --n) {
    const int steps_left = N - n;
    const detail::StepData d = detail::sample_step_data(
        problem, measure, n, static_cast<std::uint64_t>(n), steps_left, train_cfg, rng);
    const std::size_t eps_stride = static_cast<std::size_t>(steps_left) * dn;

    // Per-sample cost of each first action (repaired at the sample state),
    // sharing the sample's noise path across actions.
    auto fill_costs = [&](const Vec& X, const Vec& E, int count, Vec& out) {
      out.resize(static_cast<std::size_t>(count) * L);
      parallel_for(count, threads, [&](std::size_t lo, std::size_t hi) {
        detail::Rollout roll(problem, ClassifierDeploy{&problem, &nets, Vec()});
        Vec arep(da);
        for (std::size_t i = lo; i < hi; ++i) {
          const double* x = X.data() + i * dx;
          const double* eps = E.data() + i * eps_stride;
          for (int l = 0; l < L; ++l) {
            arep = actions[l];
            deploy_control(problem, n, x, arep.data());
            out[i * L + l] = roll.run(n, x, arep.data(), eps);
          }
        }
      });
    };
    Vec C, Cv;
    fill_costs(d.x, d.eps, d.M, C);
    fill_costs(d.xv, d.epsv, d.V, Cv);

    Mlp net = Mlp::make(detail::net_sizes(dx, nn_cfg.hidden, L), nn_cfg.activation,
                        Head::Softmax);
    {
      Rng init_rng = rng.stream(rng_tag::kInit, n);
      glorot_init(net, init_rng);
    }
    const bool warmed = nn_cfg.warm_start && n < N - 1;
    detail::prepare_net(net, n < N - 1 ? &nets[n + 1] : nullptr, warmed, d.x.data(), d.M);
    TrainConfig tc = train_cfg;
    tc.lr = detail::step_lr(nn_cfg, train_cfg, warmed);

    MlpWork work;
    Vec probs(L), dLdy(L);
    LossGradFn loss = [&](const int* idx, int count, std::vector<MlpGrads>* g) {
      double total = 0.0;
      for (int i = 0; i < count; ++i) {
        const double* x = d.x.data() + static_cast<std::size_t>(idx[i]) * dx;
        const double* c = C.data() + static_cast<std::size_t>(idx[i]) * L;
        mlp_forward(net, x, probs.data(), work);
        double li = 0.0;
        for (int l = 0; l < L; ++l) li += probs[l] * c[l];
        total += li;
        if (g != nullptr) {
          for (int l = 0; l < L; ++l) dLdy[l] = c[l] / count;
          mlp_backward(net, work, dLdy.data(), g->at(0));
        }
      }
      return total / count;
    };
    LossFn valid = [&](const int* idx, int count) {
      double total = 0.0;
      for (int i = 0; i < count; ++i) {
        const double* x = d.xv.data() + static_cast<std::size_t>(idx[i]) * dx;
        const double* c = Cv.data() + static_cast<std::size_t>(idx[i]) * L;
        mlp_forward(net, x, probs.data(), work);
        for (int l = 0; l < L; ++l) total += probs[l] * c[l];
      }
      return total / count;
    };

    const TrainResult res =
        train({&net}, d.M, loss, d.V, valid, tc, rng.stream(rng_tag::kShuffle, n));
    if (trace) trace->policy_loss[n] = res.best_valid;
    nets[n] = std::move(net);
  }
  return PolicySet::classifier(problem, std::move(nets), actions);
}

}  // namespace stocon
