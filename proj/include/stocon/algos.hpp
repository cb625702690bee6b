#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "stocon/mdp.hpp"
#include "stocon/nn.hpp"
#include "stocon/quant.hpp"
#include "stocon/tables.hpp"

namespace stocon {

// Architecture and warm-start settings shared by the net-based solvers.
struct NnConfig {
  std::vector<int> hidden = {20, 20};
  Act activation = Act::Elu;
  bool warm_start = true;        // seed step n from the step n+1 parameters
  double warm_lr_scale = 0.2;    // learning-rate factor on warm-started steps
  double control_scale = 1.0;    // multiplies identity-head policy outputs
};

struct QknnCfg {
  int knn_k = 1;          // 1 = nearest node, 2 = two-point interpolation
  double brent_tol = 1e-5;
  int brent_multistart = 10;
  int threads = 1;
};

// Backward-induction tables on per-step state grids with quantized noise.
// Continuous controls are optimized with a bracketed scalar minimizer,
// finite sets by exhaustive scan. Values are stored in the problem's own
// sense; control re-solves are exposed for deployment at off-grid states.
struct QknnSolution {
  ControlProblem problem;
  std::vector<StateGrid> grids;  // size N + 1
  QuantizerGrid noise;
  QknnCfg cfg;
  std::vector<Vec> value;    // value[n][flat], problem's own sense
  std::vector<Vec> control;  // control[n][flat * control_dim]
  int control_dim = 0;

  double value_at(int n, const double* x) const;
  // argmin of the one-step cost-to-go at an arbitrary state, using the stored
  // next-step table.
  void best_control(int n, const double* x, double* a) const;
  GridTables tables() const;
};

std::shared_ptr<QknnSolution> qknn(const ControlProblem& problem,
                                   std::vector<StateGrid> state_grids,
                                   QuantizerGrid noise_grid, const QknnCfg& cfg);

// A policy for every time step. `control` always returns a deployable
// control: repaired when the problem defines repair, clamped otherwise.
struct PolicySet {
  enum class Kind { Network, Classifier, Grid, Mixed, Function };
  Kind kind = Kind::Function;
  ControlProblem problem;

  std::vector<Mlp> nets;       // Network / Classifier / Mixed on-branch
  double control_scale = 1.0;  // identity-head outputs only
  std::vector<Vec> actions;    // Classifier label -> control
  std::vector<Mlp> gate_nets;  // Mixed: P(off)
  std::shared_ptr<const QknnSolution> grid;
  std::function<void(int n, const double* x, double* a)> fn;

  int horizon() const { return problem.horizon; }
  void control(int n, const double* x, double* a) const;
  // Classifier: argmax label (ties to the lowest index). Mixed: 0 off, 1 on.
  int classify(int n, const double* x) const;
  double gate_probability(int n, const double* x) const;  // Mixed only

  static PolicySet network(ControlProblem p, std::vector<Mlp> nets, double scale);
  static PolicySet classifier(ControlProblem p, std::vector<Mlp> nets,
                              std::vector<Vec> actions);
  static PolicySet mixed(ControlProblem p, std::vector<Mlp> gate,
                         std::vector<Mlp> on);
  static PolicySet from_grid(ControlProblem p,
                             std::shared_ptr<const QknnSolution> sol);
  static PolicySet function(ControlProblem p,
                            std::function<void(int, const double*, double*)> f);
  static PolicySet constant(ControlProblem p, Vec a);
};

// A value estimate for every time step, in the problem's own sense.
// evaluate(N, x) is always the exact terminal cost.
struct ValueSet {
  enum class Kind { Network, Grid, Composite };
  Kind kind = Kind::Network;
  ControlProblem problem;

  // Network: nets[n] predicts the standardized sign-adjusted value.
  std::vector<Mlp> nets;  // size N
  Vec y_mean, y_std;      // per-step target de-standardization

  std::shared_ptr<const QknnSolution> grid;

  // Composite: value n reads as one-step cost of the step-n policy plus the
  // quantized expectation of the step n+1 interpolation net.
  std::vector<Mlp> policy_nets;  // size N
  std::vector<Mlp> interp_nets;  // slot k >= 1 fits value step k; slot 0 unused
  Vec interp_mean, interp_std;
  QuantizerGrid noise;
  double control_scale = 1.0;

  int horizon() const { return problem.horizon; }
  double evaluate(int n, const double* x) const;

  static ValueSet network(ControlProblem p, std::vector<Mlp> nets, Vec y_mean,
                          Vec y_std);
  static ValueSet from_grid(ControlProblem p,
                            std::shared_ptr<const QknnSolution> sol);
  static ValueSet composite(ControlProblem p, std::vector<Mlp> policy_nets,
                            double control_scale, std::vector<Mlp> interp_nets,
                            Vec interp_mean, Vec interp_std,
                            QuantizerGrid noise);
};

// Final training losses per time step (index n), recorded by the solvers.
struct SolveTrace {
  std::vector<double> policy_loss;
  std::vector<double> value_loss;
};

struct PolicyValue {
  PolicySet policy;
  ValueSet value;
};

// Policy iteration with full-horizon rollouts: step n trains a control net
// against the simulated cost of acting now and following the already-trained
// later-step policies.
PolicySet nncontpi(const ControlProblem& problem, const TrainingMeasure& measure,
                   const NnConfig& nn_cfg, const TrainConfig& train_cfg, Rng rng,
                   SolveTrace* trace = nullptr, int threads = 1);

// Same rollout objective with a finite action set: trains a softmax
// classifier against the per-action rollout costs, shared noise per sample.
PolicySet classifpi(const ControlProblem& problem, const TrainingMeasure& measure,
                    const NnConfig& nn_cfg, const TrainConfig& train_cfg, Rng rng,
                    SolveTrace* trace = nullptr, int threads = 1);

// Backward induction alternating a one-step policy fit against the step n+1
// value net with a regression of the step n value.
PolicyValue hybrid_now(const ControlProblem& problem, const TrainingMeasure& measure,
                       const NnConfig& nn_cfg, const TrainConfig& train_cfg, Rng rng,
                       SolveTrace* trace = nullptr, int threads = 1);

// Backward induction keeping the value in analytic one-step form: each step
// fits an interpolation net to the step n+1 value at simulated next states,
// then defines value n as running cost plus the quantized expectation of
// that net under the trained policy.
PolicyValue hybrid_laterq(const ControlProblem& problem, const TrainingMeasure& measure,
                          const NnConfig& nn_cfg, const TrainConfig& train_cfg,
                          QuantizerGrid noise_grid, Rng rng,
                          SolveTrace* trace = nullptr, int threads = 1);

// Off-or-on control: jointly trains a gate net P(off) and an on-level net
// against the probability-weighted one-step costs of both branches under
// shared noise, then fits the value by the same probability-weighted
// regression.
PolicyValue classif_hybrid(const ControlProblem& problem,
                           const TrainingMeasure& measure, const NnConfig& nn_cfg,
                           const TrainConfig& train_cfg, Rng rng,
                           SolveTrace* trace = nullptr, int threads = 1);

struct EvalResult {
  double mean = 0.0;
  double std = 0.0;        // sample deviation of the batch means
  Vec batch_means;
};

// Forward Monte Carlo from problem.x0 under the deployed policy; the total
// cost is reported in the problem's own sense.
EvalResult evaluate_policy(const ControlProblem& problem, const PolicySet& policy,
                           int batches, int batch_size, Rng rng, int threads = 1);

struct RegionRow {
  double c1 = 0.0, c2 = 0.0;
  Vec action;
};

// Deployed controls over a 2-D slice: axis1 outer loop, axis2 inner loop,
// remaining coordinates taken from base_state.
std::vector<RegionRow> decision_region(const PolicySet& policy, int n, int axis1,
                                       int axis2, const Vec& axis1_pts,
                                       const Vec& axis2_pts, const Vec& base_state);

}  // namespace stocon
