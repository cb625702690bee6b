#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stocon/rng.hpp"

namespace stocon {

using Vec = std::vector<double>;

class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

struct ControlSpace {
  enum class Kind { Box, Finite, MixedOffOrBox };
  Kind kind = Kind::Box;
  Vec lower, upper;             // Box, MixedOffOrBox
  std::vector<Vec> points;      // Finite
  Vec off_value;                // MixedOffOrBox

  static ControlSpace box(Vec lo, Vec hi);
  static ControlSpace finite(std::vector<Vec> pts);
  static ControlSpace mixed_off_or_box(Vec off, Vec lo, Vec hi);

  int dim() const;
  // Componentwise clamp into [lower, upper]; identity for Finite.
  void clamp(double* a) const;
};

struct ConstraintSpec {
  using Fn = std::function<double(const double* x, const double* a)>;
  struct Term {
    Fn fn;
    double coeff;  // mu_k > 0
  };
  std::vector<Term> equalities;    // contributes coeff * h^2
  std::vector<Term> inequalities;  // h >= 0 feasible; contributes coeff * max(0, -h)
};

// Sum of the penalty terms; zero exactly on the feasible set.
double penalty(const ConstraintSpec& spec, const double* x, const double* a);

struct ControlProblem {
  enum class Sense { Minimize, Maximize };

  std::string name;
  int dim_state = 1;
  int dim_noise = 1;
  int horizon = 1;  // N >= 1
  Sense sense = Sense::Minimize;
  ControlSpace control_space;

  // x' = F(x, a, eps). Writes dim_state values to out.
  std::function<void(int n, const double* x, const double* a, const double* eps, double* out)>
      dynamics;
  // f(x, a) in the problem's own sense, penalty included.
  std::function<double(int n, const double* x, const double* a)> running_cost;
  std::function<double(const double* x)> terminal_cost;
  // Fills count * dim_noise values.
  std::function<void(Rng& rng, int count, double* out)> noise_sampler;

  // Hard feasibility, used by grid solvers only. Null means unconstrained.
  std::function<bool(int n, const double* x, const double* a)> admissible;
  // For box-type controls: tightened per-state bounds. Null means the full box.
  std::function<void(int n, const double* x, double* lo, double* hi)> admissible_interval;
  // Maps a raw control to an admissible one at deployment. Null means clamp only.
  std::function<void(int n, const double* x, double* a)> repair;

  Vec x0;  // initial state for evaluation and reporting

  // Internal solver sense: cost to minimize.
  double cost_sign() const { return sense == Sense::Maximize ? -1.0 : 1.0; }
};

// Checked wrappers: throw SolverError on non-finite output.
void step(const ControlProblem& p, int n, const double* x, const double* a, const double* eps,
          double* out);
double running_cost(const ControlProblem& p, int n, const double* x, const double* a);
double terminal_cost(const ControlProblem& p, const double* x);

// Applies repair if present, otherwise clamps to the control space box.
void deploy_control(const ControlProblem& p, int n, const double* x, double* a);

struct TrainingMeasure {
  enum class Kind { FixedDistribution, ScaledGaussian, UniformBox, EmpiricalForward };
  Kind kind = Kind::FixedDistribution;
  int dim = 1;
  std::function<void(int n, Rng& rng, int M, double* out)> sample_fn;

  static TrainingMeasure fixed(int dim,
                               std::function<void(int n, Rng& rng, int M, double* out)> fn);
  // scale(n) * N(0, I_dim); scale(0) may be 0 (point mass at the origin).
  static TrainingMeasure scaled_gaussian(int dim, std::function<double(int)> scale_fn);
  static TrainingMeasure uniform_box(Vec lo, Vec hi);
  // States visited at time n by simulating under `policy` from `init` draws.
  // Non-finite paths are dropped and the batch is refilled by resampling with
  // replacement, so exactly M states are always returned.
  static TrainingMeasure empirical_forward(
      const ControlProblem* problem,
      std::function<void(int n, const double* x, double* a)> policy,
      std::function<void(Rng& rng, double* x)> init, int floor_count);
};

// M states of measure.dim values each, row-major into out.
void sample_training(const TrainingMeasure& measure, int n, Rng& rng, int M, double* out);

}  // namespace stocon
