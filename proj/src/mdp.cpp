#include "stocon/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace stocon {

namespace {

std::string fmt_point(const char* label, const double* v, int d) {
  std::ostringstream os;
  os << label << "=(";
  for (int i = 0; i < d; ++i) os << (i ? "," : "") << v[i];
  os << ")";
  return os.str();
}

bool all_finite(const double* v, int d) {
  for (int i = 0; i < d; ++i)
    if (!std::isfinite(v[i])) return false;
  return true;
}

}  // namespace

ControlSpace ControlSpace::box(Vec lo, Vec hi) {
  if (lo.size() != hi.size() || lo.empty()) throw SolverError("box bounds dimension mismatch");
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (!(lo[i] <= hi[i])) throw SolverError("box bounds inverted");
  ControlSpace s;
  s.kind = Kind::Box;
  s.lower = std::move(lo);
  s.upper = std::move(hi);
  return s;
}

ControlSpace ControlSpace::finite(std::vector<Vec> pts) {
  if (pts.empty()) throw SolverError("finite control space needs at least one point");
  const std::size_t d = pts[0].size();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].size() != d) throw SolverError("finite control points dimension mismatch");
    for (std::size_t j = 0; j < i; ++j)
      if (pts[i] == pts[j]) throw SolverError("finite control points must be distinct");
  }
  ControlSpace s;
  s.kind = Kind::Finite;
  s.points = std::move(pts);
  return s;
}

ControlSpace ControlSpace::mixed_off_or_box(Vec off, Vec lo, Vec hi) {
  ControlSpace s = box(std::move(lo), std::move(hi));
  if (off.size() != s.lower.size()) throw SolverError("off value dimension mismatch");
  s.kind = Kind::MixedOffOrBox;
  s.off_value = std::move(off);
  return s;
}

int ControlSpace::dim() const {
  if (kind == Kind::Finite) return static_cast<int>(points[0].size());
  return static_cast<int>(lower.size());
}

void ControlSpace::clamp(double* a) const {
  if (kind == Kind::Finite) return;
  for (std::size_t i = 0; i < lower.size(); ++i)
    a[i] = std::min(upper[i], std::max(lower[i], a[i]));
}

double penalty(const ConstraintSpec& spec, const double* x, const double* a) {
  double s = 0.0;
  for (const auto& t : spec.equalities) {
    const double h = t.fn(x, a);
    s += t.coeff * h * h;
  }
  for (const auto& t : spec.inequalities) {
    const double h = t.fn(x, a);
    if (h < 0.0) s -= t.coeff * h;
  }
  return s;
}

void step(const ControlProblem& p, int n, const double* x, const double* a, const double* eps,
          double* out) {
  p.dynamics(n, x, a, eps, out);
  if (!all_finite(out, p.dim_state))
    throw SolverError("dynamics diverged at n=" + std::to_string(n) + " " +
                      fmt_point("x", x, p.dim_state) + " " +
                      fmt_point("a", a, p.control_space.dim()));
}

double running_cost(const ControlProblem& p, int n, const double* x, const double* a) {
  const double f = p.running_cost(n, x, a);
  if (!std::isfinite(f))
    throw SolverError("running cost diverged at n=" + std::to_string(n) + " " +
                      fmt_point("x", x, p.dim_state));
  return f;
}

double terminal_cost(const ControlProblem& p, const double* x) {
  const double g = p.terminal_cost(x);
  if (!std::isfinite(g))
    throw SolverError("terminal cost diverged at " + fmt_point("x", x, p.dim_state));
  return g;
}

void deploy_control(const ControlProblem& p, int n, const double* x, double* a) {
  if (p.repair) {
    p.repair(n, x, a);
  } else {
    p.control_space.clamp(a);
  }
}

TrainingMeasure TrainingMeasure::fixed(
    int dim, std::function<void(int n, Rng& rng, int M, double* out)> fn) {
  TrainingMeasure m;
  m.kind = Kind::FixedDistribution;
  m.dim = dim;
  m.sample_fn = std::move(fn);
  return m;
}

TrainingMeasure TrainingMeasure::scaled_gaussian(int dim, std::function<double(int)> scale_fn) {
  TrainingMeasure m;
  m.kind = Kind::ScaledGaussian;
  m.dim = dim;
  m.sample_fn = [dim, scale_fn = std::move(scale_fn)](int n, Rng& rng, int M, double* out) {
    const double s = scale_fn(n);
    for (int i = 0; i < M * dim; ++i) out[i] = s * rng.normal();
  };
  return m;
}

TrainingMeasure TrainingMeasure::uniform_box(Vec lo, Vec hi) {
  const int dim = static_cast<int>(lo.size());
  TrainingMeasure m;
  m.kind = Kind::UniformBox;
  m.dim = dim;
  m.sample_fn = [dim, lo = std::move(lo), hi = std::move(hi)](int, Rng& rng, int M, double* out) {
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < dim; ++j) out[i * dim + j] = lo[j] + (hi[j] - lo[j]) * rng.uniform();
  };
  return m;
}

TrainingMeasure TrainingMeasure::empirical_forward(
    const ControlProblem* problem, std::function<void(int n, const double* x, double* a)> policy,
    std::function<void(Rng& rng, double* x)> init, int floor_count) {
  const int dim = problem->dim_state;
  TrainingMeasure m;
  m.kind = Kind::EmpiricalForward;
  m.dim = dim;
  m.sample_fn = [problem, policy = std::move(policy), init = std::move(init), floor_count, dim](
                    int n, Rng& rng, int M, double* out) {
    const int want = std::max(M, floor_count);
    const int q = problem->control_space.dim();
    Vec x(dim), xn(dim), a(q), eps(problem->dim_noise);
    std::vector<double> states;
    states.reserve(static_cast<std::size_t>(want) * dim);
    for (int i = 0; i < want; ++i) {
      init(rng, x.data());
      bool ok = all_finite(x.data(), dim);
      for (int t = 0; ok && t < n; ++t) {
        policy(t, x.data(), a.data());
        for (int j = 0; j < problem->dim_noise; ++j) eps[j] = 0.0;
        problem->noise_sampler(rng, 1, eps.data());
        problem->dynamics(t, x.data(), a.data(), eps.data(), xn.data());
        ok = all_finite(xn.data(), dim);
        x = xn;
      }
      if (ok) states.insert(states.end(), x.begin(), x.end());
    }
    const std::size_t got = states.size() / dim;
    if (got == 0) throw SolverError("empirical_forward produced no finite states");
    for (int i = 0; i < M; ++i) {
      std::size_t src = static_cast<std::size_t>(i);
      if (src >= got) src = rng.below(got);  // refill with replacement
      std::copy_n(states.data() + src * dim, dim, out + static_cast<std::size_t>(i) * dim);
    }
  };
  return m;
}

void sample_training(const TrainingMeasure& measure, int n, Rng& rng, int M, double* out) {
  measure.sample_fn(n, rng, M, out);
  if (!all_finite(out, M * measure.dim))
    throw SolverError("training measure produced non-finite states at n=" + std::to_string(n));
}

}  // namespace stocon
