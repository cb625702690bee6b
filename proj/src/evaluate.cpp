#include <algorithm>
#include <cmath>
#include <utility>

#include "solver_common.hpp"
#include "stocon/algos.hpp"
#include "stocon/parallel.hpp"

namespace stocon {

namespace {

void check_time(const ControlProblem& p, int n, const char* what) {
  if (n < 0 || n >= p.horizon)
    throw SolverError(std::string(what) + ": time index out of range");
}

int argmax_lowest(const double* v, int count) {
  int best = 0;
  for (int i = 1; i < count; ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

}  // namespace

PolicySet PolicySet::network(ControlProblem p, std::vector<Mlp> nets, double scale) {
  detail::require(static_cast<int>(nets.size()) == p.horizon,
                  "policy nets must cover every time step");
  PolicySet ps;
  ps.kind = Kind::Network;
  ps.problem = std::move(p);
  ps.nets = std::move(nets);
  ps.control_scale = scale;
  return ps;
}

PolicySet PolicySet::classifier(ControlProblem p, std::vector<Mlp> nets,
                                std::vector<Vec> actions) {
  detail::require(static_cast<int>(nets.size()) == p.horizon,
                  "classifier nets must cover every time step");
  detail::require(!actions.empty(), "classifier needs a non-empty action list");
  for (const Mlp& net : nets)
    detail::require(net.out_dim() == static_cast<int>(actions.size()),
                    "classifier output dim must match the action count");
  PolicySet ps;
  ps.kind = Kind::Classifier;
  ps.problem = std::move(p);
  ps.nets = std::move(nets);
  ps.actions = std::move(actions);
  return ps;
}

PolicySet PolicySet::mixed(ControlProblem p, std::vector<Mlp> gate, std::vector<Mlp> on) {
  detail::require(static_cast<int>(gate.size()) == p.horizon &&
                      static_cast<int>(on.size()) == p.horizon,
                  "mixed policy nets must cover every time step");
  detail::require(p.control_space.kind == ControlSpace::Kind::MixedOffOrBox,
                  "mixed policy needs an off-or-box control space");
  PolicySet ps;
  ps.kind = Kind::Mixed;
  ps.problem = std::move(p);
  ps.gate_nets = std::move(gate);
  ps.nets = std::move(on);
  return ps;
}

PolicySet PolicySet::from_grid(ControlProblem p, std::shared_ptr<const QknnSolution> sol) {
  detail::require(sol != nullptr, "grid policy needs a solution");
  detail::require(static_cast<int>(sol->grids.size()) == p.horizon + 1,
                  "grid policy horizon mismatch");
  PolicySet ps;
  ps.kind = Kind::Grid;
  ps.problem = std::move(p);
  ps.grid = std::move(sol);
  return ps;
}

PolicySet PolicySet::function(ControlProblem p,
                              std::function<void(int, const double*, double*)> f) {
  detail::require(static_cast<bool>(f), "function policy needs a callable");
  PolicySet ps;
  ps.kind = Kind::Function;
  ps.problem = std::move(p);
  ps.fn = std::move(f);
  return ps;
}

PolicySet PolicySet::constant(ControlProblem p, Vec a) {
  detail::require(static_cast<int>(a.size()) == p.control_space.dim(),
                  "constant control dimension mismatch");
  return function(std::move(p), [a](int, const double*, double* out) {
    std::copy(a.begin(), a.end(), out);
  });
}

void PolicySet::control(int n, const double* x, double* a) const {
  check_time(problem, n, "PolicySet::control");
  switch (kind) {
    case Kind::Network: {
      mlp_forward(nets[n], x, a);
      if (nets[n].head == Head::Identity)
        for (int j = 0; j < nets[n].out_dim(); ++j) a[j] *= control_scale;
      break;
    }
    case Kind::Classifier: {
      Vec probs(nets[n].out_dim());
      mlp_forward(nets[n], x, probs.data());
      const Vec& act = actions[argmax_lowest(probs.data(), nets[n].out_dim())];
      std::copy(act.begin(), act.end(), a);
      break;
    }
    case Kind::Mixed: {
      double p_off = 0.0;
      mlp_forward(gate_nets[n], x, &p_off);
      if (p_off > 0.5) {
        const Vec& off = problem.control_space.off_value;
        std::copy(off.begin(), off.end(), a);
      } else {
        mlp_forward(nets[n], x, a);
      }
      break;
    }
    case Kind::Grid:
      grid->best_control(n, x, a);
      break;
    case Kind::Function:
      fn(n, x, a);
      break;
  }
  deploy_control(problem, n, x, a);
}

int PolicySet::classify(int n, const double* x) const {
  check_time(problem, n, "PolicySet::classify");
  if (kind == Kind::Classifier) {
    Vec probs(nets[n].out_dim());
    mlp_forward(nets[n], x, probs.data());
    return argmax_lowest(probs.data(), nets[n].out_dim());
  }
  if (kind == Kind::Mixed) return gate_probability(n, x) > 0.5 ? 0 : 1;
  throw SolverError("PolicySet::classify: policy has no discrete labels");
}

double PolicySet::gate_probability(int n, const double* x) const {
  check_time(problem, n, "PolicySet::gate_probability");
  detail::require(kind == Kind::Mixed, "gate_probability needs a mixed policy");
  double p_off = 0.0;
  mlp_forward(gate_nets[n], x, &p_off);
  return p_off;
}

ValueSet ValueSet::network(ControlProblem p, std::vector<Mlp> nets, Vec mean, Vec stdev) {
  detail::require(static_cast<int>(nets.size()) == p.horizon,
                  "value nets must cover every time step");
  detail::require(mean.size() == nets.size() && stdev.size() == nets.size(),
                  "value target stats must cover every time step");
  ValueSet vs;
  vs.kind = Kind::Network;
  vs.problem = std::move(p);
  vs.nets = std::move(nets);
  vs.y_mean = std::move(mean);
  vs.y_std = std::move(stdev);
  return vs;
}

ValueSet ValueSet::from_grid(ControlProblem p, std::shared_ptr<const QknnSolution> sol) {
  detail::require(sol != nullptr, "grid value needs a solution");
  detail::require(static_cast<int>(sol->grids.size()) == p.horizon + 1,
                  "grid value horizon mismatch");
  ValueSet vs;
  vs.kind = Kind::Grid;
  vs.problem = std::move(p);
  vs.grid = std::move(sol);
  return vs;
}

ValueSet ValueSet::composite(ControlProblem p, std::vector<Mlp> policy_nets,
                             double control_scale, std::vector<Mlp> interp_nets,
                             Vec interp_mean, Vec interp_std, QuantizerGrid noise) {
  detail::require(static_cast<int>(policy_nets.size()) == p.horizon,
                  "composite value needs a policy net per step");
  detail::require(static_cast<int>(interp_nets.size()) == p.horizon + 1,
                  "composite value needs interpolation nets for steps 1..N");
  detail::require(interp_mean.size() == interp_nets.size() &&
                      interp_std.size() == interp_nets.size(),
                  "interpolation target stats size mismatch");
  detail::require(noise.dim == p.dim_noise, "noise grid dimension mismatch");
  ValueSet vs;
  vs.kind = Kind::Composite;
  vs.problem = std::move(p);
  vs.policy_nets = std::move(policy_nets);
  vs.control_scale = control_scale;
  vs.interp_nets = std::move(interp_nets);
  vs.interp_mean = std::move(interp_mean);
  vs.interp_std = std::move(interp_std);
  vs.noise = std::move(noise);
  return vs;
}

double ValueSet::evaluate(int n, const double* x) const {
  if (n == problem.horizon) return terminal_cost(problem, x);
  check_time(problem, n, "ValueSet::evaluate");
  const double sign = problem.cost_sign();
  switch (kind) {
    case Kind::Network: {
      double raw = 0.0;
      mlp_forward(nets[n], x, &raw);
      return sign * (raw * y_std[n] + y_mean[n]);
    }
    case Kind::Grid:
      return grid->value_at(n, x);
    case Kind::Composite: {
      const int dx = problem.dim_state;
      Vec a(problem.control_space.dim()), y(dx);
      mlp_forward(policy_nets[n], x, a.data());
      if (policy_nets[n].head == Head::Identity)
        for (double& v : a) v *= control_scale;
      deploy_control(problem, n, x, a.data());
      double q = sign * running_cost(problem, n, x, a.data());
      const int k = n + 1;
      for (int l = 0; l < noise.K(); ++l) {
        step(problem, n, x, a.data(), noise.center(l), y.data());
        double raw = 0.0;
        if (k == problem.horizon && interp_nets[k].sizes.empty()) {
          raw = sign * terminal_cost(problem, y.data());
          q += noise.weights[l] * raw;
        } else {
          mlp_forward(interp_nets[k], y.data(), &raw);
          q += noise.weights[l] * (raw * interp_std[k] + interp_mean[k]);
        }
      }
      return sign * q;
    }
  }
  throw SolverError("ValueSet::evaluate: unknown kind");
}

EvalResult evaluate_policy(const ControlProblem& problem, const PolicySet& policy,
                           int batches, int batch_size, Rng rng, int threads) {
  detail::require(batches >= 1 && batch_size >= 1,
                  "evaluate_policy needs positive batches and batch_size");
  detail::require(static_cast<int>(problem.x0.size()) == problem.dim_state,
                  "evaluate_policy needs problem.x0");
  detail::require(policy.problem.dim_state == problem.dim_state &&
                      policy.problem.horizon == problem.horizon,
                  "policy was built for a different problem shape");
  const std::size_t total =
      static_cast<std::size_t>(batches) * static_cast<std::size_t>(batch_size);
  Vec cost(total);
  const int dx = problem.dim_state;
  const int da = problem.control_space.dim();
  parallel_for(total, threads, [&](std::size_t lo, std::size_t hi) {
    Vec x(dx), xn(dx), a(da), eps(problem.dim_noise);
    for (std::size_t i = lo; i < hi; ++i) {
      Rng path_rng = rng.stream(rng_tag::kEval, static_cast<std::uint64_t>(i));
      std::copy(problem.x0.begin(), problem.x0.end(), x.begin());
      double c = 0.0;
      for (int n = 0; n < problem.horizon; ++n) {
        policy.control(n, x.data(), a.data());
        c += running_cost(problem, n, x.data(), a.data());
        problem.noise_sampler(path_rng, 1, eps.data());
        step(problem, n, x.data(), a.data(), eps.data(), xn.data());
        x.swap(xn);
      }
      c += terminal_cost(problem, x.data());
      cost[i] = c;
    }
  });
  EvalResult r;
  r.batch_means.resize(batches);
  for (int b = 0; b < batches; ++b) {
    double s = 0.0;
    for (int j = 0; j < batch_size; ++j)
      s += cost[static_cast<std::size_t>(b) * batch_size + j];
    r.batch_means[b] = s / batch_size;
    r.mean += r.batch_means[b];
  }
  r.mean /= batches;
  if (batches >= 2) {
    double s2 = 0.0;
    for (double m : r.batch_means) s2 += (m - r.mean) * (m - r.mean);
    r.std = std::sqrt(s2 / (batches - 1));
  }
  return r;
}

}  // namespace stocon
