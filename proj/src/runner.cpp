#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "stocon/oracles.hpp"
#include "stocon/runner.hpp"

namespace stocon {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

[[noreturn]] void fail(const std::string& msg) { throw SolverError("runner: " + msg); }

class Timer {
 public:
  explicit Timer(RunReport* report, std::string label)
      : report_(report), label_(std::move(label)), start_(clock::now()) {}
  ~Timer() {
    const double s = std::chrono::duration<double>(clock::now() - start_).count();
    report_->phase_seconds.emplace_back(label_, s);
  }

 private:
  using clock = std::chrono::steady_clock;
  RunReport* report_;
  std::string label_;
  clock::time_point start_;
};

ClvqParams clvq_params(const QuantConfig& q) {
  ClvqParams p;
  p.iterations = q.iterations;
  p.polish_passes = q.polish_passes;
  p.polish_samples = q.polish_samples;
  p.weight_samples = q.weight_samples;
  p.step_a = q.step_a;
  p.step_b = q.step_b;
  return p;
}

TrainingMeasure build_measure(const RunConfig& cfg) {
  if (cfg.problem == "semilinear") return semilinear_measure(cfg.semilinear);
  if (cfg.problem == "lq") return lq_measure(cfg.lq);
  if (cfg.problem == "hedging") return hedging_measure(cfg.hedging);
  if (cfg.problem == "storage") return storage_measure(cfg.storage);
  return microgrid_measure(cfg.microgrid);
}

// Noise quantizer for the expectation-based solvers; hedging keeps its exact
// three-atom grid.
QuantizerGrid build_noise_grid(const RunConfig& cfg, const ControlProblem& problem) {
  if (cfg.problem == "hedging") return hedging_noise_grid(cfg.hedging);
  return gaussian_grid(problem.dim_noise, cfg.quantizer.K, clvq_params(cfg.quantizer),
                       Rng(cfg.seed).stream(rng_tag::kQuantizer));
}

std::vector<StateGrid> build_state_grids(const RunConfig& cfg) {
  const QuantizerGrid axis =
      gaussian_grid(1, cfg.qknn.state_points, clvq_params(cfg.quantizer),
                    Rng(cfg.seed).stream(rng_tag::kQuantizer, 1));
  if (cfg.problem == "semilinear")
    return semilinear_state_grids(cfg.semilinear, axis.centers, cfg.qknn.knn_k);
  if (cfg.problem == "storage")
    return storage_state_grids(cfg.storage, axis.centers, cfg.qknn.knn_k);
  if (cfg.problem == "microgrid")
    return microgrid_state_grids(cfg.microgrid, axis.centers);
  fail("qknn state grids are defined for semilinear, storage, and microgrid only");
}

void set_param(const RunConfig& cfg, RunReport* r) {
  if (cfg.problem == "semilinear") {
    r->param_label = "gamma";
    r->param_value = cfg.semilinear.gamma;
  } else if (cfg.problem == "lq") {
    r->param_label = "d";
    r->param_value = cfg.lq.d;
  } else if (cfg.problem == "hedging") {
    r->param_label = "N";
    r->param_value = cfg.hedging.N;
  } else if (cfg.problem == "storage") {
    r->param_label = "a_in";
    r->param_value = cfg.storage.a_in;
  } else {
    r->param_label = "N";
    r->param_value = cfg.microgrid.N;
  }
}

json grid_axis_to_json(const GridAxis& axis) {
  return {{"mode", axis.mode == GridAxis::Mode::Nearest ? "nearest" : "interp2"},
          {"points", axis.points}};
}

GridAxis grid_axis_from_json(const json& j) {
  const std::string mode = j.at("mode").get<std::string>();
  std::vector<double> pts = j.at("points").get<std::vector<double>>();
  return mode == "nearest" ? GridAxis::nearest(std::move(pts))
                           : GridAxis::interp2(std::move(pts));
}

json noise_to_json(const QuantizerGrid& g) {
  return {{"dim", g.dim}, {"centers", g.centers}, {"weights", g.weights}};
}

QuantizerGrid noise_from_json(const json& j) {
  return grid_from_points(j.at("dim").get<int>(),
                          j.at("centers").get<std::vector<double>>(),
                          j.at("weights").get<Vec>());
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) fail("cannot write " + path);
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void save_nets(const std::vector<Mlp>& nets, const std::string& dir, const char* stem,
               std::vector<std::string>* files, json* names) {
  *names = json::array();
  for (std::size_t i = 0; i < nets.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof name, "%s_%02zu.json", stem, i);
    save_mlp(nets[i], dir + "/" + name);
    names->push_back(name);
    files->push_back(dir + "/" + name);
  }
}

std::vector<Mlp> load_nets(const json& names, const std::string& dir) {
  std::vector<Mlp> nets;
  for (const json& n : names) nets.push_back(load_mlp(dir + "/" + n.get<std::string>()));
  return nets;
}

void save_tables(const QknnSolution& sol, const std::string& path) {
  json j;
  j["control_dim"] = sol.control_dim;
  j["noise"] = noise_to_json(sol.noise);
  j["cfg"] = {{"knn_k", sol.cfg.knn_k},
              {"brent_tol", sol.cfg.brent_tol},
              {"brent_multistart", sol.cfg.brent_multistart}};
  json grids = json::array();
  for (const StateGrid& g : sol.grids) {
    json axes = json::array();
    for (const GridAxis& a : g.axes) axes.push_back(grid_axis_to_json(a));
    grids.push_back(axes);
  }
  j["grids"] = std::move(grids);
  j["value"] = sol.value;
  j["control"] = sol.control;
  write_text(path, j.dump());
}

std::shared_ptr<QknnSolution> load_tables(const std::string& path,
                                          const ControlProblem& problem) {
  const json j = json::parse(read_text(path));
  auto sol = std::make_shared<QknnSolution>();
  sol->problem = problem;
  sol->control_dim = j.at("control_dim").get<int>();
  sol->noise = noise_from_json(j.at("noise"));
  sol->cfg.knn_k = j.at("cfg").at("knn_k").get<int>();
  sol->cfg.brent_tol = j.at("cfg").at("brent_tol").get<double>();
  sol->cfg.brent_multistart = j.at("cfg").at("brent_multistart").get<int>();
  for (const json& axes : j.at("grids")) {
    std::vector<GridAxis> ga;
    for (const json& a : axes) ga.push_back(grid_axis_from_json(a));
    sol->grids.push_back(StateGrid::product(std::move(ga)));
  }
  sol->value = j.at("value").get<std::vector<Vec>>();
  sol->control = j.at("control").get<std::vector<Vec>>();
  if (static_cast<int>(sol->grids.size()) != problem.horizon + 1)
    fail("saved tables do not match the problem horizon");
  return sol;
}

void save_value_set(const ValueSet& value, const std::string& dir,
                    std::vector<std::string>* files) {
  fs::create_directories(dir);
  json m;
  switch (value.kind) {
    case ValueSet::Kind::Network: {
      m["kind"] = "network";
      m["y_mean"] = value.y_mean;
      m["y_std"] = value.y_std;
      json names;
      save_nets(value.nets, dir, "value", files, &names);
      m["nets"] = std::move(names);
      break;
    }
    case ValueSet::Kind::Grid:
      m["kind"] = "grid";
      m["tables"] = "../policy/tables.json";
      break;
    case ValueSet::Kind::Composite: {
      m["kind"] = "composite";
      m["control_scale"] = value.control_scale;
      m["interp_mean"] = value.interp_mean;
      m["interp_std"] = value.interp_std;
      m["noise"] = noise_to_json(value.noise);
      json names = json::array();
      for (std::size_t k = 1; k < value.interp_nets.size(); ++k) {
        char name[64];
        std::snprintf(name, sizeof name, "interp_%02zu.json", k);
        save_mlp(value.interp_nets[k], dir + "/" + name);
        names.push_back(name);
        files->push_back(dir + "/" + name);
      }
      m["interp"] = std::move(names);
      break;
    }
  }
  const std::string path = dir + "/manifest.json";
  write_text(path, m.dump(2));
  files->push_back(path);
}

RunOutput run_impl(const RunConfig& cfg) {
  RunOutput out;
  RunReport& report = out.report;
  report.config_json = cfg.to_json();
  report.problem = cfg.problem;
  report.algorithm = cfg.algorithm;
  set_param(cfg, &report);

  const ControlProblem problem = build_problem(cfg);
  const Rng root(cfg.seed);

  if (cfg.algorithm == "oracle" && cfg.problem == "semilinear") {
    Timer t(&report, "oracle");
    const long n = static_cast<long>(cfg.eval.batches) * cfg.eval.batch_size;
    const McValue v = hopf_cole_value(cfg.semilinear, 0.0, problem.x0, n, root);
    report.value_mean = v.value;
    report.oracle_std_error = v.std_error;
    return out;
  }
  if (cfg.algorithm == "oracle" && cfg.problem == "lq") {
    Timer t(&report, "oracle");
    const RiccatiSolution sol = riccati_solve(cfg.lq, 200);
    report.value_mean = sol.value_at(0.0, problem.x0);
    return out;
  }
  if (cfg.algorithm == "oracle" && cfg.problem == "hedging") {
    Timer t(&report, "oracle");
    const HedgingSolution sol = hedging_recursion(cfg.hedging);
    report.value_mean = sol.value0_at_w0_star;
    report.w0_star = sol.w0_star;
    report.hedging_K = sol.K;
    return out;
  }

  {
    Timer t(&report, "solve");
    if (cfg.algorithm == "constant" || cfg.algorithm == "oracle") {
      // storage / microgrid oracle: the do-nothing policy, repaired where
      // off is infeasible
      Vec a = cfg.algorithm == "constant" ? cfg.constant_control
                                          : Vec(problem.control_space.dim(), 0.0);
      out.policy = PolicySet::constant(problem, std::move(a));
    } else if (cfg.algorithm == "nncontpi") {
      out.policy = nncontpi(problem, build_measure(cfg), cfg.nn, cfg.train, root,
                            &report.trace, cfg.threads);
    } else if (cfg.algorithm == "classifpi") {
      out.policy = classifpi(problem, build_measure(cfg), cfg.nn, cfg.train, root,
                             &report.trace, cfg.threads);
    } else if (cfg.algorithm == "hybrid_now") {
      PolicyValue pv = hybrid_now(problem, build_measure(cfg), cfg.nn, cfg.train, root,
                                  &report.trace, cfg.threads);
      out.policy = std::move(pv.policy);
      out.value = std::move(pv.value);
    } else if (cfg.algorithm == "hybrid_laterq") {
      PolicyValue pv =
          hybrid_laterq(problem, build_measure(cfg), cfg.nn, cfg.train,
                        build_noise_grid(cfg, problem), root, &report.trace, cfg.threads);
      out.policy = std::move(pv.policy);
      out.value = std::move(pv.value);
    } else if (cfg.algorithm == "classif_hybrid") {
      PolicyValue pv = classif_hybrid(problem, build_measure(cfg), cfg.nn, cfg.train, root,
                                      &report.trace, cfg.threads);
      out.policy = std::move(pv.policy);
      out.value = std::move(pv.value);
    } else {  // qknn
      QknnCfg qc;
      qc.knn_k = cfg.qknn.knn_k;
      qc.brent_tol = cfg.qknn.brent_tol;
      qc.brent_multistart = cfg.qknn.brent_multistart;
      qc.threads = cfg.threads;
      const auto sol =
          qknn(problem, build_state_grids(cfg), build_noise_grid(cfg, problem), qc);
      out.policy = PolicySet::from_grid(problem, sol);
      out.value = ValueSet::from_grid(problem, sol);
    }
  }

  {
    Timer t(&report, "evaluate");
    const EvalResult r =
        evaluate_policy(problem, *out.policy, cfg.eval.batches, cfg.eval.batch_size, root,
                        cfg.threads);
    report.value_mean = r.mean;
    report.value_std = r.std;
    report.batch_means = r.batch_means;
    if (out.value) report.value_at_x0 = out.value->evaluate(0, problem.x0.data());
  }

  if (!cfg.output_dir.empty()) {
    Timer t(&report, "artifacts");
    fs::create_directories(cfg.output_dir);
    if (cfg.algorithm == "constant" || cfg.algorithm == "oracle") {
      const std::string pdir = cfg.output_dir + "/policy";
      fs::create_directories(pdir);
      json m;
      m["kind"] = "constant";
      m["control"] = cfg.algorithm == "constant" ? cfg.constant_control
                                                 : Vec(problem.control_space.dim(), 0.0);
      write_text(pdir + "/manifest.json", m.dump(2));
      report.artifacts.push_back(pdir + "/manifest.json");
    } else {
      save_policy(*out.policy, cfg.output_dir + "/policy", &report.artifacts);
    }
    if (out.value) save_value_set(*out.value, cfg.output_dir + "/value", &report.artifacts);
    const std::string rpath = cfg.output_dir + "/report.json";
    write_text(rpath, report.to_json());
    write_text(cfg.output_dir + "/report.csv",
               RunReport::csv_header() + "\n" + report.csv_row() + "\n");
    report.artifacts.push_back(rpath);
    report.artifacts.push_back(cfg.output_dir + "/report.csv");
  }
  return out;
}

}  // namespace

ControlProblem build_problem(const RunConfig& cfg) {
  if (cfg.problem == "semilinear") return make_semilinear(cfg.semilinear);
  if (cfg.problem == "lq") return make_lq(cfg.lq);
  if (cfg.problem == "hedging") return make_hedging(cfg.hedging);
  if (cfg.problem == "storage") return make_storage(cfg.storage);
  if (cfg.problem == "microgrid") return make_microgrid(cfg.microgrid);
  fail("unknown problem " + cfg.problem);
}

void save_policy(const PolicySet& policy, const std::string& dir,
                 std::vector<std::string>* files) {
  fs::create_directories(dir);
  json m;
  switch (policy.kind) {
    case PolicySet::Kind::Network: {
      m["kind"] = "network";
      m["control_scale"] = policy.control_scale;
      json names;
      save_nets(policy.nets, dir, "net", files, &names);
      m["nets"] = std::move(names);
      break;
    }
    case PolicySet::Kind::Classifier: {
      m["kind"] = "classifier";
      m["actions"] = policy.actions;
      json names;
      save_nets(policy.nets, dir, "net", files, &names);
      m["nets"] = std::move(names);
      break;
    }
    case PolicySet::Kind::Mixed: {
      m["kind"] = "mixed";
      json gnames, onames;
      save_nets(policy.gate_nets, dir, "gate", files, &gnames);
      save_nets(policy.nets, dir, "on", files, &onames);
      m["gates"] = std::move(gnames);
      m["nets"] = std::move(onames);
      break;
    }
    case PolicySet::Kind::Grid: {
      m["kind"] = "grid";
      m["tables"] = "tables.json";
      save_tables(*policy.grid, dir + "/tables.json");
      files->push_back(dir + "/tables.json");
      break;
    }
    case PolicySet::Kind::Function:
      throw SolverError("save_policy: function policies cannot be saved");
  }
  const std::string path = dir + "/manifest.json";
  write_text(path, m.dump(2));
  files->push_back(path);
}

PolicySet load_policy(const std::string& dir, const ControlProblem& problem) {
  const json m = json::parse(read_text(dir + "/manifest.json"));
  const std::string kind = m.at("kind").get<std::string>();
  if (kind == "network")
    return PolicySet::network(problem, load_nets(m.at("nets"), dir),
                              m.at("control_scale").get<double>());
  if (kind == "classifier")
    return PolicySet::classifier(problem, load_nets(m.at("nets"), dir),
                                 m.at("actions").get<std::vector<Vec>>());
  if (kind == "mixed")
    return PolicySet::mixed(problem, load_nets(m.at("gates"), dir),
                            load_nets(m.at("nets"), dir));
  if (kind == "grid")
    return PolicySet::from_grid(
        problem, load_tables(dir + "/" + m.at("tables").get<std::string>(), problem));
  if (kind == "constant")
    return PolicySet::constant(problem, m.at("control").get<Vec>());
  fail("unknown policy kind " + kind);
}

double RunReport::runtime_seconds() const {
  double s = 0.0;
  for (const auto& [label, sec] : phase_seconds) s += sec;
  return s;
}

std::string RunReport::to_json() const {
  json j;
  j["config"] = json::parse(config_json);
  j["problem"] = problem;
  j["algorithm"] = algorithm;
  j["param_label"] = param_label;
  j["param_value"] = param_value;
  j["value_mean"] = value_mean;
  j["value_std"] = value_std;
  j["batch_means"] = batch_means;
  if (value_at_x0) j["value_at_x0"] = *value_at_x0;
  if (oracle_std_error) j["oracle_std_error"] = *oracle_std_error;
  if (w0_star) j["w0_star"] = *w0_star;
  if (!hedging_K.empty()) j["hedging_K"] = hedging_K;
  j["trace"] = {{"policy_loss", trace.policy_loss}, {"value_loss", trace.value_loss}};
  json phases = json::object();
  for (const auto& [label, sec] : phase_seconds) phases[label] = sec;
  j["phase_seconds"] = std::move(phases);
  j["artifacts"] = artifacts;
  return j.dump(2);
}

std::string RunReport::csv_header() {
  return "algo,problem,gamma_or_param,value_mean,value_std,runtime_s";
}

std::string RunReport::csv_row() const {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s,%s,%.10g,%.10g,%.10g,%.3f", algorithm.c_str(),
                problem.c_str(), param_value, value_mean, value_std, runtime_seconds());
  return buf;
}

RunOutput run_full(const RunConfig& cfg) { return run_impl(cfg); }

RunReport run(const RunConfig& cfg) { return run_impl(cfg).report; }

std::string export_regions(const RegionConfig& cfg) {
  const json report = json::parse(read_text(cfg.run_dir + "/report.json"));
  const RunConfig run_cfg = parse_run_config(report.at("config").dump());
  const ControlProblem problem = build_problem(run_cfg);
  const PolicySet policy = load_policy(cfg.run_dir + "/policy", problem);
  const Vec base = cfg.base_state.empty() ? problem.x0 : cfg.base_state;
  const auto rows = decision_region(policy, cfg.time, cfg.axis1, cfg.axis2,
                                    cfg.axis1_points, cfg.axis2_points, base);
  const std::string path =
      cfg.output.empty() ? cfg.run_dir + "/regions.csv" : cfg.output;
  std::ofstream out(path);
  if (!out) fail("cannot write " + path);
  const int da = problem.control_space.dim();
  out << "coord1,coord2,action";
  for (int j = 1; j < da; ++j) out << ",action_" << j;
  out << "\n";
  char buf[64];
  for (const RegionRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%.10g,%.10g", r.c1, r.c2);
    out << buf;
    for (double a : r.action) {
      std::snprintf(buf, sizeof buf, ",%.10g", a);
      out << buf;
    }
    out << "\n";
  }
  return path;
}

}  // namespace stocon
