#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "json.hpp"
#include "stocon/nn.hpp"
#include "stocon/runner.hpp"

namespace stocon {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw SolverError("config: " + msg); }

void check_keys(const json& obj, const std::string& path,
                const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(path + " must be an object");
  for (const auto& item : obj.items())
    if (!allowed.count(item.key()))
      fail("unknown key " + (path.empty() ? item.key() : path + "." + item.key()));
}

double get_num(const json& obj, const std::string& path, const char* key, double dflt) {
  if (!obj.contains(key)) return dflt;
  const json& v = obj.at(key);
  if (!v.is_number()) fail(path + "." + key + " must be a number");
  return v.get<double>();
}

int get_int(const json& obj, const std::string& path, const char* key, int dflt) {
  if (!obj.contains(key)) return dflt;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) fail(path + "." + key + " must be an integer");
  return v.get<int>();
}

long get_long(const json& obj, const std::string& path, const char* key, long dflt) {
  if (!obj.contains(key)) return dflt;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) fail(path + "." + key + " must be an integer");
  return v.get<long>();
}

bool get_bool(const json& obj, const std::string& path, const char* key, bool dflt) {
  if (!obj.contains(key)) return dflt;
  const json& v = obj.at(key);
  if (!v.is_boolean()) fail(path + "." + key + " must be a boolean");
  return v.get<bool>();
}

std::string get_str(const json& obj, const std::string& path, const char* key,
                    const std::string& dflt) {
  if (!obj.contains(key)) return dflt;
  const json& v = obj.at(key);
  if (!v.is_string()) fail(path + "." + key + " must be a string");
  return v.get<std::string>();
}

Vec get_vec(const json& obj, const std::string& path, const char* key, const Vec& dflt) {
  if (!obj.contains(key)) return dflt;
  const json& v = obj.at(key);
  if (!v.is_array()) fail(path + "." + key + " must be an array of numbers");
  Vec out;
  for (const json& e : v) {
    if (!e.is_number()) fail(path + "." + key + " must be an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<int> get_ints(const json& obj, const std::string& path, const char* key,
                          const std::vector<int>& dflt) {
  if (!obj.contains(key)) return dflt;
  const json& v = obj.at(key);
  if (!v.is_array()) fail(path + "." + key + " must be an array of integers");
  std::vector<int> out;
  for (const json& e : v) {
    if (!e.is_number_integer()) fail(path + "." + key + " must be an array of integers");
    out.push_back(e.get<int>());
  }
  return out;
}

void parse_problem(const json& obj, RunConfig* cfg) {
  const std::string path = "problem";
  if (!obj.is_object()) fail("problem must be an object");
  const std::string name = get_str(obj, path, "name", "");
  cfg->problem = name;
  if (name == "semilinear") {
    check_keys(obj, path, {"name", "d", "T", "N", "terminal", "gamma", "control_bound"});
    SemilinearSpec& s = cfg->semilinear;
    s.d = get_int(obj, path, "d", s.d);
    s.T = get_num(obj, path, "T", s.T);
    s.N = get_int(obj, path, "N", s.N);
    const std::string term = get_str(obj, path, "terminal", "power");
    if (term == "power")
      s.terminal = SemilinearSpec::Terminal::Power;
    else if (term == "log_quadratic")
      s.terminal = SemilinearSpec::Terminal::LogQuadratic;
    else
      fail("problem.terminal must be \"power\" or \"log_quadratic\"");
    s.gamma = get_num(obj, path, "gamma", s.gamma);
    s.control_bound = get_num(obj, path, "control_bound", s.control_bound);
  } else if (name == "lq") {
    check_keys(obj, path, {"name", "d", "T", "N", "lambda", "x0_scale", "control_bound"});
    LqSpec& s = cfg->lq;
    s.d = get_int(obj, path, "d", s.d);
    s.T = get_num(obj, path, "T", s.T);
    s.N = get_int(obj, path, "N", s.N);
    s.lambda = get_num(obj, path, "lambda", s.lambda);
    s.x0_scale = get_num(obj, path, "x0_scale", s.x0_scale);
    s.control_bound = get_num(obj, path, "control_bound", s.control_bound);
  } else if (name == "hedging") {
    check_keys(obj, path, {"name", "N", "r_up", "r_dn", "p_up", "p_dn", "price0", "strike",
                           "control_bound", "w_lo", "w_hi"});
    HedgingSpec& s = cfg->hedging;
    s.N = get_int(obj, path, "N", s.N);
    s.r_up = get_num(obj, path, "r_up", s.r_up);
    s.r_dn = get_num(obj, path, "r_dn", s.r_dn);
    s.p_up = get_num(obj, path, "p_up", s.p_up);
    s.p_dn = get_num(obj, path, "p_dn", s.p_dn);
    s.price0 = get_num(obj, path, "price0", s.price0);
    s.strike = get_num(obj, path, "strike", s.strike);
    s.control_bound = get_num(obj, path, "control_bound", s.control_bound);
    s.w_lo = get_num(obj, path, "w_lo", s.w_lo);
    s.w_hi = get_num(obj, path, "w_hi", s.w_hi);
  } else if (name == "storage") {
    check_keys(obj, path, {"name", "N", "a_in", "a_out", "hold_cost", "c_min", "c_max",
                           "c0", "p_bar", "beta", "sigma2", "shortfall", "price0"});
    StorageSpec& s = cfg->storage;
    s.N = get_int(obj, path, "N", s.N);
    s.a_in = get_num(obj, path, "a_in", s.a_in);
    s.a_out = get_num(obj, path, "a_out", s.a_out);
    s.hold_cost = get_num(obj, path, "hold_cost", s.hold_cost);
    s.c_min = get_num(obj, path, "c_min", s.c_min);
    s.c_max = get_num(obj, path, "c_max", s.c_max);
    s.c0 = get_num(obj, path, "c0", s.c0);
    s.p_bar = get_num(obj, path, "p_bar", s.p_bar);
    s.beta = get_num(obj, path, "beta", s.beta);
    s.sigma2 = get_num(obj, path, "sigma2", s.sigma2);
    s.shortfall = get_num(obj, path, "shortfall", s.shortfall);
    s.price0 = get_num(obj, path, "price0", s.price0);
  } else if (name == "microgrid") {
    check_keys(obj, path,
               {"name", "N", "r_bar", "rho", "sigma", "c_max", "c0", "fuel_k", "fuel_gamma",
                "switch_cost", "imbalance_cost", "penalty_coeff", "a_min", "a_max", "r0",
                "m0"});
    MicrogridSpec& s = cfg->microgrid;
    s.N = get_int(obj, path, "N", s.N);
    s.r_bar = get_num(obj, path, "r_bar", s.r_bar);
    s.rho = get_num(obj, path, "rho", s.rho);
    s.sigma = get_num(obj, path, "sigma", s.sigma);
    s.c_max = get_num(obj, path, "c_max", s.c_max);
    s.c0 = get_num(obj, path, "c0", s.c0);
    s.fuel_k = get_num(obj, path, "fuel_k", s.fuel_k);
    s.fuel_gamma = get_num(obj, path, "fuel_gamma", s.fuel_gamma);
    s.switch_cost = get_num(obj, path, "switch_cost", s.switch_cost);
    s.imbalance_cost = get_num(obj, path, "imbalance_cost", s.imbalance_cost);
    s.penalty_coeff = get_num(obj, path, "penalty_coeff", s.penalty_coeff);
    s.a_min = get_num(obj, path, "a_min", s.a_min);
    s.a_max = get_num(obj, path, "a_max", s.a_max);
    s.r0 = get_num(obj, path, "r0", s.r0);
    s.m0 = get_int(obj, path, "m0", s.m0);
  } else {
    fail("problem.name must be one of semilinear, lq, hedging, storage, microgrid");
  }
}

const std::set<std::string> kAlgorithms = {"nncontpi",      "classifpi", "hybrid_now",
                                           "hybrid_laterq", "qknn",      "classif_hybrid",
                                           "oracle",        "constant"};

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    fail(std::string("invalid JSON: ") + e.what());
  }
  check_keys(root, "", {"problem", "algorithm", "constant_control", "nn", "train",
                        "quantizer", "qknn", "eval", "seed", "threads", "output_dir"});
  RunConfig cfg;
  if (!root.contains("problem")) fail("missing required block: problem");
  parse_problem(root.at("problem"), &cfg);

  cfg.algorithm = get_str(root, "", "algorithm", "");
  if (!kAlgorithms.count(cfg.algorithm))
    fail("algorithm must be one of nncontpi, classifpi, hybrid_now, hybrid_laterq, qknn, "
         "classif_hybrid, oracle, constant");
  cfg.constant_control = get_vec(root, "", "constant_control", {});
  if (cfg.algorithm == "constant" && cfg.constant_control.empty())
    fail("algorithm \"constant\" needs constant_control");

  if (root.contains("nn")) {
    const json& o = root.at("nn");
    check_keys(o, "nn", {"hidden", "activation", "warm_start", "warm_lr_scale",
                         "control_scale"});
    cfg.nn.hidden = get_ints(o, "nn", "hidden", cfg.nn.hidden);
    const std::string act = get_str(o, "nn", "activation", "elu");
    try {
      cfg.nn.activation = act_from_name(act);
    } catch (const std::exception&) {
      fail("nn.activation must be one of elu, relu, tanh, sigmoid");
    }
    cfg.nn.warm_start = get_bool(o, "nn", "warm_start", cfg.nn.warm_start);
    cfg.nn.warm_lr_scale = get_num(o, "nn", "warm_lr_scale", cfg.nn.warm_lr_scale);
    cfg.nn.control_scale = get_num(o, "nn", "control_scale", cfg.nn.control_scale);
  }
  if (root.contains("train")) {
    const json& o = root.at("train");
    check_keys(o, "train", {"batch_size", "max_batches", "epochs_min", "epochs_max",
                            "validation_size", "patience", "lr", "l2"});
    cfg.train.batch_size = get_int(o, "train", "batch_size", cfg.train.batch_size);
    cfg.train.max_batches = get_int(o, "train", "max_batches", cfg.train.max_batches);
    cfg.train.epochs_min = get_int(o, "train", "epochs_min", cfg.train.epochs_min);
    cfg.train.epochs_max = get_int(o, "train", "epochs_max", cfg.train.epochs_max);
    cfg.train.validation_size =
        get_int(o, "train", "validation_size", cfg.train.validation_size);
    cfg.train.patience = get_int(o, "train", "patience", cfg.train.patience);
    cfg.train.lr = get_num(o, "train", "lr", cfg.train.lr);
    cfg.train.l2 = get_num(o, "train", "l2", cfg.train.l2);
  }
  if (root.contains("quantizer")) {
    const json& o = root.at("quantizer");
    check_keys(o, "quantizer", {"K", "iterations", "polish_passes", "polish_samples",
                                "weight_samples", "step_a", "step_b"});
    cfg.quantizer.K = get_int(o, "quantizer", "K", cfg.quantizer.K);
    cfg.quantizer.iterations = get_long(o, "quantizer", "iterations", cfg.quantizer.iterations);
    cfg.quantizer.polish_passes =
        get_int(o, "quantizer", "polish_passes", cfg.quantizer.polish_passes);
    cfg.quantizer.polish_samples =
        get_long(o, "quantizer", "polish_samples", cfg.quantizer.polish_samples);
    cfg.quantizer.weight_samples =
        get_long(o, "quantizer", "weight_samples", cfg.quantizer.weight_samples);
    cfg.quantizer.step_a = get_num(o, "quantizer", "step_a", cfg.quantizer.step_a);
    cfg.quantizer.step_b = get_num(o, "quantizer", "step_b", cfg.quantizer.step_b);
  }
  if (root.contains("qknn")) {
    const json& o = root.at("qknn");
    check_keys(o, "qknn", {"knn_k", "brent_tol", "brent_multistart", "state_points"});
    cfg.qknn.knn_k = get_int(o, "qknn", "knn_k", cfg.qknn.knn_k);
    cfg.qknn.brent_tol = get_num(o, "qknn", "brent_tol", cfg.qknn.brent_tol);
    cfg.qknn.brent_multistart =
        get_int(o, "qknn", "brent_multistart", cfg.qknn.brent_multistart);
    cfg.qknn.state_points = get_int(o, "qknn", "state_points", cfg.qknn.state_points);
    if (cfg.qknn.knn_k != 1 && cfg.qknn.knn_k != 2) fail("qknn.knn_k must be 1 or 2");
  }
  if (root.contains("eval")) {
    const json& o = root.at("eval");
    check_keys(o, "eval", {"batches", "batch_size"});
    cfg.eval.batches = get_int(o, "eval", "batches", cfg.eval.batches);
    cfg.eval.batch_size = get_int(o, "eval", "batch_size", cfg.eval.batch_size);
    if (cfg.eval.batches < 1 || cfg.eval.batch_size < 1)
      fail("eval.batches and eval.batch_size must be positive");
  }
  if (root.contains("seed")) {
    const json& v = root.at("seed");
    if (!v.is_number_integer() || v.get<long long>() < 0)
      fail("seed must be a non-negative integer");
    cfg.seed = v.get<std::uint64_t>();
  }
  cfg.threads = get_int(root, "", "threads", cfg.threads);
  if (cfg.threads < 1) fail("threads must be >= 1");
  cfg.output_dir = get_str(root, "", "output_dir", cfg.output_dir);
  return cfg;
}

std::string RunConfig::to_json() const {
  json p;
  p["name"] = problem;
  if (problem == "semilinear") {
    p["d"] = semilinear.d;
    p["T"] = semilinear.T;
    p["N"] = semilinear.N;
    p["terminal"] =
        semilinear.terminal == SemilinearSpec::Terminal::Power ? "power" : "log_quadratic";
    p["gamma"] = semilinear.gamma;
    p["control_bound"] = semilinear.control_bound;
  } else if (problem == "lq") {
    p["d"] = lq.d;
    p["T"] = lq.T;
    p["N"] = lq.N;
    p["lambda"] = lq.lambda;
    p["x0_scale"] = lq.x0_scale;
    p["control_bound"] = lq.control_bound;
  } else if (problem == "hedging") {
    p["N"] = hedging.N;
    p["r_up"] = hedging.r_up;
    p["r_dn"] = hedging.r_dn;
    p["p_up"] = hedging.p_up;
    p["p_dn"] = hedging.p_dn;
    p["price0"] = hedging.price0;
    p["strike"] = hedging.strike;
    p["control_bound"] = hedging.control_bound;
    p["w_lo"] = hedging.w_lo;
    p["w_hi"] = hedging.w_hi;
  } else if (problem == "storage") {
    p["N"] = storage.N;
    p["a_in"] = storage.a_in;
    p["a_out"] = storage.a_out;
    p["hold_cost"] = storage.hold_cost;
    p["c_min"] = storage.c_min;
    p["c_max"] = storage.c_max;
    p["c0"] = storage.c0;
    p["p_bar"] = storage.p_bar;
    p["beta"] = storage.beta;
    p["sigma2"] = storage.sigma2;
    p["shortfall"] = storage.shortfall;
    p["price0"] = storage.price0;
  } else if (problem == "microgrid") {
    p["N"] = microgrid.N;
    p["r_bar"] = microgrid.r_bar;
    p["rho"] = microgrid.rho;
    p["sigma"] = microgrid.sigma;
    p["c_max"] = microgrid.c_max;
    p["c0"] = microgrid.c0;
    p["fuel_k"] = microgrid.fuel_k;
    p["fuel_gamma"] = microgrid.fuel_gamma;
    p["switch_cost"] = microgrid.switch_cost;
    p["imbalance_cost"] = microgrid.imbalance_cost;
    p["penalty_coeff"] = microgrid.penalty_coeff;
    p["a_min"] = microgrid.a_min;
    p["a_max"] = microgrid.a_max;
    p["r0"] = microgrid.r0;
    p["m0"] = microgrid.m0;
  }

  json j;
  j["problem"] = p;
  j["algorithm"] = algorithm;
  if (!constant_control.empty()) j["constant_control"] = constant_control;
  j["nn"] = {{"hidden", nn.hidden},
             {"activation", act_name(nn.activation)},
             {"warm_start", nn.warm_start},
             {"warm_lr_scale", nn.warm_lr_scale},
             {"control_scale", nn.control_scale}};
  j["train"] = {{"batch_size", train.batch_size},
                {"max_batches", train.max_batches},
                {"epochs_min", train.epochs_min},
                {"epochs_max", train.epochs_max},
                {"validation_size", train.validation_size},
                {"patience", train.patience},
                {"lr", train.lr},
                {"l2", train.l2}};
  j["quantizer"] = {{"K", quantizer.K},
                    {"iterations", quantizer.iterations},
                    {"polish_passes", quantizer.polish_passes},
                    {"polish_samples", quantizer.polish_samples},
                    {"weight_samples", quantizer.weight_samples},
                    {"step_a", quantizer.step_a},
                    {"step_b", quantizer.step_b}};
  j["qknn"] = {{"knn_k", qknn.knn_k},
               {"brent_tol", qknn.brent_tol},
               {"brent_multistart", qknn.brent_multistart},
               {"state_points", qknn.state_points}};
  j["eval"] = {{"batches", eval.batches}, {"batch_size", eval.batch_size}};
  j["seed"] = seed;
  j["threads"] = threads;
  j["output_dir"] = output_dir;
  return j.dump(2);
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

RegionConfig parse_region_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    fail(std::string("invalid JSON: ") + e.what());
  }
  check_keys(root, "", {"run_dir", "time", "axis1", "axis2", "axis1_points", "axis2_points",
                        "base_state", "output"});
  RegionConfig cfg;
  cfg.run_dir = get_str(root, "", "run_dir", "");
  if (cfg.run_dir.empty()) fail("missing required key: run_dir");
  cfg.time = get_int(root, "", "time", cfg.time);
  cfg.axis1 = get_int(root, "", "axis1", cfg.axis1);
  cfg.axis2 = get_int(root, "", "axis2", cfg.axis2);
  auto axis_points = [&](const char* key) -> Vec {
    if (!root.contains(key)) fail(std::string("missing required key: ") + key);
    const json& v = root.at(key);
    if (v.is_array()) return get_vec(root, "", key, {});
    check_keys(v, key, {"min", "max", "count"});
    const double lo = get_num(v, key, "min", 0.0);
    const double hi = get_num(v, key, "max", 1.0);
    const int count = get_int(v, key, "count", 2);
    if (count < 2 || !(hi > lo)) fail(std::string(key) + " needs max > min and count >= 2");
    Vec pts(count);
    for (int i = 0; i < count; ++i) pts[i] = lo + (hi - lo) * i / (count - 1);
    return pts;
  };
  cfg.axis1_points = axis_points("axis1_points");
  cfg.axis2_points = axis_points("axis2_points");
  cfg.base_state = get_vec(root, "", "base_state", {});
  cfg.output = get_str(root, "", "output", "");
  return cfg;
}

RegionConfig load_region_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_region_config(ss.str());
}

}  // namespace stocon
