#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "stocon/runner.hpp"

using namespace stocon;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char* kTinyLq = R"({
  "problem": {"name": "lq", "d": 1, "N": 4},
  "algorithm": "nncontpi",
  "nn": {"hidden": [8, 8]},
  "train": {"batch_size": 32, "max_batches": 8, "epochs_min": 4, "epochs_max": 10,
            "validation_size": 64, "patience": 4},
  "eval": {"batches": 4, "batch_size": 200},
  "seed": 11,
  "threads": 2
})";

json report_without_timing(const RunReport& r) {
  json j = json::parse(r.to_json());
  j.erase("phase_seconds");
  j.erase("artifacts");
  return j;
}

std::string fresh_dir(const std::string& name) {
  const std::string dir = (fs::temp_directory_path() / name).string();
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("config echo round-trips to an identical effective config") {
  const RunConfig a = parse_run_config(kTinyLq);
  const RunConfig b = parse_run_config(a.to_json());
  CHECK(a.to_json() == b.to_json());
  CHECK(b.problem == "lq");
  CHECK(b.lq.d == 1);
  CHECK(b.lq.N == 4);
  CHECK(b.nn.hidden == std::vector<int>{8, 8});
  CHECK(b.train.max_batches == 8);
  CHECK(b.seed == 11);
  CHECK(b.threads == 2);
}

TEST_CASE("defaults fill every field left out of a minimal config") {
  const RunConfig c =
      parse_run_config(R"({"problem": {"name": "semilinear"}, "algorithm": "qknn"})");
  CHECK(c.semilinear.d == 1);
  CHECK(c.semilinear.N == 40);
  CHECK(c.semilinear.gamma == 1.0);
  CHECK(c.nn.hidden == std::vector<int>{20, 20});
  CHECK(c.quantizer.K == 21);
  CHECK(c.qknn.state_points == 51);
  CHECK(c.eval.batches == 10);
  CHECK(c.eval.batch_size == 10000);
  CHECK(c.seed == 0);
  CHECK(c.threads == 1);
  const json echo = json::parse(c.to_json());
  CHECK(echo.at("quantizer").at("K") == 21);
  CHECK(echo.at("problem").at("terminal") == "power");
}

TEST_CASE("unknown keys are rejected with their dotted path") {
  auto message = [](const std::string& text) {
    try {
      parse_run_config(text);
    } catch (const SolverError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message(R"({"problem": {"name": "lq", "speed": 3}, "algorithm": "qknn"})")
            .find("problem.speed") != std::string::npos);
  CHECK(message(R"({"problem": {"name": "lq"}, "algorithm": "qknn", "foo": 1})")
            .find("foo") != std::string::npos);
  CHECK(message(R"({"problem": {"name": "lq"}, "algorithm": "qknn",
                    "train": {"lr": 0.1, "momentum": 0.9}})")
            .find("train.momentum") != std::string::npos);
  CHECK(message(R"({"problem": {"name": "storage", "gamma": 1.0}, "algorithm": "qknn"})")
            .find("problem.gamma") != std::string::npos);
}

TEST_CASE("invalid configs fail with a clear message") {
  CHECK_THROWS_AS(parse_run_config("not json"), SolverError);
  CHECK_THROWS_AS(parse_run_config(R"({"algorithm": "qknn"})"), SolverError);
  CHECK_THROWS_AS(parse_run_config(R"({"problem": {"name": "waterfall"},
                                       "algorithm": "qknn"})"),
                  SolverError);
  CHECK_THROWS_AS(parse_run_config(R"({"problem": {"name": "lq"},
                                       "algorithm": "gradient_descent"})"),
                  SolverError);
  CHECK_THROWS_AS(parse_run_config(R"({"problem": {"name": "lq"},
                                       "algorithm": "constant"})"),
                  SolverError);
  CHECK_THROWS_AS(parse_run_config(R"({"problem": {"name": "lq"}, "algorithm": "qknn",
                                       "qknn": {"knn_k": 3}})"),
                  SolverError);
  CHECK_THROWS_AS(parse_run_config(R"({"problem": {"name": "lq"}, "algorithm": "qknn",
                                       "seed": -1})"),
                  SolverError);
  CHECK_THROWS_AS(load_run_config("/nonexistent/config.json"), SolverError);
}

TEST_CASE("tiny network run produces a finite value and a full trace") {
  const RunConfig cfg = parse_run_config(kTinyLq);
  const RunReport r = run(cfg);
  CHECK(r.problem == "lq");
  CHECK(r.algorithm == "nncontpi");
  CHECK(r.param_label == "d");
  CHECK(r.param_value == 1.0);
  CHECK(std::isfinite(r.value_mean));
  CHECK(r.value_std > 0.0);
  CHECK(r.batch_means.size() == 4);
  CHECK(r.trace.policy_loss.size() == 4);
  CHECK(r.runtime_seconds() > 0.0);
  const std::string row = r.csv_row();
  CHECK(row.rfind("nncontpi,lq,1,", 0) == 0);
}

TEST_CASE("repeated runs agree exactly outside the timing fields") {
  const RunConfig cfg = parse_run_config(kTinyLq);
  const RunReport a = run(cfg);
  const RunReport b = run(cfg);
  CHECK(report_without_timing(a) == report_without_timing(b));
}

TEST_CASE("hedging oracle reports the exact recursion") {
  const RunConfig cfg =
      parse_run_config(R"({"problem": {"name": "hedging"}, "algorithm": "oracle"})");
  const RunReport r = run(cfg);
  REQUIRE(r.w0_star.has_value());
  CHECK(*r.w0_star == doctest::Approx(4.6183315777292355).epsilon(1e-12));
  CHECK(r.value_mean == doctest::Approx(0.10770757833708089).epsilon(1e-12));
  REQUIRE(r.hedging_K.size() == 7);
  CHECK(r.hedging_K[0] == doctest::Approx(0.531441).epsilon(1e-15));
  CHECK(r.hedging_K[6] == 1.0);
}

TEST_CASE("storage oracle is the do-nothing policy") {
  const RunConfig cfg = parse_run_config(
      R"({"problem": {"name": "storage"}, "algorithm": "oracle",
          "eval": {"batches": 4, "batch_size": 500}, "seed": 5})");
  const RunReport r = run(cfg);
  const RunConfig ccfg = parse_run_config(
      R"({"problem": {"name": "storage"}, "algorithm": "constant",
          "constant_control": [0.0],
          "eval": {"batches": 4, "batch_size": 500}, "seed": 5})");
  const RunReport c = run(ccfg);
  CHECK(r.value_mean == c.value_mean);
  CHECK(r.value_std == c.value_std);
}

TEST_CASE("network policy artifacts round-trip through the filesystem") {
  RunConfig cfg = parse_run_config(kTinyLq);
  cfg.algorithm = "hybrid_now";
  cfg.output_dir = fresh_dir("stocon_cli_hn");
  const RunOutput out = run_full(cfg);
  REQUIRE(out.policy.has_value());
  REQUIRE(out.value.has_value());
  REQUIRE(out.report.value_at_x0.has_value());

  const ControlProblem problem = build_problem(cfg);
  const PolicySet loaded = load_policy(cfg.output_dir + "/policy", problem);
  Vec a0(1), a1(1);
  for (int n = 0; n < problem.horizon; ++n) {
    for (double x : {-2.0, -0.5, 0.0, 0.7, 3.0}) {
      out.policy->control(n, &x, a0.data());
      loaded.control(n, &x, a1.data());
      CHECK(a0[0] == a1[0]);
    }
  }
  fs::remove_all(cfg.output_dir);
}

TEST_CASE("grid policy artifacts round-trip with identical tables") {
  const RunConfig cfg = parse_run_config(R"({
    "problem": {"name": "storage", "N": 10},
    "algorithm": "qknn",
    "quantizer": {"K": 7, "iterations": 5000, "polish_passes": 5,
                  "polish_samples": 5000, "weight_samples": 20000},
    "qknn": {"state_points": 9},
    "eval": {"batches": 2, "batch_size": 200},
    "seed": 2, "threads": 2,
    "output_dir": ")" + fresh_dir("stocon_cli_grid") + R"("})");
  const RunOutput out = run_full(cfg);
  const ControlProblem problem = build_problem(cfg);
  const PolicySet loaded = load_policy(cfg.output_dir + "/policy", problem);
  REQUIRE(loaded.grid);
  CHECK(loaded.grid->value == out.policy->grid->value);
  CHECK(loaded.grid->control == out.policy->grid->control);
  Vec a0(1), a1(1);
  const double probe[2] = {5.3, 0.41};
  out.policy->control(3, probe, a0.data());
  loaded.control(3, probe, a1.data());
  CHECK(a0[0] == a1[0]);
  CHECK(loaded.grid->value_at(0, problem.x0.data()) ==
        out.value->evaluate(0, problem.x0.data()));
  fs::remove_all(cfg.output_dir);
}

TEST_CASE("decision region export writes the expected slice") {
  RunConfig cfg = parse_run_config(kTinyLq);
  cfg.problem = "storage";
  cfg.algorithm = "classifpi";
  cfg.output_dir = fresh_dir("stocon_cli_regions");
  run_full(cfg);

  RegionConfig rc;
  rc.run_dir = cfg.output_dir;
  rc.time = 2;
  rc.axis1 = 0;
  rc.axis2 = 1;
  rc.axis1_points = {2.0, 5.0, 8.0};
  rc.axis2_points = {0.2, 0.8};
  const std::string path = export_regions(rc);
  CHECK(path == cfg.output_dir + "/regions.csv");

  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  CHECK(line == "coord1,coord2,action");
  int rows = 0;
  double first_c1 = 0.0, first_c2 = 0.0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    double c1, c2, a;
    char comma;
    ss >> c1 >> comma >> c2 >> comma >> a;
    if (rows == 0) {
      first_c1 = c1;
      first_c2 = c2;
    }
    CHECK((a == -1.0 || a == 0.0 || a == 1.0));
    ++rows;
  }
  CHECK(rows == 6);
  CHECK(first_c1 == 2.0);
  CHECK(first_c2 == 0.2);
  fs::remove_all(cfg.output_dir);
}

TEST_CASE("region configs accept explicit points and linspace blocks") {
  const RegionConfig a = parse_region_config(
      R"({"run_dir": "/tmp/x", "axis1_points": [1.0, 2.0],
          "axis2_points": {"min": 0.0, "max": 1.0, "count": 5}})");
  CHECK(a.axis1_points == Vec{1.0, 2.0});
  REQUIRE(a.axis2_points.size() == 5);
  CHECK(a.axis2_points.front() == 0.0);
  CHECK(a.axis2_points.back() == 1.0);
  CHECK(a.axis2_points[2] == doctest::Approx(0.5));
  CHECK_THROWS_AS(parse_region_config(R"({"axis1_points": [1.0]})"), SolverError);
  CHECK_THROWS_AS(parse_region_config(
                      R"({"run_dir": "/tmp/x",
                          "axis1_points": {"min": 1.0, "max": 0.0, "count": 3}})"),
                  SolverError);
}
