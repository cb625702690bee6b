#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "stocon/runner.hpp"

namespace {

int cmd_run(const std::string& config_path) {
  stocon::RunConfig cfg;
  try {
    cfg = stocon::load_run_config(config_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  try {
    const stocon::RunReport report = stocon::run(cfg);
    std::printf("%s\n%s\n", stocon::RunReport::csv_header().c_str(),
                report.csv_row().c_str());
    if (!cfg.output_dir.empty())
      std::printf("report: %s/report.json\n", cfg.output_dir.c_str());
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}

int cmd_regions(const std::string& config_path) {
  stocon::RegionConfig cfg;
  try {
    cfg = stocon::load_region_config(config_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  try {
    std::printf("regions: %s\n", stocon::export_regions(cfg).c_str());
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-horizon stochastic control solvers"};
  app.require_subcommand(1);

  std::string run_config, region_config;
  CLI::App* run_cmd = app.add_subcommand("run", "Solve and evaluate one experiment");
  run_cmd->add_option("config", run_config, "JSON config file")->required();
  CLI::App* reg_cmd =
      app.add_subcommand("regions", "Export a decision-region slice from a saved run");
  reg_cmd->add_option("config", region_config, "JSON config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (run_cmd->parsed()) return cmd_run(run_config);
  return cmd_regions(region_config);
}
