// stochspin: run, validate and list simulation scenarios.
//
// Exit codes: 0 success, 1 usage, 2 config or invalid input, 3 numerical
// failure, 4 I/O failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "stochspin/experiment/runner.hpp"

namespace {

namespace ex = stochspin::experiment;

enum Exit { kOk = 0, kUsage = 1, kConfig = 2, kNumeric = 3, kIo = 4 };

int exit_code(const stochspin::Error& e) {
  switch (e.category()) {
    case stochspin::ErrorCategory::numeric:
      return kNumeric;
    case stochspin::ErrorCategory::io:
      return kIo;
    default:
      return kConfig;
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw stochspin::IoError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Parses the file and prints every error. Returns nullopt on failure.
std::optional<ex::ScenarioConfig> load(const std::string& path) {
  const ex::ParseResult r = ex::parse_config(read_file(path));
  if (!r.ok()) {
    std::cerr << path << ": configuration has " << r.errors.size() << " error(s)\n" << r.error_report();
    return std::nullopt;
  }
  for (const auto& w : r.config->warnings) std::cerr << "warning: " << w << '\n';
  return r.config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic spin-particle simulations driven by scenario config files"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  unsigned threads = 1;

  auto* run = app.add_subcommand("run", "Run a scenario and write its artifacts");
  run->add_option("config", config_path, "Scenario config file")->required();
  run->add_option("--seed", seed, "Override [scenario] seed");
  run->add_option("--out", out_dir, "Override [output] dir");
  run->add_option("--threads", threads, "Worker threads (0 = all cores); never changes results");

  auto* list = app.add_subcommand("list-scenarios", "Print the scenario catalogue");

  auto* validate = app.add_subcommand("validate", "Check a config file without running it");
  validate->add_option("config", config_path, "Scenario config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (list->parsed()) {
      std::cout << ex::list_scenarios();
      return kOk;
    }
    auto cfg = load(config_path);
    if (!cfg) return kConfig;
    if (validate->parsed()) {
      std::cout << config_path << ": ok (scenario " << cfg->scenario << ")\n";
      return kOk;
    }
    if (seed) cfg->seed = *seed;
    if (out_dir) cfg->output_dir = *out_dir;
    const ex::RunSummary summary = ex::run_scenario(*cfg, {threads});
    std::cout << summary.to_text(true);
    return kOk;
  } catch (const stochspin::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  }
}
