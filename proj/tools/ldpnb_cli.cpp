#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ldpnb/experiment.hpp"

namespace {

int run(const std::string& config_path, const std::string& output_path, const std::string& format,
        const std::vector<double>& epsilon_override, std::uint64_t* seed_override, int* threads_override) {
  ldpnb::SweepConfig cfg = ldpnb::load_sweep_config(config_path);
  if (!epsilon_override.empty()) cfg.epsilons = epsilon_override;
  if (seed_override != nullptr) cfg.seed = *seed_override;
  if (threads_override != nullptr) cfg.threads = *threads_override;
  ldpnb::validate_sweep_config(cfg);

  ldpnb::SweepResult result = ldpnb::run_sweep_file(cfg);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';

  auto emit = [&](std::ostream& os) {
    if (format == "csv") {
      ldpnb::emit_csv(result.rows, os);
    } else {
      ldpnb::emit_table(result.rows, os);
    }
  };
  if (output_path.empty() || output_path == "-") {
    emit(std::cout);
  } else {
    std::ofstream out(output_path);
    if (!out) throw ldpnb::IoError("cannot open output file: " + output_path);
    emit(out);
    if (!out) throw ldpnb::IoError("write failed: " + output_path);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Locally differentially private naive Bayes experiment runner"};
  app.require_subcommand(1);

  CLI::App* run_cmd = app.add_subcommand("run", "Run the sweep described by a config file");
  std::string config_path;
  std::string output_path;
  std::string format = "csv";
  std::vector<double> epsilon_override;
  std::uint64_t seed_value = 0;
  int threads_value = 0;
  run_cmd->add_option("-c,--config", config_path, "Sweep config (JSON, // comments allowed)")
      ->required();
  run_cmd->add_option("-o,--output", output_path, "Output file ('-' or omit for stdout)");
  run_cmd->add_option("-f,--format", format, "Output format")
      ->check(CLI::IsMember({"csv", "table"}))
      ->capture_default_str();
  run_cmd->add_option("--epsilons", epsilon_override, "Override the config's epsilon list");
  CLI::Option* seed_opt = run_cmd->add_option("--seed", seed_value, "Override the config's seed");
  CLI::Option* threads_opt = run_cmd->add_option("--threads", threads_value, "Override worker count");

  CLI11_PARSE(app, argc, argv);

  try {
    return run(config_path, output_path, format, epsilon_override,
               seed_opt->count() > 0 ? &seed_value : nullptr,
               threads_opt->count() > 0 ? &threads_value : nullptr);
  } catch (const ldpnb::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ldpnb::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
