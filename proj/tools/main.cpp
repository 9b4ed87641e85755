#include <CLI11.hpp>
#include <cstdint>
#include <string>

#include "manisac/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"networked ISAC movable-antenna optimizer"};
  app.require_subcommand(1);

  std::string config_path, out_path;
  std::uint64_t seed = 0;
  auto* run = app.add_subcommand("run", "single trial, per-iteration CSV");
  run->add_option("--config", config_path, "key=value config file")
      ->required();
  run->add_option("--seed", seed, "scenario/initialization seed")->required();
  run->add_option("--out", out_path, "output CSV path")->required();

  std::string spec_path, out_dir;
  int jobs = 1;
  auto* sweep = app.add_subcommand("sweep", "Monte-Carlo parameter sweep");
  sweep->add_option("--spec", spec_path, "sweep spec file")->required();
  sweep->add_option("--out-dir", out_dir, "output directory")->required();
  sweep->add_option("--jobs", jobs, "parallel trials");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return manisac::cli::kExitUsage;
  }

  if (run->parsed()) return manisac::cli::run_single(config_path, seed, out_path);
  return manisac::cli::run_sweep(spec_path, out_dir, jobs);
}
