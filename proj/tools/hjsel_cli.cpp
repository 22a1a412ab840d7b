// Command-line driver: runs one pipeline from an experiment config.

#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "hjsel/config.hpp"
#include "hjsel/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Discounted-approximation selection experiments on the torus"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int workers = 1;
  bool seedless = false;

  const char* kinds[] = {"solve", "adjoint", "measure", "commutation", "selection", "full", "validate"};
  const char* blurbs[] = {
      "eps sweep of the discounted solver",
      "sweep plus the adjoint density at every point",
      "sweep, adjoint, measures and the key1 pairing",
      "sweep plus the commutation ladder on the finest solution",
      "sweep, measures and the normalized Cauchy table",
      "every stage, with assumption validation",
      "assumption validation only",
  };
  for (int i = 0; i < 7; ++i) {
    auto* sub = app.add_subcommand(kinds[i], blurbs[i]);
    sub->add_option("--config", config_path, "experiment config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (default: the config's output.dir)");
    sub->add_option("--workers", workers, "grid sizes run concurrently")->check(CLI::PositiveNumber);
    sub->add_flag("--seedless", seedless, "assert that the run uses no randomness (always true)");
  }
  CLI11_PARSE(app, argc, argv);

  const std::string kind = app.get_subcommands().front()->get_name();
  hjsel::ExperimentConfig cfg;
  try {
    cfg = hjsel::parse_config(config_path);
  } catch (const hjsel::ConfigError& e) {
    for (const auto& p : e.problems()) std::cerr << p << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }
  cfg.kind = hjsel::parse_experiment_kind(kind);
  if (!out_dir.empty()) cfg.output_dir = out_dir;

  try {
    const auto manifest = hjsel::run_experiment(cfg, cfg.output_dir, workers);
    std::cout << hjsel::emit_summary(manifest);
    for (const auto& e : manifest.errors) std::cerr << "error: " << e << '\n';
    std::cout << (manifest.partial ? "partial run; " : "") << "config " << manifest.config_hash << ", "
              << manifest.wall_time << " s, output in " << cfg.output_dir << '\n';
    return manifest.passed() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << '\n';
    return 3;
  }
}
