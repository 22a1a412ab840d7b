#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hjsel/config.hpp"
#include "hjsel/grid.hpp"

namespace hjsel {

/// One pass/fail verdict. `relation` is how value compares to threshold for
/// a pass: "<=", ">=" or "<".
struct CheckResult {
  std::string check;
  std::string instance;
  double value = 0;
  double threshold = 0;
  std::string relation = "<=";
  bool pass = false;
};

CheckResult make_check(std::string check, std::string instance, double value, std::string relation,
                       double threshold);

struct RunManifest {
  std::string name;
  std::string kind;
  std::string config_hash;
  std::vector<std::string> artifacts;  // relative to the output directory
  std::vector<CheckResult> checks;
  std::vector<std::string> errors;
  bool partial = false;
  double wall_time = 0;
  std::vector<std::pair<std::string, double>> timings;  // per stage, seconds

  bool passed() const;
};

/// Runs the pipeline named by config.kind and writes its CSVs, checks.csv and
/// manifest.json under out_dir. Grid sizes run on up to `workers` threads;
/// results are merged in config order so outputs do not depend on it. Stage
/// failures are recorded in the manifest, which is then marked partial.
RunManifest run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                           int workers = 1);

/// Columns check, instance, value, threshold, pass. One row per check.
std::string emit_summary(const RunManifest& manifest);

void write_manifest_json(const RunManifest& manifest, const std::filesystem::path& path);

/// Node coordinates then value; the header names the field and parameters,
/// e.g. "x,u{eps=0.1;eta=0.01;N=1024}".
void write_field_csv(const std::filesystem::path& path, const GridField<double>& field,
                     const std::string& label);

/// Shortest decimal form that round-trips.
std::string format_double(double v);

}  // namespace hjsel
