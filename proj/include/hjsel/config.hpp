#pragma once

#include <string>
#include <vector>

#include "hjsel/error.hpp"
#include "hjsel/hamiltonian.hpp"
#include "hjsel/solver.hpp"

namespace hjsel {

enum class ExperimentKind { Solve, Adjoint, Measure, Commutation, Selection, Full, Validate };

const char* to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& name);

/// All validation failures of one config file.
class ConfigError : public DomainError {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  std::vector<std::string> problems_;
};

struct ExperimentConfig {
  std::string name = "experiment";
  ExperimentKind kind = ExperimentKind::Full;

  // [problem]
  int dim = 1;
  HamiltonianKind hamiltonian = HamiltonianKind::Quadratic;
  std::string potential_spec;
  std::string diffusion_spec;
  PeriodicFunction<double> potential;
  DiffusionCoefficient<double> diffusion;

  // [grid]
  std::vector<int> grid_sizes;

  // [sweep]
  std::vector<double> eps;
  EtaRule eta_rule;
  std::vector<double> x0;  // point; snapped to the nearest node

  // [tolerances]
  double tol_res = 1e-9;
  int max_steps = 200;
  double tol_key1 = 0.05;
  double tol_action = 0.05;
  double tol_holonomy = 0.05;
  double tol_mass = 1e-10;
  double tol_theta = 1e-14;
  double tol_transpose = 1e-12;
  int holonomy_modes = 4;

  // [commutation]
  std::vector<double> comm_etas;       // empty: 1/16 halving down to >= 2h, at most 5 levels
  std::vector<double> comm_probes;     // flattened points
  int comm_grid = 0;                   // 0: largest sweep grid
  double comm_slope_min = 0.45;

  // [output]
  std::string output_dir = "out";
  bool write_fields = false;

  HamiltonianModel<double> model() const;
  std::string source;  // file contents, for hashing
};

/// Parses a sectioned key = value file. Unknown sections or keys, missing
/// required fields and out-of-range values are collected and thrown together
/// as ConfigError.
ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_string(const std::string& text, const std::string& origin = "<string>");

/// "const:0.5, cos:1:-0.5, sin:0:1:0.25" or a catalogue name
/// (zero, one, cos, degenerate, double_degenerate).
PeriodicFunction<double> parse_periodic(const std::string& spec, int dim);
DiffusionCoefficient<double> parse_diffusion(const std::string& spec, int dim);

/// 64-bit FNV-1a of the text, as 16 hex digits.
std::string config_hash(const std::string& text);

}  // namespace hjsel
