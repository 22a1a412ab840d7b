#include <gtest/gtest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hjsel/config.hpp"
#include "hjsel/experiment.hpp"

using namespace hjsel;
namespace fs = std::filesystem;

namespace {

const std::string kMinimal = R"(
[experiment]
name = minimal

[problem]
hamiltonian = quadratic
dim = 1
potential = cos
diffusion = one

[grid]
sizes = 64

[sweep]
eps = 0.1, 0.05, 0.025
)";

std::vector<std::string> problems_of(const std::string& text) {
  try {
    parse_config_string(text, "t.ini");
  } catch (const ConfigError& e) {
    return e.problems();
  }
  return {};
}

bool mentions(const std::vector<std::string>& ps, const std::string& needle) {
  for (const auto& p : ps)
    if (p.find(needle) != std::string::npos) return true;
  return false;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("hjsel_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Config, MinimalIsValid) {
  const auto cfg = parse_config_string(kMinimal);
  EXPECT_EQ(cfg.name, "minimal");
  EXPECT_EQ(cfg.grid_sizes, std::vector<int>{64});
  EXPECT_EQ(cfg.eps.size(), 3u);
  EXPECT_EQ(cfg.kind, ExperimentKind::Full);
  EXPECT_EQ(cfg.eta_rule.kind, EtaRule::Kind::EpsSquared);
}

TEST(Config, ReportsEveryProblem) {
  auto text = kMinimal;
  text.replace(text.find("eps = 0.1"), 9, "eps = 0.0");
  EXPECT_TRUE(mentions(problems_of(text), "invalid range: eps must be > 0"));

  EXPECT_TRUE(mentions(problems_of(kMinimal + "\n[tolerances]\ntheta_init = 1\n"),
                       "unknown key: [tolerances] theta_init"));

  auto missing = kMinimal;
  missing.erase(missing.find("potential = cos"), 15);
  const auto ps = problems_of(missing + "\n[tolerances]\ntheta_init = 1\n");
  EXPECT_TRUE(mentions(ps, "missing field: problem.potential"));
  EXPECT_TRUE(mentions(ps, "unknown key"));
  for (const auto& p : ps) EXPECT_EQ(p.rfind("t.ini: ", 0), 0u) << p;
}

TEST(Config, PeriodicSpecs) {
  const auto f = parse_periodic("const:0.5, cos:1:-0.5", 1);
  EXPECT_NEAR(f.value(make_point(0.0)), 0.0, 1e-15);
  EXPECT_NEAR(f.value(make_point(0.5)), 1.0, 1e-15);
  EXPECT_THROW(parse_periodic("cos:x:1", 1), DomainError);
  EXPECT_TRUE(parse_diffusion("degenerate", 1).degenerate);
  EXPECT_EQ(config_hash("").size(), 16u);
  EXPECT_EQ(config_hash("a"), "af63dc4c8601ec8c");  // FNV-1a reference value
}

TEST(Summary, EmptyAndFailing) {
  RunManifest empty;
  const auto s = emit_summary(empty);
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 1);
  EXPECT_TRUE(empty.passed());

  RunManifest one;
  one.checks.push_back(make_check("measure.holonomy", "N=64", 0.2, "<=", 0.05));
  EXPECT_FALSE(one.passed());
  const auto t = emit_summary(one);
  const auto row = t.substr(t.find('\n') + 1);
  EXPECT_EQ(std::count(t.begin(), t.end(), '\n'), 2);
  EXPECT_EQ(row.rfind("measure.holonomy", 0), 0u);
  EXPECT_NE(row.find("fail"), std::string::npos);
}

TEST(Run, TrivialInstancePassesQuickly) {
  auto cfg = parse_config(std::string(HJSEL_CONFIG_DIR) + "/trivial.ini");
  const auto out = scratch("trivial");
  const auto t0 = std::chrono::steady_clock::now();
  const auto man = run_experiment(cfg, out, 2);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (const auto& c : man.checks) EXPECT_TRUE(c.pass) << c.check << ' ' << c.instance << ' ' << c.value;
  EXPECT_TRUE(man.errors.empty());
  EXPECT_LT(secs, 10.0);
  for (const char* f : {"runs.csv", "checks.csv", "summary.txt", "manifest.json", "selection.csv"})
    EXPECT_TRUE(fs::exists(out / f)) << f;
}

TEST(Run, OutputIsDeterministic) {
  auto cfg = parse_config(std::string(HJSEL_CONFIG_DIR) + "/one.ini");
  cfg.grid_sizes = {128, 256};
  const auto a = scratch("det_a"), b = scratch("det_b");
  run_experiment(cfg, a, 1);
  run_experiment(cfg, b, 2);
  for (const auto& entry : fs::directory_iterator(a)) {
    if (!entry.is_regular_file() || entry.path().filename() == "manifest.json") continue;
    EXPECT_EQ(slurp(entry.path()), slurp(b / entry.path().filename())) << entry.path().filename();
  }
}

TEST(Run, SelectionOnUniformlyEllipticInstance) {
  auto cfg = parse_config(std::string(HJSEL_CONFIG_DIR) + "/one.ini");
  cfg.kind = ExperimentKind::Selection;
  const auto man = run_experiment(cfg, scratch("selection"), 1);
  EXPECT_TRUE(man.passed()) << emit_summary(man);
  bool saw_cauchy = false;
  for (const auto& c : man.checks) saw_cauchy = saw_cauchy || c.check == "selection.cauchy_worst_ratio";
  EXPECT_TRUE(saw_cauchy);
}

TEST(Run, CommutationOnDegenerateInstance) {
  auto cfg = parse_config(std::string(HJSEL_CONFIG_DIR) + "/commutation_degenerate.ini");
  const auto man = run_experiment(cfg, scratch("commutation"), 1);
  EXPECT_TRUE(man.passed()) << emit_summary(man);
}
