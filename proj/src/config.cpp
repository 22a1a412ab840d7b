#include "hjsel/config.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/lexical_cast.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace hjsel {

namespace {

namespace pt = boost::property_tree;

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : "; ") + s;
  return out;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> parts;
  boost::split(parts, value, boost::is_any_of(","));
  for (auto& p : parts) boost::trim(p);
  parts.erase(std::remove(parts.begin(), parts.end(), std::string()), parts.end());
  return parts;
}

template <typename T>
T to_number(const std::string& s, const std::string& where) {
  try {
    return boost::lexical_cast<T>(boost::trim_copy(s));
  } catch (const boost::bad_lexical_cast&) {
    throw DomainError("invalid value: " + where + " = '" + s + "' is not a number");
  }
}

// Allowed keys per section; anything else is an "unknown key".
const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"experiment", {"name", "kind"}},
      {"problem", {"hamiltonian", "dim", "potential", "diffusion"}},
      {"grid", {"sizes"}},
      {"sweep", {"eps", "eps_start", "levels", "eta_rule", "eta", "x0"}},
      {"tolerances",
       {"tol_res", "max_steps", "tol_key1", "tol_action", "tol_holonomy", "tol_mass", "tol_theta",
        "tol_transpose", "holonomy_modes"}},
      {"commutation", {"etas", "probes", "grid", "slope_min"}},
      {"output", {"dir", "fields"}},
  };
  return s;
}

}  // namespace

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Solve: return "solve";
    case ExperimentKind::Adjoint: return "adjoint";
    case ExperimentKind::Measure: return "measure";
    case ExperimentKind::Commutation: return "commutation";
    case ExperimentKind::Selection: return "selection";
    case ExperimentKind::Validate: return "validate";
    case ExperimentKind::Full: break;
  }
  return "full";
}

ExperimentKind parse_experiment_kind(const std::string& name) {
  for (auto k : {ExperimentKind::Solve, ExperimentKind::Adjoint, ExperimentKind::Measure,
                 ExperimentKind::Commutation, ExperimentKind::Selection, ExperimentKind::Full,
                 ExperimentKind::Validate})
    if (name == to_string(k)) return k;
  throw DomainError("invalid value: experiment kind '" + name + "'");
}

ConfigError::ConfigError(std::vector<std::string> problems)
    : DomainError(join(problems)), problems_(std::move(problems)) {}

HamiltonianModel<double> ExperimentConfig::model() const {
  return hamiltonian == HamiltonianKind::Quartic ? quartic_hamiltonian(potential)
                                                 : quadratic_hamiltonian(potential);
}

PeriodicFunction<double> parse_periodic(const std::string& spec, int dim) {
  const std::string s = boost::trim_copy(spec);
  if (s == "zero") return PeriodicFunction<double>::constant(dim, 0.0);
  if (s == "one") return PeriodicFunction<double>::constant(dim, 1.0);
  if (s == "cos") {
    if (dim == 1) return PeriodicFunction<double>::cosine(1, {1, 0}, 1.0);
    return PeriodicFunction<double>(2, 0.0, {{{1, 0}, 0.5, 0.0}, {{0, 1}, 0.5, 0.0}});
  }
  double constant = 0;
  std::vector<TrigTerm<double>> terms;
  for (const auto& item : split_list(s)) {
    std::vector<std::string> f;
    boost::split(f, item, boost::is_any_of(":"));
    for (auto& x : f) boost::trim(x);
    const std::string& tag = f[0];
    if (tag == "const" && f.size() == 2) {
      constant += to_number<double>(f[1], item);
      continue;
    }
    if ((tag == "cos" || tag == "sin") && f.size() == std::size_t(dim + 2)) {
      TrigTerm<double> t;
      t.k[0] = to_number<int>(f[1], item);
      if (dim == 2) t.k[1] = to_number<int>(f[2], item);
      const double c = to_number<double>(f.back(), item);
      (tag == "cos" ? t.cos_coef : t.sin_coef) = c;
      terms.push_back(t);
      continue;
    }
    throw DomainError("invalid value: term '" + item + "' (expected const:C, cos:k" +
                      std::string(dim == 2 ? ":k2" : "") + ":C or sin:k" + (dim == 2 ? ":k2" : "") + ":C)");
  }
  if (terms.empty() && s.find("const") == std::string::npos)
    throw DomainError("invalid value: empty function spec '" + spec + "'");
  return PeriodicFunction<double>(dim, constant, std::move(terms));
}

DiffusionCoefficient<double> parse_diffusion(const std::string& spec, int dim) {
  const std::string s = boost::trim_copy(spec);
  if (s == "zero") return diffusion::zero<double>(dim);
  if (s == "one") return diffusion::one<double>(dim);
  if (s == "degenerate") return diffusion::degenerate<double>(dim);
  if (s == "double_degenerate") return diffusion::double_degenerate<double>(dim);
  return DiffusionCoefficient<double>(parse_periodic(s, dim), "custom");
}

std::string config_hash(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot open config file '" + path + "'"});
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_string(ss.str(), path);
}

ExperimentConfig parse_config_string(const std::string& text, const std::string& origin) {
  pt::ptree tree;
  try {
    std::istringstream is(text);
    pt::ini_parser::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError({origin + ":" + std::to_string(e.line()) + ": syntax error: " + e.message()});
  }

  std::vector<std::string> problems;
  for (const auto& [section, body] : tree) {
    const auto it = schema().find(section);
    if (it == schema().end()) {
      problems.push_back("unknown key: section [" + section + "]");
      continue;
    }
    if (!body.data().empty()) problems.push_back("unknown key: '" + section + "' outside a section");
    for (const auto& [key, value] : body)
      if (!it->second.count(key)) problems.push_back("unknown key: [" + section + "] " + key);
  }

  auto get = [&](const std::string& path) -> std::optional<std::string> {
    if (auto v = tree.get_optional<std::string>(path)) return boost::trim_copy(*v);
    return std::nullopt;
  };
  auto require = [&](const std::string& path) -> std::optional<std::string> {
    auto v = get(path);
    if (!v) problems.push_back("missing field: " + path);
    return v;
  };
  // Runs f, turning a DomainError into a collected problem.
  auto attempt = [&](auto&& f) {
    try {
      f();
    } catch (const DomainError& e) {
      problems.push_back(e.what());
    }
  };

  ExperimentConfig cfg;
  cfg.source = text;
  if (auto v = get("experiment.name")) cfg.name = *v;
  if (auto v = get("experiment.kind")) attempt([&] { cfg.kind = parse_experiment_kind(*v); });

  if (auto v = get("problem.dim")) attempt([&] {
      cfg.dim = to_number<int>(*v, "problem.dim");
      if (cfg.dim != 1 && cfg.dim != 2) throw DomainError("invalid range: dim must be 1 or 2");
    });
  if (auto v = get("problem.hamiltonian")) {
    if (*v == "quadratic") cfg.hamiltonian = HamiltonianKind::Quadratic;
    else if (*v == "quartic") cfg.hamiltonian = HamiltonianKind::Quartic;
    else problems.push_back("invalid value: hamiltonian '" + *v + "' (quadratic | quartic)");
  }
  if (auto v = require("problem.potential")) attempt([&] {
      cfg.potential_spec = *v;
      cfg.potential = parse_periodic(*v, cfg.dim);
    });
  if (auto v = require("problem.diffusion")) attempt([&] {
      cfg.diffusion_spec = *v;
      cfg.diffusion = parse_diffusion(*v, cfg.dim);
    });

  if (auto v = require("grid.sizes")) attempt([&] {
      for (const auto& s : split_list(*v)) {
        const int n = to_number<int>(s, "grid.sizes");
        if (n < 8 || (n & (n - 1)) != 0)
          throw DomainError("invalid range: grid size " + s + " must be a power of two >= 8");
        cfg.grid_sizes.push_back(n);
      }
      if (cfg.grid_sizes.empty()) throw DomainError("invalid range: grid.sizes is empty");
    });

  const auto eps_list = get("sweep.eps");
  const auto eps_start = get("sweep.eps_start");
  if (eps_list && eps_start) problems.push_back("invalid value: give either sweep.eps or sweep.eps_start, not both");
  attempt([&] {
    if (eps_list) {
      for (const auto& s : split_list(*eps_list)) cfg.eps.push_back(to_number<double>(s, "sweep.eps"));
    } else if (eps_start) {
      const double e0 = to_number<double>(*eps_start, "sweep.eps_start");
      const int levels = get("sweep.levels") ? to_number<int>(*get("sweep.levels"), "sweep.levels") : 6;
      if (levels < 1) throw DomainError("invalid range: sweep.levels must be >= 1");
      for (int k = 0; k < levels; ++k) cfg.eps.push_back(e0 / double(1 << k));
    } else {
      throw DomainError("missing field: sweep.eps (or sweep.eps_start)");
    }
    if (cfg.eps.empty()) throw DomainError("invalid range: sweep.eps is empty");
    for (std::size_t k = 0; k < cfg.eps.size(); ++k) {
      if (!(cfg.eps[k] > 0)) throw DomainError("invalid range: eps must be > 0");
      if (k && !(cfg.eps[k] < cfg.eps[k - 1]))
        throw DomainError("invalid range: sweep.eps must be strictly decreasing");
    }
  });
  attempt([&] {
    const std::string rule = get("sweep.eta_rule").value_or("eps2");
    const double value = get("sweep.eta") ? to_number<double>(*get("sweep.eta"), "sweep.eta") : 1.0;
    if (rule == "eps2") cfg.eta_rule = EtaRule::eps_squared(value);
    else if (rule == "fixed") cfg.eta_rule = EtaRule::fixed(value);
    else if (rule == "eps_linear") cfg.eta_rule = EtaRule::eps_linear(value);
    else throw DomainError("invalid value: eta_rule '" + rule + "' (fixed | eps2 | eps_linear)");
    if (!(value >= 0)) throw DomainError("invalid range: sweep.eta must be >= 0");
  });
  attempt([&] {
    cfg.x0.assign(cfg.dim, 0.0);
    if (auto v = get("sweep.x0")) {
      const auto parts = split_list(*v);
      if (int(parts.size()) != cfg.dim) throw DomainError("invalid range: sweep.x0 needs " + std::to_string(cfg.dim) + " coordinates");
      for (int d = 0; d < cfg.dim; ++d) cfg.x0[d] = to_number<double>(parts[d], "sweep.x0");
    }
  });

  auto positive = [&](const std::string& key, double& target) {
    if (auto v = get("tolerances." + key)) attempt([&] {
        target = to_number<double>(*v, "tolerances." + key);
        if (!(target > 0)) throw DomainError("invalid range: " + key + " must be > 0");
      });
  };
  positive("tol_res", cfg.tol_res);
  positive("tol_key1", cfg.tol_key1);
  positive("tol_action", cfg.tol_action);
  positive("tol_holonomy", cfg.tol_holonomy);
  positive("tol_mass", cfg.tol_mass);
  positive("tol_theta", cfg.tol_theta);
  positive("tol_transpose", cfg.tol_transpose);
  if (auto v = get("tolerances.max_steps")) attempt([&] {
      cfg.max_steps = to_number<int>(*v, "tolerances.max_steps");
      if (cfg.max_steps < 1) throw DomainError("invalid range: max_steps must be >= 1");
    });
  if (auto v = get("tolerances.holonomy_modes")) attempt([&] {
      cfg.holonomy_modes = to_number<int>(*v, "tolerances.holonomy_modes");
      if (cfg.holonomy_modes < 1) throw DomainError("invalid range: holonomy_modes must be >= 1");
    });

  if (auto v = get("commutation.etas")) attempt([&] {
      for (const auto& s : split_list(*v)) {
        cfg.comm_etas.push_back(to_number<double>(s, "commutation.etas"));
        if (!(cfg.comm_etas.back() > 0)) throw DomainError("invalid range: commutation eta must be > 0");
      }
    });
  if (auto v = get("commutation.probes")) attempt([&] {
      for (const auto& s : split_list(*v)) cfg.comm_probes.push_back(to_number<double>(s, "commutation.probes"));
      if (cfg.comm_probes.size() % cfg.dim) throw DomainError("invalid range: commutation.probes must list whole points");
    });
  if (auto v = get("commutation.grid")) attempt([&] {
      cfg.comm_grid = to_number<int>(*v, "commutation.grid");
      if (cfg.comm_grid < 8 || (cfg.comm_grid & (cfg.comm_grid - 1)) != 0)
        throw DomainError("invalid range: commutation.grid must be a power of two >= 8");
    });
  if (auto v = get("commutation.slope_min")) attempt([&] { cfg.comm_slope_min = to_number<double>(*v, "commutation.slope_min"); });

  if (auto v = get("output.dir")) cfg.output_dir = *v;
  if (auto v = get("output.fields")) {
    if (*v == "true") cfg.write_fields = true;
    else if (*v == "false") cfg.write_fields = false;
    else problems.push_back("invalid value: output.fields must be true or false");
  }

  if (problems.empty() && cfg.diffusion.dim() != cfg.dim) problems.push_back("invalid value: diffusion dimension");
  if (!problems.empty()) {
    for (auto& p : problems) p = origin + ": " + p;
    throw ConfigError(problems);
  }
  return cfg;
}

}  // namespace hjsel
