#include "hjsel/experiment.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "hjsel/hjsel.hpp"

namespace hjsel {

namespace fs = std::filesystem;

namespace {

// Values at or below this count as exact zeros when a strict decrease is
// required (e.g. the V = 0 instance, where every gap vanishes).
constexpr double kNegligible = 1e-12;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string join_csv(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + cells[i];
  return out;
}

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    out_ << join_csv(header) << '\n';
  }
  void row(const std::vector<std::string>& cells) { out_ << join_csv(cells) << '\n'; }

 private:
  std::ofstream out_;
};

std::string num(double v) { return format_double(v); }
std::string num(long long v) { return std::to_string(v); }

// Everything computed at one (N, eps) sweep point.
struct PointResult {
  double eps = 0;
  double eta = 0;
  std::string status = "ok";
  std::optional<SolveReport<double>> solve;

  std::optional<AdjointDensity<double>> theta;
  double theta_min = 0, mass_error = 0, transpose_gap = 0, duality_gap = 0, adjoint_holonomy = 0;

  std::optional<DiscreteMeasure<double>> mu;
  MeasureDiagnostics<double> diag;
  double action_gap = 0;

  std::optional<double> c_h;
  std::optional<GridField<double>> normalized;  // u + c_h / eps
};

struct ChainResult {
  int n = 0;
  std::vector<PointResult> points;
  std::vector<std::string> errors;
  std::map<std::string, double> timings;
};

struct Stages {
  bool solve = true, adjoint = false, measure = false, ergodic = false, selection = false,
       commutation = false, validate = false;
};

Stages stages_for(ExperimentKind kind) {
  Stages s;
  switch (kind) {
    case ExperimentKind::Solve: break;
    case ExperimentKind::Adjoint: s.adjoint = true; break;
    case ExperimentKind::Measure: s.adjoint = s.measure = s.ergodic = true; break;
    case ExperimentKind::Commutation: s.commutation = true; break;
    case ExperimentKind::Selection: s.adjoint = s.measure = s.ergodic = s.selection = true; break;
    case ExperimentKind::Full:
      s.adjoint = s.measure = s.ergodic = s.selection = s.commutation = s.validate = true;
      break;
    case ExperimentKind::Validate: s.solve = false; s.validate = true; break;
  }
  return s;
}

std::string point_tag(int n, double eps) { return "N=" + std::to_string(n) + " eps=" + num(eps); }

Eigen::Index x0_node(const ExperimentConfig& cfg, const TorusGrid& g) {
  Point<double> x(cfg.dim);
  for (int d = 0; d < cfg.dim; ++d) x(d) = cfg.x0[d];
  return g.nearest_node(x);
}

// Fixed, non-symmetric test vectors for the transpose identity.
std::pair<Vector<double>, Vector<double>> transpose_probes(const TorusGrid& g) {
  Vector<double> f(g.size()), h(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    f(i) = std::sin(0.7 * double(i) + 0.3) + 0.5;
    h(i) = std::cos(1.3 * double(i)) - 0.25;
  }
  return {f, h};
}

ChainResult run_chain(const ExperimentConfig& cfg, int n, const Stages& st) {
  ChainResult out;
  out.n = n;
  const TorusGrid g(cfg.dim, n);
  const auto model = cfg.model();
  const auto& diff = cfg.diffusion;
  const Eigen::Index x0 = x0_node(cfg, g);
  const TrigBasis<double> basis(cfg.dim, cfg.holonomy_modes);
  auto fail = [&](PointResult& p, const std::string& stage, const std::exception& e) {
    const std::string msg = stage + ": " + e.what();
    if (p.status == "ok") p.status = msg;
    out.errors.push_back(point_tag(n, p.eps) + ": " + msg);
  };
  auto timed = [&](const std::string& stage, auto&& f) {
    const auto t0 = Clock::now();
    f();
    out.timings[stage] += seconds_since(t0);
  };

  const SolveReport<double>* prev = nullptr;
  for (double eps : cfg.eps) {
    PointResult p;
    p.eps = eps;
    p.eta = cfg.eta_rule(eps);
    SchemeParams<double> params;
    params.eps = eps;
    params.eta = p.eta;
    params.tol_res = cfg.tol_res;
    params.max_steps = cfg.max_steps;
    params.x0_node = x0;

    timed("solve", [&] {
      try {
        std::optional<GridField<double>> guess;
        if (prev) guess = detail::rescaled_guess(*prev, eps);
        p.solve = solve_discounted(model, diff, g, params, guess ? &*guess : nullptr);
      } catch (const std::exception& e) {
        fail(p, "solve", e);
      }
    });
    if (p.solve && st.adjoint) {
      timed("adjoint", [&] {
        try {
          const auto op = assemble_linearization(model, diff, g, p.solve->solution, params);
          p.theta = solve_adjoint(op, x0);
          p.theta->eta = p.eta;
          p.theta_min = p.theta->theta.values.minCoeff();
          p.mass_error = std::abs(p.theta->mass() - 1);
          const auto [f, h] = transpose_probes(g);
          p.transpose_gap = transpose_identity_gap(op, f, h);
          p.duality_gap = duality_check(model, g, p.solve->solution, *p.theta, x0);
          p.adjoint_holonomy = max_abs(adjoint_holonomy_defects(op, *p.theta, basis));
        } catch (const std::exception& e) {
          fail(p, "adjoint", e);
          p.theta.reset();
        }
      });
    }
    if (p.solve && st.ergodic) {
      timed("ergodic", [&] {
        try {
          const auto erg = solve_ergodic(model, diff, g, p.eta, *p.solve, x0);
          p.c_h = erg.c;
          GridField<double> u = p.solve->fluctuation;
          u.values.array() += p.solve->offset + erg.c / eps;
          p.normalized = std::move(u);
        } catch (const std::exception& e) {
          fail(p, "ergodic", e);
        }
      });
    }
    if (p.theta && st.measure) {
      timed("measure", [&] {
        try {
          p.mu = pushforward_to_velocity(build_nu(p.solve->solution, *p.theta, model), model);
          p.diag = diagnose(*p.mu, model, diff, basis, p.normalized ? *p.normalized : p.solve->solution);
          p.action_gap = std::abs(p.diag.action + p.solve->c_estimate);
        } catch (const std::exception& e) {
          fail(p, "measure", e);
          p.mu.reset();
        }
      });
    }
    out.points.push_back(std::move(p));
    prev = out.points.back().solve ? &*out.points.back().solve : nullptr;
  }
  return out;
}

std::vector<double> default_ladder(int n) {
  std::vector<double> etas;
  const double h = 1.0 / n;
  for (double eta = 1.0 / 16; eta >= 2 * h && etas.size() < 5; eta /= 2) etas.push_back(eta);
  return etas;
}

std::vector<Point<double>> probe_points(const ExperimentConfig& cfg) {
  std::vector<Point<double>> pts;
  if (cfg.comm_probes.empty()) {
    for (double t : {0.0, 0.25, 0.5})
      pts.push_back(cfg.dim == 1 ? make_point(t) : make_point(t, t));
    return pts;
  }
  for (std::size_t i = 0; i + cfg.dim <= cfg.comm_probes.size(); i += cfg.dim)
    pts.push_back(cfg.dim == 1 ? make_point(cfg.comm_probes[i])
                               : make_point(cfg.comm_probes[i], cfg.comm_probes[i + 1]));
  return pts;
}

// Largest ratio d[k] / d[k-1] over the last `count` entries of d; 0 when the
// whole tail is negligible. A value < 1 means strictly decreasing.
double worst_ratio(const std::vector<double>& d, std::size_t count) {
  const std::size_t m = d.size();
  const std::size_t first = m > count ? m - count : 0;
  bool negligible = true;
  for (std::size_t k = first; k < m; ++k) negligible = negligible && d[k] <= kNegligible;
  if (negligible) return 0;
  double worst = 0;
  for (std::size_t k = first + 1; k < m; ++k)
    worst = std::max(worst, d[k - 1] > 0 ? d[k] / d[k - 1] : std::numeric_limits<double>::infinity());
  return worst;
}

void write_measure_csv(const fs::path& path, const DiscreteMeasure<double>& m, int dim) {
  std::vector<std::string> header = {"x"};
  if (dim == 2) header = {"x", "y"};
  const std::string vec = m.space == MeasureSpace::Velocity ? "v" : "p";
  header.push_back(dim == 1 ? vec : vec + "x");
  if (dim == 2) header.push_back(vec + "y");
  header.push_back("weight");
  CsvWriter w(path, header);
  for (const auto& a : m.atoms) {
    std::vector<std::string> row;
    for (int d = 0; d < dim; ++d) row.push_back(num(a.position(d)));
    for (int d = 0; d < dim; ++d) row.push_back(num(a.vector(d)));
    row.push_back(num(a.weight));
    w.row(row);
  }
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

CheckResult make_check(std::string check, std::string instance, double value, std::string relation,
                       double threshold) {
  CheckResult c{std::move(check), std::move(instance), value, threshold, std::move(relation), false};
  if (c.relation == "<=") c.pass = value <= threshold;
  else if (c.relation == ">=") c.pass = value >= threshold;
  else if (c.relation == "<") c.pass = value < threshold || (value <= kNegligible && threshold <= kNegligible);
  else throw DomainError("make_check: unknown relation '" + c.relation + "'");
  return c;
}

bool RunManifest::passed() const {
  return errors.empty() && std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
}

void write_field_csv(const fs::path& path, const GridField<double>& field, const std::string& label) {
  const auto& g = field.grid;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << (g.dim() == 1 ? "x," : "x,y,") << label << '\n';
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const auto x = g.coords<double>(i);
    for (int d = 0; d < g.dim(); ++d) out << num(x(d)) << ',';
    out << num(field[i]) << '\n';
  }
}

RunManifest run_experiment(const ExperimentConfig& cfg, const fs::path& out_dir, int workers) {
  const auto t_start = Clock::now();
  if (workers < 1) throw DomainError("invalid range: workers must be >= 1");
  fs::create_directories(out_dir);

  RunManifest man;
  man.name = cfg.name;
  man.kind = to_string(cfg.kind);
  man.config_hash = config_hash(cfg.source);
  const Stages st = stages_for(cfg.kind);
  const auto model = cfg.model();
  const auto& diff = cfg.diffusion;
  auto instance = [&](int n) { return cfg.name + "/N=" + std::to_string(n); };
  auto add = [&](CheckResult c) { man.checks.push_back(std::move(c)); };
  std::map<std::string, double> timings;

  if (st.validate) {
    const auto t0 = Clock::now();
    CsvWriter w(out_dir / "validation.csv",
                {"instance", "convexity_min_eigenvalue", "superlinearity_radius", "superlinearity_margin",
                 "dx_constant", "diffusion_minimum", "diffusion_sqrt_constant", "degenerate", "status"});
    man.artifacts.push_back("validation.csv");
    try {
      const auto rep = validate_assumptions(model, diff, 1000);
      w.row({cfg.name, num(rep.convexity_min_eigenvalue), num(rep.superlinearity_radius),
             num(rep.superlinearity_margin), num(rep.dx_constant), num(rep.diffusion_minimum),
             num(rep.diffusion_sqrt_constant), rep.degenerate ? "1" : "0", "ok"});
      add(make_check("validate.sqrt_bound_constant", cfg.name, rep.diffusion_sqrt_constant, "<",
                     std::numeric_limits<double>::infinity()));
    } catch (const std::exception& e) {
      w.row({cfg.name, "nan", "nan", "nan", "nan", "nan", "nan", "nan", e.what()});
      man.errors.push_back(std::string("validate: ") + e.what());
      add(make_check("validate.sqrt_bound_constant", cfg.name, std::numeric_limits<double>::quiet_NaN(), "<",
                     std::numeric_limits<double>::infinity()));
    }
    timings["validate"] += seconds_since(t0);
  }

  // Sweep chains, one per grid size; the commutation grid joins if it is new.
  std::vector<int> sizes;
  if (st.solve) sizes = cfg.grid_sizes;
  int comm_n = 0;
  if (st.commutation) {
    comm_n = cfg.comm_grid ? cfg.comm_grid : *std::max_element(cfg.grid_sizes.begin(), cfg.grid_sizes.end());
    if (std::find(sizes.begin(), sizes.end(), comm_n) == sizes.end()) sizes.push_back(comm_n);
  }
  std::vector<ChainResult> chains(sizes.size());
  {
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t i; (i = next++) < sizes.size();) {
        Stages s = st;
        const bool sweep_grid = std::find(cfg.grid_sizes.begin(), cfg.grid_sizes.end(), sizes[i]) != cfg.grid_sizes.end();
        if (!sweep_grid) s.adjoint = s.measure = s.ergodic = s.selection = false;
        chains[i] = run_chain(cfg, sizes[i], s);
      }
    };
    std::vector<std::thread> pool;
    const int nthreads = std::min<int>(workers, int(sizes.size()));
    for (int t = 1; t < nthreads; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
  }
  for (const auto& ch : chains) {
    for (const auto& e : ch.errors) man.errors.push_back(e);
    for (const auto& [k, v] : ch.timings) timings[k] += v;
  }

  if (st.solve) {
    const fs::path fields = out_dir / "fields";
    if (cfg.write_fields) fs::create_directories(fields);
    CsvWriter runs(out_dir / "runs.csv",
                   {"N", "eps", "eta", "status", "iterations", "residual", "residual_threshold", "c_estimate",
                    "c_at_x0", "theta_min", "mass_error", "transpose_gap", "duality_gap", "adjoint_holonomy",
                    "adjoint_refinements"});
    man.artifacts.push_back("runs.csv");
    for (std::size_t ci = 0; ci < chains.size(); ++ci) {
      const auto& ch = chains[ci];
      const bool sweep_grid = std::find(cfg.grid_sizes.begin(), cfg.grid_sizes.end(), ch.n) != cfg.grid_sizes.end();
      if (!sweep_grid) continue;
      int failed = 0;
      double theta_min = std::numeric_limits<double>::infinity(), mass = 0, transpose = 0;
      bool any_adjoint = false;
      for (std::size_t k = 0; k < ch.points.size(); ++k) {
        const auto& p = ch.points[k];
        std::vector<std::string> row = {num((long long)ch.n), num(p.eps), num(p.eta), "\"" + p.status + "\""};
        if (p.solve) {
          row.insert(row.end(), {num((long long)p.solve->iterations), num(p.solve->final_residual),
                                 num(p.solve->residual_threshold), num(p.solve->c_estimate), num(p.solve->c_at_x0)});
        } else {
          ++failed;
          row.insert(row.end(), 5, "nan");
        }
        if (p.theta) {
          any_adjoint = true;
          theta_min = std::min(theta_min, p.theta_min);
          mass = std::max(mass, p.mass_error);
          transpose = std::max(transpose, p.transpose_gap);
          row.insert(row.end(), {num(p.theta_min), num(p.mass_error), num(p.transpose_gap), num(p.duality_gap),
                                 num(p.adjoint_holonomy), num((long long)p.theta->refinement_steps)});
        } else {
          row.insert(row.end(), 6, st.adjoint ? "nan" : "");
        }
        runs.row(row);
        if (cfg.write_fields && p.solve) {
          const std::string tag = "N" + std::to_string(ch.n) + "_e" + std::to_string(k);
          const std::string par = "{eps=" + num(p.eps) + ";eta=" + num(p.eta) + ";N=" + std::to_string(ch.n) + "}";
          write_field_csv(fields / ("u_" + tag + ".csv"), p.solve->solution, "u" + par);
          man.artifacts.push_back("fields/u_" + tag + ".csv");
          if (p.theta) {
            write_field_csv(fields / ("theta_" + tag + ".csv"), p.theta->theta, "theta" + par);
            man.artifacts.push_back("fields/theta_" + tag + ".csv");
          }
          if (p.normalized) {
            write_field_csv(fields / ("u_normalized_" + tag + ".csv"), *p.normalized, "u_normalized" + par);
            man.artifacts.push_back("fields/u_normalized_" + tag + ".csv");
          }
        }
      }
      add(make_check("solve.failed_points", instance(ch.n), failed, "<=", 0));
      if (st.adjoint && any_adjoint) {
        add(make_check("adjoint.theta_min", instance(ch.n), theta_min, ">=", -cfg.tol_theta));
        add(make_check("adjoint.mass_error", instance(ch.n), mass, "<=", cfg.tol_mass));
        add(make_check("adjoint.transpose_gap", instance(ch.n), transpose, "<=", cfg.tol_transpose));
      }
    }
  }

  if (st.measure) {
    CsvWriter ms(out_dir / "measures.csv", {"N", "eps", "eta", "action", "c_estimate", "action_gap", "max_holonomy",
                                            "key1_own_level", "concentration", "radius50", "radius90", "mass"});
    man.artifacts.push_back("measures.csv");
    for (const auto& ch : chains) {
      std::vector<double> gaps, hol;
      const PointResult* finest = nullptr;
      for (const auto& p : ch.points) {
        if (!p.mu) continue;
        std::string conc;
        for (int d = 0; d < cfg.dim; ++d) conc += (d ? " " : "") + num(p.diag.concentration(d));
        ms.row({num((long long)ch.n), num(p.eps), num(p.eta), num(p.diag.action), num(p.solve->c_estimate),
                num(p.action_gap), num(p.diag.max_holonomy), num(p.diag.key1), conc, num(p.diag.radius50),
                num(p.diag.radius90), num(p.mu->total_weight())});
        gaps.push_back(p.action_gap);
        hol.push_back(p.diag.max_holonomy);
        finest = &p;
      }
      if (!finest) continue;
      const std::string mu_file = "mu_N" + std::to_string(ch.n) + ".csv";
      write_measure_csv(out_dir / mu_file, *finest->mu, cfg.dim);
      man.artifacts.push_back(mu_file);
      add(make_check("measure.action_gap", instance(ch.n), gaps.back(), "<=", cfg.tol_action));
      if (gaps.size() >= 2)
        add(make_check("measure.action_gap_vs_coarsest", instance(ch.n), gaps.back(), "<", gaps.front()));
      add(make_check("measure.holonomy", instance(ch.n), hol.back(), "<=", cfg.tol_holonomy));
      add(make_check("measure.holonomy_worst_ratio", instance(ch.n), worst_ratio(hol, hol.size()), "<", 1));
    }
  }

  if (st.ergodic) {
    CsvWriter sel(out_dir / "selection.csv", {"N", "eps", "eta", "c_h", "cauchy", "key1"});
    man.artifacts.push_back("selection.csv");
    for (const auto& ch : chains) {
      if (ch.points.empty()) continue;
      const auto& last = ch.points.back();
      if (!last.mu || !last.normalized) {
        man.errors.push_back("N=" + std::to_string(ch.n) + ": selection: finest point has no measure");
        continue;
      }
      std::vector<double> cauchy, key1;
      bool complete = true;
      for (std::size_t k = 0; k < ch.points.size(); ++k) {
        const auto& p = ch.points[k];
        if (!p.normalized) {
          complete = false;
          sel.row({num((long long)ch.n), num(p.eps), num(p.eta), "nan", "nan", "nan"});
          continue;
        }
        std::string d = "";
        if (k > 0 && ch.points[k - 1].normalized) {
          cauchy.push_back((ch.points[k - 1].normalized->values - p.normalized->values).cwiseAbs().maxCoeff());
          d = num(cauchy.back());
        }
        key1.push_back(key1_check(*p.normalized, *last.mu));
        sel.row({num((long long)ch.n), num(p.eps), num(p.eta), num(*p.c_h), d, num(key1.back())});
      }
      add(make_check("key1.max_pairing", instance(ch.n), *std::max_element(key1.begin(), key1.end()), "<=",
                     cfg.tol_key1));
      if (!st.selection) continue;
      if (!complete || cauchy.size() < 2) {
        man.errors.push_back("N=" + std::to_string(ch.n) + ": selection: need two Cauchy differences");
        continue;
      }
      add(make_check("selection.cauchy_worst_ratio", instance(ch.n), worst_ratio(cauchy, 3), "<", 1));
      add(make_check("selection.u0_pairing", instance(ch.n), std::abs(key1.back()), "<=", cfg.tol_key1));
    }
  }

  if (st.commutation) {
    const auto t0 = Clock::now();
    const auto it = std::find_if(chains.begin(), chains.end(), [&](const auto& c) { return c.n == comm_n; });
    const PointResult* finest = it != chains.end() && !it->points.empty() && it->points.back().solve
                                    ? &it->points.back() : nullptr;
    CsvWriter cw(out_dir / "commutation.csv",
                 {"N", "eta", "s_witness", "s_sup", "r1_max", "r2_sup", "eta2_lap", "split_gap"});
    CsvWriter pw(out_dir / "probes.csv", cfg.dim == 1 ? std::vector<std::string>{"N", "probe", "x", "node", "eta", "s", "r2"}
                                                      : std::vector<std::string>{"N", "probe", "x", "y", "node", "eta", "s", "r2"});
    man.artifacts.push_back("commutation.csv");
    man.artifacts.push_back("probes.csv");
    if (!finest) {
      man.errors.push_back("commutation: no converged solution at N=" + std::to_string(comm_n));
    } else {
      try {
        const auto& u = finest->solve->solution;
        GridField<double> disc = u;
        disc.values *= finest->eps;
        const auto etas = cfg.comm_etas.empty() ? default_ladder(comm_n) : cfg.comm_etas;
        const auto rep = commutation_ladder(u, model, diff, 0.0, etas, probe_points(cfg), &disc);
        double s_max = 0, gap = 0;
        for (const auto& r : rep.rows) {
          cw.row({num((long long)comm_n), num(r.eta), num(r.s_witness), num(r.s_sup), num(r.r1_max), num(r.r2_sup),
                  num(r.eta2_lap), num(r.split_gap)});
          s_max = std::max(s_max, r.s_sup);
          gap = std::max(gap, r.split_gap);
        }
        for (std::size_t q = 0; q < rep.probes.size(); ++q) {
          const auto& pr = rep.probes[q];
          for (std::size_t j = 0; j < rep.rows.size(); ++j) {
            std::vector<std::string> row = {num((long long)comm_n), num((long long)q)};
            for (int d = 0; d < cfg.dim; ++d) row.push_back(num(pr.x(d)));
            row.insert(row.end(), {num((long long)pr.node), num(rep.rows[j].eta), num(pr.s[j]), num(pr.r2[j])});
            pw.row(row);
          }
        }
        add(make_check("commutation.split_gap", instance(comm_n), gap, "<=", 1e-8));
        if (s_max <= 1e-10)
          add(make_check("commutation.s_sup", instance(comm_n), s_max, "<=", 1e-10));
        else
          add(make_check("commutation.slope", instance(comm_n), rep.slope_sup, ">=", cfg.comm_slope_min));
      } catch (const std::exception& e) {
        man.errors.push_back(std::string("commutation: ") + e.what());
      }
    }
    timings["commutation"] += seconds_since(t0);
  }

  CsvWriter ck(out_dir / "checks.csv", {"check", "instance", "value", "relation", "threshold", "pass"});
  for (const auto& c : man.checks)
    ck.row({c.check, c.instance, num(c.value), c.relation, num(c.threshold), c.pass ? "pass" : "fail"});
  man.artifacts.push_back("checks.csv");

  man.partial = !man.errors.empty();
  man.timings.assign(timings.begin(), timings.end());
  man.wall_time = seconds_since(t_start);
  {
    std::ofstream s(out_dir / "summary.txt");
    s << emit_summary(man);
    man.artifacts.push_back("summary.txt");
  }
  man.artifacts.push_back("manifest.json");
  write_manifest_json(man, out_dir / "manifest.json");
  return man;
}

std::string emit_summary(const RunManifest& m) {
  std::size_t wc = 5, wi = 8;
  for (const auto& c : m.checks) {
    wc = std::max(wc, c.check.size());
    wi = std::max(wi, c.instance.size());
  }
  std::ostringstream os;
  auto line = [&](const std::string& a, const std::string& b, const std::string& c, const std::string& d,
                  const std::string& e) {
    os << std::left << std::setw(int(wc)) << a << "  " << std::setw(int(wi)) << b << "  " << std::setw(24) << c
       << "  " << std::setw(28) << d << "  " << e << '\n';
  };
  line("check", "instance", "value", "threshold", "pass");
  for (const auto& c : m.checks) line(c.check, c.instance, num(c.value), c.relation + " " + num(c.threshold), c.pass ? "pass" : "fail");
  return os.str();
}

void write_manifest_json(const RunManifest& m, const fs::path& path) {
  nlohmann::ordered_json j;
  j["name"] = m.name;
  j["kind"] = m.kind;
  j["config_hash"] = m.config_hash;
  j["artifacts"] = m.artifacts;
  auto& checks = j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : m.checks) {
    nlohmann::ordered_json r;
    r["check"] = c.check;
    r["instance"] = c.instance;
    r["value"] = num(c.value);
    r["relation"] = c.relation;
    r["threshold"] = num(c.threshold);
    r["pass"] = c.pass;
    checks.push_back(r);
  }
  j["errors"] = m.errors;
  j["partial"] = m.partial;
  j["passed"] = m.passed();
  j["wall_time_seconds"] = m.wall_time;
  auto& t = j["stage_seconds"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : m.timings) t[k] = v;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace hjsel
