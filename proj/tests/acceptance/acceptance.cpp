// Acceptance suite: one line per criterion, nonzero exit if any fails.
// Every tolerance below is fixed here and nowhere else.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hjsel/config.hpp"
#include "hjsel/hjsel.hpp"

using namespace hjsel;

namespace {

// Both sides of a strict decrease below this count as already converged.
constexpr double kNegligible = 1e-12;

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [FAIL]");
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

bool decreasing(double prev, double next) { return next < prev || (prev <= kNegligible && next <= kNegligible); }

HamiltonianModel<double> quad_cos() { return quadratic_hamiltonian(PeriodicFunction<double>::cosine(1, {1, 0}, 1.0)); }

std::vector<double> default_eps() {
  std::vector<double> e;
  for (int k = 0; k < 6; ++k) e.push_back(0.1 / (1 << k));
  return e;
}

struct SweepPoint {
  double eps = 0, eta = 0;
  SolveReport<double> rep;
  std::optional<LinearizedOperator<double>> op;
  std::optional<AdjointDensity<double>> theta;
  std::optional<DiscreteMeasure<double>> mu;
  std::optional<GridField<double>> normalized;  // u + c_h / eps
};

std::vector<SweepPoint> sweep(const HamiltonianModel<double>& m, const DiffusionCoefficient<double>& diff,
                              const TorusGrid& g, const std::vector<double>& eps, const EtaRule& rule) {
  std::vector<SweepPoint> out;
  for (double e : eps) {
    SchemeParams<double> p;
    p.eps = e;
    p.eta = rule(e);
    std::optional<GridField<double>> guess;
    if (!out.empty()) guess = detail::rescaled_guess(out.back().rep, e);
    SweepPoint pt{e, p.eta, solve_discounted(m, diff, g, p, guess ? &*guess : nullptr)};
    pt.op = assemble_linearization(m, diff, g, pt.rep.solution, p);
    pt.theta = solve_adjoint(*pt.op, 0);
    pt.mu = pushforward_to_velocity(build_nu(pt.rep.solution, *pt.theta, m), m);
    const auto erg = solve_ergodic(m, diff, g, p.eta, pt.rep);
    pt.normalized = pt.rep.fluctuation;
    pt.normalized->values.array() += pt.rep.offset + erg.c / e;
    out.push_back(std::move(pt));
  }
  return out;
}

double elapsed(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// 1. V = 0 is solved exactly and every derived quantity vanishes.
Outcome trivial_exactness() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto m = quadratic_hamiltonian(PeriodicFunction<double>::constant(1, 0.0));
  const auto diff = diffusion::one<double>(1);
  const TorusGrid g(1, 256);
  const auto pts = sweep(m, diff, g, default_eps(), EtaRule::eps_squared());
  const TrigBasis<double> basis(1, 4, true);
  double u_sup = 0, mass = 0, act = 0, hol0 = 0, key1 = 0;
  for (const auto& p : pts) {
    u_sup = std::max(u_sup, p.rep.solution.sup_norm());
    mass = std::max(mass, std::abs(p.theta->mass() - 1));
    act = std::max(act, std::abs(action(*p.mu, m)));
    hol0 = std::max(hol0, std::abs(holonomy_residuals(*p.mu, diff, basis)[0]));
    key1 = std::max(key1, std::abs(key1_check(*p.normalized, *pts.back().mu)));
  }
  GridField<double> disc = pts.back().rep.solution;
  disc.values *= pts.back().eps;
  const auto comm = commutation_ladder(pts.back().rep.solution, m, diff, 0.0, {1.0 / 16, 1.0 / 32, 1.0 / 64}, {}, &disc);
  double s = 0;
  for (const auto& r : comm.rows) s = std::max(s, r.s_sup);
  const double secs = elapsed(t0);
  o.require(u_sup <= 1e-12, "|u| " + fmt(u_sup) + " <= 1e-12");
  o.require(mass <= 1e-10, "mass err " + fmt(mass) + " <= 1e-10");
  o.require(act <= 1e-10, "action " + fmt(act) + " <= 1e-10");
  o.require(hol0 <= 1e-10, "holonomy(const) " + fmt(hol0) + " <= 1e-10");
  o.require(key1 <= 1e-10, "key1 " + fmt(key1) + " <= 1e-10");
  o.require(s <= 1e-10, "S " + fmt(s) + " <= 1e-10");
  o.require(secs < 10, "time " + fmt(secs) + " s < 10");
  return o;
}

// 2. theta >= 0, unit mass and the transpose identity on every default sweep point.
Outcome adjoint_invariants() {
  Outcome o;
  double theta_min = 1e300, mass = 0, tgap = 0;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> uni(-1, 1);
  for (const char* name : {"trivial", "one", "degenerate", "double_degenerate", "zero", "quartic", "two_dim"}) {
    const auto cfg = parse_config(std::string(HJSEL_CONFIG_DIR) + "/" + name + ".ini");
    for (int n : cfg.grid_sizes) {
      const TorusGrid g(cfg.dim, n);
      for (const auto& p : sweep(cfg.model(), cfg.diffusion, g, cfg.eps, cfg.eta_rule)) {
        theta_min = std::min(theta_min, p.theta->theta.values.minCoeff());
        mass = std::max(mass, std::abs(p.theta->mass() - 1));
        Vector<double> f(g.size()), h(g.size());
        for (Eigen::Index i = 0; i < g.size(); ++i) f(i) = uni(rng), h(i) = uni(rng);
        tgap = std::max(tgap, transpose_identity_gap(*p.op, f, h));
      }
    }
  }
  o.require(theta_min >= -1e-14, "min theta " + fmt(theta_min) + " >= -1e-14");
  o.require(mass <= 1e-10, "mass err " + fmt(mass) + " <= 1e-10");
  o.require(tgap <= 1e-12, "transpose gap " + fmt(tgap) + " <= 1e-12");
  return o;
}

// 3. Richardson-extrapolated ergodic constant against max V = 1.
Outcome ergodic_constant() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto est = estimate_ergodic_constant(quad_cos(), diffusion::degenerate<double>(1), TorusGrid(1, 4096),
                                             {4e-3, 2e-3, 1e-3}, 1e-3);
  const double secs = elapsed(t0);
  o.require(est.c >= 0.97 && est.c <= 1.03, "c " + fmt(est.c) + " in [0.97, 1.03]");
  o.require(secs < 180, "time " + fmt(secs) + " s < 180");
  return o;
}

// 4. ||u^{eps,eta} - u^{eps,eta/2}|| shrinks at least linearly in eta.
Outcome eta_proxy_rate() {
  Outcome o;
  const auto m = quad_cos();
  const auto diff = diffusion::degenerate<double>(1);
  const TorusGrid g(1, 2048);
  std::vector<double> etas, diffs;
  std::optional<SolveReport<double>> prev;
  for (double eta = 1.0 / 8; eta >= 1.0 / 128 - 1e-15; eta /= 2) {
    SchemeParams<double> p;
    p.eps = 1e-2;
    p.eta = eta;
    auto rep = solve_discounted(m, diff, g, p, prev ? &prev->solution : nullptr);
    if (prev) {
      etas.push_back(2 * eta);
      diffs.push_back((rep.solution.values - prev->solution.values).cwiseAbs().maxCoeff());
    }
    prev = std::move(rep);
  }
  const double slope = loglog_slope(etas, diffs);
  o.require(slope >= 0.9, "slope " + fmt(slope) + " >= 0.9");
  return o;
}

// 5. Commutation residual rate on the degenerate and a = 1 instances.
Outcome commutation_rate() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto m = quad_cos();
  const std::vector<double> ladder{1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128, 1.0 / 256};
  const std::pair<DiffusionCoefficient<double>, double> cases[] = {{diffusion::degenerate<double>(1), 0.45},
                                                                   {diffusion::one<double>(1), 0.9}};
  for (const auto& [diff, min_slope] : cases) {
    SchemeParams<double> p;
    p.eps = 1e-2;
    p.eta = 1e-3;
    const auto rep = solve_discounted(m, diff, TorusGrid(1, 4096), p);
    GridField<double> disc = rep.solution;
    disc.values *= p.eps;
    const auto comm = commutation_ladder(rep.solution, m, diff, 0.0, ladder, {}, &disc);
    o.require(comm.slope_sup >= min_slope, diff.name + " slope " + fmt(comm.slope_sup) + " >= " + fmt(min_slope));
  }
  const double secs = elapsed(t0);
  o.require(secs < 120, "time " + fmt(secs) + " s < 120");
  return o;
}

// 6. Action and holonomy of mu along the degenerate sweep.
Outcome measure_identities() {
  Outcome o;
  const auto m = quad_cos();
  const auto diff = diffusion::degenerate<double>(1);
  const auto pts = sweep(m, diff, TorusGrid(1, 1024), default_eps(), EtaRule::eps_squared());
  const TrigBasis<double> basis(1, 4);
  std::vector<double> gap, hol;
  for (const auto& p : pts) {
    gap.push_back(std::abs(action(*p.mu, m) + p.rep.c_estimate));
    hol.push_back(max_abs(holonomy_residuals(*p.mu, diff, basis)));
  }
  bool hol_down = true;
  for (std::size_t k = 1; k < hol.size(); ++k) hol_down = hol_down && decreasing(hol[k - 1], hol[k]);
  o.require(gap.back() <= 0.05, "action gap " + fmt(gap.back()) + " <= 0.05");
  o.require(decreasing(gap.front(), gap.back()), "< coarsest " + fmt(gap.front()));
  o.require(hol.back() <= 0.05, "holonomy " + fmt(hol.back()) + " <= 0.05");
  o.require(hol_down, "holonomy decreasing along the sweep");
  return o;
}

// 7. <u^eps, mu> <= 0.05 at every sweep level, a = 1 and degenerate.
Outcome key1_pairing() {
  Outcome o;
  for (const auto& diff : {diffusion::one<double>(1), diffusion::degenerate<double>(1)}) {
    const auto pts = sweep(quad_cos(), diff, TorusGrid(1, 1024), default_eps(), EtaRule::eps_squared());
    double worst = -1e300;
    for (const auto& p : pts) worst = std::max(worst, key1_check(*p.normalized, *pts.back().mu));
    o.require(worst <= 0.05, diff.name + " max " + fmt(worst) + " <= 0.05");
  }
  return o;
}

// 8. Cauchy differences decrease on every built-in instance; the limit pairs to ~0 with mu on a = 1.
Outcome selection() {
  Outcome o;
  const auto t0 = Clock::now();
  for (const char* name : {"trivial", "one", "degenerate", "double_degenerate", "zero", "quartic", "two_dim"}) {
    const auto cfg = parse_config(std::string(HJSEL_CONFIG_DIR) + "/" + name + ".ini");
    const TorusGrid g(cfg.dim, cfg.grid_sizes.back());
    SchemeParams<double> base;
    base.x0_node = g.nearest_node(Eigen::Map<const Eigen::VectorXd>(cfg.x0.data(), cfg.dim));
    const auto sel = selection_limit(cfg.model(), cfg.diffusion, g, cfg.eps, cfg.eta_rule, base, false);
    const auto& c = sel.cauchy;
    const bool ok = c.size() >= 3 && decreasing(c[c.size() - 3], c[c.size() - 2]) &&
                    decreasing(c[c.size() - 2], c[c.size() - 1]);
    o.require(ok, std::string(name) + " " + fmt(c[c.size() - 3]) + ">" + fmt(c[c.size() - 2]) + ">" + fmt(c.back()));
  }
  const double secs = elapsed(t0);
  const auto pts = sweep(quad_cos(), diffusion::one<double>(1), TorusGrid(1, 1024), default_eps(),
                         EtaRule::eps_squared());
  const auto sel = selection_limit(quad_cos(), diffusion::one<double>(1), TorusGrid(1, 1024), default_eps(),
                                   EtaRule::eps_squared());
  const double pairing = std::abs(key1_check(sel.u0, *pts.back().mu));
  o.require(pairing <= 0.05, "|<u0, mu>| " + fmt(pairing) + " <= 0.05");
  o.require(secs < 900, "time " + fmt(secs) + " s < 900");
  return o;
}

// 9. Catalogue passes the sqrt bound with finite constants; negative a is named.
Outcome assumption_validation() {
  Outcome o;
  double worst = 0;
  for (int dim : {1, 2})
    for (const auto& diff : {diffusion::zero<double>(dim), diffusion::one<double>(dim),
                             diffusion::degenerate<double>(dim), diffusion::double_degenerate<double>(dim)}) {
      const auto rep =
          validate_assumptions(quadratic_hamiltonian(PeriodicFunction<double>::cosine(dim, {1, 0}, 1.0)), diff, 2000);
      o.require(rep.passed() && std::isfinite(rep.diffusion_sqrt_constant), diff.name + " dim " + std::to_string(dim));
      worst = std::max(worst, rep.diffusion_sqrt_constant);
    }
  o.require(std::isfinite(worst), "max C " + fmt(worst));
  bool named = false;
  try {
    validate_assumptions(quad_cos(), DiffusionCoefficient<double>(PeriodicFunction<double>::constant(1, -0.1)), 1000);
  } catch (const AssumptionViolation& e) {
    named = std::string(e.what()).find("a >= 0 violated") != std::string::npos;
  }
  o.require(named, "negative a rejected");
  return o;
}

// 10. mu beats the holonomic atom at x = 1/2 and matches the one at x = 0.
Outcome minimization() {
  Outcome o;
  const auto m = quad_cos();
  const auto diff = diffusion::double_degenerate<double>(1);
  const TorusGrid g(1, 1024);
  const auto pts = sweep(m, diff, g, default_eps(), EtaRule::eps_squared());
  const auto& mu = *pts.back().mu;
  const auto at0 = DiscreteMeasure<double>::dirac(make_point(0.0), make_point(0.0), MeasureSpace::Velocity, 0);
  const auto at_half =
      DiscreteMeasure<double>::dirac(make_point(0.5), make_point(0.0), MeasureSpace::Velocity, g.size() / 2);
  const auto rep = minimization_check(mu, {{"delta_0", at0}, {"delta_half", at_half}}, m, diff, TrigBasis<double>(1, 4));
  const double a_mu = rep.action, a0 = rep.rows[0].action, ah = rep.rows[1].action;
  o.require(std::abs(a0 + 1) <= 1e-12 && std::abs(ah - 1) <= 1e-12, "atom actions " + fmt(a0) + ", " + fmt(ah));
  o.require(a_mu <= ah - 1.5, "action(mu) " + fmt(a_mu) + " <= " + fmt(ah - 1.5));
  o.require(std::abs(a_mu - a0) <= 0.1, "|action(mu) - action(delta_0)| " + fmt(std::abs(a_mu - a0)) + " <= 0.1");
  return o;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"1 trivial exactness", trivial_exactness},
      {"2 adjoint invariants", adjoint_invariants},
      {"3 ergodic constant", ergodic_constant},
      {"4 eta proxy rate", eta_proxy_rate},
      {"5 commutation rate", commutation_rate},
      {"6 measure identities", measure_identities},
      {"7 key1 pairing", key1_pairing},
      {"8 selection", selection},
      {"9 assumption validation", assumption_validation},
      {"10 minimization", minimization},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s  criterion %-24s %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), elapsed(t0));
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria failed\n", failed, std::size(criteria));
  return failed ? 1 : 0;
}
