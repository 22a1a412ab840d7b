#pragma once

#include <algorithm>
#include <chrono>
#include <limits>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/SparseLU>

#include "hjsel/scheme.hpp"

namespace hjsel {

enum class SolveMethod {
  Newton,      // semismooth Newton on the convex monotone scheme
  PseudoTime,  // explicit monotone pseudo-time march
};

template <typename Scalar = double>
struct SchemeParams {
  Scalar eps{0.1};
  Scalar eta{0};
  Scalar tol_res{1e-9};
  int max_steps = 200;
  Scalar cfl_safety{0.9};
  SolveMethod method = SolveMethod::Newton;
  Eigen::Index x0_node = 0;

  /// Throws DomainError unless eps > 0, eta >= 0, and eta > 0 when a is degenerate.
  void validate(bool degenerate) const {
    if (!(eps > Scalar(0))) throw DomainError("invalid range: eps must be > 0");
    if (!(eta >= Scalar(0))) throw DomainError("invalid range: eta must be >= 0");
    if (degenerate && !(eta > Scalar(0)))
      throw DomainError("invalid range: eta must be > 0 when the diffusion is degenerate");
    if (!(tol_res > Scalar(0))) throw DomainError("invalid range: tol_res must be > 0");
    if (max_steps < 1) throw DomainError("invalid range: max_steps must be >= 1");
    if (!(cfl_safety > Scalar(0) && cfl_safety <= Scalar(1)))
      throw DomainError("invalid range: cfl_safety must be in (0, 1]");
  }
};

template <typename Scalar = double>
struct SolveReport {
  GridField<Scalar> solution;    // u = fluctuation + offset
  GridField<Scalar> fluctuation;  // mean-zero part, kept separately so that
  Scalar offset{0};               // differences of large u stay accurate
  int iterations = 0;
  Scalar final_residual{0};
  Scalar residual_threshold{0};  // max(tol_res, roundoff floor) at exit
  std::vector<double> residual_history;
  Scalar c_estimate{0};  // -eps * mean(u)
  Scalar c_at_x0{0};     // -eps * u(x0)
  double wall_time = 0;
  Scalar eps{0};
  Scalar eta{0};
};

namespace detail {

template <typename Scalar>
Scalar pseudo_time_step(const DiscreteProblem<Scalar>& prob, const Vector<Scalar>& u,
                        Scalar cfl) {
  const auto& g = prob.grid;
  const Scalar inv_h = Scalar(g.nodes_per_dim());
  Scalar max_speed = 0;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const auto fl = node_flux(prob, u, i);
    Scalar s = 0;
    for (int d = 0; d < g.dim(); ++d) s += fl.d_minus[d] - fl.d_plus[d];
    max_speed = std::max(max_speed, s);
  }
  const Scalar dmax = prob.diffusion.maxCoeff() + prob.eta * prob.eta;
  return cfl / (prob.eps + Scalar(2 * g.dim()) * dmax * inv_h * inv_h + max_speed * inv_h);
}

/// Smallest residual the scheme can resolve in floating point at u: the
/// operator's row norm times a few ulps of |u|. Tolerances below this are
/// replaced by it.
template <typename Scalar>
Scalar roundoff_floor(const DiscreteProblem<Scalar>& prob, const Vector<Scalar>& u) {
  const auto& g = prob.grid;
  const Scalar inv_h = Scalar(g.nodes_per_dim());
  Scalar speed = 0;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const auto fl = node_flux(prob, u, i);
    Scalar s = 0;
    for (int d = 0; d < g.dim(); ++d) s += fl.d_minus[d] - fl.d_plus[d];
    speed = std::max(speed, s);
  }
  const Scalar dmax = prob.diffusion.maxCoeff() + prob.eta * prob.eta;
  const Scalar row = Scalar(4 * g.dim()) * dmax * inv_h * inv_h + Scalar(2) * speed * inv_h;
  return Scalar(16) * std::numeric_limits<Scalar>::epsilon() * (u.cwiseAbs().maxCoeff() + 1) * row;
}

template <typename Scalar>
void check_finite(const Vector<Scalar>& r, const std::vector<double>& history) {
  if (!r.allFinite()) throw ConvergenceError("unstable: iterate produced NaN/Inf", history);
}

}  // namespace detail

/// Solves eps u + H(x, Du) = (a + eta^2) Lap u on the grid with the monotone
/// upwind scheme. Stops once the sup-norm scheme residual is <= tol_res.
template <typename Scalar>
SolveReport<Scalar> solve_discounted(const HamiltonianModel<Scalar>& model,
                                     const DiffusionCoefficient<Scalar>& diff,
                                     const TorusGrid& grid, const SchemeParams<Scalar>& params,
                                     const GridField<Scalar>* initial = nullptr) {
  params.validate(diff.degenerate);
  const auto start = std::chrono::steady_clock::now();
  const auto prob = make_problem(model, diff, grid, params.eps, params.eta);

  Vector<Scalar> w = initial ? initial->values : Vector<Scalar>::Zero(grid.size());
  if (w.size() != grid.size()) throw DomainError("solve_discounted: initial guess has wrong size");
  // u = w + k with mean(w) = 0. The scheme only sees differences of u, so the
  // residual eps k + [eps w + H^ - (a + eta^2) Lap_h w] never differences the
  // O(1/eps) constant.
  Scalar k = w.mean();
  w.array() -= k;

  SolveReport<Scalar> rep{GridField<Scalar>(grid), GridField<Scalar>(grid)};
  rep.eps = params.eps;
  rep.eta = params.eta;

  auto residual = [&](const Vector<Scalar>& ww, Scalar kk) {
    Vector<Scalar> r = scheme_residual(prob, ww);
    r.array() += params.eps * kk;
    return r;
  };

  Eigen::SparseLU<Eigen::SparseMatrix<Scalar>> lu;
  bool analyzed = false;
  bool converged = false;
  for (int it = 0; it <= params.max_steps; ++it) {
    const Vector<Scalar> r = residual(w, k);
    detail::check_finite(r, rep.residual_history);
    const Scalar res = r.cwiseAbs().maxCoeff();
    rep.residual_history.push_back(double(res));
    rep.iterations = it;
    rep.final_residual = res;
    rep.residual_threshold = std::max(params.tol_res, detail::roundoff_floor(prob, w));
    if (res <= rep.residual_threshold) {
      converged = true;
      break;
    }
    if (it == params.max_steps) break;
    Vector<Scalar> step;
    if (params.method == SolveMethod::PseudoTime) {
      step = detail::pseudo_time_step(prob, w, params.cfl_safety) * r;
    } else {
      const auto op = linearize(prob, w);
      if (!analyzed) {
        lu.analyzePattern(op.matrix);
        analyzed = true;
      }
      lu.factorize(op.matrix);
      if (lu.info() != Eigen::Success)
        throw ConvergenceError("not converged: Newton linear system is singular", rep.residual_history);
      step = lu.solve(r);
    }
    const Scalar shift = step.mean();
    w -= step;
    w.array() += shift;
    k -= shift;
    detail::check_finite(w, rep.residual_history);
  }
  if (!converged)
    throw ConvergenceError("not converged after " + std::to_string(params.max_steps) + " steps",
                           rep.residual_history);

  rep.fluctuation.values = w;
  rep.offset = k;
  rep.solution.values = w.array() + k;
  rep.c_estimate = -params.eps * k;
  rep.c_at_x0 = -params.eps * (k + w(params.x0_node));
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

template <typename Scalar = double>
struct ErgodicSolution {
  GridField<Scalar> corrector;  // normalized by corrector(x0) = 0
  Scalar c{0};
  int iterations = 0;
  Scalar final_residual{0};
};

/// Discrete cell problem H^(x, D^-u, D^+u) - (a + eta^2) Lap_h u = c with
/// u(x0) = 0, solved by damped Newton on the bordered system. The warm start
/// is a discounted solution (its eps-scaled values give the initial c).
template <typename Scalar>
ErgodicSolution<Scalar> solve_ergodic(const HamiltonianModel<Scalar>& model,
                                      const DiffusionCoefficient<Scalar>& diff,
                                      const TorusGrid& grid, Scalar eta,
                                      const SolveReport<Scalar>& warm_start,
                                      Eigen::Index x0_node = 0, Scalar tol_res = Scalar(1e-10),
                                      int max_steps = 100) {
  const auto prob = make_problem(model, diff, grid, Scalar(0), eta);
  const Eigen::Index n = grid.size();
  const Scalar eps0 = warm_start.eps;

  const Vector<Scalar>& w0 = warm_start.fluctuation.values;
  Vector<Scalar> u = w0.array() - w0(x0_node);
  Scalar c = -eps0 * (warm_start.offset + w0(x0_node));

  auto residual = [&](const Vector<Scalar>& uu, Scalar cc) {
    Vector<Scalar> r(n + 1);
    r.head(n) = scheme_residual(prob, uu).array() - cc;
    r(n) = uu(x0_node);
    return r;
  };

  Eigen::SparseLU<Eigen::SparseMatrix<Scalar>> lu;
  bool analyzed = false;
  std::vector<double> history;
  Vector<Scalar> r = residual(u, c);
  Scalar res = r.cwiseAbs().maxCoeff();
  for (int it = 0; it <= max_steps; ++it) {
    history.push_back(double(res));
    if (!r.allFinite()) throw ConvergenceError("unstable: ergodic iterate produced NaN/Inf", history);
    if (res <= std::max(tol_res, detail::roundoff_floor(prob, u))) {
      ErgodicSolution<Scalar> sol{GridField<Scalar>(grid, u), c, it, res};
      return sol;
    }
    if (it == max_steps) break;
    const auto op = linearize(prob, u);
    std::vector<Eigen::Triplet<Scalar>> trip;
    trip.reserve(op.matrix.nonZeros() + 2 * n + 1);
    for (int k = 0; k < op.matrix.outerSize(); ++k)
      for (typename Eigen::SparseMatrix<Scalar>::InnerIterator itr(op.matrix, k); itr; ++itr)
        trip.emplace_back(itr.row(), itr.col(), itr.value());
    for (Eigen::Index i = 0; i < n; ++i) trip.emplace_back(i, n, Scalar(-1));
    trip.emplace_back(n, x0_node, Scalar(1));
    Eigen::SparseMatrix<Scalar> jac(n + 1, n + 1);
    jac.setFromTriplets(trip.begin(), trip.end());
    jac.makeCompressed();
    if (!analyzed) {
      lu.analyzePattern(jac);
      analyzed = true;
    }
    lu.factorize(jac);
    if (lu.info() != Eigen::Success)
      throw ConvergenceError("not converged: ergodic Jacobian is singular", history);
    const Vector<Scalar> step = lu.solve(r);

    Scalar t = 1;
    for (int ls = 0; ls < 40; ++ls, t /= Scalar(2)) {
      Vector<Scalar> ut = u - t * step.head(n);
      const Scalar ct = c - t * step(n);
      Vector<Scalar> rt = residual(ut, ct);
      const Scalar rest = rt.cwiseAbs().maxCoeff();
      if (rest < res || ls == 39) {
        u = std::move(ut);
        c = ct;
        r = std::move(rt);
        res = rest;
        break;
      }
    }
  }
  throw ConvergenceError("not converged: ergodic Newton", history);
}

/// First-order Richardson limit of the values c(eps) along a decreasing eps
/// sequence, using the last two entries.
template <typename Scalar>
Scalar richardson_first_order(Scalar eps_coarse, Scalar c_coarse, Scalar eps_fine, Scalar c_fine) {
  return (eps_coarse * c_fine - eps_fine * c_coarse) / (eps_coarse - eps_fine);
}

template <typename Scalar = double>
struct ErgodicEstimateRow {
  Scalar eps;
  Scalar c_eps;         // -eps mean(u^eps)
  Scalar extrapolated;  // Richardson with the previous row (NaN on the first)
  int iterations;
};

template <typename Scalar = double>
struct ErgodicEstimate {
  Scalar c{0};
  std::vector<ErgodicEstimateRow<Scalar>> table;
  std::vector<SolveReport<Scalar>> reports;
};

namespace detail {

/// Initial guess for eps_next from a solution at eps_prev: keep the bounded
/// part u + c/eps and rescale the divergent constant.
template <typename Scalar>
GridField<Scalar> rescaled_guess(const SolveReport<Scalar>& prev, Scalar eps_next) {
  GridField<Scalar> g = prev.fluctuation;
  g.values.array() += prev.offset * prev.eps / eps_next;
  return g;
}

template <typename Scalar>
void require_decreasing(const std::vector<Scalar>& eps, std::size_t min_len, const char* who) {
  if (eps.size() < min_len)
    throw DomainError(std::string(who) + ": eps sequence needs at least " + std::to_string(min_len) +
                      " entries");
  for (std::size_t k = 0; k < eps.size(); ++k) {
    if (!(eps[k] > Scalar(0))) throw DomainError(std::string(who) + ": eps must be > 0");
    if (k > 0 && !(eps[k] < eps[k - 1]))
      throw DomainError(std::string(who) + ": eps sequence must be strictly decreasing");
  }
}

}  // namespace detail

template <typename Scalar>
ErgodicEstimate<Scalar> estimate_ergodic_constant(const HamiltonianModel<Scalar>& model,
                                                  const DiffusionCoefficient<Scalar>& diff,
                                                  const TorusGrid& grid,
                                                  const std::vector<Scalar>& eps_sequence, Scalar eta,
                                                  SchemeParams<Scalar> base = {}) {
  detail::require_decreasing(eps_sequence, 3, "estimate_ergodic_constant");
  ErgodicEstimate<Scalar> out;
  for (std::size_t k = 0; k < eps_sequence.size(); ++k) {
    base.eps = eps_sequence[k];
    base.eta = eta;
    std::optional<GridField<Scalar>> guess;
    if (k > 0) guess = detail::rescaled_guess(out.reports.back(), eps_sequence[k]);
    out.reports.push_back(solve_discounted(model, diff, grid, base, guess ? &*guess : nullptr));
    const auto& rep = out.reports.back();
    ErgodicEstimateRow<Scalar> row{eps_sequence[k], rep.c_estimate,
                                   std::numeric_limits<Scalar>::quiet_NaN(), rep.iterations};
    if (k > 0) {
      const auto& prev = out.table.back();
      row.extrapolated = richardson_first_order(prev.eps, prev.c_eps, row.eps, row.c_eps);
    }
    out.table.push_back(row);
  }
  out.c = out.table.back().extrapolated;
  return out;
}

/// eta as a function of eps along a sweep.
struct EtaRule {
  enum class Kind { Fixed, EpsSquared, EpsLinear };
  Kind kind = Kind::EpsSquared;
  double value = 1.0;  // the fixed eta, or the coefficient of eps^2 / eps

  template <typename Scalar>
  Scalar operator()(Scalar eps) const {
    switch (kind) {
      case Kind::Fixed: return Scalar(value);
      case Kind::EpsLinear: return Scalar(value) * eps;
      case Kind::EpsSquared: break;
    }
    return Scalar(value) * eps * eps;
  }

  static EtaRule fixed(double eta) { return {Kind::Fixed, eta}; }
  static EtaRule eps_squared(double coeff = 1.0) { return {Kind::EpsSquared, coeff}; }
  static EtaRule eps_linear(double coeff) { return {Kind::EpsLinear, coeff}; }
};

inline const char* to_string(EtaRule::Kind k) {
  switch (k) {
    case EtaRule::Kind::Fixed: return "fixed";
    case EtaRule::Kind::EpsLinear: return "eps_linear";
    case EtaRule::Kind::EpsSquared: break;
  }
  return "eps2";
}

template <typename Scalar = double>
struct SelectionLevel {
  Scalar eps;
  Scalar eta;
  Scalar ergodic_constant;       // discrete c at this eta
  GridField<Scalar> normalized;  // u^{eps,eta} + c/eps
  SolveReport<Scalar> report;
};

template <typename Scalar = double>
struct SelectionResult {
  std::vector<SelectionLevel<Scalar>> levels;
  std::vector<Scalar> cauchy;  // sup-norm differences of consecutive normalized levels
  GridField<Scalar> u0;        // normalized solution at the smallest eps
  bool converged = false;      // last two Cauchy differences decrease
  bool trend = false;          // last three Cauchy differences decrease
};

/// Runs the halving eps sweep, normalizes each u^{eps,eta} by the discrete
/// ergodic constant at its eta (so the c = 0 convention holds level by
/// level), and tabulates sup-norm Cauchy differences. Throws
/// ConvergenceError("no convergence trend") when the last three Cauchy
/// differences do not decrease.
template <typename Scalar>
SelectionResult<Scalar> selection_limit(const HamiltonianModel<Scalar>& model,
                                        const DiffusionCoefficient<Scalar>& diff,
                                        const TorusGrid& grid, const std::vector<Scalar>& eps_sequence,
                                        const EtaRule& eta_rule, SchemeParams<Scalar> base = {},
                                        bool require_trend = true) {
  detail::require_decreasing(eps_sequence, 2, "selection_limit");
  for (std::size_t k = 1; k < eps_sequence.size(); ++k) {
    const Scalar ratio = eps_sequence[k - 1] / eps_sequence[k];
    if (std::abs(ratio - Scalar(2)) > Scalar(1e-9))
      throw DomainError("selection_limit: eps sequence must halve at each level");
  }

  SelectionResult<Scalar> out{{}, {}, GridField<Scalar>(grid)};
  for (std::size_t k = 0; k < eps_sequence.size(); ++k) {
    base.eps = eps_sequence[k];
    base.eta = eta_rule(eps_sequence[k]);
    std::optional<GridField<Scalar>> guess;
    if (k > 0) guess = detail::rescaled_guess(out.levels.back().report, eps_sequence[k]);
    auto rep = solve_discounted(model, diff, grid, base, guess ? &*guess : nullptr);
    const auto erg = solve_ergodic(model, diff, grid, base.eta, rep, base.x0_node);
    GridField<Scalar> normalized = rep.fluctuation;
    normalized.values.array() += rep.offset + erg.c / base.eps;
    out.levels.push_back({base.eps, base.eta, erg.c, std::move(normalized), std::move(rep)});
    if (k > 0) {
      const auto& a = out.levels[k - 1].normalized.values;
      const auto& b = out.levels[k].normalized.values;
      out.cauchy.push_back((a - b).cwiseAbs().maxCoeff());
    }
  }
  out.u0 = out.levels.back().normalized;

  const auto& d = out.cauchy;
  const Scalar negligible = Scalar(1e-12);
  const bool all_zero = std::all_of(d.begin(), d.end(), [&](Scalar x) { return x <= negligible; });
  const std::size_t m = d.size();
  out.converged = all_zero || (m >= 2 && d[m - 1] < d[m - 2]);
  out.trend = all_zero || (m >= 3 && d[m - 1] < d[m - 2] && d[m - 2] < d[m - 3]);
  if (require_trend && !out.trend) {
    std::vector<double> hist(d.begin(), d.end());
    throw ConvergenceError("no convergence trend", hist);
  }
  return out;
}

}  // namespace hjsel
