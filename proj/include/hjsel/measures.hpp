#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "hjsel/adjoint.hpp"
#include "hjsel/trig_basis.hpp"

namespace hjsel {

enum class MeasureSpace { Momentum, Velocity };

inline const char* to_string(MeasureSpace s) {
  return s == MeasureSpace::Momentum ? "momentum" : "velocity";
}

template <typename Scalar = double>
struct Atom {
  Eigen::Index node = 0;
  Point<Scalar> position;
  Point<Scalar> vector;  // momentum or velocity, per the measure's space
  Scalar weight{0};
};

/// Weighted atoms on T^n x R^n.
template <typename Scalar = double>
struct DiscreteMeasure {
  std::vector<Atom<Scalar>> atoms;
  MeasureSpace space = MeasureSpace::Momentum;

  Scalar total_weight() const {
    Scalar s = 0;
    for (const auto& a : atoms) s += a.weight;
    return s;
  }
  Scalar min_weight() const {
    Scalar m = std::numeric_limits<Scalar>::infinity();
    for (const auto& a : atoms) m = std::min(m, a.weight);
    return m;
  }
  bool is_probability(Scalar tol = Scalar(1e-10)) const {
    return !atoms.empty() && min_weight() >= Scalar(0) && std::abs(total_weight() - 1) <= tol;
  }

  /// Point mass at (x, vector).
  static DiscreteMeasure dirac(const Point<Scalar>& x, const Point<Scalar>& vec, MeasureSpace space,
                               Eigen::Index node = 0) {
    return {{{node, x, vec, Scalar(1)}}, space};
  }
};

/// nu: one atom per node at (x_i, g_i) with weight theta_i h^n, g the
/// momentum whose velocity is the EO transport velocity of u at x_i.
template <typename Scalar>
DiscreteMeasure<Scalar> build_nu(const GridField<Scalar>& u, const AdjointDensity<Scalar>& theta,
                                 const HamiltonianModel<Scalar>& model) {
  if (!(u.grid == theta.theta.grid)) throw DomainError("build_nu: u and theta live on different grids");
  const auto& g = u.grid;
  const auto sel = upwind_selection(model, u);
  const Scalar vol = g.template cell_volume<Scalar>();
  DiscreteMeasure<Scalar> nu;
  nu.space = MeasureSpace::Momentum;
  nu.atoms.reserve(static_cast<std::size_t>(g.size()));
  for (Eigen::Index i = 0; i < g.size(); ++i)
    nu.atoms.push_back({i, g.template coords<Scalar>(i), sel.momentum_at(i), theta.theta[i] * vol});
  return nu;
}

/// mu = Phi^{-1}_# nu: each momentum p becomes v = D_pH(x, p).
template <typename Scalar>
DiscreteMeasure<Scalar> pushforward_to_velocity(const DiscreteMeasure<Scalar>& nu,
                                                const HamiltonianModel<Scalar>& model) {
  if (nu.space != MeasureSpace::Momentum)
    throw DomainError("pushforward_to_velocity: measure is not tagged momentum");
  DiscreteMeasure<Scalar> mu = nu;
  mu.space = MeasureSpace::Velocity;
  for (auto& a : mu.atoms) a.vector = grad_p(model, a.position, a.vector);
  return mu;
}

namespace detail {
template <typename Scalar>
void require_velocity(const DiscreteMeasure<Scalar>& mu, const char* who) {
  if (mu.space != MeasureSpace::Velocity)
    throw DomainError(std::string(who) + ": measure is not tagged velocity");
}
}  // namespace detail

/// <L, mu>.
template <typename Scalar>
Scalar action(const DiscreteMeasure<Scalar>& mu, const HamiltonianModel<Scalar>& model) {
  detail::require_velocity(mu, "action");
  Scalar s = 0;
  for (const auto& a : mu.atoms) s += a.weight * lagrangian(model, a.position, a.vector);
  return s;
}

/// Sum w (v.Dphi - a Lap phi) for every basis function.
template <typename Scalar>
std::vector<Scalar> holonomy_residuals(const DiscreteMeasure<Scalar>& mu,
                                       const DiffusionCoefficient<Scalar>& diff,
                                       const TrigBasis<Scalar>& basis) {
  detail::require_velocity(mu, "holonomy_residuals");
  std::vector<Scalar> out(basis.size(), Scalar(0));
  for (std::size_t m = 0; m < basis.size(); ++m) {
    const auto& md = basis.mode(m);
    if (md.k[0] == 0 && md.k[1] == 0) continue;  // constant mode: exactly zero
    Scalar s = 0;
    for (const auto& a : mu.atoms) {
      s += a.weight * (a.vector.dot(basis.gradient(m, a.position)) -
                       diff(a.position) * basis.laplacian(m, a.position));
    }
    out[m] = s;
  }
  return out;
}

template <typename Scalar>
Scalar max_abs(const std::vector<Scalar>& v) {
  Scalar m = 0;
  for (Scalar x : v) m = std::max(m, std::abs(x));
  return m;
}

/// Spatial pairing sum w_i u(x_i). Atoms must sit on nodes of u's grid.
template <typename Scalar>
Scalar key1_check(const GridField<Scalar>& u, const DiscreteMeasure<Scalar>& mu) {
  Scalar s = 0;
  for (const auto& a : mu.atoms) {
    if (a.node < 0 || a.node >= u.size()) throw DomainError("key1_check: atom node outside the grid");
    s += a.weight * u[a.node];
  }
  return s;
}

/// A competitor measure for the action minimization with its own holonomy
/// certificate.
template <typename Scalar = double>
struct Competitor {
  std::string name;
  DiscreteMeasure<Scalar> measure;
};

template <typename Scalar = double>
struct CompetitorRow {
  std::string name;
  Scalar action{0};
  Scalar holonomy{0};  // max |residual| over the basis
  Scalar slack{0};
  bool holds = false;  // action(mu) <= action(competitor) + slack
};

template <typename Scalar = double>
struct MinimizationReport {
  Scalar action{0};  // of the candidate mu
  std::vector<CompetitorRow<Scalar>> rows;
  bool passed() const {
    return std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.holds; });
  }
};

/// Checks action(mu) <= action(nu_k) + slack_k for each competitor, where
/// slack_k = slack_constant * (holonomy residual of nu_k). Throws
/// NotHolonomic("competitor not holonomic") when a competitor's residual
/// exceeds holonomy_threshold.
template <typename Scalar>
MinimizationReport<Scalar> minimization_check(const DiscreteMeasure<Scalar>& mu,
                                              const std::vector<Competitor<Scalar>>& competitors,
                                              const HamiltonianModel<Scalar>& model,
                                              const DiffusionCoefficient<Scalar>& diff,
                                              const TrigBasis<Scalar>& basis,
                                              Scalar holonomy_threshold = Scalar(0.05),
                                              Scalar slack_constant = Scalar(1)) {
  MinimizationReport<Scalar> rep;
  rep.action = action(mu, model);
  for (const auto& c : competitors) {
    if (!c.measure.is_probability())
      throw DomainError("minimization_check: competitor '" + c.name + "' is not a probability measure");
    const Scalar hol = max_abs(holonomy_residuals(c.measure, diff, basis));
    if (hol > holonomy_threshold)
      throw NotHolonomic("competitor not holonomic: '" + c.name + "' residual " + std::to_string(double(hol)) +
                         " > " + std::to_string(double(holonomy_threshold)));
    CompetitorRow<Scalar> row{c.name, action(c.measure, model), hol, slack_constant * hol};
    row.holds = rep.action <= row.action + row.slack;
    rep.rows.push_back(row);
  }
  return rep;
}

/// Radius around `center` (torus distance) that holds a given fraction of
/// the weight.
template <typename Scalar>
Scalar weight_quantile_radius(const DiscreteMeasure<Scalar>& m, const Point<Scalar>& center,
                              Scalar fraction) {
  std::vector<std::pair<Scalar, Scalar>> dw;
  dw.reserve(m.atoms.size());
  for (const auto& a : m.atoms) dw.emplace_back(torus_distance(a.position, center), a.weight);
  std::sort(dw.begin(), dw.end());
  const Scalar target = fraction * m.total_weight();
  Scalar acc = 0;
  for (const auto& [d, w] : dw) {
    acc += w;
    if (acc >= target) return d;
  }
  return dw.empty() ? Scalar(0) : dw.back().first;
}

/// Weight within |x - center| <= rx and |vector| <= rv.
template <typename Scalar>
Scalar weight_near(const DiscreteMeasure<Scalar>& m, const Point<Scalar>& center, Scalar rx, Scalar rv) {
  Scalar s = 0;
  for (const auto& a : m.atoms)
    if (torus_distance(a.position, center) <= rx && a.vector.norm() <= rv) s += a.weight;
  return s;
}

template <typename Scalar = double>
struct MeasureDiagnostics {
  Scalar action{0};
  std::vector<Scalar> holonomy;
  Scalar max_holonomy{0};
  Scalar key1{0};
  Point<Scalar> concentration;  // heaviest atom
  Scalar radius50{0};
  Scalar radius90{0};

  bool finite() const {
    bool ok = std::isfinite(double(action)) && std::isfinite(double(key1)) &&
              std::isfinite(double(radius50)) && std::isfinite(double(radius90));
    for (Scalar r : holonomy) ok = ok && std::isfinite(double(r));
    return ok;
  }
};

template <typename Scalar>
MeasureDiagnostics<Scalar> diagnose(const DiscreteMeasure<Scalar>& mu, const HamiltonianModel<Scalar>& model,
                                    const DiffusionCoefficient<Scalar>& diff, const TrigBasis<Scalar>& basis,
                                    const GridField<Scalar>& u_eps) {
  MeasureDiagnostics<Scalar> d;
  d.action = action(mu, model);
  d.holonomy = holonomy_residuals(mu, diff, basis);
  d.max_holonomy = max_abs(d.holonomy);
  d.key1 = key1_check(u_eps, mu);
  const auto heaviest = std::max_element(mu.atoms.begin(), mu.atoms.end(),
                                         [](const auto& a, const auto& b) { return a.weight < b.weight; });
  d.concentration = heaviest != mu.atoms.end() ? heaviest->position : Point<Scalar>::Zero(basis.dim());
  d.radius50 = weight_quantile_radius(mu, d.concentration, Scalar(0.5));
  d.radius90 = weight_quantile_radius(mu, d.concentration, Scalar(0.9));
  return d;
}

}  // namespace hjsel
