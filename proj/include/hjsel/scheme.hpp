#pragma once

#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Sparse>

#include "hjsel/grid.hpp"
#include "hjsel/hamiltonian.hpp"

namespace hjsel {

/// Monotone upwind flux value and its partial derivatives at one node.
template <typename Scalar>
struct UpwindFlux {
  Scalar value{0};
  std::array<Scalar, 2> d_minus{0, 0};  // dH^/dp^-_d >= 0
  std::array<Scalar, 2> d_plus{0, 0};   // dH^/dp^+_d <= 0

  /// EO transport velocity per axis.
  Scalar velocity(int d) const { return d_minus[d] + d_plus[d]; }
};

/// Engquist-Osher flux for H = F(|p|^2) + V, whose per-axis minimizer is
/// p* = 0. Each axis contributes the upwind one-sided magnitudes
/// max(p^-_d, 0) and min(p^+_d, 0); they are combined through F:
///
///   H^(x, p^-, p^+) = F( sum_d max(p^-_d,0)^2 + min(p^+_d,0)^2 ) + V(x).
///
/// For the quadratic family this is exactly the separable EO flux
/// H(max(p^-,0)) + H(min(p^+,0)) - H(0) on each axis. The flux is C^1,
/// convex, consistent, non-decreasing in p^- and non-increasing in p^+.
template <typename Scalar>
UpwindFlux<Scalar> upwind_flux(const HamiltonianModel<Scalar>& model, Scalar potential_value,
                               const std::array<Scalar, 2>& p_minus,
                               const std::array<Scalar, 2>& p_plus, int dim) {
  std::array<Scalar, 2> fwd{0, 0}, bwd{0, 0};
  Scalar s = 0;
  for (int d = 0; d < dim; ++d) {
    fwd[d] = std::max(p_minus[d], Scalar(0));
    bwd[d] = std::min(p_plus[d], Scalar(0));
    s += fwd[d] * fwd[d] + bwd[d] * bwd[d];
  }
  UpwindFlux<Scalar> out;
  out.value = model.kinetic(s) + potential_value;
  const Scalar slope = Scalar(2) * model.kinetic_slope(s);
  for (int d = 0; d < dim; ++d) {
    out.d_minus[d] = slope * fwd[d];
    out.d_plus[d] = slope * bwd[d];
  }
  return out;
}

template <typename Scalar>
Scalar numerical_hamiltonian(const HamiltonianModel<Scalar>& model, const Point<Scalar>& x,
                             const Point<Scalar>& p_minus, const Point<Scalar>& p_plus) {
  const int dim = static_cast<int>(x.size());
  std::array<Scalar, 2> pm{0, 0}, pp{0, 0};
  for (int d = 0; d < dim; ++d) {
    pm[d] = p_minus(d);
    pp[d] = p_plus(d);
  }
  return upwind_flux(model, model.potential.value(x), pm, pp, dim).value;
}

/// Problem data sampled on a grid, with the discount and regularization.
template <typename Scalar>
struct DiscreteProblem {
  TorusGrid grid;
  HamiltonianModel<Scalar> model;
  Vector<Scalar> potential;    // V(x_i)
  Vector<Scalar> diffusion;    // a(x_i)
  Scalar eps{0};
  Scalar eta{0};

  Scalar total_diffusion(Eigen::Index i) const { return diffusion(i) + eta * eta; }
};

template <typename Scalar>
DiscreteProblem<Scalar> make_problem(const HamiltonianModel<Scalar>& model,
                                     const DiffusionCoefficient<Scalar>& diff, const TorusGrid& grid,
                                     Scalar eps, Scalar eta) {
  if (model.dim() != grid.dim() || diff.dim() != grid.dim())
    throw DomainError("make_problem: dimension mismatch between problem data and grid");
  DiscreteProblem<Scalar> p{grid, model, sample(grid, model.potential).values,
                            sample(grid, diff.a).values, eps, eta};
  return p;
}

/// One-sided differences of u at node i.
template <typename Scalar>
void one_sided(const TorusGrid& g, const Vector<Scalar>& u, Eigen::Index i,
               std::array<Scalar, 2>& p_minus, std::array<Scalar, 2>& p_plus) {
  const Scalar inv_h = Scalar(g.nodes_per_dim());
  p_minus = {0, 0};
  p_plus = {0, 0};
  for (int d = 0; d < g.dim(); ++d) {
    p_minus[d] = (u(i) - u(g.shifted(i, d, -1))) * inv_h;
    p_plus[d] = (u(g.shifted(i, d, 1)) - u(i)) * inv_h;
  }
}

template <typename Scalar>
UpwindFlux<Scalar> node_flux(const DiscreteProblem<Scalar>& prob, const Vector<Scalar>& u,
                             Eigen::Index i) {
  std::array<Scalar, 2> pm, pp;
  one_sided(prob.grid, u, i, pm, pp);
  return upwind_flux(prob.model, prob.potential(i), pm, pp, prob.grid.dim());
}

/// R(u)_i = eps u_i + H^(x_i, D^-u, D^+u) - (a_i + eta^2) Lap_h u_i.
template <typename Scalar>
Vector<Scalar> scheme_residual(const DiscreteProblem<Scalar>& prob, const Vector<Scalar>& u) {
  const auto& g = prob.grid;
  const Scalar inv_h2 = Scalar(g.nodes_per_dim()) * Scalar(g.nodes_per_dim());
  Vector<Scalar> r(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    Scalar lap = 0;
    for (int d = 0; d < g.dim(); ++d)
      lap += (u(g.shifted(i, d, 1)) - u(i)) - (u(i) - u(g.shifted(i, d, -1)));
    r(i) = prob.eps * u(i) + node_flux(prob, u, i).value - prob.total_diffusion(i) * lap * inv_h2;
  }
  return r;
}

/// Linearization of the scheme at u:
///   L v = eps v + sum_d [ b^-_d D^-_d v + b^+_d D^+_d v ] - (a + eta^2) Lap_h v,
/// kept both as stencil coefficients (apply) and as a sparse matrix.
template <typename Scalar>
struct LinearizedOperator {
  TorusGrid grid;
  Scalar eps{0};
  Vector<Scalar> diffusion;                 // a + eta^2 per node
  std::array<Vector<Scalar>, 2> b_minus;    // dH^/dp^-_d per node
  std::array<Vector<Scalar>, 2> b_plus;     // dH^/dp^+_d per node
  Eigen::SparseMatrix<Scalar> matrix;

  Eigen::Index size() const { return grid.size(); }

  /// Stencil application; differences annihilate constants exactly.
  Vector<Scalar> apply(const Vector<Scalar>& v) const {
    const Scalar inv_h = Scalar(grid.nodes_per_dim());
    const Scalar inv_h2 = inv_h * inv_h;
    Vector<Scalar> out(grid.size());
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
      Scalar s = eps * v(i);
      for (int d = 0; d < grid.dim(); ++d) {
        const Scalar back = v(i) - v(grid.shifted(i, d, -1));
        const Scalar fwd = v(grid.shifted(i, d, 1)) - v(i);
        s += (b_minus[d](i) * back + b_plus[d](i) * fwd) * inv_h;
        s -= diffusion(i) * (fwd - back) * inv_h2;
      }
      out(i) = s;
    }
    return out;
  }

  /// Transport velocity b = b^- + b^+ on axis d.
  Vector<Scalar> velocity(int d) const { return b_minus[d] + b_plus[d]; }
};

template <typename Scalar>
LinearizedOperator<Scalar> linearize(const DiscreteProblem<Scalar>& prob, const Vector<Scalar>& u) {
  const auto& g = prob.grid;
  const Eigen::Index n = g.size();
  const Scalar inv_h = Scalar(g.nodes_per_dim());
  const Scalar inv_h2 = inv_h * inv_h;

  LinearizedOperator<Scalar> op{g, prob.eps};
  op.diffusion.resize(n);
  for (int d = 0; d < 2; ++d) {
    op.b_minus[d] = Vector<Scalar>::Zero(n);
    op.b_plus[d] = Vector<Scalar>::Zero(n);
  }
  std::vector<Eigen::Triplet<Scalar>> trip;
  trip.reserve(static_cast<std::size_t>(n) * (1 + 2 * g.dim()));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto fl = node_flux(prob, u, i);
    const Scalar dif = prob.total_diffusion(i);
    op.diffusion(i) = dif;
    Scalar diag = prob.eps;
    for (int d = 0; d < g.dim(); ++d) {
      op.b_minus[d](i) = fl.d_minus[d];
      op.b_plus[d](i) = fl.d_plus[d];
      const Scalar lower = -fl.d_minus[d] * inv_h - dif * inv_h2;
      const Scalar upper = fl.d_plus[d] * inv_h - dif * inv_h2;
      diag += (fl.d_minus[d] - fl.d_plus[d]) * inv_h + Scalar(2) * dif * inv_h2;
      trip.emplace_back(i, g.shifted(i, d, -1), lower);
      trip.emplace_back(i, g.shifted(i, d, 1), upper);
    }
    trip.emplace_back(i, i, diag);
  }
  op.matrix.resize(n, n);
  op.matrix.setFromTriplets(trip.begin(), trip.end());
  op.matrix.makeCompressed();
  return op;
}

/// Largest one-sided difference magnitude over all nodes and axes.
template <typename Scalar>
Scalar max_one_sided_gradient(const GridField<Scalar>& u) {
  Scalar m = 0;
  for (int d = 0; d < u.grid.dim(); ++d) {
    m = std::max(m, diff_forward(u, d).sup_norm());
  }
  return m;
}

}  // namespace hjsel
