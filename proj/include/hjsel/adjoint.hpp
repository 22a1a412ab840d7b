#pragma once

#include <cmath>
#include <vector>

#include <Eigen/SparseLU>

#include "hjsel/scheme.hpp"
#include "hjsel/solver.hpp"
#include "hjsel/trig_basis.hpp"

namespace hjsel {

/// Linearization of the scheme at a converged solution u. Throws
/// SignViolation if the M-matrix sign pattern fails.
template <typename Scalar>
LinearizedOperator<Scalar> assemble_linearization(const HamiltonianModel<Scalar>& model,
                                                  const DiffusionCoefficient<Scalar>& diff,
                                                  const TorusGrid& grid, const GridField<Scalar>& u,
                                                  const SchemeParams<Scalar>& params) {
  if (!(u.grid == grid)) throw DomainError("assemble_linearization: u lives on another grid");
  const auto prob = make_problem(model, diff, grid, params.eps, params.eta);
  auto op = linearize(prob, u.values);
  for (int k = 0; k < op.matrix.outerSize(); ++k) {
    for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(op.matrix, k); it; ++it) {
      const bool diagonal = it.row() == it.col();
      if ((diagonal && !(it.value() > Scalar(0))) || (!diagonal && it.value() > Scalar(0))) {
        throw SignViolation("sign violation: entry (" + std::to_string(it.row()) + ", " +
                            std::to_string(it.col()) + ") = " + std::to_string(double(it.value())));
      }
    }
  }
  return op;
}

template <typename Scalar = double>
struct AdjointDensity {
  GridField<Scalar> theta;
  Eigen::Index source = 0;
  Scalar eps{0};
  Scalar eta{0};
  double relative_residual = 0;
  int refinement_steps = 0;

  Scalar mass() const { return integrate(theta); }
};

namespace detail {

/// Transposed operator assembled in long double from the stencil
/// coefficients, so that its column sums equal eps to extended precision.
template <typename Scalar>
Eigen::SparseMatrix<long double> transpose_extended(const LinearizedOperator<Scalar>& op) {
  using LD = long double;
  const auto& g = op.grid;
  const LD inv_h = LD(g.nodes_per_dim());
  const LD inv_h2 = inv_h * inv_h;
  std::vector<Eigen::Triplet<LD>> trip;
  trip.reserve(static_cast<std::size_t>(g.size()) * (1 + 2 * g.dim()));
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const LD dif = LD(op.diffusion(i));
    LD diag = LD(op.eps);
    for (int d = 0; d < g.dim(); ++d) {
      const LD bm = LD(op.b_minus[d](i));
      const LD bp = LD(op.b_plus[d](i));
      diag += (bm - bp) * inv_h + LD(2) * dif * inv_h2;
      trip.emplace_back(g.shifted(i, d, -1), i, -bm * inv_h - dif * inv_h2);
      trip.emplace_back(g.shifted(i, d, 1), i, bp * inv_h - dif * inv_h2);
    }
    trip.emplace_back(i, i, diag);
  }
  Eigen::SparseMatrix<LD> m(g.size(), g.size());
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();
  return m;
}

}  // namespace detail

/// Solves L^T theta = (eps / h^n) e_{x0}. The transposed system is factored
/// once in double precision and refined with residuals evaluated in long
/// double; the mass identity sum theta h^n = 1 then holds to the refined
/// residual. Throws ConvergenceError("solver stagnation") if the relative
/// residual stays above tol.
template <typename Scalar>
AdjointDensity<Scalar> solve_adjoint(const LinearizedOperator<Scalar>& op, Eigen::Index x0_node,
                                     double tol = 1e-12, int max_refinements = 12) {
  using LD = long double;
  const auto& g = op.grid;
  if (x0_node < 0 || x0_node >= g.size()) throw DomainError("solve_adjoint: x0 node out of range");

  const Eigen::SparseMatrix<LD> lt = detail::transpose_extended(op);
  const Eigen::SparseMatrix<double> lt_d = lt.template cast<double>();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(lt_d);
  if (lu.info() != Eigen::Success) throw ConvergenceError("solver stagnation: factorization failed");

  Vector<LD> rhs = Vector<LD>::Zero(g.size());
  rhs(x0_node) = LD(op.eps) / g.template cell_volume<LD>();
  const LD rhs_norm = rhs.cwiseAbs().maxCoeff();

  Vector<LD> theta = Vector<LD>::Zero(g.size());
  Vector<LD> r = rhs;
  std::vector<double> history;
  double rel = 1;
  double prev = std::numeric_limits<double>::infinity();
  int steps = 0;
  for (; steps < max_refinements; ++steps) {
    const Eigen::VectorXd delta = lu.solve(r.template cast<double>());
    theta += delta.template cast<LD>();
    r = rhs - lt * theta;
    rel = double(r.cwiseAbs().maxCoeff() / rhs_norm);
    history.push_back(rel);
    // Keep refining while it still pays off, well past tol.
    if (rel <= tol * 1e-4 || (rel <= tol && rel > 0.5 * prev)) break;
    prev = rel;
  }
  if (!(rel <= tol)) throw ConvergenceError("solver stagnation", history);

  AdjointDensity<Scalar> out{GridField<Scalar>(g, theta.template cast<Scalar>()), x0_node, op.eps};
  out.relative_residual = rel;
  out.refinement_steps = steps + 1;
  return out;
}

/// |<L f, g> - <f, L^T g>| relative to ||L||_inf ||f||_1 ||g||_inf, using the
/// assembled matrix.
template <typename Scalar>
Scalar transpose_identity_gap(const LinearizedOperator<Scalar>& op, const Vector<Scalar>& f,
                              const Vector<Scalar>& g) {
  const Scalar lhs = (op.matrix * f).dot(g);
  const Scalar rhs = f.dot(op.matrix.transpose() * g);
  Scalar norm_l = 0;
  for (int k = 0; k < op.matrix.outerSize(); ++k)
    for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(op.matrix, k); it; ++it)
      norm_l = std::max(norm_l, std::abs(it.value()));
  const Scalar scale = Scalar(3) * norm_l * f.cwiseAbs().sum() * g.cwiseAbs().maxCoeff();
  return std::abs(lhs - rhs) / (scale > Scalar(0) ? scale : Scalar(1));
}

/// EO transport velocity b_i and the momentum g_i with D_pH(x_i, g_i) = b_i.
template <typename Scalar = double>
struct UpwindSelection {
  std::vector<Vector<Scalar>> velocity;  // per axis
  std::vector<Vector<Scalar>> momentum;  // per axis

  Point<Scalar> velocity_at(Eigen::Index i) const {
    Point<Scalar> v(velocity.size());
    for (std::size_t d = 0; d < velocity.size(); ++d) v(d) = velocity[d](i);
    return v;
  }
  Point<Scalar> momentum_at(Eigen::Index i) const {
    Point<Scalar> p(momentum.size());
    for (std::size_t d = 0; d < momentum.size(); ++d) p(d) = momentum[d](i);
    return p;
  }
};

template <typename Scalar>
UpwindSelection<Scalar> upwind_selection(const HamiltonianModel<Scalar>& model,
                                         const GridField<Scalar>& u) {
  const auto& g = u.grid;
  const int dim = g.dim();
  UpwindSelection<Scalar> sel;
  for (int d = 0; d < dim; ++d) {
    sel.velocity.push_back(Vector<Scalar>::Zero(g.size()));
    sel.momentum.push_back(Vector<Scalar>::Zero(g.size()));
  }
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    std::array<Scalar, 2> pm, pp;
    one_sided(g, u.values, i, pm, pp);
    const auto fl = upwind_flux(model, Scalar(0), pm, pp, dim);
    Point<Scalar> b(dim);
    for (int d = 0; d < dim; ++d) b(d) = fl.velocity(d);
    const Point<Scalar> p = momentum_of_velocity(model, b);
    for (int d = 0; d < dim; ++d) {
      sel.velocity[d](i) = b(d);
      sel.momentum[d](i) = p(d);
    }
  }
  return sel;
}

/// |eps u(x0) - sum_i (D_pH(x_i,g_i).g_i - H(x_i,g_i)) theta_i h^n|.
template <typename Scalar>
Scalar duality_check(const HamiltonianModel<Scalar>& model, const TorusGrid& grid,
                     const GridField<Scalar>& u, const AdjointDensity<Scalar>& theta,
                     Eigen::Index x0_node) {
  if (!(u.grid == grid) || !(theta.theta.grid == grid))
    throw DomainError("duality_check: fields live on different grids");
  const auto sel = upwind_selection(model, u);
  const Scalar vol = grid.template cell_volume<Scalar>();
  Scalar pairing = 0;
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const Point<Scalar> x = grid.template coords<Scalar>(i);
    const Point<Scalar> p = sel.momentum_at(i);
    const Scalar integrand = grad_p(model, x, p).dot(p) - eval_h(model, x, p);
    pairing += integrand * theta.theta[i] * vol;
  }
  return std::abs(theta.eps * u[x0_node] - pairing);
}

/// Pre-limit holonomy defect of the adjoint density for each basis function:
/// sum (b.Dphi - (a + eta^2) Lap phi) theta h^n - eps phi(x0) + eps sum phi theta h^n,
/// with exact derivatives of phi.
template <typename Scalar>
std::vector<Scalar> adjoint_holonomy_defects(const LinearizedOperator<Scalar>& op,
                                             const AdjointDensity<Scalar>& theta,
                                             const TrigBasis<Scalar>& basis) {
  const auto& g = op.grid;
  const Scalar vol = g.template cell_volume<Scalar>();
  const Point<Scalar> x0 = g.template coords<Scalar>(theta.source);
  std::vector<Scalar> out;
  for (std::size_t m = 0; m < basis.size(); ++m) {
    Scalar s = 0, mean_phi = 0;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      const Point<Scalar> x = g.template coords<Scalar>(i);
      const Point<Scalar> dphi = basis.gradient(m, x);
      Scalar transport = 0;
      for (int d = 0; d < g.dim(); ++d) transport += (op.b_minus[d](i) + op.b_plus[d](i)) * dphi(d);
      s += (transport - op.diffusion(i) * basis.laplacian(m, x)) * theta.theta[i] * vol;
      mean_phi += basis.value(m, x) * theta.theta[i] * vol;
    }
    out.push_back(s - op.eps * basis.value(m, x0) + op.eps * mean_phi);
  }
  return out;
}

}  // namespace hjsel
