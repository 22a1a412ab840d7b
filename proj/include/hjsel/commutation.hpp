#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "hjsel/fit.hpp"
#include "hjsel/hamiltonian.hpp"
#include "hjsel/mollifier.hpp"

namespace hjsel {

namespace detail {

template <typename Scalar>
Point<Scalar> gradient_at(const std::vector<GridField<Scalar>>& grad, Eigen::Index i) {
  Point<Scalar> p(grad.size());
  for (std::size_t d = 0; d < grad.size(); ++d) p(d) = grad[d][i];
  return p;
}

/// H(x, Dw^eta) - a Lap w^eta at every node.
template <typename Scalar>
GridField<Scalar> mollified_operator(const GridField<Scalar>& w, const HamiltonianModel<Scalar>& model,
                                     const DiffusionCoefficient<Scalar>& diff,
                                     const MollifierKernel<Scalar>& kernel) {
  const auto md = mollify_derivatives(w, kernel);
  const auto& g = w.grid;
  GridField<Scalar> out(g);
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const Point<Scalar> x = g.template coords<Scalar>(i);
    out[i] = eval_h(model, x, gradient_at(md.gradient, i)) - diff(x) * md.laplacian[i];
  }
  return out;
}

}  // namespace detail

/// S(x) = H(x, Dw^eta) - a(x) Lap w^eta - c: the smallest S for which w^eta
/// is a subsolution of H = a Lap + c + S.
template <typename Scalar>
GridField<Scalar> subsolution_residual(const GridField<Scalar>& w, const HamiltonianModel<Scalar>& model,
                                       const DiffusionCoefficient<Scalar>& diff, Scalar c,
                                       const MollifierKernel<Scalar>& kernel) {
  auto s = detail::mollified_operator(w, model, diff, kernel);
  s.values.array() -= c;
  return s;
}

/// Discounted form S(x) = eps u(x) + H(x, Dw^eta) - a(x) Lap w^eta with
/// w = u, passing eps u as `discount`.
template <typename Scalar>
GridField<Scalar> subsolution_residual(const GridField<Scalar>& w, const HamiltonianModel<Scalar>& model,
                                       const DiffusionCoefficient<Scalar>& diff,
                                       const GridField<Scalar>& discount,
                                       const MollifierKernel<Scalar>& kernel) {
  if (!(discount.grid == w.grid)) throw DomainError("subsolution_residual: discount field on another grid");
  auto s = detail::mollified_operator(w, model, diff, kernel);
  s.values += discount.values;
  return s;
}

/// Node-wise a.e.-sense residual H(x, D_0 w) - a Lap_h w - c with centered
/// first differences and the standard second difference.
template <typename Scalar>
GridField<Scalar> ae_residual(const GridField<Scalar>& w, const HamiltonianModel<Scalar>& model,
                              const DiffusionCoefficient<Scalar>& diff, Scalar c) {
  const auto& g = w.grid;
  std::vector<GridField<Scalar>> dw;
  for (int d = 0; d < g.dim(); ++d) dw.push_back(diff_central(w, d));
  const auto lap = laplacian(w);
  GridField<Scalar> out(g);
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const Point<Scalar> x = g.template coords<Scalar>(i);
    out[i] = eval_h(model, x, detail::gradient_at(dw, i)) - diff(x) * lap[i] - c;
  }
  return out;
}

template <typename Scalar = double>
struct ResidualSplit {
  GridField<Scalar> r1;  // H(x, Dw^eta) - gamma * H(., D_0 w)
  GridField<Scalar> r2;  // gamma * (a Lap_h w) - a Lap w^eta
};

/// R1 and R2 with the centered a.e. derivatives of the unmollified field.
/// For any c they satisfy S = R1 + R2 + gamma * ae_residual(w, c) exactly.
template <typename Scalar>
ResidualSplit<Scalar> residual_split(const GridField<Scalar>& w, const HamiltonianModel<Scalar>& model,
                                     const DiffusionCoefficient<Scalar>& diff,
                                     const MollifierKernel<Scalar>& kernel) {
  const auto& g = w.grid;
  std::vector<GridField<Scalar>> dw;
  for (int d = 0; d < g.dim(); ++d) dw.push_back(diff_central(w, d));
  const auto lap = laplacian(w);
  GridField<Scalar> h_field(g), alap(g), a_nodes(g);
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const Point<Scalar> x = g.template coords<Scalar>(i);
    h_field[i] = eval_h(model, x, detail::gradient_at(dw, i));
    a_nodes[i] = diff(x);
    alap[i] = a_nodes[i] * lap[i];
  }
  const auto md = mollify_derivatives(w, kernel);
  const auto h_moll = convolve(h_field, kernel);
  const auto alap_moll = convolve(alap, kernel);
  ResidualSplit<Scalar> out{GridField<Scalar>(g), GridField<Scalar>(g)};
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const Point<Scalar> x = g.template coords<Scalar>(i);
    out.r1[i] = eval_h(model, x, detail::gradient_at(md.gradient, i)) - h_moll[i];
    out.r2[i] = alap_moll[i] - a_nodes[i] * md.laplacian[i];
  }
  return out;
}

template <typename Scalar = double>
struct LaplacianBoundRow {
  Scalar eta{0};
  Scalar eta2_lap{0};  // ||eta^2 Lap w^eta||_inf
  Scalar ratio{0};     // eta2_lap / eta
  Scalar apriori{0};   // eta * Lip(w) * sum |lap weight| |y|_1, bounds ratio
};

/// ||eta^2 Lap w^eta||_inf / eta along a kernel ladder, with the a-priori
/// bound implied by the Lipschitz constant of w.
template <typename Scalar>
std::vector<LaplacianBoundRow<Scalar>> eta_sq_laplacian_bound(const GridField<Scalar>& w,
                                                              const std::vector<MollifierKernel<Scalar>>& ladder) {
  const auto& g = w.grid;
  Scalar lip = 0;
  for (int d = 0; d < g.dim(); ++d) lip = std::max(lip, diff_forward(w, d).sup_norm());
  const Scalar h = g.template spacing<Scalar>();
  std::vector<LaplacianBoundRow<Scalar>> rows;
  for (const auto& k : ladder) {
    const Scalar eta = k.radius();
    const auto md = mollify_derivatives(w, k);
    LaplacianBoundRow<Scalar> row;
    row.eta = eta;
    row.eta2_lap = eta * eta * md.laplacian.sup_norm();
    row.ratio = row.eta2_lap / eta;
    Scalar moment = 0;
    for (std::size_t j = 0; j < k.offsets().size(); ++j) {
      const auto& o = k.offsets()[j];
      moment += std::abs(k.laplacian_weights()[j]) * (std::abs(o[0]) + std::abs(o[1])) * h;
    }
    row.apriori = eta * lip * moment;
    rows.push_back(row);
  }
  return rows;
}

template <typename Scalar = double>
struct CommutationRow {
  Scalar eta{0};
  Scalar s_witness{0};  // max(0, max S): sup norm of the smallest admissible S
  Scalar s_sup{0};      // max |S|
  Scalar r1_max{0};     // one-sided max R1
  Scalar r2_sup{0};     // max |R2|
  Scalar eta2_lap{0};   // ||eta^2 Lap w^eta||_inf
  Scalar split_gap{0};  // max |S - R1 - R2 - gamma * r|
};

template <typename Scalar = double>
struct ProbeTrace {
  Point<Scalar> x;
  Eigen::Index node = 0;
  std::vector<Scalar> s;   // S^eta(x) per ladder entry
  std::vector<Scalar> r2;  // R2^eta(x) per ladder entry
};

template <typename Scalar = double>
struct CommutationReport {
  std::vector<CommutationRow<Scalar>> rows;
  std::vector<ProbeTrace<Scalar>> probes;
  double slope = 0;      // log s_witness vs log eta
  double slope_sup = 0;  // log s_sup vs log eta

  bool finite() const {
    for (const auto& r : rows)
      if (!std::isfinite(double(r.s_witness)) || !std::isfinite(double(r.s_sup)) ||
          !std::isfinite(double(r.r1_max)) || !std::isfinite(double(r.r2_sup)))
        return false;
    return true;
  }
};

/// Runs the kernel ladder on w. With `discount` present the discounted form
/// eps u + H(x, Dw^eta) - a Lap w^eta is used; otherwise c is subtracted.
template <typename Scalar>
CommutationReport<Scalar> commutation_ladder(const GridField<Scalar>& w, const HamiltonianModel<Scalar>& model,
                                             const DiffusionCoefficient<Scalar>& diff, Scalar c,
                                             const std::vector<Scalar>& etas,
                                             const std::vector<Point<Scalar>>& probe_points = {},
                                             const GridField<Scalar>* discount = nullptr) {
  const auto& g = w.grid;
  CommutationReport<Scalar> rep;
  for (const auto& p : probe_points) {
    Point<double> pd = p.template cast<double>();
    const Eigen::Index node = g.nearest_node(pd);
    rep.probes.push_back({g.template coords<Scalar>(node), node, {}, {}});
  }
  // gamma * r is formed from the a.e. residual with the matching constant.
  GridField<Scalar> r = ae_residual(w, model, diff, discount ? Scalar(0) : c);
  if (discount) r.values += discount->values;

  for (Scalar eta : etas) {
    const MollifierKernel<Scalar> k(g, eta);
    const auto s = discount ? subsolution_residual(w, model, diff, *discount, k)
                            : subsolution_residual(w, model, diff, c, k);
    const auto split = residual_split(w, model, diff, k);
    const auto rm = convolve(r, k);
    const auto md = mollify_derivatives(w, k);
    CommutationRow<Scalar> row;
    row.eta = eta;
    row.s_witness = std::max(Scalar(0), s.values.maxCoeff());
    row.s_sup = s.sup_norm();
    row.r1_max = split.r1.values.maxCoeff();
    row.r2_sup = split.r2.sup_norm();
    row.eta2_lap = eta * eta * md.laplacian.sup_norm();
    Vector<Scalar> gap = s.values - split.r1.values - split.r2.values - rm.values;
    if (discount) gap -= discount->values - mollify(*discount, k).values;
    row.split_gap = gap.cwiseAbs().maxCoeff();
    rep.rows.push_back(row);
    for (auto& pr : rep.probes) {
      pr.s.push_back(s[pr.node]);
      pr.r2.push_back(split.r2[pr.node]);
    }
  }
  if (etas.size() >= 2) {
    std::vector<double> x, y, ys;
    for (const auto& row : rep.rows) {
      x.push_back(double(row.eta));
      y.push_back(std::max(double(row.s_witness), 1e-300));
      ys.push_back(std::max(double(row.s_sup), 1e-300));
    }
    rep.slope = loglog_slope(x, y);
    rep.slope_sup = loglog_slope(x, ys);
  }
  return rep;
}

template <typename Scalar = double>
struct EquivalenceReport {
  Scalar tau{0};
  double fraction_ok = 0;        // nodes with a.e. residual <= tau
  Eigen::Index failing_nodes = 0;
  bool ae_pass = false;          // fraction_ok >= 0.99
  std::vector<Scalar> etas;
  std::vector<Scalar> s_witness;  // max(0, max S^eta) per eta
  Scalar rate_constant{0};        // max s_witness / sqrt(eta)
  bool mollified_pass = false;    // rate_constant <= c_bound
  bool passed() const { return ae_pass && mollified_pass; }
};

/// The a.e.-sense residual of w is <= tau at >= 99% of nodes, and every
/// mollified w^eta is a subsolution up to S with max S <= c_bound eta^(1/2).
template <typename Scalar>
EquivalenceReport<Scalar> subsolution_equivalence_spotcheck(const GridField<Scalar>& w,
                                                            const HamiltonianModel<Scalar>& model,
                                                            const DiffusionCoefficient<Scalar>& diff, Scalar c,
                                                            const std::vector<Scalar>& etas, Scalar tau,
                                                            Scalar c_bound = Scalar(10)) {
  EquivalenceReport<Scalar> rep;
  rep.tau = tau;
  const auto r = ae_residual(w, model, diff, c);
  Eigen::Index ok = 0;
  for (Eigen::Index i = 0; i < r.size(); ++i) ok += r[i] <= tau ? 1 : 0;
  rep.failing_nodes = r.size() - ok;
  rep.fraction_ok = double(ok) / double(r.size());
  rep.ae_pass = rep.fraction_ok >= 0.99;
  for (Scalar eta : etas) {
    const MollifierKernel<Scalar> k(w.grid, eta);
    const auto s = subsolution_residual(w, model, diff, c, k);
    const Scalar sw = std::max(Scalar(0), s.values.maxCoeff());
    rep.etas.push_back(eta);
    rep.s_witness.push_back(sw);
    rep.rate_constant = std::max(rep.rate_constant, sw / std::sqrt(eta));
  }
  rep.mollified_pass = rep.rate_constant <= c_bound;
  return rep;
}

}  // namespace hjsel
