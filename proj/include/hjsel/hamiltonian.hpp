#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "hjsel/error.hpp"
#include "hjsel/periodic_function.hpp"

namespace hjsel {

/// Closed-form convex superlinear families H(x,p) = F(|p|^2) + V(x).
enum class HamiltonianKind { Quadratic, Quartic };

inline const char* to_string(HamiltonianKind kind) {
  return kind == HamiltonianKind::Quadratic ? "quadratic" : "quartic";
}

template <typename Scalar>
struct HamiltonianModel {
  HamiltonianKind kind = HamiltonianKind::Quadratic;
  PeriodicFunction<Scalar> potential;

  int dim() const { return potential.dim(); }

  /// F(s) with s = |p|^2.
  Scalar kinetic(Scalar s) const {
    return kind == HamiltonianKind::Quadratic ? s / Scalar(2) : s * s / Scalar(4);
  }

  /// F'(s).
  Scalar kinetic_slope(Scalar s) const {
    return kind == HamiltonianKind::Quadratic ? Scalar(0.5) : s / Scalar(2);
  }

  template <typename Other>
  HamiltonianModel<Other> cast() const {
    return HamiltonianModel<Other>{kind, potential.template cast<Other>()};
  }
};

template <typename Scalar>
HamiltonianModel<Scalar> quadratic_hamiltonian(PeriodicFunction<Scalar> potential) {
  return {HamiltonianKind::Quadratic, std::move(potential)};
}

template <typename Scalar>
HamiltonianModel<Scalar> quartic_hamiltonian(PeriodicFunction<Scalar> potential) {
  return {HamiltonianKind::Quartic, std::move(potential)};
}

template <typename Scalar>
Scalar eval_h(const HamiltonianModel<Scalar>& model, const Point<Scalar>& x,
              const Point<Scalar>& p) {
  return model.kinetic(p.squaredNorm()) + model.potential.value(x);
}

template <typename Scalar>
Point<Scalar> grad_p(const HamiltonianModel<Scalar>& model, const Point<Scalar>&,
                     const Point<Scalar>& p) {
  return Scalar(2) * model.kinetic_slope(p.squaredNorm()) * p;
}

template <typename Scalar>
Point<Scalar> grad_x(const HamiltonianModel<Scalar>& model, const Point<Scalar>& x,
                     const Point<Scalar>&) {
  return model.potential.gradient(x);
}

template <typename Scalar>
SmallMatrix<Scalar> hess_p(const HamiltonianModel<Scalar>& model, const Point<Scalar>&,
                           const Point<Scalar>& p) {
  const auto n = p.size();
  if (model.kind == HamiltonianKind::Quadratic) return SmallMatrix<Scalar>::Identity(n, n);
  return p.squaredNorm() * SmallMatrix<Scalar>::Identity(n, n) + Scalar(2) * p * p.transpose();
}

/// Inverse of v = D_pH(x,p), i.e. p = D_vL(x,v). For the quartic family the
/// removable singularity at v = 0 is filled with 0.
template <typename Scalar>
Point<Scalar> momentum_of_velocity(const HamiltonianModel<Scalar>& model, const Point<Scalar>& v) {
  if (model.kind == HamiltonianKind::Quadratic) return v;
  const Scalar speed = v.norm();
  if (speed == Scalar(0)) return Point<Scalar>::Zero(v.size());
  return std::pow(speed, Scalar(-2) / Scalar(3)) * v;
}

template <typename Scalar>
struct LegendrePoint {
  Scalar lagrangian;
  Point<Scalar> momentum;
};

/// L(x,v) = sup_p (p.v - H(x,p)) and the maximizer p* = D_vL(x,v).
template <typename Scalar>
LegendrePoint<Scalar> legendre(const HamiltonianModel<Scalar>& model, const Point<Scalar>& x,
                               const Point<Scalar>& v) {
  const Scalar s = v.squaredNorm();
  const Scalar vpot = model.potential.value(x);
  if (model.kind == HamiltonianKind::Quadratic) return {s / Scalar(2) - vpot, v};
  const Scalar speed43 = std::pow(s, Scalar(2) / Scalar(3));  // |v|^{4/3}
  return {Scalar(3) / Scalar(4) * speed43 - vpot, momentum_of_velocity(model, v)};
}

template <typename Scalar>
Scalar lagrangian(const HamiltonianModel<Scalar>& model, const Point<Scalar>& x,
                  const Point<Scalar>& v) {
  return legendre(model, x, v).lagrangian;
}

/// Diffusion coefficient a >= 0 on T^n.
template <typename Scalar>
struct DiffusionCoefficient {
  PeriodicFunction<Scalar> a;
  bool degenerate = false;
  std::string name = "custom";

  DiffusionCoefficient() = default;
  DiffusionCoefficient(PeriodicFunction<Scalar> coeff, std::string label = "custom")
      : a(std::move(coeff)), degenerate(sampled_minimum(a) <= Scalar(1e-12)), name(std::move(label)) {}

  int dim() const { return a.dim(); }
  Scalar operator()(const Point<Scalar>& x) const { return a.value(x); }

  template <typename Other>
  DiffusionCoefficient<Other> cast() const {
    DiffusionCoefficient<Other> out;
    out.a = a.template cast<Other>();
    out.degenerate = degenerate;
    out.name = name;
    return out;
  }

  static Scalar sampled_minimum(const PeriodicFunction<Scalar>& f, int per_axis = 512) {
    Scalar lo = std::numeric_limits<Scalar>::infinity();
    const int ny = f.dim() == 2 ? per_axis : 1;
    for (int i = 0; i < per_axis; ++i)
      for (int j = 0; j < ny; ++j) {
        const Scalar xi = Scalar(i) / Scalar(per_axis);
        const Scalar yj = Scalar(j) / Scalar(per_axis);
        const Point<Scalar> x = f.dim() == 1 ? make_point(xi) : make_point(xi, yj);
        lo = std::min(lo, f.value(x));
      }
    return lo;
  }
};

/// Built-in diffusion coefficients.
namespace diffusion {

/// a = 0; only usable through the eta-regularization.
template <typename Scalar = double>
DiffusionCoefficient<Scalar> zero(int dim = 1) {
  DiffusionCoefficient<Scalar> d(PeriodicFunction<Scalar>::constant(dim, Scalar(0)), "zero");
  d.degenerate = true;
  return d;
}

template <typename Scalar = double>
DiffusionCoefficient<Scalar> one(int dim = 1) {
  return DiffusionCoefficient<Scalar>(PeriodicFunction<Scalar>::constant(dim, Scalar(1)), "one");
}

/// a = (1 - cos 2 pi x)/2 in 1-D, (2 - cos 2 pi x - cos 2 pi y)/4 in 2-D;
/// vanishes only at the origin.
template <typename Scalar = double>
DiffusionCoefficient<Scalar> degenerate(int dim = 1) {
  if (dim == 1)
    return DiffusionCoefficient<Scalar>(
        PeriodicFunction<Scalar>::cosine(1, {1, 0}, Scalar(-0.5), Scalar(0.5)), "degenerate");
  return DiffusionCoefficient<Scalar>(
      PeriodicFunction<Scalar>(2, Scalar(0.5),
                               {TrigTerm<Scalar>{{1, 0}, Scalar(-0.25), Scalar(0)},
                                TrigTerm<Scalar>{{0, 1}, Scalar(-0.25), Scalar(0)}}),
      "degenerate");
}

/// a = (1 - cos 4 pi x)/2 in 1-D (zeros at x = 0 and x = 1/2);
/// (2 - cos 4 pi x - cos 4 pi y)/4 in 2-D.
template <typename Scalar = double>
DiffusionCoefficient<Scalar> double_degenerate(int dim = 1) {
  if (dim == 1)
    return DiffusionCoefficient<Scalar>(
        PeriodicFunction<Scalar>::cosine(1, {2, 0}, Scalar(-0.5), Scalar(0.5)),
        "double_degenerate");
  return DiffusionCoefficient<Scalar>(
      PeriodicFunction<Scalar>(2, Scalar(0.5),
                               {TrigTerm<Scalar>{{2, 0}, Scalar(-0.25), Scalar(0)},
                                TrigTerm<Scalar>{{0, 2}, Scalar(-0.25), Scalar(0)}}),
      "double_degenerate");
}

}  // namespace diffusion

/// Empirical constants for the structural assumptions on (H, a).
struct ValidationReport {
  double convexity_min_eigenvalue = 0;   // min over samples of lambda_min(D_pp H)
  double superlinearity_radius = 0;      // R0 with H/|p| >= |p|/4 for |p| >= R0
  double superlinearity_margin = 0;      // min of H/|p| - |p|/4 over |p| >= R0
  double dx_constant = 0;                // |D_xH| <= C (1 + H - min V)
  double diffusion_minimum = 0;
  double diffusion_sqrt_constant = 0;    // |Da| <= C sqrt(a)
  bool degenerate = false;
  int samples = 0;

  bool convex = true;
  bool superlinear = true;
  bool dx_bounded = true;
  bool nonnegative = true;
  bool sqrt_bounded = true;

  bool passed() const { return convex && superlinear && dx_bounded && nonnegative && sqrt_bounded; }
};

namespace detail {

template <typename Scalar>
std::vector<Point<Scalar>> sample_torus(int dim, int sample_count) {
  std::vector<Point<Scalar>> xs;
  if (dim == 1) {
    for (int i = 0; i < sample_count; ++i) xs.push_back(make_point(Scalar(i) / Scalar(sample_count)));
  } else {
    const int m = static_cast<int>(std::ceil(std::sqrt(double(sample_count))));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) xs.push_back(make_point(Scalar(i) / Scalar(m), Scalar(j) / Scalar(m)));
  }
  return xs;
}

template <typename Scalar>
std::vector<Point<Scalar>> sample_momenta(int dim) {
  const Scalar radii[] = {0, 0.25, 0.5, 1, 2, 3, 4, 8, 16};
  std::vector<Point<Scalar>> ps;
  for (Scalar r : radii) {
    if (dim == 1) {
      ps.push_back(make_point(r));
      if (r != 0) ps.push_back(make_point(-r));
    } else {
      const int dirs = r == 0 ? 1 : 8;
      for (int k = 0; k < dirs; ++k) {
        const Scalar ang = kTwoPi<Scalar> * Scalar(k) / Scalar(8);
        ps.push_back(make_point(r * std::cos(ang), r * std::sin(ang)));
      }
    }
  }
  return ps;
}

template <typename Scalar>
std::string describe(const Point<Scalar>& x) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < x.size(); ++i) os << (i ? ", " : "") << double(x(i));
  os << ")";
  return os.str();
}

}  // namespace detail

/// Samples (H1)-(H2) and reports empirical constants. Throws
/// AssumptionViolation naming the bound and the sampled point on failure.
template <typename Scalar>
ValidationReport validate_assumptions(const HamiltonianModel<Scalar>& model,
                                      const DiffusionCoefficient<Scalar>& diff, int sample_count) {
  if (sample_count < 100) throw DomainError("validate_assumptions: sample_count must be >= 100");
  if (model.dim() != diff.dim()) throw DomainError("validate_assumptions: dimension mismatch");

  const int dim = model.dim();
  const auto xs = detail::sample_torus<Scalar>(dim, sample_count);
  const auto ps = detail::sample_momenta<Scalar>(dim);

  ValidationReport rep;
  rep.samples = static_cast<int>(xs.size() * ps.size());

  Scalar vmin = std::numeric_limits<Scalar>::infinity();
  for (const auto& x : xs) vmin = std::min(vmin, model.potential.value(x));
  rep.superlinearity_radius = double(std::max(Scalar(2), Scalar(2) * std::sqrt(std::max(Scalar(0), -vmin))));

  rep.convexity_min_eigenvalue = std::numeric_limits<double>::infinity();
  rep.superlinearity_margin = std::numeric_limits<double>::infinity();
  for (const auto& x : xs) {
    for (const auto& p : ps) {
      const SmallMatrix<Scalar> hess = hess_p(model, x, p);
      const Scalar lam = Eigen::SelfAdjointEigenSolver<SmallMatrix<Scalar>>(hess).eigenvalues().minCoeff();
      rep.convexity_min_eigenvalue = std::min(rep.convexity_min_eigenvalue, double(lam));
      if (lam < Scalar(-1e-12)) {
        throw AssumptionViolation("convexity in p violated at x=" + detail::describe(x) +
                                  ", p=" + detail::describe(p));
      }
      const Scalar h = eval_h(model, x, p);
      const Scalar r = p.norm();
      if (r >= Scalar(rep.superlinearity_radius)) {
        const Scalar margin = h / r - r / Scalar(4);
        rep.superlinearity_margin = std::min(rep.superlinearity_margin, double(margin));
        if (margin < Scalar(-1e-12))
          throw AssumptionViolation("superlinearity H/|p| >= |p|/4 violated at x=" +
                                    detail::describe(x) + ", p=" + detail::describe(p));
      }
      const Scalar ratio = grad_x(model, x, p).norm() / (Scalar(1) + h - vmin);
      rep.dx_constant = std::max(rep.dx_constant, double(ratio));
    }
  }
  if (!std::isfinite(rep.dx_constant))
    throw AssumptionViolation("|D_xH| <= C(1 + H) violated: constant not finite");

  rep.diffusion_minimum = std::numeric_limits<double>::infinity();
  for (const auto& x : xs) {
    const Scalar a = diff.a.value(x);
    const Scalar da = diff.a.gradient(x).norm();
    rep.diffusion_minimum = std::min(rep.diffusion_minimum, double(a));
    if (a < Scalar(-1e-14)) {
      rep.nonnegative = false;
      throw AssumptionViolation("a >= 0 violated at x=" + detail::describe(x) +
                                " (a=" + std::to_string(double(a)) + ")");
    }
    if (a <= Scalar(1e-14)) {
      rep.degenerate = true;
      if (da > Scalar(1e-7))
        throw AssumptionViolation("|Da| <= C sqrt(a) violated at x=" + detail::describe(x) +
                                  " (a = 0 but Da != 0)");
      continue;
    }
    rep.diffusion_sqrt_constant = std::max(rep.diffusion_sqrt_constant, double(da / std::sqrt(a)));
  }
  return rep;
}

}  // namespace hjsel
