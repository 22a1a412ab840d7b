#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "hjsel/error.hpp"

namespace hjsel {

/// Point or vector in R^n, n <= 2, stored on the stack.
template <typename Scalar>
using Point = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, 0, 2, 1>;

template <typename Scalar>
using SmallMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, 0, 2, 2>;

template <typename Scalar>
inline constexpr Scalar kTwoPi = Scalar(2) * std::numbers::pi_v<Scalar>;

/// One frequency of a real trigonometric polynomial:
/// cos_coef * cos(2 pi k.x) + sin_coef * sin(2 pi k.x).
template <typename Scalar>
struct TrigTerm {
  std::array<int, 2> k{0, 0};
  Scalar cos_coef{0};
  Scalar sin_coef{0};
};

/// A finite trigonometric polynomial on T^n (n = 1 or 2). Value, gradient
/// and Hessian are evaluated in closed form.
template <typename Scalar>
class PeriodicFunction {
 public:
  PeriodicFunction() = default;

  explicit PeriodicFunction(int dim, Scalar constant = Scalar(0),
                            std::vector<TrigTerm<Scalar>> terms = {})
      : dim_(dim), constant_(constant), terms_(std::move(terms)) {
    if (dim != 1 && dim != 2) throw DomainError("PeriodicFunction: dim must be 1 or 2");
    for (const auto& t : terms_) {
      if (dim == 1 && t.k[1] != 0)
        throw DomainError("PeriodicFunction: second frequency component given in 1-D");
    }
  }

  static PeriodicFunction constant(int dim, Scalar c) { return PeriodicFunction(dim, c); }

  static PeriodicFunction cosine(int dim, std::array<int, 2> k, Scalar amplitude,
                                 Scalar offset = Scalar(0)) {
    return PeriodicFunction(dim, offset, {TrigTerm<Scalar>{k, amplitude, Scalar(0)}});
  }

  int dim() const noexcept { return dim_; }
  Scalar constant_term() const noexcept { return constant_; }
  const std::vector<TrigTerm<Scalar>>& terms() const noexcept { return terms_; }

  Scalar value(const Point<Scalar>& x) const {
    Scalar f = constant_;
    for (const auto& t : terms_) {
      const Scalar arg = phase(t, x);
      f += t.cos_coef * std::cos(arg) + t.sin_coef * std::sin(arg);
    }
    return f;
  }

  Point<Scalar> gradient(const Point<Scalar>& x) const {
    Point<Scalar> g = Point<Scalar>::Zero(dim_);
    for (const auto& t : terms_) {
      const Scalar arg = phase(t, x);
      const Scalar d = -t.cos_coef * std::sin(arg) + t.sin_coef * std::cos(arg);
      for (int i = 0; i < dim_; ++i) g(i) += kTwoPi<Scalar> * Scalar(t.k[i]) * d;
    }
    return g;
  }

  SmallMatrix<Scalar> hessian(const Point<Scalar>& x) const {
    SmallMatrix<Scalar> hess = SmallMatrix<Scalar>::Zero(dim_, dim_);
    for (const auto& t : terms_) {
      const Scalar arg = phase(t, x);
      const Scalar d = -(t.cos_coef * std::cos(arg) + t.sin_coef * std::sin(arg));
      for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j)
          hess(i, j) += kTwoPi<Scalar> * kTwoPi<Scalar> * Scalar(t.k[i]) * Scalar(t.k[j]) * d;
    }
    return hess;
  }

  Scalar laplacian(const Point<Scalar>& x) const { return hessian(x).trace(); }

  /// Upper bound on sup|f| from the coefficients.
  Scalar sup_bound() const {
    Scalar b = std::abs(constant_);
    for (const auto& t : terms_) b += std::abs(t.cos_coef) + std::abs(t.sin_coef);
    return b;
  }

  PeriodicFunction operator+(Scalar c) const {
    PeriodicFunction out = *this;
    out.constant_ += c;
    return out;
  }

  PeriodicFunction operator*(Scalar s) const {
    PeriodicFunction out = *this;
    out.constant_ *= s;
    for (auto& t : out.terms_) {
      t.cos_coef *= s;
      t.sin_coef *= s;
    }
    return out;
  }

  bool is_constant() const {
    for (const auto& t : terms_)
      if (t.cos_coef != Scalar(0) || t.sin_coef != Scalar(0)) return false;
    return true;
  }

  template <typename Other>
  PeriodicFunction<Other> cast() const {
    std::vector<TrigTerm<Other>> terms;
    terms.reserve(terms_.size());
    for (const auto& t : terms_)
      terms.push_back(TrigTerm<Other>{t.k, Other(t.cos_coef), Other(t.sin_coef)});
    return PeriodicFunction<Other>(dim_, Other(constant_), std::move(terms));
  }

 private:
  Scalar phase(const TrigTerm<Scalar>& t, const Point<Scalar>& x) const {
    Scalar kx = Scalar(t.k[0]) * x(0);
    if (dim_ == 2) kx += Scalar(t.k[1]) * x(1);
    return kTwoPi<Scalar> * kx;
  }

  int dim_ = 1;
  Scalar constant_{0};
  std::vector<TrigTerm<Scalar>> terms_;
};

template <typename Scalar>
Point<Scalar> make_point(Scalar x) {
  Point<Scalar> p(1);
  p << x;
  return p;
}

template <typename Scalar>
Point<Scalar> make_point(Scalar x, Scalar y) {
  Point<Scalar> p(2);
  p << x, y;
  return p;
}

}  // namespace hjsel
