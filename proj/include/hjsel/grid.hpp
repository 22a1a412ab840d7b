#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>

#include <Eigen/Dense>

#include "hjsel/error.hpp"
#include "hjsel/periodic_function.hpp"

namespace hjsel {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Uniform periodic grid on T^n with N nodes per axis, x_i = i h, h = 1/N.
/// Node (i, j) is stored at flat index i + N j.
class TorusGrid {
 public:
  TorusGrid(int dim, int nodes_per_dim) : dim_(dim), n_(nodes_per_dim) {
    if (dim != 1 && dim != 2) throw DomainError("TorusGrid: dim must be 1 or 2");
    if (nodes_per_dim < 8) throw DomainError("TorusGrid: need at least 8 nodes per axis");
    if ((nodes_per_dim & (nodes_per_dim - 1)) != 0)
      throw DomainError("TorusGrid: nodes per axis must be a power of two");
  }

  int dim() const noexcept { return dim_; }
  int nodes_per_dim() const noexcept { return n_; }
  Eigen::Index size() const noexcept { return dim_ == 1 ? n_ : Eigen::Index(n_) * n_; }

  template <typename Scalar = double>
  Scalar spacing() const {
    return Scalar(1) / Scalar(n_);
  }

  /// h^n, the quadrature weight of a node.
  template <typename Scalar = double>
  Scalar cell_volume() const {
    return dim_ == 1 ? spacing<Scalar>() : spacing<Scalar>() * spacing<Scalar>();
  }

  std::array<int, 2> multi_index(Eigen::Index idx) const {
    return {static_cast<int>(idx % n_), static_cast<int>(idx / n_)};
  }

  Eigen::Index flat_index(int i, int j = 0) const {
    i = wrap(i);
    j = dim_ == 1 ? 0 : wrap(j);
    return Eigen::Index(i) + Eigen::Index(n_) * j;
  }

  /// Index of the node shifted by `offset` along `axis`, periodically.
  Eigen::Index shifted(Eigen::Index idx, int axis, int offset) const {
    auto m = multi_index(idx);
    m[axis] += offset;
    return flat_index(m[0], m[1]);
  }

  Eigen::Index shifted(Eigen::Index idx, const std::array<int, 2>& offset) const {
    auto m = multi_index(idx);
    return flat_index(m[0] + offset[0], m[1] + offset[1]);
  }

  template <typename Scalar = double>
  Point<Scalar> coords(Eigen::Index idx) const {
    const auto m = multi_index(idx);
    if (dim_ == 1) return make_point(Scalar(m[0]) / Scalar(n_));
    return make_point(Scalar(m[0]) / Scalar(n_), Scalar(m[1]) / Scalar(n_));
  }

  /// Nearest node to a point of the torus.
  Eigen::Index nearest_node(const Point<double>& x) const {
    std::array<int, 2> m{0, 0};
    for (int d = 0; d < dim_; ++d) m[d] = static_cast<int>(std::lround(x(d) * n_));
    return flat_index(m[0], m[1]);
  }

  int wrap(int i) const noexcept {
    const int r = i % n_;
    return r < 0 ? r + n_ : r;
  }

  bool operator==(const TorusGrid&) const = default;

 private:
  int dim_;
  int n_;
};

/// Periodic distance on T^n between two points.
template <typename Scalar>
Scalar torus_distance(const Point<Scalar>& x, const Point<Scalar>& y) {
  Scalar s = 0;
  for (int d = 0; d < x.size(); ++d) {
    Scalar t = std::abs(x(d) - y(d));
    t -= std::floor(t);
    t = std::min(t, Scalar(1) - t);
    s += t * t;
  }
  return std::sqrt(s);
}

/// One value per grid node.
template <typename Scalar = double>
struct GridField {
  TorusGrid grid;
  Vector<Scalar> values;

  explicit GridField(const TorusGrid& g) : grid(g), values(Vector<Scalar>::Zero(g.size())) {}
  GridField(const TorusGrid& g, Vector<Scalar> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size()) throw DomainError("GridField: size does not match grid");
  }

  static GridField constant(const TorusGrid& g, Scalar c) {
    return GridField(g, Vector<Scalar>::Constant(g.size(), c));
  }

  Eigen::Index size() const { return values.size(); }
  Scalar operator[](Eigen::Index i) const { return values(i); }
  Scalar& operator[](Eigen::Index i) { return values(i); }

  bool all_finite() const { return values.allFinite(); }
  Scalar sup_norm() const { return values.size() ? values.cwiseAbs().maxCoeff() : Scalar(0); }

  template <typename Other>
  GridField<Other> cast() const {
    return GridField<Other>(grid, values.template cast<Other>());
  }
};

template <typename Scalar>
GridField<Scalar> sample(const TorusGrid& grid, const std::function<Scalar(const Point<Scalar>&)>& f) {
  GridField<Scalar> out(grid);
  for (Eigen::Index i = 0; i < grid.size(); ++i) out[i] = f(grid.coords<Scalar>(i));
  return out;
}

template <typename Scalar>
GridField<Scalar> sample(const TorusGrid& grid, const PeriodicFunction<Scalar>& f) {
  GridField<Scalar> out(grid);
  for (Eigen::Index i = 0; i < grid.size(); ++i) out[i] = f.value(grid.coords<Scalar>(i));
  return out;
}

/// (f_{i+1} - f_i)/h along `axis`.
template <typename Scalar>
GridField<Scalar> diff_forward(const GridField<Scalar>& f, int axis) {
  const auto& g = f.grid;
  const Scalar inv_h = Scalar(g.nodes_per_dim());
  GridField<Scalar> out(g);
  for (Eigen::Index i = 0; i < g.size(); ++i) out[i] = (f[g.shifted(i, axis, 1)] - f[i]) * inv_h;
  return out;
}

/// (f_i - f_{i-1})/h along `axis`.
template <typename Scalar>
GridField<Scalar> diff_backward(const GridField<Scalar>& f, int axis) {
  const auto& g = f.grid;
  const Scalar inv_h = Scalar(g.nodes_per_dim());
  GridField<Scalar> out(g);
  for (Eigen::Index i = 0; i < g.size(); ++i) out[i] = (f[i] - f[g.shifted(i, axis, -1)]) * inv_h;
  return out;
}

/// (f_{i+1} - f_{i-1})/(2h) along `axis`.
template <typename Scalar>
GridField<Scalar> diff_central(const GridField<Scalar>& f, int axis) {
  const auto& g = f.grid;
  const Scalar half_inv_h = Scalar(g.nodes_per_dim()) / Scalar(2);
  GridField<Scalar> out(g);
  for (Eigen::Index i = 0; i < g.size(); ++i)
    out[i] = (f[g.shifted(i, axis, 1)] - f[g.shifted(i, axis, -1)]) * half_inv_h;
  return out;
}

template <typename Scalar>
GridField<Scalar> laplacian(const GridField<Scalar>& f) {
  const auto& g = f.grid;
  const Scalar inv_h2 = Scalar(g.nodes_per_dim()) * Scalar(g.nodes_per_dim());
  GridField<Scalar> out(g);
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    Scalar s = 0;
    for (int d = 0; d < g.dim(); ++d)
      s += (f[g.shifted(i, d, 1)] - f[i]) - (f[i] - f[g.shifted(i, d, -1)]);
    out[i] = s * inv_h2;
  }
  return out;
}

/// Trapezoid rule on the periodic grid: sum_i f_i h^n.
template <typename Scalar>
Scalar integrate(const GridField<Scalar>& f) {
  return f.values.sum() * f.grid.template cell_volume<Scalar>();
}

/// Periodic translation by whole nodes: out(x) = f(x + offset h).
template <typename Scalar>
GridField<Scalar> translate(const GridField<Scalar>& f, const std::array<int, 2>& offset) {
  GridField<Scalar> out(f.grid);
  for (Eigen::Index i = 0; i < f.size(); ++i) out[i] = f[f.grid.shifted(i, offset)];
  return out;
}

}  // namespace hjsel
