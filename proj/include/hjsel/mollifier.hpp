#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "hjsel/grid.hpp"

namespace hjsel {

/// Discrete periodic mollifier built from the standard bump
/// gamma(y) ~ exp(-1/(1-|y|^2)) on |y| < 1, scaled to radius eta.
///
/// Gradient and Laplacian weights are samples of the analytic derivatives of
/// gamma^eta, so D(w^eta) and Lap(w^eta) are kernel quadratures rather than
/// differences of the mollified field.
template <typename Scalar = double>
class MollifierKernel {
 public:
  MollifierKernel(const TorusGrid& grid, Scalar eta) : grid_(grid), eta_(eta) {
    const Scalar h = grid.spacing<Scalar>();
    if (!(eta > Scalar(0))) throw DomainError("MollifierKernel: eta must be > 0");
    if (eta < Scalar(2) * h * (Scalar(1) - Scalar(1e-12)))
      throw DomainError("kernel under-resolved: eta < 2h");
    const int dim = grid.dim();
    if (Scalar(2) * eta >= Scalar(1)) throw DomainError("MollifierKernel: eta must be < 1/2");

    const int reach = static_cast<int>(std::ceil(eta / h));
    const Scalar cell = std::pow(h / eta, Scalar(dim));
    std::vector<Scalar> raw, raw_lap;
    std::vector<std::array<Scalar, 2>> raw_grad;
    for (int j = (dim == 2 ? -reach : 0); j <= (dim == 2 ? reach : 0); ++j) {
      for (int i = -reach; i <= reach; ++i) {
        const Scalar z0 = Scalar(i) * h / eta;
        const Scalar z1 = Scalar(j) * h / eta;
        const Scalar r2 = z0 * z0 + z1 * z1;
        if (r2 >= Scalar(1)) continue;
        const Scalar s = Scalar(1) - r2;
        const Scalar g = std::exp(-Scalar(1) / s);
        offsets_.push_back({i, j});
        raw.push_back(g * cell);
        // D_x w^eta(x) = -int D gamma^eta(y) w(x+y) dy, D gamma(z) = -2 z gamma / s^2.
        const Scalar gscale = Scalar(2) * g / (s * s) * cell / eta;
        raw_grad.push_back({gscale * z0, gscale * z1});
        const Scalar lap = g * (Scalar(4) * r2 / (s * s * s * s) - Scalar(2 * dim) / (s * s) -
                                Scalar(8) * r2 / (s * s * s));
        raw_lap.push_back(lap * cell / (eta * eta));
      }
    }
    // Each family is rescaled to its exact discrete moment: unit mass for the
    // values, sum g_k y_k = 1 for the gradient (exact on linear data) and
    // sum l_k |y_k|^2 / 2 = n for the Laplacian (exact on quadratics). The
    // raw samples satisfy these only up to quadrature error, which dominates
    // at a few dozen nodes per radius.
    Scalar mass = 0, first = 0, second = 0;
    for (std::size_t k = 0; k < raw.size(); ++k) {
      const Scalar y0 = Scalar(offsets_[k][0]) * h;
      const Scalar y1 = Scalar(offsets_[k][1]) * h;
      mass += raw[k];
      first += raw_grad[k][0] * y0;
      second += raw_lap[k] * (y0 * y0 + y1 * y1) / Scalar(2);
    }
    const Scalar grad_scale = Scalar(1) / first;
    const Scalar lap_scale = Scalar(dim) / second;
    weights_.resize(raw.size());
    grad_.resize(raw.size());
    lap_.resize(raw.size());
    for (std::size_t k = 0; k < raw.size(); ++k) {
      weights_[k] = raw[k] / mass;
      grad_[k] = {raw_grad[k][0] * grad_scale, raw_grad[k][1] * grad_scale};
      lap_[k] = raw_lap[k] * lap_scale;
    }
  }

  const TorusGrid& grid() const noexcept { return grid_; }
  Scalar radius() const noexcept { return eta_; }
  const std::vector<std::array<int, 2>>& offsets() const noexcept { return offsets_; }
  const std::vector<Scalar>& weights() const noexcept { return weights_; }
  const std::vector<std::array<Scalar, 2>>& gradient_weights() const noexcept { return grad_; }
  const std::vector<Scalar>& laplacian_weights() const noexcept { return lap_; }

  /// Discrete L1 norm of D gamma^eta (about ||D gamma||_1 / eta).
  Scalar gradient_l1() const {
    Scalar s = 0;
    for (const auto& g : grad_) s += std::sqrt(g[0] * g[0] + g[1] * g[1]);
    return s;
  }

 private:
  TorusGrid grid_;
  Scalar eta_;
  std::vector<std::array<int, 2>> offsets_;
  std::vector<Scalar> weights_;
  std::vector<std::array<Scalar, 2>> grad_;
  std::vector<Scalar> lap_;
};

namespace detail {
template <typename Scalar>
void require_same_grid(const GridField<Scalar>& f, const MollifierKernel<Scalar>& k) {
  if (!(f.grid == k.grid())) throw DomainError("mollify: field and kernel live on different grids");
}
}  // namespace detail

/// w^eta(x_i) = sum_j weight_j w(x_i + y_j).
template <typename Scalar>
GridField<Scalar> mollify(const GridField<Scalar>& f, const MollifierKernel<Scalar>& kernel) {
  detail::require_same_grid(f, kernel);
  const auto& g = f.grid;
  const auto& off = kernel.offsets();
  const auto& w = kernel.weights();
  GridField<Scalar> out(g);
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    Scalar s = 0;
    for (std::size_t k = 0; k < off.size(); ++k) s += w[k] * f[g.shifted(i, off[k])];
    out[i] = s;
  }
  return out;
}

template <typename Scalar>
struct MollifiedDerivatives {
  GridField<Scalar> value;
  std::vector<GridField<Scalar>> gradient;  // one field per axis
  GridField<Scalar> laplacian;
};

/// w^eta together with D w^eta and Lap w^eta from the analytic kernel
/// derivatives. Derivative sums are taken on w(x+y) - w(x) so constants are
/// annihilated exactly.
template <typename Scalar>
MollifiedDerivatives<Scalar> mollify_derivatives(const GridField<Scalar>& f,
                                                 const MollifierKernel<Scalar>& kernel) {
  detail::require_same_grid(f, kernel);
  const auto& g = f.grid;
  const int dim = g.dim();
  const auto& off = kernel.offsets();
  const auto& w = kernel.weights();
  const auto& gw = kernel.gradient_weights();
  const auto& lw = kernel.laplacian_weights();

  MollifiedDerivatives<Scalar> out{GridField<Scalar>(g), {}, GridField<Scalar>(g)};
  for (int d = 0; d < dim; ++d) out.gradient.emplace_back(g);
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    Scalar v = 0, lap = 0;
    Scalar grad[2] = {0, 0};
    const Scalar center = f[i];
    for (std::size_t k = 0; k < off.size(); ++k) {
      const Scalar fk = f[g.shifted(i, off[k])];
      const Scalar diff = fk - center;
      v += w[k] * fk;
      grad[0] += gw[k][0] * diff;
      grad[1] += gw[k][1] * diff;
      lap += lw[k] * diff;
    }
    out.value[i] = v;
    for (int d = 0; d < dim; ++d) out.gradient[d][i] = grad[d];
    out.laplacian[i] = lap;
  }
  return out;
}

/// Mollification of node-wise data with the value weights (alias of mollify
/// for fields that are not solutions, e.g. H(x, Dw) samples).
template <typename Scalar>
GridField<Scalar> convolve(const GridField<Scalar>& f, const MollifierKernel<Scalar>& kernel) {
  return mollify(f, kernel);
}

}  // namespace hjsel
