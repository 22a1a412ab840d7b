#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "hjsel/periodic_function.hpp"

namespace hjsel {

/// Test functions cos(2 pi k.x) and sin(2 pi k.x) with exact derivatives.
template <typename Scalar = double>
class TrigBasis {
 public:
  struct Mode {
    std::array<int, 2> k;
    bool is_sine;
  };

  /// All modes with 0 < |k|_inf <= max_freq, one representative per +-k pair.
  /// With include_constant the function 1 is prepended.
  TrigBasis(int dim, int max_freq, bool include_constant = false) : dim_(dim) {
    if (include_constant) modes_.push_back({{0, 0}, false});
    const int lo2 = dim == 2 ? -max_freq : 0;
    const int hi2 = dim == 2 ? max_freq : 0;
    for (int k2 = lo2; k2 <= hi2; ++k2)
      for (int k1 = -max_freq; k1 <= max_freq; ++k1) {
        const bool canonical = k1 > 0 || (k1 == 0 && k2 > 0);
        if (!canonical) continue;
        modes_.push_back({{k1, k2}, false});
        modes_.push_back({{k1, k2}, true});
      }
  }

  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return modes_.size(); }
  const Mode& mode(std::size_t m) const { return modes_[m]; }

  std::string label(std::size_t m) const {
    const auto& md = modes_[m];
    if (md.k[0] == 0 && md.k[1] == 0) return "const";
    std::string s = md.is_sine ? "sin(" : "cos(";
    s += std::to_string(md.k[0]);
    if (dim_ == 2) s += "," + std::to_string(md.k[1]);
    return s + ")";
  }

  Scalar value(std::size_t m, const Point<Scalar>& x) const {
    const auto& md = modes_[m];
    if (md.k[0] == 0 && md.k[1] == 0) return Scalar(1);
    const Scalar a = arg(md, x);
    return md.is_sine ? std::sin(a) : std::cos(a);
  }

  Point<Scalar> gradient(std::size_t m, const Point<Scalar>& x) const {
    const auto& md = modes_[m];
    const Scalar a = arg(md, x);
    const Scalar d = md.is_sine ? std::cos(a) : -std::sin(a);
    Point<Scalar> g(dim_);
    for (int i = 0; i < dim_; ++i) g(i) = kTwoPi<Scalar> * Scalar(md.k[i]) * d;
    return g;
  }

  Scalar laplacian(std::size_t m, const Point<Scalar>& x) const {
    const auto& md = modes_[m];
    const Scalar k2 = Scalar(md.k[0] * md.k[0] + md.k[1] * md.k[1]);
    return -kTwoPi<Scalar> * kTwoPi<Scalar> * k2 * value(m, x) * (k2 == 0 ? Scalar(0) : Scalar(1));
  }

 private:
  Scalar arg(const Mode& md, const Point<Scalar>& x) const {
    Scalar kx = Scalar(md.k[0]) * x(0);
    if (dim_ == 2) kx += Scalar(md.k[1]) * x(1);
    return kTwoPi<Scalar> * kx;
  }

  int dim_;
  std::vector<Mode> modes_;
};

}  // namespace hjsel
