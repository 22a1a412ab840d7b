#pragma once

#include <cstdint>
#include <random>

#include "hjsel/hjsel.hpp"

namespace hjsel::testing {

/// Deterministic case generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  Point<double> torus_point(int dim) {
    return dim == 1 ? make_point(uniform(0, 1)) : make_point(uniform(0, 1), uniform(0, 1));
  }
  Point<double> vec(int dim, double r) {
    return dim == 1 ? make_point(uniform(-r, r)) : make_point(uniform(-r, r), uniform(-r, r));
  }

  /// Random trig polynomial with up to `terms` modes of frequency <= kmax.
  PeriodicFunction<double> trig(int dim, int terms, int kmax, double amp) {
    std::vector<TrigTerm<double>> ts;
    const int n = integer(1, terms);
    for (int i = 0; i < n; ++i) {
      TrigTerm<double> t;
      t.k[0] = integer(dim == 1 ? 1 : 0, kmax);
      if (dim == 2) t.k[1] = integer(t.k[0] == 0 ? 1 : -kmax, kmax);
      t.cos_coef = uniform(-amp, amp);
      t.sin_coef = uniform(-amp, amp);
      ts.push_back(t);
    }
    return PeriodicFunction<double>(dim, uniform(-amp, amp), std::move(ts));
  }

  HamiltonianModel<double> model(int dim) {
    auto v = trig(dim, 2, 2, 0.5);
    return integer(0, 1) ? quartic_hamiltonian(v) : quadratic_hamiltonian(v);
  }

  /// a = c0 + sum of squares-like trig terms, kept >= 0.2.
  DiffusionCoefficient<double> positive_diffusion(int dim) {
    auto f = trig(dim, 2, 2, 0.1);
    const double amp = f.sup_bound() - f.constant_term();
    return DiffusionCoefficient<double>(f + (0.2 + amp - f.constant_term()), "random");
  }

 private:
  std::mt19937_64 rng_;
};

inline PeriodicFunction<double> cos1d(double amp = 1.0) { return PeriodicFunction<double>::cosine(1, {1, 0}, amp); }

}  // namespace hjsel::testing
