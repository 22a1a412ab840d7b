#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace hjsel;
using hjsel::testing::Gen;
using hjsel::testing::cos1d;

namespace {

auto zero_v(int dim = 1) { return PeriodicFunction<double>::constant(dim, 0.0); }

SchemeParams<double> params(double eps, double eta) {
  SchemeParams<double> p;
  p.eps = eps;
  p.eta = eta;
  return p;
}

// Godunov flux for a convex 1-D H: min over [p+, p-] if p- <= p+, else max over [p+, p-].
double godunov(double pm, double pp) {
  auto h = [](double p) { return p * p / 2; };
  if (pm <= pp) return (pm <= 0 && 0 <= pp) ? 0.0 : std::min(h(pm), h(pp));
  return std::max(h(pm), h(pp));
}

}  // namespace

TEST(NumericalHamiltonian, Examples) {
  const auto m = quadratic_hamiltonian(zero_v());
  const auto x = make_point(0.3);
  EXPECT_DOUBLE_EQ(numerical_hamiltonian(m, x, make_point(2.0), make_point(2.0)), 2.0);
  EXPECT_DOUBLE_EQ(numerical_hamiltonian(m, x, make_point(-1.0), make_point(1.0)), 0.0);
  EXPECT_DOUBLE_EQ(godunov(-1.0, 1.0), 0.0);
  // Across a concave kink the two fluxes differ: EO gives 1, Godunov 1/2.
  EXPECT_DOUBLE_EQ(numerical_hamiltonian(m, x, make_point(1.0), make_point(-1.0)), 1.0);
  EXPECT_DOUBLE_EQ(godunov(1.0, -1.0), 0.5);
}

TEST(NumericalHamiltonian, ConsistentAndMonotone) {
  Gen gen(31);
  for (int t = 0; t < 2000; ++t) {
    const int dim = gen.integer(1, 2);
    const auto m = gen.model(dim);
    const auto x = gen.torus_point(dim);
    const auto p = gen.vec(dim, 3);
    EXPECT_NEAR(numerical_hamiltonian(m, x, p, p), eval_h(m, x, p), 1e-12 * (1 + p.squaredNorm() * p.squaredNorm()));
    const auto pm = gen.vec(dim, 3), pp = gen.vec(dim, 3);
    const double base = numerical_hamiltonian(m, x, pm, pp);
    const int d = gen.integer(0, dim - 1);
    Point<double> bump = Point<double>::Zero(dim);
    bump(d) = gen.uniform(0, 1);
    EXPECT_GE(numerical_hamiltonian(m, x, Point<double>(pm + bump), pp), base - 1e-12);
    EXPECT_LE(numerical_hamiltonian(m, x, pm, Point<double>(pp + bump)), base + 1e-12);
  }
}

TEST(NumericalHamiltonian, FluxDerivativesMatchFiniteDifferences) {
  Gen gen(32);
  const double d = 1e-6;
  for (int t = 0; t < 300; ++t) {
    const int dim = gen.integer(1, 2);
    const auto m = gen.model(dim);
    std::array<double, 2> pm{gen.uniform(-3, 3), gen.uniform(-3, 3)}, pp{gen.uniform(-3, 3), gen.uniform(-3, 3)};
    const auto fl = upwind_flux(m, 0.0, pm, pp, dim);
    for (int a = 0; a < dim; ++a) {
      auto pm2 = pm, pm1 = pm, pp2 = pp, pp1 = pp;
      pm2[a] += d, pm1[a] -= d, pp2[a] += d, pp1[a] -= d;
      const double dm = (upwind_flux(m, 0.0, pm2, pp, dim).value - upwind_flux(m, 0.0, pm1, pp, dim).value) / (2 * d);
      const double dp = (upwind_flux(m, 0.0, pm, pp2, dim).value - upwind_flux(m, 0.0, pm, pp1, dim).value) / (2 * d);
      EXPECT_NEAR(fl.d_minus[a], dm, 1e-5 * (1 + std::abs(dm)));
      EXPECT_NEAR(fl.d_plus[a], dp, 1e-5 * (1 + std::abs(dp)));
      EXPECT_GE(fl.d_minus[a], 0.0);
      EXPECT_LE(fl.d_plus[a], 0.0);
    }
  }
}

TEST(Linearization, MatchesFiniteDifferenceJacobian) {
  Gen gen(33);
  for (int t = 0; t < 6; ++t) {
    const int dim = gen.integer(1, 2);
    const TorusGrid g(dim, dim == 1 ? 32 : 8);
    const auto m = gen.model(dim);
    const auto diff = gen.positive_diffusion(dim);
    const auto prob = make_problem(m, diff, g, 0.3, 0.05);
    Vector<double> u(g.size());
    for (Eigen::Index i = 0; i < g.size(); ++i) u(i) = gen.uniform(-0.2, 0.2);
    const auto op = linearize(prob, u);
    const Eigen::MatrixXd dense = Eigen::MatrixXd(op.matrix);
    const double d = 1e-7;
    for (Eigen::Index j = 0; j < g.size(); j += 3) {
      Vector<double> up = u, um = u;
      up(j) += d;
      um(j) -= d;
      const Vector<double> col = (scheme_residual(prob, up) - scheme_residual(prob, um)) / (2 * d);
      EXPECT_LE((col - dense.col(j)).cwiseAbs().maxCoeff(), 1e-4 * (1 + dense.col(j).cwiseAbs().maxCoeff()));
    }
  }
}

TEST(SolveDiscounted, ZeroPotentialIsAnExactFixedPoint) {
  for (const auto& diff : {diffusion::one<double>(1), diffusion::degenerate<double>(1)}) {
    const auto rep = solve_discounted(quadratic_hamiltonian(zero_v()), diff, TorusGrid(1, 256), params(0.05, 0.01));
    EXPECT_EQ(rep.iterations, 0);
    EXPECT_EQ(rep.final_residual, 0.0);
    EXPECT_EQ(rep.solution.sup_norm(), 0.0);
    EXPECT_EQ(rep.c_estimate, 0.0);
  }
}

TEST(SolveDiscounted, InvalidParametersAreRejected) {
  const auto m = quadratic_hamiltonian(cos1d());
  const TorusGrid g(1, 64);
  try {
    solve_discounted(m, diffusion::one<double>(1), g, params(0.0, 0.0));
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_STREQ(e.what(), "invalid range: eps must be > 0");
  }
  EXPECT_THROW(solve_discounted(m, diffusion::degenerate<double>(1), g, params(0.1, 0.0)), DomainError);
  EXPECT_NO_THROW(solve_discounted(m, diffusion::one<double>(1), g, params(0.1, 0.0)));
}

TEST(SolveDiscounted, ReportsNonConvergenceWithHistory) {
  auto p = params(1e-3, 1e-3);
  p.max_steps = 1;
  try {
    solve_discounted(quadratic_hamiltonian(cos1d()), diffusion::zero<double>(1), TorusGrid(1, 512), p);
    FAIL();
  } catch (const ConvergenceError& e) {
    EXPECT_NE(std::string(e.what()).find("not converged"), std::string::npos);
    EXPECT_EQ(e.history().size(), 2u);
  }
}

TEST(SolveDiscounted, PseudoTimeMarchAgreesWithNewton) {
  const auto m = quadratic_hamiltonian(cos1d());
  const TorusGrid g(1, 32);
  auto p = params(0.5, 0.0);
  const auto newton = solve_discounted(m, diffusion::one<double>(1), g, p);
  p.method = SolveMethod::PseudoTime;
  p.max_steps = 200000;
  const auto march = solve_discounted(m, diffusion::one<double>(1), g, p);
  EXPECT_LE((newton.solution.values - march.solution.values).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_GT(march.iterations, newton.iterations);
}

TEST(SolveDiscounted, ComparisonPrinciple) {
  // Raising V lowers u: eps u + H = a Lap u is order-reversing in V.
  Gen gen(34);
  for (int t = 0; t < 8; ++t) {
    const int dim = gen.integer(1, 2);
    const TorusGrid g(dim, dim == 1 ? 128 : 16);
    const auto v = gen.trig(dim, 2, 2, 0.5);
    auto bump = gen.trig(dim, 2, 2, 0.3);
    bump = bump + (bump.sup_bound() - bump.constant_term());  // >= 0
    const auto diff = gen.positive_diffusion(dim);
    const auto p = params(gen.uniform(0.05, 0.5), 0.0);
    const auto lo = solve_discounted(quadratic_hamiltonian(v), diff, g, p);
    auto ts = v.terms();
    for (const auto& b : bump.terms()) ts.push_back(b);
    const PeriodicFunction<double> raised(dim, v.constant_term() + bump.constant_term(), ts);
    const auto up = solve_discounted(quadratic_hamiltonian(raised), diff, g, p);
    EXPECT_LE((up.solution.values - lo.solution.values).maxCoeff(), 1e-9);
    // A constant shift of V moves u by exactly -shift/eps.
    const auto shifted = solve_discounted(quadratic_hamiltonian(v + 0.25), diff, g, p);
    EXPECT_LE((shifted.solution.values.array() - (lo.solution.values.array() - 0.25 / p.eps)).abs().maxCoeff(), 1e-8);
  }
}

TEST(SolveDiscounted, ResidualIsBelowThresholdOnReturn) {
  Gen gen(35);
  for (int t = 0; t < 6; ++t) {
    const int dim = gen.integer(1, 2);
    const TorusGrid g(dim, dim == 1 ? 256 : 32);
    const auto m = gen.model(dim);
    const auto diff = gen.positive_diffusion(dim);
    const auto prob = make_problem(m, diff, g, 0.1, 0.0);
    const auto rep = solve_discounted(m, diff, g, params(0.1, 0.0));
    EXPECT_LE(scheme_residual(prob, rep.solution.values).cwiseAbs().maxCoeff(), 2 * rep.residual_threshold);
    EXPECT_LE(rep.final_residual, rep.residual_threshold);
  }
}

TEST(SolveDiscounted, FirstOrderProxyConstantIsMaxV) {
  const auto rep = solve_discounted(quadratic_hamiltonian(cos1d()), diffusion::zero<double>(1), TorusGrid(1, 4096),
                                    params(1e-3, 1e-3));
  EXPECT_GE(rep.c_estimate, 0.97);
  EXPECT_LE(rep.c_estimate, 1.03);
}

TEST(SolveDiscounted, ConstantIsStableUnderRefinement) {
  const auto m = quadratic_hamiltonian(cos1d());
  const auto coarse = solve_discounted(m, diffusion::one<double>(1), TorusGrid(1, 1024), params(1e-3, 0.0));
  const auto fine = solve_discounted(m, diffusion::one<double>(1), TorusGrid(1, 4096), params(1e-3, 0.0));
  EXPECT_NEAR(coarse.c_estimate, fine.c_estimate, 5e-3);
}

TEST(ErgodicConstant, ZeroPotential) {
  const auto est = estimate_ergodic_constant(quadratic_hamiltonian(zero_v()), diffusion::one<double>(1),
                                             TorusGrid(1, 128), {0.1, 0.05, 0.025}, 0.0);
  EXPECT_EQ(est.c, 0.0);
}

TEST(ErgodicConstant, DegenerateAtTheMaximizerOfV) {
  const auto m = quadratic_hamiltonian(cos1d());
  const auto diff = diffusion::degenerate<double>(1);
  const TorusGrid g(1, 2048);
  const auto est = estimate_ergodic_constant(m, diff, g, {4e-3, 2e-3, 1e-3}, 1e-3);
  EXPECT_NEAR(est.c, 1.0, 0.03);
  EXPECT_EQ(est.table.size(), 3u);
  EXPECT_TRUE(std::isnan(est.table[0].extrapolated));
  // Cross-check against -<L, mu> at the last point.
  const auto& rep = est.reports.back();
  const auto op = assemble_linearization(m, diff, g, rep.solution, params(1e-3, 1e-3));
  const auto theta = solve_adjoint(op, 0);
  const auto mu = pushforward_to_velocity(build_nu(rep.solution, theta, m), m);
  EXPECT_NEAR(-action(mu, m), est.c, 0.03);
}

TEST(ErgodicConstant, RejectsBadSequences) {
  const auto m = quadratic_hamiltonian(cos1d());
  const TorusGrid g(1, 64);
  EXPECT_THROW(estimate_ergodic_constant(m, diffusion::one<double>(1), g, {0.1, 0.05}, 0.0), DomainError);
  EXPECT_THROW(estimate_ergodic_constant(m, diffusion::one<double>(1), g, {0.1, 0.2, 0.05}, 0.0), DomainError);
}

TEST(ErgodicSolve, BorderedNewtonMatchesDiscountedLimit) {
  const auto m = quadratic_hamiltonian(cos1d());
  const TorusGrid g(1, 512);
  const auto rep = solve_discounted(m, diffusion::one<double>(1), g, params(1e-2, 0.0));
  const auto erg = solve_ergodic(m, diffusion::one<double>(1), g, 0.0, rep);
  EXPECT_NEAR(erg.corrector[0], 0.0, 1e-15);
  const auto prob = make_problem(m, diffusion::one<double>(1), g, 0.0, 0.0);
  const Vector<double> r = scheme_residual(prob, erg.corrector.values).array() - erg.c;
  EXPECT_LE(r.cwiseAbs().maxCoeff(), 1e-9);
  // c_eps = c + O(eps).
  EXPECT_NEAR(rep.c_estimate, erg.c, 5e-2);
}

TEST(SelectionLimit, ZeroPotentialGivesZeroLimit) {
  const auto sel = selection_limit(quadratic_hamiltonian(zero_v()), diffusion::one<double>(1), TorusGrid(1, 128),
                                   {0.1, 0.05, 0.025, 0.0125}, EtaRule::eps_squared());
  EXPECT_EQ(sel.u0.sup_norm(), 0.0);
  for (double d : sel.cauchy) EXPECT_EQ(d, 0.0);
  EXPECT_TRUE(sel.trend);
}

TEST(SelectionLimit, DegenerateCauchyDifferencesDecrease) {
  std::vector<double> eps;
  for (int k = 0; k < 6; ++k) eps.push_back(0.1 / (1 << k));
  const auto sel = selection_limit(quadratic_hamiltonian(cos1d()), diffusion::degenerate<double>(1), TorusGrid(1, 1024),
                                   eps, EtaRule::eps_squared());
  ASSERT_EQ(sel.cauchy.size(), 5u);
  EXPECT_LT(sel.cauchy[4], sel.cauchy[3]);
  EXPECT_LT(sel.cauchy[3], sel.cauchy[2]);
  EXPECT_TRUE(sel.converged);
}

TEST(SelectionLimit, RequiresHalvingSequence) {
  EXPECT_THROW(selection_limit(quadratic_hamiltonian(cos1d()), diffusion::one<double>(1), TorusGrid(1, 64),
                               {0.1, 0.03, 0.01}, EtaRule::eps_squared()),
               DomainError);
}

TEST(EtaRule, Kinds) {
  EXPECT_DOUBLE_EQ(EtaRule::fixed(0.3)(0.01), 0.3);
  EXPECT_DOUBLE_EQ(EtaRule::eps_squared()(0.1), 0.1 * 0.1);
  EXPECT_DOUBLE_EQ(EtaRule::eps_linear(0.5)(0.1), 0.05);
}
