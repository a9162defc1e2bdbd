#include "nsmono/fixtures.hpp"
#include "nsmono/functionals.hpp"

#include "oracles/random_pairs.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace nsmono;
using oracle::PolyPair;
using oracle::random_pair;

namespace {

const Resolution kRes{32, 16, 1e-3};

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

// The coefficient pattern of the identity holds exactly for arbitrary polynomial pairs.
TEST(MonotonicityOracle, DefectSeriesVanishesIdentically) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const PolyPair pp = random_pair(seed);
    const auto m = oracle::monotonicity(pp.u_expr, pp.P_expr);
    const double scale = std::max(1.0, m.A.derivative().max_abs_coeff());
    EXPECT_LT(m.defect.max_abs_coeff() / scale, 1e-13) << "seed " << seed;
  }
}

TEST(MonotonicityOracle, HomogeneousFieldDefectVanishes) {
  // u = e1 / |x| with P = 0.
  oracle::VecExpr u;
  u[0] = oracle::Expr::radial(-1);
  const auto m = oracle::monotonicity(u, oracle::Expr{});
  EXPECT_LT(m.defect.max_abs_coeff(), 1e-13);
}

TEST(MonotonicityQuantities, MatchMonomialOracle) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const PolyPair pp = random_pair(seed);
    const VectorField u = fixtures::polynomial(pp.u);
    const ScalarField P = fixtures::scalar_polynomial(pp.P);
    const auto m = oracle::monotonicity(pp.u_expr, pp.P_expr);
    for (double r : {0.6, 1.1}) {
      const auto q = monotonicity_quantities(u, P, r, kRes);
      EXPECT_LT(rel(q.A, m.A(r)), 1e-10) << seed;
      EXPECT_LT(rel(q.D, m.D(r)), 1e-10) << seed;
      EXPECT_LT(rel(q.Q, m.Q(r)), 1e-10) << seed;
      EXPECT_LT(rel(q.M, m.U(r) / std::pow(r, 3) + m.G(r) / r), 1e-10) << seed;
      EXPECT_LT(rel(q.wp, 2.0 * m.Phi(r) / (r * r)), 1e-10) << seed;
      EXPECT_LT(rel(flux_defect(u, P, r, kRes), m.T(r)), 1e-10) << seed;
      EXPECT_LT(rel(A_prime_fd(u, P, r, 1e-3 * r, kRes), m.A.derivative()(r)), 1e-5) << seed;
    }
  }
}

TEST(MonotonicityIdentity, DefectBelowToleranceOnFixtures) {
  std::vector<std::pair<VectorField, ScalarField>> cases = {
      {fixtures::constant(unit(0)), zero_scalar_field()},
      {fixtures::linear_radial(), zero_scalar_field()},
      {fixtures::gaussian_bump((Vec5() << 1, 0.5, 0, 0, -0.3).finished(), (Vec5() << 0.1, 0, 0, 0.2, 0).finished(), 0.6),
       fixtures::quadratic()},
      {fixtures::homogeneous(profiles::stokeslet(1)), zero_scalar_field()},
      {fixtures::rotation_plane(0, 2), fixtures::scalar_constant(0.4)},
  };
  for (std::uint64_t seed = 30; seed < 33; ++seed) {
    const PolyPair pp = random_pair(seed);
    cases.emplace_back(fixtures::polynomial(pp.u), fixtures::scalar_polynomial(pp.P));
  }
  for (const auto& [u, P] : cases)
    for (double r : {0.5, 1.0}) {
      const auto row = monotonicity_report(u, P, r, kRes);
      EXPECT_LT(std::abs(row.identity_defect), 5e-4) << u.label << " r=" << r;
      EXPECT_LE(row.Q, row.D + 0.25 * row.M + 1e-8) << u.label;
    }
}

TEST(MonotonicityIdentity, RichardsonImprovesDerivative) {
  const VectorField u = fixtures::linear_radial();
  const auto m = oracle::monotonicity(oracle::position(), oracle::Expr{});
  const double exact = m.A.derivative()(1.0);
  const double plain = A_prime_fd(u, zero_scalar_field(), 1.0, 1e-2, kRes);
  const double extrap = A_prime_fd(u, zero_scalar_field(), 1.0, 1e-2, kRes, true);
  EXPECT_LT(std::abs(extrap - exact), std::abs(plain - exact));
}

TEST(ScaleInvariantEnergy, Examples) {
  EXPECT_EQ(scale_invariant_energy(zero_vector_field(), 1.0, kRes), 0.0);
  EXPECT_NEAR(scale_invariant_energy(fixtures::constant(unit(0)), 1.0, kRes), 5.263789, 1e-6);
  EXPECT_NEAR(scale_invariant_energy(fixtures::homogeneous(profiles::constant(unit(0))), 1.0, kRes), 35.091927, 1e-3);
  EXPECT_NEAR(35.091927, 4.0 / 3.0 * kSphereArea, 1e-6);
}

TEST(ScaleInvariantEnergy, DomainErrors) {
  VectorField u = fixtures::constant(unit(0));
  u.r_max = 1.0;
  EXPECT_THROW(scale_invariant_energy(u, 2.0, kRes), DomainError);
  u.r_max = 10.0;
  u.r_min = 0.1;
  EXPECT_THROW(scale_invariant_energy(u, 1.0, kRes), DomainError);
  EXPECT_THROW(scale_invariant_energy(fixtures::linear_radial(), 0.0, kRes), DomainError);
}

TEST(MonotonicityQuantities, Examples) {
  const auto q = monotonicity_quantities(fixtures::constant(unit(0)), zero_scalar_field(), 1.0, kRes);
  EXPECT_NEAR(q.A, 11.84353, 1e-5);
  EXPECT_NEAR(q.D, 23.68705, 1e-5);
  EXPECT_NEAR(q.Q, 19.73921, 1e-5);
  EXPECT_NEAR(q.wp, 0.0, 1e-12);
  EXPECT_NEAR(q.A, 2.25 * kBallVolume, 1e-9);
  EXPECT_NEAR(q.D, 4.5 * kBallVolume, 1e-9);
  EXPECT_NEAR(q.Q, 3.75 * kBallVolume, 1e-9);

  const auto z = monotonicity_quantities(zero_vector_field(), zero_scalar_field(), 1.0, kRes);
  EXPECT_EQ(z.A, 0.0);
  EXPECT_EQ(z.D, 0.0);
  EXPECT_EQ(z.Q, 0.0);
  EXPECT_EQ(z.wp, 0.0);
}

// Divergence-free homogeneous u with |u|^2 + 2P = c/|x|^2 carries no flux.
TEST(MonotonicityQuantities, BernoulliConstantPressureHasNoFlux) {
  for (int k : {0, 3}) {
    const VectorField u = fixtures::homogeneous(profiles::stokeslet(k));
    ScalarField P;
    P.eval = [u](const Vec5& x) { return 0.5 * (0.8 / x.squaredNorm() - u(x).squaredNorm()); };
    P.homogeneity = -2.0;
    for (double r : {0.5, 1.0}) EXPECT_NEAR(monotonicity_quantities(u, P, r, kRes).wp, 0.0, 1e-6);
  }
}

TEST(MonotonicityQuantities, WpIsTwiceTheHalfPressureFlux) {
  const PolyPair pp = random_pair(5);
  const auto q = monotonicity_quantities(fixtures::polynomial(pp.u), fixtures::scalar_polynomial(pp.P), 0.9, kRes);
  EXPECT_EQ(q.wp, 2.0 * q.moments.Phi / (0.9 * 0.9));
}

TEST(FluxDefect, Examples) {
  EXPECT_NEAR(flux_defect(fixtures::constant(unit(0)), zero_scalar_field(), 1.0, kRes), 0.0, 1e-8);
  EXPECT_NEAR(flux_defect(fixtures::linear_radial(), zero_scalar_field(), 1.0, kRes), -13.159473, 1e-6);
  EXPECT_NEAR(flux_defect(fixtures::linear_radial(), zero_scalar_field(), 1.0, kRes), -kSphereArea / 2.0, 1e-9);
  EXPECT_EQ(flux_defect(zero_vector_field(), zero_scalar_field(), 1.0, kRes), 0.0);
}

TEST(APrime, Examples) {
  EXPECT_NEAR(A_prime_fd(fixtures::constant(unit(0)), zero_scalar_field(), 1.0, 1e-3, kRes), 23.68705, 1e-4);
  EXPECT_EQ(A_prime_fd(zero_vector_field(), zero_scalar_field(), 1.0, 1e-3, kRes), 0.0);
  const auto row = monotonicity_report(fixtures::linear_radial(), zero_scalar_field(), 1.0, kRes);
  const double from_identity = row.D + 2.0 * monotonicity_quantities(fixtures::linear_radial(), zero_scalar_field(), 1.0, kRes).moments.Phi + row.T;
  EXPECT_NEAR(row.A_prime, from_identity, 1e-4);
  EXPECT_THROW(A_prime_fd(fixtures::linear_radial(), zero_scalar_field(), 1.0, 2.0, kRes), DomainError);
}

// With T >= 0 the derivative dominates D/r plus the flux term, so A grows for constant data.
TEST(MonotonicityIdentity, SuitableDirection) {
  const VectorField u = fixtures::constant((Vec5() << 0.3, 1, 0, -2, 0).finished());
  double previous = -1.0;
  for (double r = 0.2; r <= 1.6; r += 0.2) {
    const auto row = monotonicity_report(u, zero_scalar_field(), r, kRes);
    ASSERT_GE(row.T, -1e-10);
    const auto q = monotonicity_quantities(u, zero_scalar_field(), r, kRes);
    EXPECT_GE(row.A_prime - q.D / r - 2.0 * q.moments.Phi / (r * r * r), -5e-4);
    EXPECT_GE(row.A, previous);
    previous = row.A;
  }
}

TEST(ScaleInvariance, RescaledFieldsMatchRescaledRadii) {
  const VectorField u = fixtures::gaussian_bump((Vec5() << 1, -0.5, 0.2, 0, 0).finished(),
                                                (Vec5() << 0.2, 0, -0.1, 0, 0).finished(), 0.7);
  const ScalarField P = fixtures::scalar_polynomial(Polynomial({{{1, 1, 0, 0, 0}, 0.5}, {{0, 0, 0, 0, 2}, -1.0}}));
  for (double lambda : {0.5, 2.0}) {
    const VectorField ul = rescale_velocity(u, lambda);
    const ScalarField Pl = rescale_pressure(P, lambda);
    for (double R : {0.3, 0.6}) {
      EXPECT_NEAR(scale_invariant_energy(ul, R, kRes), scale_invariant_energy(u, lambda * R, kRes), 1e-8);
      EXPECT_NEAR(monotonicity_A(ul, Pl, R, kRes), monotonicity_A(u, P, lambda * R, kRes), 1e-8);
    }
  }
}

TEST(CompletingSquare, DefectIsRoundoff) {
  const std::vector<VectorField> fields = {
      fixtures::constant(unit(2)), fixtures::linear_radial(), fixtures::rotation_plane(1, 4),
      fixtures::gaussian_bump(unit(0), unit(1), 0.8),
      fixtures::polynomial(random_pair(9).u)};
  for (const auto& u : fields) EXPECT_LT(std::abs(completing_square_defect(u, 1.0, kRes)), 1e-8) << u.label;
}

namespace {

// phi = (1 - |x|^2)^2 on B_1.
TestFunction bubble() {
  TestFunction t;
  t.phi.eval = [](const Vec5& x) {
    const double s = 1.0 - x.squaredNorm();
    return s * s;
  };
  t.phi.grad = [](const Vec5& x) -> Vec5 { return -4.0 * (1.0 - x.squaredNorm()) * x; };
  t.laplacian = [](const Vec5& x) { return -20.0 + 28.0 * x.squaredNorm(); };
  t.support_radius = 1.0;
  return t;
}

}  // namespace

TEST(EnergyDefect, Examples) {
  EXPECT_EQ(energy_defect_residual(zero_vector_field(), zero_scalar_field(), bubble(), kRes), 0.0);
  EXPECT_NEAR(energy_defect_residual(fixtures::constant((Vec5() << 1, 2, 0, 0, -1).finished()), zero_scalar_field(),
                                     radial_cutoff(0.5, 0.4), kRes),
              0.0, 1e-7);
  EXPECT_NEAR(energy_defect_residual(fixtures::constant(unit(3)), zero_scalar_field(), bubble(), kRes), 0.0, 1e-7);
}

TEST(EnergyDefect, LinearRadialAgainstOracleAndRefinement) {
  // Integrand (r^2/2)(-4 r^2 (1 - r^2)) + (r^2/2)(-20 + 28 r^2) - 5 (1 - r^2)^2.
  using oracle::Expr;
  const Expr r2 = Expr::radial(2);
  const Expr one = Expr::constant(1.0);
  const Expr integrand = 0.5 * r2 * (-4.0 * r2 * (one - r2)) + 0.5 * r2 * (-20.0 * one + 28.0 * r2) -
                         5.0 * (one - r2) * (one - r2);
  const double exact = oracle::ball_integral(integrand)(1.0);
  const double coarse = energy_defect_residual(fixtures::linear_radial(), zero_scalar_field(), bubble(), kRes);
  const double fine = energy_defect_residual(fixtures::linear_radial(), zero_scalar_field(), bubble(), Resolution{48, 20, 1e-3});
  EXPECT_NEAR(coarse, fine, 1e-6);
  EXPECT_NEAR(coarse, exact, 1e-6);
}

TEST(EnergyDefect, SupportTouchingBoundaryRaises) {
  const TestFunction wide = radial_cutoff(0.8, 0.5);
  EXPECT_THROW(energy_defect_residual(fixtures::linear_radial(), zero_scalar_field(), wide, 1.0, kRes), SupportError);
  EXPECT_NO_THROW(energy_defect_residual(fixtures::linear_radial(), zero_scalar_field(), wide, kRes));
}

TEST(RadialCutoff, Examples) {
  const double r = 0.5, eps = 0.25;
  const TestFunction c = radial_cutoff(r, eps);
  EXPECT_EQ(c.phi(Vec5::Zero()), 1.0);
  EXPECT_EQ(c.phi((r + eps) * unit(2)), 0.0);
  EXPECT_EQ(c.phi(0.9 * r * unit(1)), 1.0);
  // The smootherstep slope at the midpoint is 30 s^2 (1 - s)^2 / eps with s = 1/2.
  const Vec5 sigma = testing_support::random_units(1, 3)[0];
  const Vec5 g = c.phi.grad((r + 0.5 * eps) * sigma);
  EXPECT_LT((g + 1.875 / eps * sigma).norm(), 1e-12);
  EXPECT_LT(g.dot(sigma), 0.0);
  EXPECT_THROW(radial_cutoff(1.0, 0.0), DomainError);
}

TEST(RadialCutoff, ProfileIsMonotoneAndDerivativesConsistent) {
  const TestFunction c = radial_cutoff(0.4, 0.3);
  double prev = 1.0;
  for (double rho = 0.0; rho <= 0.8; rho += 0.01) {
    const double v = c.phi(rho * unit(0));
    EXPECT_LE(v, prev + 1e-15);
    prev = v;
  }
  for (const Vec5& x : testing_support::random_points(30, 0.42, 0.68, 4)) {
    EXPECT_LT((c.phi.grad(x) - ambient_gradient(ScalarField{c.phi.eval}, x, 1e-6)).norm(), 1e-6);
    EXPECT_NEAR(c.laplacian(x), detail::fd_laplacian(c.phi, x), 1e-4 * std::abs(c.laplacian(x)));
  }
}

TEST(EpsRegularity, Examples) {
  EXPECT_EQ(eps_regularity_quantity(zero_vector_field(), zero_scalar_field(), 1.0, kRes), 0.0);
  EXPECT_NEAR(eps_regularity_quantity(fixtures::constant(unit(0)), zero_scalar_field(), 1.0, kRes), 5.263789, 1e-6);
  EXPECT_NEAR(eps_regularity_quantity(fixtures::homogeneous(profiles::constant(unit(0))), zero_scalar_field(), 1.0, kRes),
              13.159473, 1e-3);
  EXPECT_NEAR(eps_regularity_quantity(zero_vector_field(), fixtures::quadratic(), 1.0, kRes), kSphereArea / 8.0, 1e-8);
}

TEST(EnergyRecurrence, Examples) {
  const auto z = energy_recurrence_terms(zero_vector_field(), zero_scalar_field(), 0.25, kRes);
  EXPECT_EQ(z.M_quarter, 0.0);
  EXPECT_EQ(z.M_whole, 0.0);
  EXPECT_EQ(z.cubic, 0.0);
  EXPECT_NEAR(energy_recurrence_terms(fixtures::constant(unit(0)), zero_scalar_field(), 0.25, kRes).cubic, 0.0, 1e-8);

  const auto coarse = energy_recurrence_terms(fixtures::linear_radial(), zero_scalar_field(), 0.25, kRes);
  const auto fine = energy_recurrence_terms(fixtures::linear_radial(), zero_scalar_field(), 0.25, Resolution{64, 20, 1e-3});
  EXPECT_NEAR(coarse.M_quarter, fine.M_quarter, 1e-6);
  EXPECT_NEAR(coarse.M_whole, fine.M_whole, 1e-6);
  EXPECT_NEAR(coarse.cubic, fine.cubic, 1e-6);
  // M(R) for u = x is |S| (R^2/7 + 5 R^4 / 5) / R^... closed form: int |x|^2 / R^3 + 5 / R.
  const double R = 0.25;
  EXPECT_NEAR(coarse.M_quarter, kSphereArea * std::pow(R, 4) / 7.0 + kBallVolume * 5.0 * std::pow(R, 4), 1e-9);
}
