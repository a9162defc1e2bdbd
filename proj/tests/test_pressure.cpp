#include "nsmono/fixtures.hpp"
#include "nsmono/pressure.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace nsmono;

namespace {

double max_abs_diff(const TorusGrid& a, const std::function<double(const Vec5&)>& f) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.points(); ++i) m = std::max(m, std::abs(a.at(0, i) - f(a.position(i))));
  return m;
}

double max_abs(const TorusGrid& a) {
  double m = 0.0;
  for (double v : a.values) m = std::max(m, std::abs(v));
  return m;
}

VectorProfile values_only(std::function<Vec5(const Vec5&)> g) {
  VectorProfile f;
  f.value = [g](const Vec5& x) -> Vec5 { return g(Vec5(x / x.norm())); };
  return f;
}

}  // namespace

TEST(PressureRecovery, ConstantVelocityHasNoPressure) {
  const auto u = sample_torus(fixtures::constant((Vec5() << 1, -2, 0.5, 0, 3).finished()), 2.0 * kPi, 8);
  EXPECT_LT(max_abs(recover_pressure_periodic(u)), 1e-12);
}

TEST(PressureRecovery, SingleModeExample) {
  for (double L : {2.0 * kPi, 3.0}) {
    const auto u = sample_torus(fixtures::trig({{0, 1.0, {1, 0, 0, 0, 0}, false}}, L), L, 16);
    const auto p = recover_pressure_periodic(u);
    const double kappa = 4.0 * kPi / L;
    EXPECT_LT(max_abs_diff(p, [&](const Vec5& x) { return 0.5 * std::cos(kappa * x(0)); }), 1e-10);
  }
}

// u1 = sin x2, u2 = sin x1: div div(u x u) = 2 cos x1 cos x2, so p = cos x1 cos x2.
TEST(PressureRecovery, TwoModeClosedForm) {
  const auto u = sample_torus(fixtures::trig({{0, 1.0, {0, 1, 0, 0, 0}, false}, {1, 1.0, {1, 0, 0, 0, 0}, false}}, 2.0 * kPi),
                              2.0 * kPi, 8);
  const auto p = recover_pressure_periodic(u);
  EXPECT_LT(max_abs_diff(p, [](const Vec5& x) { return std::cos(x(0)) * std::cos(x(1)); }), 1e-10);
}

TEST(PressureRecovery, SolvesThePoissonEquationSpectrally) {
  const double L = 2.0 * kPi;
  const auto u = sample_torus(fixtures::trig({{0, 1.0, {0, 1, 0, 0, 0}, false},
                                              {1, 1.0, {1, 0, 0, 0, 0}, false},
                                              {1, 0.7, {0, 0, 1, 0, 1}, true},
                                              {2, 0.5, {1, 0, 1, 0, 0}, false},
                                              {3, -0.4, {1, 1, 0, 1, 0}, false},
                                              {4, 0.3, {0, 0, 2, 1, 1}, true}},
                                             L),
                              L, 16);
  const auto p = recover_pressure_periodic(u);
  const auto lap = spectral_laplacian(p);
  const auto dd = spectral_div_div(u);
  double defect = 0.0;
  for (std::size_t i = 0; i < p.points(); ++i) defect = std::max(defect, std::abs(-lap.at(0, i) - dd.at(0, i)));
  ASSERT_GT(max_abs(dd), 0.1);
  EXPECT_LT(defect, 1e-9 * max_abs(dd));
  EXPECT_NEAR(torus_mean(p), 0.0, 1e-15);
}

TEST(PressureRecovery, MeanIsZero) {
  const auto u = sample_torus(fixtures::trig({{2, 1.0, {1, 0, 0, 0, 0}, false}, {2, 0.5, {0, 0, 0, 0, 0}, true}}, 2.0), 2.0, 8);
  EXPECT_NEAR(torus_mean(recover_pressure_periodic(u)), 0.0, 1e-15);
}

TEST(PressureRecovery, ResolutionChecks) {
  EXPECT_THROW(validate_torus(9), ConfigError);
  EXPECT_THROW(validate_torus(6), ConfigError);
  EXPECT_THROW(validate_torus(64), ConfigError);
  EXPECT_NO_THROW(validate_torus(8));
  TorusGrid odd;
  odd.n = 9;
  odd.channels = kDim;
  EXPECT_THROW(recover_pressure_periodic(odd), ConfigError);
}

TEST(PeriodicField, EvaluatesBetweenGridPoints) {
  const double L = 2.0 * kPi;
  const auto u = sample_torus(fixtures::trig({{0, 1.0, {1, 0, 0, 0, 0}, false}}, L), L, 16);
  const ScalarField p = periodic_field(recover_pressure_periodic(u));
  for (const Vec5& x : testing_support::random_points(20, 0.1, 3.0, 2)) {
    EXPECT_NEAR(p(x), 0.5 * std::cos(2.0 * x(0)), 1e-12);
    EXPECT_LT((p.grad(x) - (-std::sin(2.0 * x(0))) * unit(0)).norm(), 1e-11);
  }
  EXPECT_TRUE(periodic_field(recover_pressure_periodic(sample_torus(fixtures::constant(unit(0)), L, 8))).identically_zero);
}

TEST(TorusFiles, RoundTripIsBitExact) {
  const auto dir = std::filesystem::temp_directory_path() / "nsmono_torus_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "u.bin";
  const auto u = sample_torus(fixtures::trig({{1, 0.3, {1, 2, 0, 0, 1}, true}}, 2.0), 2.0, 8);
  write_torus(path, u);
  EXPECT_FALSE(std::filesystem::exists(path.string() + ".tmp"));
  const auto back = read_torus(path);
  EXPECT_EQ(back.n, u.n);
  EXPECT_EQ(back.channels, u.channels);
  EXPECT_EQ(back.L, u.L);
  EXPECT_EQ(back.values, u.values);

  std::ifstream is(path, std::ios::binary);
  std::string header;
  std::getline(is, header);
  const auto j = nlohmann::json::parse(header);
  EXPECT_EQ(j.at("byte_order"), "little");
  EXPECT_EQ(j.at("shape").size(), 6u);
  std::filesystem::remove_all(dir);
}

TEST(TorusFiles, MissingOrTruncatedFilesRaise) {
  EXPECT_THROW(read_torus("/nonexistent/nsmono.bin"), IoError);
  const auto path = std::filesystem::temp_directory_path() / "nsmono_truncated.bin";
  {
    std::ofstream os(path);
    os << R"({"shape":[1,8,8,8,8,8],"L":1.0,"dtype":"float64","byte_order":"little"})" << '\n' << "abc";
  }
  EXPECT_THROW(read_torus(path), IoError);
  std::filesystem::remove(path);
}

TEST(Omega, Examples) {
  const auto zero = omega_from_zeta(values_only([](const Vec5&) -> Vec5 { return Vec5::Zero(); }));
  const auto e1 = omega_from_zeta(values_only([](const Vec5&) -> Vec5 { return unit(0); }));
  const auto id = omega_from_zeta(values_only([](const Vec5& s) -> Vec5 { return s; }));
  for (const Vec5& s : testing_support::random_units(30, 8)) {
    EXPECT_EQ(zero(s).norm(), 0.0);
    EXPECT_LT((e1(s) + s(0) * unit(0)).norm(), 1e-6);
    EXPECT_LT((id(s) + s).norm(), 1e-5);
  }
}

// |x|^3 (h.grad)h at |x| = 1 by central differences.
TEST(Omega, MatchesAmbientConvection) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  std::vector<VectorProfile> profiles_ = {
      polynomial_profile(profiles::stokeslet(2)), polynomial_profile(profiles::rotation(0, 4)),
      polynomial_profile(profiles::gradient_of_coordinate(1)),
      values_only([](const Vec5& s) -> Vec5 { return (Vec5() << s(1) * s(2), 1.0, -s(0), s(4) * s(4), s(3)).finished(); })};
  for (const auto& zeta : profiles_) {
    const auto omega = omega_from_zeta(zeta);
    auto h = [&](const Vec5& x) -> Vec5 { return zeta(Vec5(x / x.norm())) / x.norm(); };
    for (const Vec5& s : testing_support::random_units(20, 12)) {
      const Vec5 v = h(s);
      const double step = 1e-5;
      const Vec5 conv = (h(Vec5(s + step * v)) - h(Vec5(s - step * v))) / (2.0 * step);
      EXPECT_LT((omega(s) - conv).norm(), 1e-5);
    }
  }
}

TEST(ReconstructXi, ZeroOmega) {
  const auto r = reconstruct_xi(values_only([](const Vec5&) -> Vec5 { return Vec5::Zero(); }), unit(4), sphere_samples(4));
  for (double v : r.samples.values) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(r.radial_defect, 0.0);
  EXPECT_EQ(r.loop_defect, 0.0);
  EXPECT_FALSE(r.non_integrable);
}

TEST(ReconstructXi, RecoversManufacturedGradients) {
  struct Case {
    std::function<double(const Vec5&)> g;
    Polynomial poly;
  };
  const std::vector<Case> cases = {
      {[](const Vec5& s) { return s(0); }, Polynomial::coordinate(0)},
      {[](const Vec5& s) { return s(0) * s(1) + s(2); }, Polynomial({{{1, 1, 0, 0, 0}, 1.0}, {{0, 0, 1, 0, 0}, 1.0}})},
      {[](const Vec5& s) { return s(3) * s(3) * s(4); }, Polynomial({{{0, 0, 0, 2, 1}, 1.0}})},
  };
  const auto sphere = sphere_samples(6);
  for (const Vec5& sigma0 : {unit(4), Vec5((Vec5() << 0.6, 0, 0.8, 0, 0).finished())}) {
    for (const auto& c : cases) {
      const ScalarProfile g = polynomial_profile(c.poly);
      VectorProfile omega;
      omega.value = [g](const Vec5& x) -> Vec5 { return g.tangential(x); };
      for (int panels : {128, 256}) {
        XiOptions opt;
        opt.panels = panels;
        const auto r = reconstruct_xi(omega, sigma0, sphere, opt);
        double worst = 0.0;
        for (std::size_t i = 0; i < sphere->size(); ++i)
          worst = std::max(worst, std::abs(r.samples.values[i] - (c.g(sphere->nodes[i]) - c.g(sigma0))));
        EXPECT_LT(worst, 1e-5);
        EXPECT_LT(r.loop_defect, 1e-6);
        EXPECT_FALSE(r.loop_warning);
        // The antipode goes through the intermediate node.
        EXPECT_NEAR(r.xi(Vec5(-sigma0)), c.g(-sigma0) - c.g(sigma0), 1e-5);
      }
    }
  }
}

TEST(ReconstructXi, ConstantProfileIsNotAHomogeneousPressure) {
  const auto sphere = sphere_samples(8);
  const auto omega = omega_from_zeta(polynomial_profile(profiles::constant(unit(0))));
  const Vec5 sigma0 = unit(4);
  const auto r = reconstruct_xi(omega, sigma0, sphere);
  for (std::size_t i = 0; i < sphere->size(); ++i) {
    const double s1 = sphere->nodes[i](0);
    EXPECT_NEAR(r.samples.values[i], -0.5 * (s1 * s1 - sigma0(0) * sigma0(0)), 1e-5);
  }
  // 2 xi + omega.sigma = -2 sigma1^2 + const ranges over [-2, 0].
  EXPECT_NEAR(r.radial_defect, 2.0, 1e-3);
  EXPECT_TRUE(r.radial_warning);
  EXPECT_TRUE(r.non_integrable);
}

TEST(ReconstructXi, LoopDefectFlagsNonGradients) {
  VectorProfile rot;
  rot.value = [](const Vec5& x) -> Vec5 {
    const Vec5 s = x / x.norm();
    return (Vec5() << -s(1), s(0), 0, 0, 0).finished();
  };
  const auto r = reconstruct_xi(rot, unit(4), sphere_samples(4));
  EXPECT_GT(r.loop_defect, 1e-2);
  EXPECT_TRUE(r.loop_warning);
  EXPECT_TRUE(r.non_integrable);
}

TEST(ReconstructXi, OddPanelCountRejected) {
  XiOptions opt;
  opt.panels = 3;
  EXPECT_THROW(reconstruct_xi(values_only([](const Vec5& s) -> Vec5 { return s; }), unit(4), sphere_samples(4), opt),
               ConfigError);
}

TEST(BernoulliHead, Examples) {
  const auto sphere = sphere_samples(8);
  const auto zero_v = sample(values_only([](const Vec5&) -> Vec5 { return Vec5::Zero(); }), sphere, true);
  auto scalar = [&](std::function<double(const Vec5&)> g) {
    ScalarProfile p;
    p.value = [g](const Vec5& x) { return g(Vec5(x / x.norm())); };
    return sample(p, sphere);
  };
  const auto zero_s = scalar([](const Vec5&) { return 0.0; });
  const auto one = scalar([](const Vec5&) { return 1.0; });
  for (double v : bernoulli_head(zero_v, zero_s, zero_s).values) EXPECT_EQ(v, 0.0);
  for (double v : bernoulli_head(zero_v, one, zero_s).values) EXPECT_EQ(v, 1.0);
  const auto rot = sample(values_only([](const Vec5& s) -> Vec5 { return (Vec5() << -s(1), s(0), 0, 0, 0).finished(); }),
                          sphere, true);
  const auto p = scalar([](const Vec5& s) { return -0.5 * (s(0) * s(0) + s(1) * s(1)); });
  for (double v : bernoulli_head(rot, zero_s, p).values) EXPECT_NEAR(v, 0.0, 1e-12);
  EXPECT_THROW(bernoulli_head(rot, zero_s, sample(ScalarProfile{[](const Vec5&) { return 0.0; }}, sphere_samples(4))),
               DomainError);
}
