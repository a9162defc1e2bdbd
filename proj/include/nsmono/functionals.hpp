#pragma once

#include "nsmono/errors.hpp"
#include "nsmono/field.hpp"
#include "nsmono/grid.hpp"
#include "nsmono/quadrature.hpp"
#include "nsmono/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

namespace nsmono {

/// One row of a radial profile.
struct MonotonicityReport {
  double r = 0.0;
  double M = 0.0;
  double A = 0.0;
  double D = 0.0;
  double Q = 0.0;
  double wp = 0.0;
  double T = 0.0;
  double A_prime = 0.0;
  double identity_defect = 0.0;
};

/// Raw ball integrals over B_r from which A, D, Q, wp and M are assembled.
struct BallMoments {
  double U = 0.0;    ///< |u|^2
  double I = 0.0;    ///< u . (x.grad) u
  double Phi = 0.0;  ///< (|u|^2/2 + P) u . sigma
  double G = 0.0;    ///< |grad u|^2
  double X = 0.0;    ///< |x|^2 |grad u|^2
  double K = 0.0;    ///< |grad(|x| u)|^2
};

struct MonotonicityQuantities {
  double A = 0.0;
  double D = 0.0;
  double Q = 0.0;
  double wp = 0.0;
  double M = 0.0;
  BallMoments moments;
};

namespace detail {

inline void require_ball(const VectorField& u, double R) {
  if (!(R > 0.0)) throw DomainError("radius must be positive");
  if (u.r_min > 0.0) throw DomainError("field '" + u.label + "' is not defined up to the origin");
  if (!(R < u.r_max)) throw DomainError("ball leaves the domain of field '" + u.label + "'");
}

inline void require_ball(const ScalarField& p, double R) {
  if (p.identically_zero) return;
  if (p.r_min > 0.0 || !(R < p.r_max)) throw DomainError("ball leaves the pressure domain");
}

/// Power-law exponents are available when u is homogeneous and P is either
/// zero or homogeneous of twice the degree.
struct PowerLaw {
  std::optional<double> d;
  bool pressure_matches = false;

  RadialExponent times(double k) const { return d ? RadialExponent(k * *d) : std::nullopt; }
  RadialExponent shift(double k, double s) const { return d ? RadialExponent(k * *d + s) : std::nullopt; }
  RadialExponent with_pressure(double k) const { return (d && pressure_matches) ? RadialExponent(k * *d) : std::nullopt; }
};

inline PowerLaw power_law(const VectorField& u, const ScalarField& p) {
  PowerLaw pl;
  pl.d = u.homogeneity;
  if (pl.d) pl.pressure_matches = p.identically_zero || (p.homogeneity && *p.homogeneity == 2.0 * *pl.d);
  return pl;
}

inline double pressure_at(const ScalarField& p, const Vec5& x) { return p.identically_zero ? 0.0 : p.eval(x); }

}  // namespace detail

inline BallMoments ball_moments(const VectorField& u, const ScalarField& P, double r, const Resolution& res = {}) {
  detail::require_ball(u, r);
  detail::require_ball(P, r);
  BallMoments m;
  if (u.identically_zero) return m;
  const BallGrid grid = ball_grid(r, res);
  const auto pl = detail::power_law(u, P);
  const auto v = integrate_ball_multi<6>(
      [&](const Vec5& x) {
        const double rho = x.norm();
        const Vec5 s = x / rho;
        const Vec5 w = u.eval(x);
        const Mat5 J = ambient_gradient(u, x);
        const double w2 = w.squaredNorm();
        const double g2 = J.squaredNorm();
        const Mat5 radial = w * s.transpose() + rho * J;
        return std::array<double, 6>{w2,
                                     w.dot(J * x),
                                     (0.5 * w2 + detail::pressure_at(P, x)) * w.dot(s),
                                     g2,
                                     rho * rho * g2,
                                     radial.squaredNorm()};
      },
      grid,
      {pl.times(2), pl.times(2), pl.with_pressure(3), pl.shift(2, -2), pl.times(2), pl.times(2)});
  m.U = v[0];
  m.I = v[1];
  m.Phi = v[2];
  m.G = v[3];
  m.X = v[4];
  m.K = v[5];
  return m;
}

inline MonotonicityQuantities assemble_quantities(const BallMoments& m, double r) {
  const double r2 = r * r, r3 = r2 * r;
  MonotonicityQuantities q;
  q.moments = m;
  q.A = m.I / r3 + 2.25 * m.U / r3 - m.Phi / r2;
  const double tail = 0.75 / r3 * (r2 * m.G - m.X);
  q.Q = 3.75 / r3 * m.U + 0.25 / r * m.G + tail;
  q.D = q.Q + 0.75 / r3 * m.K;
  q.wp = 2.0 * m.Phi / r2;
  q.M = m.U / r3 + m.G / r;
  return q;
}

/// A, D, Q and the scaled Bernoulli flux wp on B_r.
inline MonotonicityQuantities monotonicity_quantities(const VectorField& u, const ScalarField& P, double r,
                                                      const Resolution& res = {}) {
  return assemble_quantities(ball_moments(u, P, r, res), r);
}

/// M(R) = int_{B_R} |u|^2 / R^3 + |grad u|^2 / R.
inline double scale_invariant_energy(const VectorField& u, double R, const Resolution& res = {}) {
  detail::require_ball(u, R);
  if (u.identically_zero) return 0.0;
  const BallGrid grid = ball_grid(R, res);
  const auto d = u.homogeneity;
  const auto v = integrate_ball_multi<2>(
      [&](const Vec5& x) {
        return std::array<double, 2>{u.eval(x).squaredNorm(), ambient_gradient(u, x).squaredNorm()};
      },
      grid, {d ? RadialExponent(2 * *d) : std::nullopt, d ? RadialExponent(2 * *d - 2) : std::nullopt});
  return v[0] / (R * R * R) + v[1] / R;
}

/// T(r) = (1/2r) int_{dB_r} x.grad|u|^2 - int_{B_r} |grad u|^2 - int_{dB_r} (u.sigma)(|u|^2/2 + P).
/// `ball_dissipation` may supply int_{B_r} |grad u|^2 when already known.
inline double flux_defect(const VectorField& u, const ScalarField& P, double r, const Resolution& res = {},
                          std::optional<double> ball_dissipation = std::nullopt) {
  detail::require_ball(u, r);
  detail::require_ball(P, r);
  if (u.identically_zero) return 0.0;
  const auto sphere = sphere_samples(res.level);
  const auto s = integrate_shell_multi<2>(
      [&](const Vec5& x) {
        const Vec5 sig = x / x.norm();
        const Vec5 w = u.eval(x);
        const Mat5 J = ambient_gradient(u, x);
        return std::array<double, 2>{w.dot(J * x), w.dot(sig) * (0.5 * w.squaredNorm() + detail::pressure_at(P, x))};
      },
      r, *sphere);
  double g = 0.0;
  if (ball_dissipation) {
    g = *ball_dissipation;
  } else {
    const auto d = u.homogeneity;
    g = integrate_ball([&](const Vec5& x) { return ambient_gradient(u, x).squaredNorm(); }, ball_grid(r, res),
                       d ? RadialExponent(2 * *d - 2) : std::nullopt);
  }
  return s[0] / r - g - s[1];
}

inline double monotonicity_A(const VectorField& u, const ScalarField& P, double r, const Resolution& res = {}) {
  return monotonicity_quantities(u, P, r, res).A;
}

struct DerivativeOptions {
  double dr_ratio = 1e-3;  ///< dr = dr_ratio * r
  bool richardson = false;
};

/// dA/dr by central differences; Richardson combines steps dr and dr/2.
inline double A_prime_fd(const VectorField& u, const ScalarField& P, double r, double dr, const Resolution& res = {},
                         bool richardson = false) {
  if (!(dr > 0.0) || !(dr < r)) throw DomainError("A_prime_fd needs 0 < dr < r");
  if (!(r + dr < u.r_max)) throw DomainError("A_prime_fd stencil leaves the field domain");
  auto central = [&](double h) {
    return (monotonicity_A(u, P, r + h, res) - monotonicity_A(u, P, r - h, res)) / (2.0 * h);
  };
  const double coarse = central(dr);
  if (!richardson) return coarse;
  const double fine = central(0.5 * dr);
  return (4.0 * fine - coarse) / 3.0;
}

/// A'(r) - D/r - (2/r^3) int (|u|^2/2 + P) u.sigma - T/r^2, zero for every
/// smooth pair (u, P).
inline double identity_defect(double r, double A_prime, const MonotonicityQuantities& q, double T) {
  return A_prime - q.D / r - 2.0 * q.moments.Phi / (r * r * r) - T / (r * r);
}

inline MonotonicityReport monotonicity_report(const VectorField& u, const ScalarField& P, double r,
                                              const Resolution& res = {}, DerivativeOptions opt = {}) {
  MonotonicityReport row;
  row.r = r;
  const MonotonicityQuantities q = monotonicity_quantities(u, P, r, res);
  row.M = q.M;
  row.A = q.A;
  row.D = q.D;
  row.Q = q.Q;
  row.wp = q.wp;
  row.T = flux_defect(u, P, r, res, q.moments.G);
  row.A_prime = A_prime_fd(u, P, r, opt.dr_ratio * r, res, opt.richardson);
  row.identity_defect = identity_defect(r, row.A_prime, q, row.T);
  return row;
}

/// int_{B_r} |u + (x.grad)u|^2 - (|u|^2 + x.grad|u|^2 + |(x.grad)u|^2).
inline double completing_square_defect(const VectorField& u, double r, const Resolution& res = {}) {
  detail::require_ball(u, r);
  return integrate_ball(
      [&](const Vec5& x) {
        const Vec5 w = u.eval(x);
        const Vec5 xu = ambient_gradient(u, x) * x;
        return (w + xu).squaredNorm() - (w.squaredNorm() + 2.0 * w.dot(xu) + xu.squaredNorm());
      },
      ball_grid(r, res));
}

/// A compactly supported test function with gradient and Laplacian.
struct TestFunction {
  ScalarField phi;
  std::function<double(const Vec5&)> laplacian;
  double support_radius = 0.0;
  /// Radii where the profile loses smoothness; ball integrals split there.
  std::vector<double> breakpoints;
};

/// int_{B_R} f with the radial rule restarted at each breakpoint inside (0, R).
template <class F>
double integrate_ball_piecewise(F&& f, double R, const std::vector<double>& breakpoints, const Resolution& res = {}) {
  std::vector<double> cuts;
  for (double b : breakpoints)
    if (b > 0.0 && b < R) cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  cuts.push_back(R);
  double total = integrate_ball(f, ball_grid(cuts.front(), res));
  for (std::size_t i = 1; i < cuts.size(); ++i)
    total += integrate_ball(f, build_ball_grid(cuts[i], cuts[i - 1], res.n_radial, res.level));
  return total;
}

/// Spherically symmetric cutoff: 1 on B_r, 0 outside B_{r+eps}, with the
/// quintic smootherstep s^3 (10 - 15 s + 6 s^2) in s = (|x| - r)/eps.
struct RadialCutoff {
  double r = 1.0;
  double eps = 1.0;

  double s(double rho) const { return std::clamp((rho - r) / eps, 0.0, 1.0); }
  double profile(double rho) const {
    const double t = s(rho);
    return 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
  }
  double derivative(double rho) const {
    const double t = s(rho);
    return -30.0 * t * t * (1.0 - t) * (1.0 - t) / eps;
  }
  double second_derivative(double rho) const {
    const double t = s(rho);
    return -60.0 * t * (1.0 - t) * (1.0 - 2.0 * t) / (eps * eps);
  }
};

inline TestFunction radial_cutoff(double r, double eps) {
  if (!(eps > 0.0)) throw DomainError("cutoff width must be positive");
  if (r < 0.0) throw DomainError("cutoff radius must be non-negative");
  const RadialCutoff c{r, eps};
  TestFunction t;
  t.phi.eval = [c](const Vec5& x) { return c.profile(x.norm()); };
  t.phi.grad = [c](const Vec5& x) -> Vec5 {
    const double rho = x.norm();
    if (rho == 0.0) return Vec5::Zero();
    return c.derivative(rho) * (x / rho);
  };
  t.phi.label = "radial_cutoff";
  t.laplacian = [c](const Vec5& x) {
    const double rho = x.norm();
    if (rho == 0.0) return 0.0;
    return c.second_derivative(rho) + (kDim - 1) * c.derivative(rho) / rho;
  };
  t.support_radius = r + eps;
  t.breakpoints = {r, r + eps};
  return t;
}

namespace detail {

inline double fd_laplacian(const ScalarField& f, const Vec5& x) {
  const double h = 1e-3 * std::max(1.0, x.norm());
  const double c = f.eval(x);
  double s = 0.0;
  for (int k = 0; k < kDim; ++k) {
    Vec5 xp = x, xm = x;
    xp(k) += h;
    xm(k) -= h;
    s += f.eval(xp) - 2.0 * c + f.eval(xm);
  }
  return s / (h * h);
}

}  // namespace detail

/// mu(phi) = int (|u|^2/2 + P)(u.grad phi) + (|u|^2/2) lap phi - phi |grad u|^2 over B_R.
inline double energy_defect_residual(const VectorField& u, const ScalarField& P, const TestFunction& phi, double R,
                                     const Resolution& res = {}) {
  detail::require_ball(u, R);
  detail::require_ball(P, R);
  const auto sphere = sphere_samples(res.level);
  double boundary = 0.0;
  for (const Vec5& s : sphere->nodes) {
    const Vec5 x = R * s;
    const Vec5 g = phi.phi.grad ? phi.phi.grad(x) : ambient_gradient(phi.phi, x);
    boundary = std::max({boundary, std::abs(phi.phi.eval(x)), g.norm()});
  }
  if (boundary > 1e-10) throw SupportError("test function does not vanish on the outer shell of the grid");
  if (u.identically_zero) return 0.0;
  return integrate_ball_piecewise(
      [&](const Vec5& x) {
        const Vec5 w = u.eval(x);
        const double half = 0.5 * w.squaredNorm();
        const Vec5 g = phi.phi.grad ? phi.phi.grad(x) : ambient_gradient(phi.phi, x);
        const double lap = phi.laplacian ? phi.laplacian(x) : detail::fd_laplacian(phi.phi, x);
        return (half + detail::pressure_at(P, x)) * w.dot(g) + half * lap -
               phi.phi.eval(x) * ambient_gradient(u, x).squaredNorm();
      },
      R, phi.breakpoints, res);
}

inline double energy_defect_residual(const VectorField& u, const ScalarField& P, const TestFunction& phi,
                                     const Resolution& res = {}) {
  return energy_defect_residual(u, P, phi, phi.support_radius, res);
}

/// int_{B_R} |u|^3 + |p|^{3/2}.
inline double eps_regularity_quantity(const VectorField& u, const ScalarField& p, double R, const Resolution& res = {}) {
  detail::require_ball(u, R);
  detail::require_ball(p, R);
  if (u.identically_zero && p.identically_zero) return 0.0;
  const auto v = integrate_ball_multi<2>(
      [&](const Vec5& x) {
        return std::array<double, 2>{std::pow(u.eval(x).norm(), 3), std::pow(std::abs(detail::pressure_at(p, x)), 1.5)};
      },
      ball_grid(R, res),
      {u.homogeneity ? RadialExponent(3 * *u.homogeneity) : std::nullopt,
       p.identically_zero ? RadialExponent(0.0) : (p.homogeneity ? RadialExponent(1.5 * *p.homogeneity) : std::nullopt)});
  return v[0] + v[1];
}

struct EnergyRecurrenceTerms {
  double M_quarter = 0.0;  ///< M(R)
  double M_whole = 0.0;    ///< M(4R)
  double cubic = 0.0;      ///< |(1/R^2) int_{B_2R} (|u|^2 + 2p) u.grad phi|
};

/// The three terms of the energy recurrence with phi = radial_cutoff(R, R).
inline EnergyRecurrenceTerms energy_recurrence_terms(const VectorField& u, const ScalarField& p, double R,
                                                     const Resolution& res = {}) {
  detail::require_ball(u, 4.0 * R);
  detail::require_ball(p, 4.0 * R);
  EnergyRecurrenceTerms t;
  if (u.identically_zero) return t;
  t.M_quarter = scale_invariant_energy(u, R, res);
  t.M_whole = scale_invariant_energy(u, 4.0 * R, res);
  const TestFunction phi = radial_cutoff(R, R);
  const double integral = integrate_ball_piecewise(
      [&](const Vec5& x) {
        const Vec5 w = u.eval(x);
        return (w.squaredNorm() + 2.0 * detail::pressure_at(p, x)) * w.dot(phi.phi.grad(x));
      },
      2.0 * R, phi.breakpoints, res);
  t.cubic = std::abs(integral / (R * R));
  return t;
}

}  // namespace nsmono
