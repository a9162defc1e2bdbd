#pragma once

#include "nsmono/errors.hpp"
#include "nsmono/quadrature.hpp"
#include "nsmono/sphere_function.hpp"
#include "nsmono/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <type_traits>
#include <vector>

namespace nsmono {

/// Dimension-dependent coefficients of the spherical Euler system, kept in
/// one place. Public operations use N = 5.
struct EulerCoefficients {
  int N;
  constexpr double n_minus_2() const { return N - 2.0; }
  constexpr double n_minus_4() const { return N - 4.0; }
  constexpr double n_minus_5() const { return N - 5.0; }
  /// Coefficient of int f^4 when v.grad f = H is tested against f^2.
  constexpr double quartic() const { return (N - 2.0) / 3.0; }
};

inline constexpr EulerCoefficients kEuler5{5};

/// Surface derivatives come from the degree-0 extension g(x/|x|),
/// differentiated with a fourth-order central stencil of width `step`.
/// Nested operators (divergence of a gradient, H from f) compound the
/// rounding error of the stencil, hence the wider default than the ambient
/// second-order step.
struct SphereDifferencing {
  double step = 2e-3;
};

namespace detail {

/// d/ds g((sigma + s dir) / |sigma + s dir|) at s = 0.
template <class Fn>
auto extension_derivative(const Fn& g, const Vec5& sigma, const Vec5& dir, double h) {
  using R = std::decay_t<decltype(g(sigma))>;
  auto at = [&](double s) -> R {
    const Vec5 x = sigma + s * dir;
    return g(Vec5(x / x.norm()));
  };
  const R value = (at(-2.0 * h) - at(2.0 * h) + 8.0 * (at(h) - at(-h))) / (12.0 * h);
  return value;
}

/// Derivative of the degree-0 extension along the tangent vector t.
template <class Fn>
auto along(const Fn& g, const Vec5& sigma, const Vec5& t, double h) {
  using R = std::decay_t<decltype(g(sigma))>;
  const double len = t.norm();
  if (len == 0.0) {
    if constexpr (std::is_same_v<R, double>) {
      return 0.0;
    } else {
      return R(R::Zero());
    }
  }
  const R d = extension_derivative(g, sigma, Vec5(t / len), h);
  return R(len * d);
}

inline void require_tangent(const Vec5& sigma, const Vec5& v) {
  if (std::abs(sigma.dot(v)) > 1e-8 * std::max(1.0, v.norm()))
    throw TangencyError("vector field is not tangent to the sphere");
}

}  // namespace detail

/// (grad_S g)(sigma) from the degree-0 extension, projected on T_sigma S^4.
template <class Fn>
Vec5 tangential_gradient_at(const Fn& g, const Vec5& sigma, double h = SphereDifferencing{}.step) {
  Vec5 w;
  for (int k = 0; k < kDim; ++k) w(k) = detail::extension_derivative(g, sigma, unit(k), h);
  return tangential_part(sigma, w);
}

/// T(i, j) = (grad_S zeta^i)_j.
inline Mat5 tangential_jacobian(const VectorProfile& zeta, const Vec5& sigma, SphereDifferencing d = {}) {
  if (zeta.has_tangential()) return zeta.tangential(sigma);
  Mat5 dz;
  for (int k = 0; k < kDim; ++k) dz.col(k) = detail::extension_derivative(zeta.value, sigma, unit(k), d.step);
  return dz * tangent_projector(sigma);
}

inline Vec5 tangential_gradient_value(const ScalarProfile& f, const Vec5& sigma, SphereDifferencing d = {}) {
  if (f.has_tangential()) return f.tangential(sigma);
  return tangential_gradient_at(f.value, sigma, d.step);
}

/// grad_S f as a (tangential) vector profile.
inline VectorProfile tangential_gradient(const ScalarProfile& f, SphereDifferencing d = {}) {
  VectorProfile out;
  out.value = [f, d](const Vec5& x) -> Vec5 {
    const Vec5 s = x / x.norm();
    const Vec5 g = tangential_gradient_value(f, s, d);
    if (!g.allFinite()) throw EvaluationError("non-finite tangential gradient");
    return g;
  };
  return out;
}

/// div_S v = sum_i (grad_S v^i)_i for a tangential v.
inline ScalarProfile sphere_divergence(const VectorProfile& v, SphereDifferencing d = {}) {
  ScalarProfile out;
  out.value = [v, d](const Vec5& x) {
    const Vec5 s = x / x.norm();
    detail::require_tangent(s, v(s));
    return tangential_jacobian(v, s, d).trace();
  };
  return out;
}

/// f = sigma . zeta.
inline ScalarProfile normal_part(const VectorProfile& zeta) {
  ScalarProfile f;
  f.value = [zeta](const Vec5& x) {
    const Vec5 s = x / x.norm();
    return s.dot(zeta(s));
  };
  if (zeta.has_tangential()) {
    // grad_S (sigma . zeta) = T^T sigma + P_T zeta
    f.tangential = [zeta](const Vec5& x) -> Vec5 {
      const Vec5 s = x / x.norm();
      return zeta.tangential(s).transpose() * s + tangential_part(s, zeta(s));
    };
  }
  return f;
}

/// v = zeta - (sigma . zeta) sigma.
inline VectorProfile tangential_part(const VectorProfile& zeta) {
  VectorProfile v;
  v.value = [zeta](const Vec5& x) -> Vec5 {
    const Vec5 s = x / x.norm();
    return tangential_part(s, zeta(s));
  };
  return v;
}

/// (N - 2) f + div_S v for zeta = v + f sigma, which equals
/// |x|^2 div(zeta(x/|x|)/|x|). Uses div_S v = tr(grad_S zeta) - (N - 1) f.
inline ScalarProfile homogeneous_divergence(const VectorProfile& zeta, SphereDifferencing d = {}) {
  ScalarProfile out;
  out.value = [zeta, d](const Vec5& x) {
    const Vec5 s = x / x.norm();
    const double f = s.dot(zeta(s));
    const double div_v = tangential_jacobian(zeta, s, d).trace() - (kEuler5.N - 1.0) * f;
    return kEuler5.n_minus_2() * f + div_v;
  };
  return out;
}

/// v . grad_S g.
inline ScalarProfile directional_derivative(const ScalarProfile& g, const VectorProfile& v, SphereDifferencing d = {}) {
  ScalarProfile out;
  out.value = [g, v, d](const Vec5& x) {
    const Vec5 s = x / x.norm();
    const Vec5 t = v(s);
    if (g.has_tangential()) return t.dot(g.tangential(s));
    return detail::along(g.value, s, tangential_part(s, t), d.step);
  };
  return out;
}

/// Covariant derivative of v along itself: the tangential part of
/// v_j (grad_S v^i)_j. The ambient derivative of the degree-0 extension
/// differs from it by -|v|^2 sigma.
inline VectorProfile covariant_self_derivative(const VectorProfile& v, SphereDifferencing d = {}) {
  VectorProfile out;
  out.value = [v, d](const Vec5& x) -> Vec5 {
    const Vec5 s = x / x.norm();
    const Vec5 t = tangential_part(s, v(s));
    Vec5 w;
    if (v.has_tangential()) {
      w = v.tangential(s) * t;
    } else {
      w = detail::along(v.value, s, t, d.step);
    }
    return tangential_part(s, w);
  };
  return out;
}

/// (v, f, p) of a homogeneous Euler field V = (v + f sigma)/|x|, P = p/|x|^2.
struct EulerTriple {
  VectorProfile v;
  ScalarProfile f;
  ScalarProfile p;

  /// H = |v|^2 + f^2 + 2p.
  ScalarProfile head() const {
    ScalarProfile h;
    h.value = [v = v, f = f, p = p](const Vec5& x) {
      const Vec5 s = x / x.norm();
      const double fv = f(s);
      return v(s).squaredNorm() + fv * fv + 2.0 * p(s);
    };
    return h;
  }
};

struct EulerResiduals {
  SphericalField r1;  ///< 3f + div v
  SphericalField r2;  ///< v.grad f - H
  SphericalField r3;  ///< v.grad H - 2 f H
  SphericalField r4;  ///< tangential part of (v.grad)v + grad p

  double sup_r1 = 0.0;
  double sup_r2 = 0.0;
  double sup_r3 = 0.0;
  double sup_r4 = 0.0;

  double sup() const { return std::max({sup_r1, sup_r2, sup_r3, sup_r4}); }
};

inline EulerResiduals euler_residuals(const EulerTriple& t, std::shared_ptr<const SphereSamples> sphere,
                                      SphereDifferencing d = {}) {
  const ScalarProfile head = t.head();
  const ScalarProfile div_v = sphere_divergence(t.v, d);
  const ScalarProfile v_grad_f = directional_derivative(t.f, t.v, d);
  const ScalarProfile v_grad_h = directional_derivative(head, t.v, d);
  const VectorProfile conv = covariant_self_derivative(t.v, d);

  const std::size_t n = sphere->size();
  EulerResiduals out;
  for (SphericalField* f : {&out.r1, &out.r2, &out.r3}) {
    f->sphere = sphere;
    f->channels = 1;
    f->values.assign(n, 0.0);
  }
  out.r4.sphere = sphere;
  out.r4.channels = kDim;
  out.r4.tangential = true;
  out.r4.values.assign(n * kDim, 0.0);

  for (std::size_t i = 0; i < n; ++i) {
    const Vec5& s = sphere->nodes[i];
    const double f = t.f(s);
    const double h = head(s);
    const double a = kEuler5.n_minus_2() * f + div_v(s);
    const double b = v_grad_f(s) - h;
    const double c = v_grad_h(s) - 2.0 * f * h;
    const Vec5 r4 = tangential_part(s, Vec5(conv(s) + tangential_gradient_value(t.p, s, d)));
    out.r1.values[i] = a;
    out.r2.values[i] = b;
    out.r3.values[i] = c;
    for (int k = 0; k < kDim; ++k) out.r4.values[i * kDim + k] = r4(k);
    out.sup_r1 = std::max(out.sup_r1, std::abs(a));
    out.sup_r2 = std::max(out.sup_r2, std::abs(b));
    out.sup_r3 = std::max(out.sup_r3, std::abs(c));
    out.sup_r4 = std::max(out.sup_r4, r4.norm());
  }
  return out;
}

struct SplitDefects {
  double d1 = 0.0;        ///< int (v.grad f) H + int (div v) f H + int (v.grad H) f
  double d2 = 0.0;        ///< int (v.grad f) f^2 - ((N-2)/3) int f^4
  double h_f2 = 0.0;      ///< int (v.grad f) f^2, the left side of d2
  double quartic = 0.0;   ///< ((N-2)/3) int f^4, the right side of d2
};

/// Integral identities behind the classification argument, evaluated with
/// f := -div_S v / (N - 2) and H := v . grad_S f so that the first two Euler
/// equations hold by construction.
inline SplitDefects split_identity_defects(const VectorProfile& v, const SphereSamples& sphere,
                                           SphereDifferencing d = {}) {
  const ScalarProfile div_v = sphere_divergence(v, d);
  ScalarProfile f;
  f.value = [div_v](const Vec5& x) { return -div_v(x) / kEuler5.n_minus_2(); };
  const ScalarProfile head = directional_derivative(f, v, d);
  const ScalarProfile v_grad_h = directional_derivative(head, v, d);

  const auto sums = integrate_sphere_multi<4>(
      [&](const Vec5& s) {
        const double fv = f(s);
        const double h = head(s);
        const double dv = -kEuler5.n_minus_2() * fv;
        return std::array<double, 4>{h * h + dv * fv * h + v_grad_h(s) * fv, h * fv * fv, fv * fv * fv * fv, 0.0};
      },
      sphere);
  SplitDefects out;
  out.d1 = sums[0];
  out.h_f2 = sums[1];
  out.quartic = kEuler5.quartic() * sums[2];
  out.d2 = out.h_f2 - out.quartic;
  return out;
}

/// int v . grad_S g + int (div_S v) g; zero on the closed manifold.
inline double parts_identity_defect(const VectorProfile& v, const ScalarProfile& g, const SphereSamples& sphere,
                                    SphereDifferencing d = {}) {
  const ScalarProfile div_v = sphere_divergence(v, d);
  const ScalarProfile v_grad_g = directional_derivative(g, v, d);
  return integrate_sphere([&](const Vec5& s) { return v_grad_g(s) + div_v(s) * g(s); }, sphere);
}

/// max over probes of | (V.grad)V - [cov(v, v) - |v|^2 sigma + sigma (v.grad f) - f^2 sigma] |
/// at |x| = 1, where V = zeta(x/|x|)/|x| and zeta = v + f sigma. The left side
/// is an ambient finite difference of V along V.
inline double convective_decomposition_defect(const VectorProfile& zeta, const std::vector<Vec5>& probes,
                                              SphereDifferencing d = {}) {
  const VectorProfile v = tangential_part(zeta);
  const ScalarProfile f = normal_part(zeta);
  const VectorProfile cov = covariant_self_derivative(v, d);
  const ScalarProfile v_grad_f = directional_derivative(f, v, d);
  auto V = [&](const Vec5& x) -> Vec5 {
    const double r = x.norm();
    return zeta(Vec5(x / r)) / r;
  };

  double worst = 0.0;
  for (const Vec5& probe : probes) {
    const Vec5 s = probe / probe.norm();
    const Vec5 dir = V(s);
    Vec5 ambient = Vec5::Zero();
    const double len = dir.norm();
    if (len > 0.0) {
      const Vec5 e = dir / len;
      const double h = d.step;
      auto at = [&](double t) -> Vec5 { return V(Vec5(s + t * e)); };
      ambient = len * (at(-2.0 * h) - at(2.0 * h) + 8.0 * (at(h) - at(-h))) / (12.0 * h);
    }
    const Vec5 vs = v(s);
    const double fs = f(s);
    const Vec5 rhs = cov(s) - vs.squaredNorm() * s + v_grad_f(s) * s - fs * fs * s;
    worst = std::max(worst, (ambient - rhs).norm());
  }
  return worst;
}

}  // namespace nsmono
