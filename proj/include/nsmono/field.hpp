#pragma once

#include "nsmono/errors.hpp"
#include "nsmono/types.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <type_traits>

namespace nsmono {

/// A velocity (Vec5) or pressure (double) on the open annulus
/// r_min < |x| < r_max, with an optional closed-form gradient.
///
/// `homogeneity` records an exact power law u(t x) = t^d u(x); ball
/// integrals use it to add the core (0, r_min) analytically.
template <class Value, class Gradient>
struct Field {
  std::function<Value(const Vec5&)> eval;
  std::function<Gradient(const Vec5&)> grad;
  std::optional<double> homogeneity;
  bool identically_zero = false;
  double r_min = 0.0;
  double r_max = std::numeric_limits<double>::infinity();
  std::string label;

  Value operator()(const Vec5& x) const { return eval(x); }
  bool has_gradient() const { return static_cast<bool>(grad); }
  bool contains(const Vec5& x) const {
    const double r = x.norm();
    return r > r_min && r < r_max;
  }
};

using VectorField = Field<Vec5, Mat5>;
using ScalarField = Field<double, Vec5>;

/// FD step h = 1e-4 max(1, |x|).
inline double default_fd_step(const Vec5& x) { return 1e-4 * std::max(1.0, x.norm()); }

/// Ambient gradient. Uses the closed form when the field carries one,
/// otherwise second-order central differences with step `h`
/// (h <= 0 selects the default step).
template <class Value, class Gradient>
Gradient ambient_gradient(const Field<Value, Gradient>& field, const Vec5& x, double h = 0.0) {
  if (!field.contains(x)) throw DomainError("gradient requested outside the field domain");
  if (field.has_gradient()) return field.grad(x);
  if (h <= 0.0) h = default_fd_step(x);
  const double r = x.norm();
  if (r - h <= field.r_min || r + h >= field.r_max)
    throw DomainError("finite-difference stencil leaves the field domain");
  Gradient g;
  for (int j = 0; j < kDim; ++j) {
    Vec5 xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    if constexpr (std::is_same_v<Value, double>) {
      g(j) = (field.eval(xp) - field.eval(xm)) / (2.0 * h);
    } else {
      g.col(j) = (field.eval(xp) - field.eval(xm)) / (2.0 * h);
    }
  }
  return g;
}

inline ScalarField zero_scalar_field() {
  ScalarField p;
  p.eval = [](const Vec5&) { return 0.0; };
  p.grad = [](const Vec5&) -> Vec5 { return Vec5::Zero(); };
  p.identically_zero = true;
  p.label = "zero";
  return p;
}

inline VectorField zero_vector_field() {
  VectorField u;
  u.eval = [](const Vec5&) -> Vec5 { return Vec5::Zero(); };
  u.grad = [](const Vec5&) -> Mat5 { return Mat5::Zero(); };
  u.identically_zero = true;
  u.label = "zero";
  return u;
}

/// x -> lambda * u(lambda x), the Navier-Stokes scaling of a velocity.
inline VectorField rescale_velocity(const VectorField& u, double lambda) {
  VectorField out = u;
  out.eval = [u, lambda](const Vec5& x) -> Vec5 { return lambda * u.eval(lambda * x); };
  if (u.grad) out.grad = [u, lambda](const Vec5& x) -> Mat5 { return lambda * lambda * u.grad(lambda * x); };
  out.r_min = u.r_min / lambda;
  out.r_max = u.r_max / lambda;
  return out;
}

/// x -> lambda^2 * P(lambda x).
inline ScalarField rescale_pressure(const ScalarField& p, double lambda) {
  ScalarField out = p;
  out.eval = [p, lambda](const Vec5& x) { return lambda * lambda * p.eval(lambda * x); };
  if (p.grad)
    out.grad = [p, lambda](const Vec5& x) -> Vec5 { return lambda * lambda * lambda * p.grad(lambda * x); };
  out.r_min = p.r_min / lambda;
  out.r_max = p.r_max / lambda;
  return out;
}

/// Linear combination a u + b w (gradients combine when both are closed-form).
inline VectorField combine(double a, const VectorField& u, double b, const VectorField& w) {
  VectorField out;
  out.eval = [=](const Vec5& x) -> Vec5 { return a * u.eval(x) + b * w.eval(x); };
  if (u.grad && w.grad) out.grad = [=](const Vec5& x) -> Mat5 { return a * u.grad(x) + b * w.grad(x); };
  if (u.homogeneity && w.homogeneity && *u.homogeneity == *w.homogeneity) out.homogeneity = u.homogeneity;
  out.r_min = std::max(u.r_min, w.r_min);
  out.r_max = std::min(u.r_max, w.r_max);
  out.label = "combination";
  return out;
}

}  // namespace nsmono
