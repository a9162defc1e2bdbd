#pragma once

#include "nsmono/errors.hpp"
#include "nsmono/grid.hpp"
#include "nsmono/polynomial.hpp"
#include "nsmono/types.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace nsmono {

/// A function on S^4 given by an evaluation contract. Callers may hand in
/// points slightly off the sphere; implementations evaluate the degree-0
/// extension, i.e. at x / |x|.
///
/// `tangential` is the optional closed-form surface derivative: the
/// tangential gradient for scalars, and T(i, j) = (grad_S zeta^i)_j for
/// vectors.
template <class Value, class Derivative>
struct SphereFunction {
  std::function<Value(const Vec5&)> value;
  std::function<Derivative(const Vec5&)> tangential;

  Value operator()(const Vec5& sigma) const { return value(sigma); }
  bool has_tangential() const { return static_cast<bool>(tangential); }
};

using ScalarProfile = SphereFunction<double, Vec5>;
using VectorProfile = SphereFunction<Vec5, Mat5>;

inline ScalarProfile polynomial_profile(const Polynomial& p) {
  ScalarProfile f;
  f.value = [p](const Vec5& x) { return p(Vec5(x / x.norm())); };
  f.tangential = [p](const Vec5& x) -> Vec5 {
    const Vec5 s = x / x.norm();
    return tangential_part(s, p.gradient(s));
  };
  return f;
}

using VectorPolynomial = std::array<Polynomial, kDim>;

inline VectorProfile polynomial_profile(const VectorPolynomial& p) {
  VectorProfile f;
  f.value = [p](const Vec5& x) -> Vec5 {
    const Vec5 s = x / x.norm();
    Vec5 v;
    for (int i = 0; i < kDim; ++i) v(i) = p[i](s);
    return v;
  };
  f.tangential = [p](const Vec5& x) -> Mat5 {
    const Vec5 s = x / x.norm();
    const Mat5 proj = tangent_projector(s);
    Mat5 t;
    for (int i = 0; i < kDim; ++i) t.row(i) = (proj * p[i].gradient(s)).transpose();
    return t;
  };
  return f;
}

namespace profiles {

inline VectorPolynomial constant(const Vec5& e) {
  VectorPolynomial p;
  for (int i = 0; i < kDim; ++i)
    if (e(i) != 0.0) p[i] = Polynomial::constant(e(i));
  return p;
}

/// zeta = sigma.
inline VectorPolynomial identity() {
  VectorPolynomial p;
  for (int i = 0; i < kDim; ++i) p[i] = Polynomial::coordinate(i);
  return p;
}

/// Killing field of the (i, j) plane: -sigma_j e_i + sigma_i e_j (0-based).
inline VectorPolynomial rotation(int i, int j) {
  VectorPolynomial p;
  p[i] = Polynomial::coordinate(j, -1.0);
  p[j] = Polynomial::coordinate(i, 1.0);
  return p;
}

/// e_k - sigma_k sigma, the tangential gradient of sigma_k.
inline VectorPolynomial gradient_of_coordinate(int k) {
  VectorPolynomial p;
  for (int i = 0; i < kDim; ++i) {
    Powers pw{};
    pw[i] += 1;
    pw[k] += 1;
    std::vector<Monomial> terms{{pw, -1.0}};
    if (i == k) terms.push_back({Powers{}, 1.0});
    p[i] = Polynomial(terms);
  }
  return p;
}

/// e_k + sigma_k sigma / 3: its homogeneous extension e_k/|x| + x_k x/(3|x|^3)
/// is divergence free in R^5.
inline VectorPolynomial stokeslet(int k) {
  VectorPolynomial p;
  for (int i = 0; i < kDim; ++i) {
    Powers pw{};
    pw[i] += 1;
    pw[k] += 1;
    std::vector<Monomial> terms{{pw, 1.0 / 3.0}};
    if (i == k) terms.push_back({Powers{}, 1.0});
    p[i] = Polynomial(terms);
  }
  return p;
}

}  // namespace profiles

/// A SphereFunction sampled at the nodes of a sphere rule,
/// node-major: values[node * channels + c].
struct SphericalField {
  std::shared_ptr<const SphereSamples> sphere;
  int channels = 1;
  std::vector<double> values;
  bool tangential = false;

  std::size_t size() const { return sphere ? sphere->size() : 0; }
  double at(std::size_t node, int c = 0) const { return values[node * channels + c]; }
  Vec5 vector_at(std::size_t node) const {
    Vec5 v;
    for (int c = 0; c < kDim; ++c) v(c) = values[node * channels + c];
    return v;
  }
  std::vector<double> channel(int c) const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < size(); ++i) out[i] = at(i, c);
    return out;
  }
  /// max_i |sigma_i . value_i|; zero for scalar fields.
  double max_normal_component() const {
    if (channels != kDim) return 0.0;
    double m = 0.0;
    for (std::size_t i = 0; i < size(); ++i) m = std::max(m, std::abs(sphere->nodes[i].dot(vector_at(i))));
    return m;
  }
};

inline SphericalField sample(const ScalarProfile& f, std::shared_ptr<const SphereSamples> sphere) {
  SphericalField out;
  out.channels = 1;
  out.values.resize(sphere->size());
  for (std::size_t i = 0; i < sphere->size(); ++i) {
    out.values[i] = f(sphere->nodes[i]);
    if (!std::isfinite(out.values[i])) throw EvaluationError("non-finite spherical sample");
  }
  out.sphere = std::move(sphere);
  return out;
}

inline SphericalField sample(const VectorProfile& f, std::shared_ptr<const SphereSamples> sphere,
                             bool tangential = false) {
  SphericalField out;
  out.channels = kDim;
  out.tangential = tangential;
  out.values.resize(sphere->size() * kDim);
  for (std::size_t i = 0; i < sphere->size(); ++i) {
    const Vec5 v = f(sphere->nodes[i]);
    for (int c = 0; c < kDim; ++c) {
      if (!std::isfinite(v(c))) throw EvaluationError("non-finite spherical sample");
      out.values[i * kDim + c] = v(c);
    }
  }
  out.sphere = std::move(sphere);
  if (tangential && out.max_normal_component() > 1e-10)
    throw TangencyError("sampled field flagged tangential has a normal component");
  return out;
}

}  // namespace nsmono
