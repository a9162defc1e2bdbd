#pragma once

#include "nsmono/errors.hpp"
#include "nsmono/field.hpp"
#include "nsmono/polynomial.hpp"
#include "nsmono/sphere_function.hpp"
#include "nsmono/types.hpp"

#include <json.hpp>

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

namespace nsmono {

/// h(x) = zeta(x/|x|) / |x|, with d_j h^i = ((grad_S zeta^i)_j - sigma_j zeta^i) / |x|^2.
inline VectorField homogeneous_field(const VectorProfile& zeta) {
  VectorField h;
  h.eval = [zeta](const Vec5& x) -> Vec5 {
    const double r = x.norm();
    return zeta(x / r) / r;
  };
  if (zeta.has_tangential()) {
    h.grad = [zeta](const Vec5& x) -> Mat5 {
      const double r = x.norm();
      const Vec5 s = x / r;
      return (zeta.tangential(s) - zeta(s) * s.transpose()) / (r * r);
    };
  }
  h.homogeneity = -1.0;
  h.label = "homogeneous";
  return h;
}

/// p(x) = g(x/|x|) |x|^degree.
inline ScalarField homogeneous_scalar(const ScalarProfile& g, double degree) {
  ScalarField p;
  p.eval = [g, degree](const Vec5& x) {
    const double r = x.norm();
    return g(x / r) * std::pow(r, degree);
  };
  if (g.has_tangential()) {
    p.grad = [g, degree](const Vec5& x) -> Vec5 {
      const double r = x.norm();
      const Vec5 s = x / r;
      return std::pow(r, degree - 1.0) * (g.tangential(s) + degree * g(s) * s);
    };
  }
  p.homogeneity = degree;
  p.label = "homogeneous";
  return p;
}

namespace fixtures {

inline VectorField constant(const Vec5& e) {
  VectorField u;
  u.eval = [e](const Vec5&) -> Vec5 { return e; };
  u.grad = [](const Vec5&) -> Mat5 { return Mat5::Zero(); };
  u.homogeneity = 0.0;
  u.identically_zero = e.isZero(0.0);
  u.label = "constant";
  return u;
}

/// u(x) = x.
inline VectorField linear_radial() {
  VectorField u;
  u.eval = [](const Vec5& x) -> Vec5 { return x; };
  u.grad = [](const Vec5&) -> Mat5 { return Mat5::Identity(); };
  u.homogeneity = 1.0;
  u.label = "linear_radial";
  return u;
}

/// Rigid rotation in the (i, j) plane, 0-based: u_i = -x_j, u_j = x_i.
inline VectorField rotation_plane(int i, int j) {
  if (i == j || i < 0 || j < 0 || i >= kDim || j >= kDim) throw ConfigError("rotation_plane needs two distinct axes");
  VectorField u;
  u.eval = [i, j](const Vec5& x) -> Vec5 {
    Vec5 v = Vec5::Zero();
    v(i) = -x(j);
    v(j) = x(i);
    return v;
  };
  u.grad = [i, j](const Vec5&) -> Mat5 {
    Mat5 g = Mat5::Zero();
    g(i, j) = -1.0;
    g(j, i) = 1.0;
    return g;
  };
  u.homogeneity = 1.0;
  u.label = "rotation_plane";
  return u;
}

inline VectorField homogeneous(const VectorPolynomial& zeta) {
  return homogeneous_field(polynomial_profile(zeta));
}

inline VectorField polynomial(const VectorPolynomial& p) {
  VectorField u;
  u.eval = [p](const Vec5& x) -> Vec5 {
    Vec5 v;
    for (int i = 0; i < kDim; ++i) v(i) = p[i](x);
    return v;
  };
  u.grad = [p](const Vec5& x) -> Mat5 {
    Mat5 g;
    for (int i = 0; i < kDim; ++i) g.row(i) = p[i].gradient(x).transpose();
    return g;
  };
  // Homogeneous when every term shares one total degree.
  int degree = -1;
  bool uniform = true;
  for (const auto& comp : p)
    for (const auto& t : comp.terms()) {
      const int d = total_degree(t.powers);
      if (degree < 0) degree = d;
      uniform = uniform && d == degree;
    }
  if (uniform && degree >= 0) u.homogeneity = static_cast<double>(degree);
  u.label = "polynomial";
  return u;
}

/// u(x) = a exp(-|x - c|^2 / w^2).
inline VectorField gaussian_bump(const Vec5& amplitude, const Vec5& center, double width) {
  if (!(width > 0.0)) throw ConfigError("gaussian_bump width must be positive");
  VectorField u;
  u.eval = [=](const Vec5& x) -> Vec5 { return amplitude * std::exp(-(x - center).squaredNorm() / (width * width)); };
  u.grad = [=](const Vec5& x) -> Mat5 {
    const double g = std::exp(-(x - center).squaredNorm() / (width * width));
    return amplitude * ((-2.0 * g / (width * width)) * (x - center)).transpose();
  };
  u.label = "gaussian_bump";
  return u;
}

/// One Fourier mode a sin(2 pi k.x / L) (or cos) in a single component.
struct TrigMode {
  int component = 0;
  double amplitude = 1.0;
  std::array<int, kDim> wave{};
  bool cosine = false;
};

/// Band-limited L-periodic velocity; the natural input of the periodic
/// pressure recovery.
inline VectorField trig(std::vector<TrigMode> modes, double L) {
  if (!(L > 0.0)) throw ConfigError("trig fixture needs a positive box length");
  VectorField u;
  const double kappa = 2.0 * kPi / L;
  u.eval = [modes, kappa](const Vec5& x) -> Vec5 {
    Vec5 v = Vec5::Zero();
    for (const auto& m : modes) {
      double phase = 0.0;
      for (int k = 0; k < kDim; ++k) phase += kappa * m.wave[k] * x(k);
      v(m.component) += m.amplitude * (m.cosine ? std::cos(phase) : std::sin(phase));
    }
    return v;
  };
  u.grad = [modes, kappa](const Vec5& x) -> Mat5 {
    Mat5 g = Mat5::Zero();
    for (const auto& m : modes) {
      double phase = 0.0;
      for (int k = 0; k < kDim; ++k) phase += kappa * m.wave[k] * x(k);
      const double d = m.amplitude * (m.cosine ? -std::sin(phase) : std::cos(phase));
      for (int k = 0; k < kDim; ++k) g(m.component, k) += d * kappa * m.wave[k];
    }
    return g;
  };
  u.label = "trig";
  return u;
}

inline ScalarField scalar_constant(double c) {
  ScalarField p;
  p.eval = [c](const Vec5&) { return c; };
  p.grad = [](const Vec5&) -> Vec5 { return Vec5::Zero(); };
  p.homogeneity = 0.0;
  p.identically_zero = (c == 0.0);
  p.label = "constant";
  return p;
}

/// P(x) = |x|^2.
inline ScalarField quadratic() {
  ScalarField p;
  p.eval = [](const Vec5& x) { return x.squaredNorm(); };
  p.grad = [](const Vec5& x) -> Vec5 { return 2.0 * x; };
  p.homogeneity = 2.0;
  p.label = "quadratic";
  return p;
}

inline ScalarField scalar_polynomial(const Polynomial& q) {
  ScalarField p;
  p.eval = [q](const Vec5& x) { return q(x); };
  p.grad = [q](const Vec5& x) -> Vec5 { return q.gradient(x); };
  if (!q.empty()) {
    const int d = total_degree(q.terms().front().powers);
    bool uniform = true;
    for (const auto& t : q.terms()) uniform = uniform && total_degree(t.powers) == d;
    if (uniform) p.homogeneity = static_cast<double>(d);
  }
  p.label = "polynomial";
  return p;
}

}  // namespace fixtures

// ---------------------------------------------------------------------------
// JSON fixture catalog
// ---------------------------------------------------------------------------

namespace detail {

inline Vec5 read_vec5(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing key '") + key + "'");
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != kDim) throw ConfigError(std::string("key '") + key + "' must be a 5-vector");
  Vec5 v;
  for (int i = 0; i < kDim; ++i) v(i) = a.at(i).get<double>();
  return v;
}

/// 1-based axis index as written in configs.
inline int read_axis(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing key '") + key + "'");
  const int a = j.at(key).get<int>();
  if (a < 1 || a > kDim) throw ConfigError(std::string("key '") + key + "' must be an axis in 1..5");
  return a - 1;
}

inline Powers read_powers(const nlohmann::json& t) {
  if (!t.contains("powers") || !t.at("powers").is_array() || t.at("powers").size() != kDim)
    throw ConfigError("polynomial term needs 'powers' with 5 entries");
  Powers p{};
  for (int k = 0; k < kDim; ++k) {
    p[k] = t.at("powers").at(k).get<int>();
    if (p[k] < 0) throw ConfigError("polynomial powers must be non-negative");
  }
  return p;
}

inline Polynomial read_scalar_polynomial(const nlohmann::json& terms) {
  if (!terms.is_array()) throw ConfigError("'terms' must be an array");
  std::vector<Monomial> out;
  for (const auto& t : terms) out.push_back({read_powers(t), t.value("coeff", 1.0)});
  return Polynomial(out);
}

inline VectorPolynomial read_vector_polynomial(const nlohmann::json& terms) {
  if (!terms.is_array()) throw ConfigError("'terms' must be an array");
  std::array<std::vector<Monomial>, kDim> parts;
  for (const auto& t : terms) {
    const int c = read_axis(t, "component");
    parts[c].push_back({read_powers(t), t.value("coeff", 1.0)});
  }
  VectorPolynomial p;
  for (int i = 0; i < kDim; ++i) p[i] = Polynomial(parts[i]);
  return p;
}

}  // namespace detail

/// Profile zeta on S^4 from a JSON spec. Kinds: const(e), sigma,
/// rotation(i, j), gradient(k), stokeslet(k), poly(terms), sum(parts).
inline VectorPolynomial vector_profile_from_json(const nlohmann::json& spec) {
  const std::string kind = spec.value("kind", std::string{});
  if (kind == "const") return profiles::constant(detail::read_vec5(spec, "e"));
  if (kind == "sigma") return profiles::identity();
  if (kind == "rotation") return profiles::rotation(detail::read_axis(spec, "i"), detail::read_axis(spec, "j"));
  if (kind == "gradient") return profiles::gradient_of_coordinate(detail::read_axis(spec, "k"));
  if (kind == "stokeslet") return profiles::stokeslet(detail::read_axis(spec, "k"));
  if (kind == "poly") return detail::read_vector_polynomial(spec.at("terms"));
  if (kind == "sum") {
    VectorPolynomial total;
    for (const auto& part : spec.at("parts")) {
      const double scale = part.value("scale", 1.0);
      const VectorPolynomial p = vector_profile_from_json(part.at("profile"));
      for (int i = 0; i < kDim; ++i) total[i].add(p[i], scale);
    }
    return total;
  }
  throw ConfigError("unknown profile kind '" + kind + "'");
}

inline Polynomial scalar_profile_from_json(const nlohmann::json& spec) {
  const std::string kind = spec.value("kind", std::string{});
  if (kind == "const") return Polynomial::constant(spec.value("value", 0.0));
  if (kind == "poly") return detail::read_scalar_polynomial(spec.at("terms"));
  throw ConfigError("unknown scalar profile kind '" + kind + "'");
}

/// Velocity fixture catalog:
///   constant{e}, linear_radial, homogeneous{zeta}, rotation_plane{i, j},
///   polynomial{terms}, gaussian_bump{amplitude, center, width},
///   trig{L, modes: [{component, amplitude, wave, phase: "sin"|"cos"}]}, zero.
inline VectorField fixture_field(std::string_view name, const nlohmann::json& params = nlohmann::json::object()) {
  try {
    if (name == "zero") return zero_vector_field();
    if (name == "constant") return fixtures::constant(detail::read_vec5(params, "e"));
    if (name == "linear_radial") return fixtures::linear_radial();
    if (name == "homogeneous") {
      if (!params.contains("zeta")) throw ConfigError("homogeneous fixture needs 'zeta'");
      return fixtures::homogeneous(vector_profile_from_json(params.at("zeta")));
    }
    if (name == "rotation_plane")
      return fixtures::rotation_plane(detail::read_axis(params, "i"), detail::read_axis(params, "j"));
    if (name == "polynomial") return fixtures::polynomial(detail::read_vector_polynomial(params.at("terms")));
    if (name == "gaussian_bump")
      return fixtures::gaussian_bump(detail::read_vec5(params, "amplitude"),
                                     params.contains("center") ? detail::read_vec5(params, "center") : Vec5::Zero(),
                                     params.value("width", 0.5));
    if (name == "trig") {
      std::vector<fixtures::TrigMode> modes;
      for (const auto& m : params.at("modes")) {
        fixtures::TrigMode mode;
        mode.component = detail::read_axis(m, "component");
        mode.amplitude = m.value("amplitude", 1.0);
        const auto& w = m.at("wave");
        if (!w.is_array() || w.size() != kDim) throw ConfigError("trig mode 'wave' must have 5 integers");
        for (int k = 0; k < kDim; ++k) mode.wave[k] = w.at(k).get<int>();
        mode.cosine = m.value("phase", std::string("sin")) == "cos";
        modes.push_back(mode);
      }
      return fixtures::trig(std::move(modes), params.value("L", 2.0 * kPi));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("fixture '" + std::string(name) + "': " + e.what());
  }
  throw ConfigError("unknown fixture '" + std::string(name) + "'");
}

/// Pressure fixture catalog: zero, constant{value}, quadratic,
/// homogeneous{profile, degree = -2}, polynomial{terms}.
inline ScalarField scalar_fixture(std::string_view name, const nlohmann::json& params = nlohmann::json::object()) {
  try {
    if (name == "zero") return zero_scalar_field();
    if (name == "constant") return fixtures::scalar_constant(params.value("value", 0.0));
    if (name == "quadratic") return fixtures::quadratic();
    if (name == "homogeneous")
      return homogeneous_scalar(polynomial_profile(scalar_profile_from_json(params.at("profile"))),
                                params.value("degree", -2.0));
    if (name == "polynomial") return fixtures::scalar_polynomial(detail::read_scalar_polynomial(params.at("terms")));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("pressure fixture '" + std::string(name) + "': " + e.what());
  }
  throw ConfigError("unknown pressure fixture '" + std::string(name) + "'");
}

inline VectorField fixture_field(const nlohmann::json& spec) {
  if (!spec.is_object() || !spec.contains("name")) throw ConfigError("field spec needs a 'name'");
  return fixture_field(spec.at("name").get<std::string>(), spec);
}

inline ScalarField scalar_fixture(const nlohmann::json& spec) {
  if (!spec.is_object() || !spec.contains("name")) throw ConfigError("pressure spec needs a 'name'");
  return scalar_fixture(spec.at("name").get<std::string>(), spec);
}

// String literals would otherwise convert to both std::string_view and json.
inline VectorField fixture_field(const char* name) { return fixture_field(std::string_view(name)); }
inline ScalarField scalar_fixture(const char* name) { return scalar_fixture(std::string_view(name)); }

}  // namespace nsmono
