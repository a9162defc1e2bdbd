#pragma once

#include "nsmono/errors.hpp"
#include "nsmono/grid.hpp"
#include "nsmono/types.hpp"

#include <array>
#include <cmath>
#include <exception>
#include <optional>
#include <span>
#include <vector>

namespace nsmono {

/// Pairwise (cascade) summation with a fixed split, so results do not depend
/// on how node evaluation was scheduled.
inline double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kBlock = 16;
  if (values.size() <= kBlock) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

namespace detail {

inline void check_finite(double v, const char* where) {
  if (!std::isfinite(v)) throw EvaluationError(std::string("non-finite integrand value in ") + where);
}

/// Evaluates `fn(i)` into a buffer of K channels per index, node-parallel.
template <std::size_t K, class Fn>
std::vector<double> evaluate_channels(std::size_t count, Fn&& fn) {
  std::vector<double> buffer(K * count);
  std::exception_ptr failure;
#if defined(_OPENMP)
#pragma omp parallel for schedule(static)
#endif
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(count); ++i) {
    try {
      const std::array<double, K> v = fn(static_cast<std::size_t>(i));
      for (std::size_t c = 0; c < K; ++c) buffer[c * count + static_cast<std::size_t>(i)] = v[c];
    } catch (...) {
#if defined(_OPENMP)
#pragma omp critical(nsmono_failure)
#endif
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return buffer;
}

template <std::size_t K>
std::array<double, K> sum_channels(const std::vector<double>& buffer, std::size_t count, const char* where) {
  std::array<double, K> out{};
  for (std::size_t c = 0; c < K; ++c) {
    out[c] = pairwise_sum(std::span<const double>(buffer.data() + c * count, count));
    check_finite(out[c], where);
  }
  return out;
}

}  // namespace detail

/// sum_i w_i f(sigma_i) for K integrands evaluated together.
template <std::size_t K, class F>
std::array<double, K> integrate_sphere_multi(F&& f, const SphereSamples& sphere) {
  const std::size_t n = sphere.size();
  auto buffer = detail::evaluate_channels<K>(n, [&](std::size_t i) {
    std::array<double, K> v = f(sphere.nodes[i]);
    for (auto& x : v) {
      detail::check_finite(x, "integrate_sphere");
      x *= sphere.weights[i];
    }
    return v;
  });
  return detail::sum_channels<K>(buffer, n, "integrate_sphere");
}

template <class F>
double integrate_sphere(F&& f, const SphereSamples& sphere) {
  return integrate_sphere_multi<1>([&](const Vec5& s) { return std::array<double, 1>{f(s)}; }, sphere)[0];
}

/// Integral over the sampled values of a scalar channel (weights aligned with nodes).
inline double integrate_sphere_values(std::span<const double> values, const SphereSamples& sphere) {
  if (values.size() != sphere.size()) throw EvaluationError("sample count does not match sphere rule");
  std::vector<double> weighted(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    detail::check_finite(values[i], "integrate_sphere");
    weighted[i] = sphere.weights[i] * values[i];
  }
  return pairwise_sum(weighted);
}

/// int_{dB_r} f dS = r^4 sum_i w_i f(r sigma_i).
template <std::size_t K, class F>
std::array<double, K> integrate_shell_multi(F&& f, double r, const SphereSamples& sphere) {
  auto out = integrate_sphere_multi<K>([&](const Vec5& s) { return f(Vec5(r * s)); }, sphere);
  const double r4 = std::pow(r, 4);
  for (auto& v : out) v *= r4;
  return out;
}

template <class F>
double integrate_shell(F&& f, double r, const SphereSamples& sphere) {
  return integrate_shell_multi<1>([&](const Vec5& x) { return std::array<double, 1>{f(x)}; }, r, sphere)[0];
}

/// Radial power law of an integrand, f(lambda x) = lambda^k f(x). When
/// supplied, the missing core (0, r_min) is added exactly:
/// int_{B_{r_min}} f = r_min / (k + 5) * int_{dB_{r_min}} f dS.
using RadialExponent = std::optional<double>;

/// Ball integral over the annulus of the grid, for K integrands at once,
/// each with its own optional power-law core correction. The integrand is
/// called as f(x, node) with the index of the sphere node x lies on, so
/// callers can reuse per-direction data across radii.
template <std::size_t K, class F>
std::array<double, K> integrate_ball_nodes(F&& f, const BallGrid& grid,
                                           const std::array<RadialExponent, K>& exponents = {}) {
  const SphereSamples& sphere = *grid.sphere;
  const std::size_t n_ang = sphere.size();
  const std::size_t n_rad = grid.radial_nodes.size();
  const std::size_t count = n_ang * n_rad;
  auto buffer = detail::evaluate_channels<K>(count, [&](std::size_t idx) {
    const std::size_t ir = idx / n_ang;
    const std::size_t ia = idx % n_ang;
    const double w = grid.radial_weights[ir] * sphere.weights[ia];
    std::array<double, K> v = f(grid.point(ir, ia), ia);
    for (auto& x : v) {
      detail::check_finite(x, "integrate_ball");
      x *= w;
    }
    return v;
  });
  std::array<double, K> out = detail::sum_channels<K>(buffer, count, "integrate_ball");

  bool any = false;
  for (const auto& e : exponents) any = any || e.has_value();
  if (any) {
    const double r = grid.r_min;
    auto shell = detail::evaluate_channels<K>(n_ang, [&](std::size_t ia) {
      std::array<double, K> v = f(Vec5(r * sphere.nodes[ia]), ia);
      for (auto& x : v) {
        detail::check_finite(x, "integrate_ball");
        x *= sphere.weights[ia];
      }
      return v;
    });
    const auto core = detail::sum_channels<K>(shell, n_ang, "integrate_ball");
    const double r4 = std::pow(r, 4);
    for (std::size_t c = 0; c < K; ++c) {
      if (!exponents[c]) continue;
      const double k5 = *exponents[c] + 5.0;
      if (!(k5 > 0.0)) throw DomainError("integrand is not integrable at the origin (radial exponent <= -5)");
      out[c] += r / k5 * r4 * core[c];
    }
  }
  return out;
}

template <std::size_t K, class F>
std::array<double, K> integrate_ball_multi(F&& f, const BallGrid& grid,
                                           const std::array<RadialExponent, K>& exponents = {}) {
  return integrate_ball_nodes<K>([&](const Vec5& x, std::size_t) { return f(x); }, grid, exponents);
}

template <class F>
double integrate_ball(F&& f, const BallGrid& grid, RadialExponent exponent = std::nullopt) {
  return integrate_ball_multi<1>([&](const Vec5& x) { return std::array<double, 1>{f(x)}; }, grid,
                                 std::array<RadialExponent, 1>{exponent})[0];
}

}  // namespace nsmono
