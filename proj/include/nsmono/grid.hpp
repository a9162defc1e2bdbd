#pragma once

#include "nsmono/errors.hpp"
#include "nsmono/gauss.hpp"
#include "nsmono/types.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace nsmono {

/// Angles of one quadrature node:
/// sigma = (cos t1, sin t1 cos t2, sin t1 sin t2 cos t3,
///          sin t1 sin t2 sin t3 cos phi, sin t1 sin t2 sin t3 sin phi).
struct AngleParam {
  double theta1;
  double theta2;
  double theta3;
  double phi;
};

/// Product-angle quadrature on S^4.
///
/// The three polar angles use Gauss rules in t = cos(theta) for the weights
/// (1-t^2), (1-t^2)^{1/2} and 1 that the surface element
/// sin^3 t1 sin^2 t2 sin t3 produces; the azimuth uses 2*level uniform
/// points. With level/2 + 1 polar points per angle the rule integrates every
/// polynomial in sigma of degree <= level + 1 exactly.
class SphereSamples {
 public:
  int level = 0;
  std::vector<Vec5> nodes;
  std::vector<double> weights;
  std::vector<AngleParam> param;

  std::size_t size() const { return nodes.size(); }
  int polar_points() const { return level / 2 + 1; }
  int azimuth_points() const { return 2 * level; }
};

inline SphereSamples build_sphere_samples(int level) {
  if (level < 2) throw ResolutionError("sphere level must be >= 2, got " + std::to_string(level));
  const int n_polar = level / 2 + 1;
  const int n_azimuth = 2 * level;
  const GaussRule r1 = gauss_gegenbauer(n_polar, 1.0);
  const GaussRule r2 = gauss_gegenbauer(n_polar, 0.5);
  const GaussRule r3 = gauss_gegenbauer(n_polar, 0.0);
  const double dphi = 2.0 * kPi / n_azimuth;

  SphereSamples s;
  s.level = level;
  const std::size_t total = static_cast<std::size_t>(n_polar) * n_polar * n_polar * n_azimuth;
  s.nodes.reserve(total);
  s.weights.reserve(total);
  s.param.reserve(total);
  for (int a = 0; a < n_polar; ++a) {
    const double c1 = r1.nodes[a];
    const double s1 = std::sqrt(std::max(0.0, 1.0 - c1 * c1));
    for (int b = 0; b < n_polar; ++b) {
      const double c2 = r2.nodes[b];
      const double s2 = std::sqrt(std::max(0.0, 1.0 - c2 * c2));
      for (int c = 0; c < n_polar; ++c) {
        const double c3 = r3.nodes[c];
        const double s3 = std::sqrt(std::max(0.0, 1.0 - c3 * c3));
        const double w = r1.weights[a] * r2.weights[b] * r3.weights[c] * dphi;
        for (int d = 0; d < n_azimuth; ++d) {
          const double phi = (d + 0.5) * dphi;
          Vec5 x;
          x << c1, s1 * c2, s1 * s2 * c3, s1 * s2 * s3 * std::cos(phi), s1 * s2 * s3 * std::sin(phi);
          x /= x.norm();
          s.nodes.push_back(x);
          s.weights.push_back(w);
          s.param.push_back({std::acos(c1), std::acos(c2), std::acos(c3), phi});
        }
      }
    }
  }
  return s;
}

/// Shared, immutable sphere rules keyed by level.
inline std::shared_ptr<const SphereSamples> sphere_samples(int level) {
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const SphereSamples>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(level);
  if (it != cache.end()) return it->second;
  auto rule = std::make_shared<const SphereSamples>(build_sphere_samples(level));
  cache.emplace(level, rule);
  return rule;
}

/// Gauss-Legendre radial rule on [r_min, R] times a sphere rule.
/// `radial_weights` already carry the r^4 of dx = r^4 dr dsigma.
struct BallGrid {
  double R = 0.0;
  double r_min = 0.0;
  std::vector<double> radial_nodes;
  std::vector<double> radial_weights;
  std::shared_ptr<const SphereSamples> sphere;

  std::size_t size() const { return radial_nodes.size() * sphere->size(); }
  Vec5 point(std::size_t radial, std::size_t angular) const {
    return radial_nodes[radial] * sphere->nodes[angular];
  }
};

inline BallGrid build_ball_grid(double R, double r_min, int n_radial, int level) {
  if (!(r_min > 0.0)) throw SingularOriginError("ball grid needs r_min > 0");
  if (!(r_min < R)) throw DomainError("ball grid needs r_min < R");
  if (n_radial < 4) throw ResolutionError("ball grid needs n_radial >= 4");
  BallGrid g;
  g.R = R;
  g.r_min = r_min;
  GaussRule rule = gauss_legendre(n_radial, r_min, R);
  g.radial_nodes = rule.nodes;
  g.radial_weights.resize(n_radial);
  for (int i = 0; i < n_radial; ++i) g.radial_weights[i] = rule.weights[i] * std::pow(rule.nodes[i], 4);
  g.sphere = sphere_samples(level);
  return g;
}

/// Grid resolution shared by the ball-integral operations.
struct Resolution {
  int n_radial = 32;
  int level = 16;
  double r_min_ratio = 1e-3;
};

inline BallGrid ball_grid(double R, const Resolution& res) {
  return build_ball_grid(R, res.r_min_ratio * R, res.n_radial, res.level);
}

}  // namespace nsmono
