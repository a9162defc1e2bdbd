#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

namespace nsmono {

/// Ambient dimension. Every public operation works in R^5 and on S^4.
inline constexpr int kDim = 5;

using Vec5 = Eigen::Matrix<double, kDim, 1>;

/// Jacobian convention: `J(i, j) = d_j u^i`.
using Mat5 = Eigen::Matrix<double, kDim, kDim>;

inline constexpr double kPi = std::numbers::pi;

/// |S^4| = 8 pi^2 / 3.
inline constexpr double kSphereArea = 8.0 * kPi * kPi / 3.0;

/// |B_1| in R^5 = 8 pi^2 / 15.
inline constexpr double kBallVolume = 8.0 * kPi * kPi / 15.0;

inline Vec5 unit(int k) { return Vec5::Unit(k); }

/// Orthogonal projection onto the tangent space of S^4 at `sigma`.
inline Mat5 tangent_projector(const Vec5& sigma) {
  return Mat5::Identity() - sigma * sigma.transpose();
}

inline Vec5 tangential_part(const Vec5& sigma, const Vec5& w) {
  return w - sigma.dot(w) * sigma;
}

}  // namespace nsmono
