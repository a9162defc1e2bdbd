#pragma once

#include "nsmono/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <vector>

namespace nsmono {

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss rule for the weight (1 - t^2)^a on [-1, 1] (Gegenbauer family;
/// a = 0 is Gauss-Legendre). Golub-Welsch on the symmetric Jacobi matrix,
/// then symmetrised so that odd integrands cancel to rounding.
inline GaussRule gauss_gegenbauer(int n, double a) {
  if (n < 1) throw ResolutionError("gauss rule needs at least one node");
  if (a <= -1.0) throw ResolutionError("gauss weight exponent must exceed -1");

  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd off(n > 1 ? n - 1 : 0);
  for (int k = 1; k < n; ++k) {
    const double kk = k;
    const double s = 2.0 * kk + 2.0 * a;
    off(k - 1) = std::sqrt(kk * (kk + 2.0 * a) / ((s + 1.0) * (s - 1.0)));
  }
  // mu0 = int (1 - t^2)^a dt = sqrt(pi) Gamma(a + 1) / Gamma(a + 3/2)
  const double mu0 = std::exp(0.5 * std::log(M_PI) + std::lgamma(a + 1.0) - std::lgamma(a + 1.5));

  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  if (n == 1) {
    rule.nodes[0] = 0.0;
    rule.weights[0] = mu0;
    return rule;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
  const auto& values = solver.eigenvalues();
  const auto& vectors = solver.eigenvectors();
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = values(i);
    rule.weights[i] = mu0 * vectors(0, i) * vectors(0, i);
  }
  for (int i = 0; i < n / 2; ++i) {
    const int j = n - 1 - i;
    const double t = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.nodes[i] = -t;
    rule.nodes[j] = t;
    rule.weights[i] = w;
    rule.weights[j] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

inline GaussRule gauss_legendre(int n) { return gauss_gegenbauer(n, 0.0); }

/// Gauss-Legendre on [lo, hi].
inline GaussRule gauss_legendre(int n, double lo, double hi) {
  GaussRule rule = gauss_legendre(n);
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = mid + half * rule.nodes[i];
    rule.weights[i] *= half;
  }
  return rule;
}

}  // namespace nsmono
