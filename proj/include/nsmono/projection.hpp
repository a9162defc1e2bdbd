#pragma once

// Projection onto the self-similar fields h_zeta(x) = zeta(x/|x|)/|x|.
//
// Scaled inner product on B_R:
//   <u, w>_R = R^-3 int u.w + R^-1 int grad u : grad w.
// For two self-similar fields the radial integrals are explicit and
//   <h_zeta, h_eta>_R = (4/3) int_S zeta.eta + int_S grad_S zeta : grad_S eta,
// independent of R.
//
// Pairing a general u with h_eta: using d_j h^i = (T(i,j) - sigma_j eta^i)/r^2
// with T(i,j) = (grad_S eta^i)_j and dx = r^4 dr dsigma,
//   int_B u.h_eta         = int_S L1(sigma).eta,          L1 = int_0^R r^3 u(r sigma) dr
//   int_B grad u:grad h   = int_S G:T - (G sigma).eta,    G  = int_0^R r^2 grad u(r sigma) dr
// so <u, h_eta>_R = int_S a.eta + B:T with a = L1/R^3 - G sigma/R, B = G/R.
//
// zeta is discretized by restrictions of ambient polynomials of degree L and
// L - 1, a basis of all spherical polynomials of degree <= L. The Gram
// matrix is block diagonal over the five components.

#include "nsmono/errors.hpp"
#include "nsmono/field.hpp"
#include "nsmono/functionals.hpp"
#include "nsmono/gauss.hpp"
#include "nsmono/grid.hpp"
#include "nsmono/polynomial.hpp"
#include "nsmono/quadrature.hpp"
#include "nsmono/sphere_calculus.hpp"
#include "nsmono/sphere_function.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <json.hpp>

#include <array>
#include <cmath>
#include <memory>
#include <vector>

namespace nsmono {

struct ProjectionOptions {
  int degree = 4;          ///< polynomial degree of the zeta basis
  int level = 16;          ///< sphere rule
  int n_radial = 32;       ///< radial rule for moments and norms
  double r_min_ratio = 1e-3;
  double tolerance = 1e-12;  ///< relative CG residual
  int max_iters = 0;         ///< 0 selects 10 sqrt(node count)

  Resolution resolution() const { return Resolution{n_radial, level, r_min_ratio}; }
};

/// (4/3) int zeta.eta + int grad_S zeta : grad_S eta.
inline double gram_inner(const VectorProfile& zeta, const VectorProfile& eta, const SphereSamples& sphere,
                         SphereDifferencing d = {}) {
  return integrate_sphere(
      [&](const Vec5& s) {
        return (4.0 / 3.0) * zeta(s).dot(eta(s)) +
               (tangential_jacobian(zeta, s, d).cwiseProduct(tangential_jacobian(eta, s, d))).sum();
      },
      sphere);
}

/// Per-node radial moments of u over (0, R).
struct RadialMoments {
  double R = 0.0;
  std::shared_ptr<const SphereSamples> sphere;
  std::vector<Vec5> L1;  ///< int_0^R r^3 u(r sigma) dr
  std::vector<Mat5> G;   ///< int_0^R r^2 grad u(r sigma) dr

  Vec5 a(std::size_t i) const { return L1[i] / (R * R * R) - G[i] * sphere->nodes[i] / R; }
  Mat5 B(std::size_t i) const { return G[i] / R; }
};

inline RadialMoments radial_moments(const VectorField& u, double R, const ProjectionOptions& opt = {}) {
  detail::require_ball(u, R);
  RadialMoments m;
  m.R = R;
  m.sphere = sphere_samples(opt.level);
  const std::size_t n = m.sphere->size();
  m.L1.assign(n, Vec5::Zero());
  m.G.assign(n, Mat5::Zero());
  if (u.identically_zero) return m;

  const double r_min = opt.r_min_ratio * R;
  const GaussRule rule = gauss_legendre(opt.n_radial, r_min, R);
  const auto d = u.homogeneity;
#if defined(_OPENMP)
#pragma omp parallel for schedule(static)
#endif
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    const Vec5& s = m.sphere->nodes[i];
    Vec5 l1 = Vec5::Zero();
    Mat5 g = Mat5::Zero();
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      const double r = rule.nodes[k];
      const Vec5 x = r * s;
      l1 += rule.weights[k] * r * r * r * u.eval(x);
      g += rule.weights[k] * r * r * ambient_gradient(u, x);
    }
    if (d) {
      // Exact core (0, r_min) for r^{3+d} and r^{1+d} power laws.
      const Vec5 x = r_min * s;
      l1 += r_min * r_min * r_min * r_min / (*d + 4.0) * u.eval(x);
      g += r_min * r_min * r_min / (*d + 2.0) * ambient_gradient(u, x);
    }
    m.L1[i] = l1;
    m.G[i] = g;
  }
  return m;
}

/// <u, h_eta>_R from precomputed moments.
inline double projection_functional(const RadialMoments& m, const VectorProfile& eta, SphereDifferencing d = {}) {
  std::vector<double> vals(m.sphere->size());
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const Vec5& s = m.sphere->nodes[i];
    vals[i] = m.a(i).dot(eta(s)) + m.B(i).cwiseProduct(tangential_jacobian(eta, s, d)).sum();
  }
  return integrate_sphere_values(vals, *m.sphere);
}

/// Exponents of the spherical polynomial basis of degree <= L.
inline std::vector<Powers> projection_basis(int degree) {
  if (degree < 0) throw ConfigError("projection degree must be non-negative");
  std::vector<Powers> basis = monomials_of_degree(degree);
  if (degree >= 1) {
    auto lower = monomials_of_degree(degree - 1);
    basis.insert(basis.end(), lower.begin(), lower.end());
  }
  return basis;
}

struct ProjectionResult {
  double R = 0.0;
  VectorPolynomial zeta_poly;
  VectorProfile zeta_star;
  SphericalField zeta_samples;
  double error_sq = 0.0;
  double energy = 0.0;
  double closeness = 0.0;
  int cg_iters = 0;
  double residual = 0.0;
};

namespace detail {

/// Squared scaled distance between u and h_zeta on B_R, by direct ball
/// quadrature with power-law cores where they are known. zeta and its
/// tangential Jacobian depend only on the direction and are sampled once per
/// sphere node. Fields of mixed homogeneity (for instance h + constant) get
/// no core correction for the u terms, so their accuracy is set by r_min.
inline double scaled_distance_sq(const VectorField& u, const VectorProfile& zeta, double R, const Resolution& res) {
  const BallGrid grid = ball_grid(R, res);
  const auto& nodes = grid.sphere->nodes;
  std::vector<Vec5> z(nodes.size());
  std::vector<Mat5> dz(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    z[i] = zeta(nodes[i]);
    dz[i] = zeta.tangential(nodes[i]) - z[i] * nodes[i].transpose();
  }
  const auto d = u.homogeneity;
  auto e = [&](double k) { return d ? RadialExponent(k) : std::nullopt; };
  const bool zero = u.identically_zero;
  const auto v = integrate_ball_nodes<6>(
      [&](const Vec5& x, std::size_t i) {
        const double r = x.norm();
        const Vec5 h = z[i] / r;
        const Mat5 dh = dz[i] / (r * r);
        const Vec5 w = zero ? Vec5::Zero() : u.eval(x);
        const Mat5 dw = zero ? Mat5::Zero() : ambient_gradient(u, x);
        return std::array<double, 6>{w.squaredNorm(), w.dot(h), h.squaredNorm(),
                                     dw.squaredNorm(), dw.cwiseProduct(dh).sum(), dh.squaredNorm()};
      },
      grid,
      {d ? e(2 * *d) : std::nullopt, d ? e(*d - 1) : std::nullopt, RadialExponent(-2.0),
       d ? e(2 * *d - 2) : std::nullopt, d ? e(*d - 3) : std::nullopt, RadialExponent(-4.0)});
  return (v[0] - 2.0 * v[1] + v[2]) / (R * R * R) + (v[3] - 2.0 * v[4] + v[5]) / R;
}

}  // namespace detail

/// Nearest self-similar field to u in the scaled inner product on B_R.
inline ProjectionResult project(const VectorField& u, double R, const ProjectionOptions& opt = {}) {
  const RadialMoments m = radial_moments(u, R, opt);
  const auto& sphere = *m.sphere;
  const std::size_t n = sphere.size();
  const std::vector<Powers> basis = projection_basis(opt.degree);
  const Eigen::Index nb = static_cast<Eigen::Index>(basis.size());

  // Basis values and the five components of their tangential gradients,
  // one row per node.
  Eigen::MatrixXd phi(n, nb);
  std::array<Eigen::MatrixXd, kDim> dphi;
  for (auto& m_j : dphi) m_j.resize(n, nb);
  for (Eigen::Index b = 0; b < nb; ++b) {
    const Polynomial p({Monomial{basis[b], 1.0}});
    for (std::size_t i = 0; i < n; ++i) {
      const Vec5& s = sphere.nodes[i];
      phi(i, b) = p(s);
      const Vec5 g = tangential_part(s, p.gradient(s));
      for (int j = 0; j < kDim; ++j) dphi[j](i, b) = g(j);
    }
  }

  // Data terms: A(i, c) = a_c(sigma_i), Bj[j](i, c) = B_i(c, j).
  const Eigen::Map<const Eigen::VectorXd> w(sphere.weights.data(), static_cast<Eigen::Index>(n));
  Eigen::MatrixXd A(n, kDim);
  std::array<Eigen::MatrixXd, kDim> Bj;
  for (auto& m_j : Bj) m_j.resize(n, kDim);
  for (std::size_t i = 0; i < n; ++i) {
    A.row(i) = m.a(i).transpose();
    const Mat5 B = m.B(i);
    for (int j = 0; j < kDim; ++j) Bj[j].row(i) = B.col(j).transpose();
  }

  Eigen::MatrixXd K = (4.0 / 3.0) * phi.transpose() * (w.asDiagonal() * phi);
  Eigen::MatrixXd rhs = phi.transpose() * (w.asDiagonal() * A);
  for (int j = 0; j < kDim; ++j) {
    K.noalias() += dphi[j].transpose() * (w.asDiagonal() * dphi[j]);
    rhs.noalias() += dphi[j].transpose() * (w.asDiagonal() * Bj[j]);
  }

  Eigen::ConjugateGradient<Eigen::MatrixXd, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
  const int max_iters =
      opt.max_iters > 0 ? opt.max_iters : static_cast<int>(10.0 * std::sqrt(static_cast<double>(n)));
  cg.setMaxIterations(max_iters);
  cg.setTolerance(opt.tolerance);
  cg.compute(K);

  ProjectionResult out;
  out.R = R;
  Eigen::MatrixXd coeffs(nb, kDim);
  for (int c = 0; c < kDim; ++c) {
    const Eigen::VectorXd b = rhs.col(c);
    if (b.norm() == 0.0) {
      coeffs.col(c).setZero();
      continue;
    }
    coeffs.col(c) = cg.solve(b);
    const double resid = (K * coeffs.col(c) - b).norm() / b.norm();
    out.cg_iters = std::max(out.cg_iters, static_cast<int>(cg.iterations()));
    out.residual = std::max(out.residual, resid);
    if (cg.info() != Eigen::Success || resid > opt.tolerance)
      throw ConvergenceError("projection CG did not reach the residual tolerance");
  }

  for (int c = 0; c < kDim; ++c) {
    std::vector<Monomial> terms;
    for (Eigen::Index b = 0; b < nb; ++b)
      if (coeffs(b, c) != 0.0) terms.push_back({basis[b], coeffs(b, c)});
    out.zeta_poly[c] = Polynomial(std::move(terms));
  }
  out.zeta_star = polynomial_profile(out.zeta_poly);
  out.zeta_samples = sample(out.zeta_star, m.sphere);

  out.energy = scale_invariant_energy(u, R, opt.resolution());
  out.error_sq = std::max(0.0, detail::scaled_distance_sq(u, out.zeta_star, R, opt.resolution()));
  out.closeness = out.energy > 0.0 ? out.error_sq / out.energy : 0.0;
  return out;
}

/// ||u - P_R u||^2 / M(R).
inline double closeness_ratio(const VectorField& u, double R, const ProjectionOptions& opt = {}) {
  const ProjectionResult p = project(u, R, opt);
  if (!(p.energy > 0.0)) throw DegenerateError("closeness ratio is undefined for M(R) = 0");
  return p.closeness;
}

inline nlohmann::json to_json(const ProjectionResult& p) {
  nlohmann::json j;
  j["R"] = p.R;
  j["error_sq"] = p.error_sq;
  j["energy"] = p.energy;
  j["closeness"] = p.closeness;
  j["cg_iters"] = p.cg_iters;
  j["residual"] = p.residual;
  const auto& sphere = *p.zeta_samples.sphere;
  j["sphere"] = {{"level", sphere.level}, {"nodes", sphere.size()}};
  nlohmann::json nodes = nlohmann::json::array();
  nlohmann::json zeta = nlohmann::json::array();
  for (std::size_t i = 0; i < sphere.size(); ++i) {
    const Vec5& s = sphere.nodes[i];
    const Vec5 z = p.zeta_samples.vector_at(i);
    nodes.push_back({s(0), s(1), s(2), s(3), s(4)});
    zeta.push_back({z(0), z(1), z(2), z(3), z(4)});
  }
  j["sphere"]["points"] = std::move(nodes);
  j["zeta_star"] = std::move(zeta);
  return j;
}

}  // namespace nsmono
