#pragma once

#include "nsmono/fixtures.hpp"
#include "nsmono/types.hpp"

#include <random>
#include <vector>

namespace testing_support {

inline nsmono::Vec5 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  nsmono::Vec5 v;
  for (int k = 0; k < nsmono::kDim; ++k) v(k) = n(rng);
  return v / v.norm();
}

inline std::vector<nsmono::Vec5> random_units(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<nsmono::Vec5> out;
  for (int i = 0; i < count; ++i) out.push_back(random_unit(rng));
  return out;
}

/// Uniform points in the annulus r_lo < |x| < r_hi.
inline std::vector<nsmono::Vec5> random_points(int count, double r_lo, double r_hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> radius(r_lo, r_hi);
  std::vector<nsmono::Vec5> out;
  for (int i = 0; i < count; ++i) out.push_back(radius(rng) * random_unit(rng));
  return out;
}

/// Random polynomial vector profile with a few monomials per component.
inline nsmono::VectorPolynomial random_profile(std::mt19937_64& rng, int max_degree, int terms_per_component = 3) {
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  std::uniform_int_distribution<int> deg(0, max_degree), axis(0, nsmono::kDim - 1);
  nsmono::VectorPolynomial p;
  for (int c = 0; c < nsmono::kDim; ++c) {
    std::vector<nsmono::Monomial> terms;
    for (int t = 0; t < terms_per_component; ++t) {
      nsmono::Powers pw{};
      for (int d = deg(rng); d > 0; --d) ++pw[axis(rng)];
      terms.push_back({pw, coeff(rng)});
    }
    p[c] = nsmono::Polynomial(terms);
  }
  return p;
}

}  // namespace testing_support
