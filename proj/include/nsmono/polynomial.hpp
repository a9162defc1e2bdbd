#pragma once

#include "nsmono/types.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>
#include <vector>

namespace nsmono {

using Powers = std::array<int, kDim>;

struct Monomial {
  Powers powers{};
  double coeff = 0.0;
};

inline int total_degree(const Powers& p) {
  int d = 0;
  for (int v : p) d += v;
  return d;
}

/// Sparse polynomial in the five ambient coordinates.
class Polynomial {
 public:
  Polynomial() = default;
  static constexpr int kMaxDegree = 32;

  explicit Polynomial(std::vector<Monomial> terms) : terms_(std::move(terms)) {
    for (const auto& t : terms_) {
      for (int e : t.powers)
        if (e < 0) throw std::invalid_argument("negative exponent in polynomial term");
      degree_ = std::max(degree_, total_degree(t.powers));
    }
    if (degree_ > kMaxDegree) throw std::invalid_argument("polynomial degree exceeds 32");
  }

  static Polynomial constant(double c) { return Polynomial({Monomial{Powers{}, c}}); }
  static Polynomial coordinate(int k, double c = 1.0) {
    Powers p{};
    p[k] = 1;
    return Polynomial({Monomial{p, c}});
  }

  const std::vector<Monomial>& terms() const { return terms_; }
  int degree() const { return degree_; }
  bool empty() const { return terms_.empty(); }

  Polynomial& add(const Polynomial& other, double scale = 1.0) {
    for (auto t : other.terms_) {
      t.coeff *= scale;
      terms_.push_back(t);
      degree_ = std::max(degree_, total_degree(t.powers));
    }
    if (degree_ > kMaxDegree) throw std::invalid_argument("polynomial degree exceeds 32");
    return *this;
  }

  double operator()(const Vec5& x) const {
    const auto table = power_table(x);
    double s = 0.0;
    for (const auto& t : terms_) {
      double m = t.coeff;
      for (int k = 0; k < kDim; ++k) m *= table[k][t.powers[k]];
      s += m;
    }
    return s;
  }

  Vec5 gradient(const Vec5& x) const {
    const auto table = power_table(x);
    Vec5 g = Vec5::Zero();
    for (const auto& t : terms_) {
      for (int j = 0; j < kDim; ++j) {
        if (t.powers[j] == 0) continue;
        double m = t.coeff * t.powers[j];
        for (int k = 0; k < kDim; ++k) m *= table[k][t.powers[k] - (k == j ? 1 : 0)];
        g(j) += m;
      }
    }
    return g;
  }

 private:
  using PowerTable = std::array<std::array<double, kMaxDegree + 1>, kDim>;

  PowerTable power_table(const Vec5& x) const {
    PowerTable table;
    for (int k = 0; k < kDim; ++k) {
      table[k][0] = 1.0;
      for (int e = 1; e <= degree_; ++e) table[k][e] = table[k][e - 1] * x(k);
    }
    return table;
  }

  std::vector<Monomial> terms_;
  int degree_ = 0;
};

/// All exponent vectors of total degree exactly `d`, in lexicographic order.
inline std::vector<Powers> monomials_of_degree(int d) {
  std::vector<Powers> out;
  Powers p{};
  auto rec = [&](auto&& self, int k, int left) -> void {
    if (k == kDim - 1) {
      p[k] = left;
      out.push_back(p);
      return;
    }
    for (int e = left; e >= 0; --e) {
      p[k] = e;
      self(self, k + 1, left - e);
    }
  };
  rec(rec, 0, d);
  return out;
}

}  // namespace nsmono
