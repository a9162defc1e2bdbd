#pragma once

#include "nsmono/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

namespace nsmono {

/// Recurrence F(4^{-m-1}) <= b + delta F(4^{-m})^{3/2} with F(1) = F1.
struct RecurrenceSpec {
  double b = 1.0;
  double delta = 0.1;
  double F1 = 1.0;
  int depth = 60;
};

inline void validate(const RecurrenceSpec& s) {
  if (!(std::isfinite(s.b) && s.b > 0.0)) throw ConfigError("recurrence needs a finite b > 0");
  if (!(std::isfinite(s.delta) && s.delta > 0.0)) throw ConfigError("recurrence needs a finite delta > 0");
  if (!(std::isfinite(s.F1) && s.F1 > 0.0)) throw ConfigError("recurrence needs a finite F1 > 0");
  if (s.depth < 1) throw ConfigError("recurrence depth must be at least 1");
}

/// min{b F1^{-3/2}, 1 / (2 sqrt(2b))}.
inline double recurrence_delta_limit(const RecurrenceSpec& s) {
  return std::min(s.b * std::pow(s.F1, -1.5), 1.0 / (2.0 * std::sqrt(2.0 * s.b)));
}

/// delta <= min{b F1^{-3/2}, 1/(2 sqrt(2b))}, with a relative slack of a
/// few ulps so that boundary cases such as delta = 2^{-3/2} are admitted.
inline bool check_recurrence_premise(const RecurrenceSpec& s) {
  validate(s);
  return s.delta <= recurrence_delta_limit(s) * (1.0 + 1e-14);
}

/// The equality orbit F_0 = F1, F_{m+1} = b + delta F_m^{3/2}, without any
/// premise check. Every sequence obeying the inequality and starting at F1
/// stays below it, because x -> b + delta x^{3/2} is increasing.
inline std::vector<double> equality_orbit(double b, double delta, double F1, int depth) {
  std::vector<double> f(static_cast<std::size_t>(depth) + 1);
  f[0] = F1;
  for (int m = 0; m < depth; ++m) f[m + 1] = b + delta * std::pow(f[m], 1.5);
  return f;
}

/// F(4^{-m}) for m = 0..depth on the worst-case orbit.
inline std::vector<double> simulate_recurrence(const RecurrenceSpec& s) {
  if (!check_recurrence_premise(s)) throw PremiseViolated("recurrence premise on delta does not hold");
  return equality_orbit(s.b, s.delta, s.F1, s.depth);
}

/// max{2b, (b/delta)^{2/3}}; for b = 1 this is max{2, delta^{-2/3}}.
inline double iteration_bound(const RecurrenceSpec& s) {
  if (!check_recurrence_premise(s)) throw PremiseViolated("recurrence premise on delta does not hold");
  return std::max(2.0 * s.b, std::pow(s.b / s.delta, 2.0 / 3.0));
}

/// S(l) = sum_{j<l} (3/2)^j = 2((3/2)^l - 1).
inline double geometric_exponent(int l) { return 2.0 * (std::pow(1.5, l) - 1.0); }

/// Slack of F(4^{-m}) <= 1 + (1/2)(2 delta)^{S(l)} F(4^{l-m})^{(3/2)^l} on a
/// b = 1 orbit (positive means the inequality holds). The inequality is
/// derived under delta F(4^{-j})^{3/2} >= 1 for m - l <= j < m; `applies`
/// reports whether that condition holds on the orbit.
struct InductionCheck {
  double slack = 0.0;
  bool applies = false;
};

inline InductionCheck induction_claim(const std::vector<double>& orbit, double delta, int m, int l) {
  if (l < 1 || m - l < 0 || m >= static_cast<int>(orbit.size())) throw ConfigError("induction indices out of range");
  InductionCheck c;
  c.applies = true;
  for (int j = m - l; j < m; ++j) c.applies = c.applies && delta * std::pow(orbit[j], 1.5) >= 1.0;
  const double rhs = 1.0 + 0.5 * std::pow(2.0 * delta, geometric_exponent(l)) * std::pow(orbit[m - l], std::pow(1.5, l));
  c.slack = rhs - orbit[m];
  return c;
}

struct ThresholdConstants {
  double m = 0.0;
  double C_E = 1.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double C0 = 0.0;
  bool feasible = false;
};

/// delta1 = m^2/2; delta2 is the largest value with
/// sqrt(m) >= 2 sqrt2 delta2 + sqrt(8 (delta2^2 + C_E)). Writing a = 2 sqrt2 delta2,
/// squaring gives a <= (m - 8 C_E) / (2 sqrt m), so delta2 = (m - 8 C_E) / (4 sqrt2 sqrt m)
/// when m > 8 C_E and 0 otherwise.
inline ThresholdConstants threshold_constants(double m, double C_E) {
  if (!(C_E >= 1.0)) throw ConfigError("threshold constants need C_E >= 1");
  if (!(m >= 0.0) || !std::isfinite(m)) throw ConfigError("threshold constants need a finite m >= 0");
  ThresholdConstants t;
  t.m = m;
  t.C_E = C_E;
  t.delta1 = 0.5 * m * m;
  t.feasible = m > 8.0 * C_E;
  t.delta2 = t.feasible ? (m - 8.0 * C_E) / (4.0 * std::sqrt(2.0) * std::sqrt(m)) : 0.0;
  const double sm = std::sqrt(m);
  const double inner = m * m * sm / (2.0 * t.delta2 * sm + 2.0 * std::sqrt(2.0) * C_E);
  t.C0 = std::max(m * m, std::pow(inner, 2.0 / 3.0));
  return t;
}

/// The bound obtained by feeding b = delta1 and delta = delta2 + sqrt2 C_E / sqrt m
/// into iteration_bound's formula; it coincides with C0.
inline double threshold_bound_via_recurrence(const ThresholdConstants& t) {
  const double delta = t.delta2 + std::sqrt(2.0) * t.C_E / std::sqrt(t.m);
  return std::max(2.0 * t.delta1, std::pow(t.delta1 / delta, 2.0 / 3.0));
}

inline nlohmann::json to_json(const RecurrenceSpec& s) {
  return {{"b", s.b}, {"delta", s.delta}, {"F1", s.F1}, {"depth", s.depth}};
}

inline RecurrenceSpec recurrence_from_json(const nlohmann::json& j) {
  RecurrenceSpec s;
  try {
    s.b = j.value("b", 1.0);
    s.delta = j.at("delta").get<double>();
    s.F1 = j.value("F1", 1.0);
    s.depth = j.value("depth", 60);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("recurrence spec: ") + e.what());
  }
  validate(s);
  return s;
}

inline nlohmann::json to_json(const ThresholdConstants& t) {
  return {{"m", t.m}, {"C_E", t.C_E}, {"delta1", t.delta1}, {"delta2", t.delta2}, {"C0", t.C0}, {"feasible", t.feasible}};
}

}  // namespace nsmono
