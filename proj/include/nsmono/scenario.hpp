#pragma once

// Config-driven scenarios. A scenario is a JSON object:
//
//   name        string, used as the report file prefix
//   field       fixture spec, e.g. {"name": "constant", "e": [1,0,0,0,0]}
//   pressure    pressure fixture spec | "recover" | "none"
//   radii       strictly increasing positive radii for the profile
//   resolution  {n_radial, level, n_torus}
//   tolerances  {identity, projection, euler, pressure, iteration}
//   checks      enable invariant assertions (default true)
//   outputs     any of profile, project, euler, pressure, iterate, threshold
//   seed        seed for random probes (default 0)
//   project     {R, degree}
//   euler       {zeta: profile spec, probes}
//   torus       {L, write_samples}; grid size from resolution.n_torus
//   iterate     {b, delta, F1, depth}
//   threshold   {m, C_E}

#include "nsmono/errors.hpp"
#include "nsmono/fixtures.hpp"
#include "nsmono/functionals.hpp"
#include "nsmono/iteration.hpp"
#include "nsmono/pressure.hpp"
#include "nsmono/projection.hpp"
#include "nsmono/sphere_calculus.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace nsmono {

struct Tolerances {
  double identity = 5e-4;
  double projection = 1e-7;
  double euler = 1e-4;
  double pressure = 1e-9;
  double iteration = 1e-12;
};

struct ScenarioConfig {
  std::string name = "scenario";
  nlohmann::json field = {{"name", "zero"}};
  nlohmann::json pressure = "none";
  std::vector<double> radii;
  int n_radial = 32;
  int level = 16;
  int n_torus = 16;
  Tolerances tolerances;
  bool checks = true;
  std::vector<std::string> outputs;
  std::uint64_t seed = 0;

  double project_R = 1.0;
  int project_degree = 4;
  nlohmann::json euler_zeta = {{"kind", "rotation"}, {"i", 1}, {"j", 2}};
  int euler_probes = 32;
  double torus_L = 2.0 * kPi;
  bool torus_write_samples = false;
  nlohmann::json iterate = {{"b", 1.0}, {"delta", 0.1}, {"F1", 1.0}, {"depth", 40}};
  double threshold_m = 16.0;
  double threshold_C_E = 1.0;

  Resolution resolution() const { return Resolution{n_radial, level, 1e-3}; }
  bool wants(const std::string& kind) const {
    return std::find(outputs.begin(), outputs.end(), kind) != outputs.end();
  }
};

inline const std::vector<std::string>& report_kinds() {
  static const std::vector<std::string> kinds{"profile", "project", "euler", "pressure", "iterate", "threshold"};
  return kinds;
}

namespace detail {

template <class T>
T config_value(const nlohmann::json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("bad value for '" + where + key + "'");
  }
}

inline void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw ConfigError("unknown key '" + where + it.key() + "'");
}

}  // namespace detail

inline ScenarioConfig parse_scenario(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("scenario must be a JSON object");
  detail::reject_unknown_keys(j,
                              {"name", "field", "pressure", "radii", "resolution", "tolerances", "checks", "outputs",
                               "seed", "project", "euler", "torus", "iterate", "threshold"},
                              "");
  ScenarioConfig c;
  c.name = detail::config_value<std::string>(j, "name", c.name, "");
  if (c.name.empty() || c.name.find_first_of("/\\") != std::string::npos) throw ConfigError("bad value for 'name'");
  if (j.contains("field")) c.field = j.at("field");
  if (j.contains("pressure")) c.pressure = j.at("pressure");
  c.radii = detail::config_value<std::vector<double>>(j, "radii", {}, "");
  for (std::size_t i = 0; i < c.radii.size(); ++i) {
    if (!(c.radii[i] > 0.0)) throw ConfigError("'radii' must be positive");
    if (i > 0 && !(c.radii[i] > c.radii[i - 1])) throw ConfigError("'radii' must be strictly increasing");
  }

  if (j.contains("resolution")) {
    const auto& r = j.at("resolution");
    detail::reject_unknown_keys(r, {"n_radial", "level", "n_torus"}, "resolution.");
    c.n_radial = detail::config_value<int>(r, "n_radial", c.n_radial, "resolution.");
    c.level = detail::config_value<int>(r, "level", c.level, "resolution.");
    c.n_torus = detail::config_value<int>(r, "n_torus", c.n_torus, "resolution.");
  }
  if (c.n_radial < 4 || c.n_radial > 256) throw ConfigError("'resolution.n_radial' must lie in [4, 256]");
  if (c.level < 2 || c.level > 64) throw ConfigError("'resolution.level' must lie in [2, 64]");
  if (c.n_torus < 8 || c.n_torus > 32 || c.n_torus % 2) throw ConfigError("'resolution.n_torus' must be even in [8, 32]");

  if (j.contains("tolerances")) {
    const auto& t = j.at("tolerances");
    detail::reject_unknown_keys(t, {"identity", "projection", "euler", "pressure", "iteration"}, "tolerances.");
    c.tolerances.identity = detail::config_value<double>(t, "identity", c.tolerances.identity, "tolerances.");
    c.tolerances.projection = detail::config_value<double>(t, "projection", c.tolerances.projection, "tolerances.");
    c.tolerances.euler = detail::config_value<double>(t, "euler", c.tolerances.euler, "tolerances.");
    c.tolerances.pressure = detail::config_value<double>(t, "pressure", c.tolerances.pressure, "tolerances.");
    c.tolerances.iteration = detail::config_value<double>(t, "iteration", c.tolerances.iteration, "tolerances.");
  }
  c.checks = detail::config_value<bool>(j, "checks", c.checks, "");
  c.outputs = detail::config_value<std::vector<std::string>>(j, "outputs", {"profile"}, "");
  for (const auto& o : c.outputs)
    if (std::find(report_kinds().begin(), report_kinds().end(), o) == report_kinds().end())
      throw ConfigError("unknown report kind '" + o + "' in 'outputs'");
  c.seed = detail::config_value<std::uint64_t>(j, "seed", c.seed, "");

  if (j.contains("project")) {
    const auto& p = j.at("project");
    detail::reject_unknown_keys(p, {"R", "degree"}, "project.");
    c.project_R = detail::config_value<double>(p, "R", c.project_R, "project.");
    c.project_degree = detail::config_value<int>(p, "degree", c.project_degree, "project.");
    if (!(c.project_R > 0.0) || c.project_degree < 0 || c.project_degree > 8)
      throw ConfigError("'project' needs R > 0 and degree in [0, 8]");
  }
  if (j.contains("euler")) {
    const auto& e = j.at("euler");
    detail::reject_unknown_keys(e, {"zeta", "probes"}, "euler.");
    if (e.contains("zeta")) c.euler_zeta = e.at("zeta");
    c.euler_probes = detail::config_value<int>(e, "probes", c.euler_probes, "euler.");
    if (c.euler_probes < 1) throw ConfigError("'euler.probes' must be positive");
  }
  if (j.contains("torus")) {
    const auto& t = j.at("torus");
    detail::reject_unknown_keys(t, {"L", "write_samples"}, "torus.");
    c.torus_L = detail::config_value<double>(t, "L", c.torus_L, "torus.");
    c.torus_write_samples = detail::config_value<bool>(t, "write_samples", false, "torus.");
    if (!(c.torus_L > 0.0)) throw ConfigError("'torus.L' must be positive");
  }
  if (j.contains("iterate")) c.iterate = j.at("iterate");
  if (j.contains("threshold")) {
    const auto& t = j.at("threshold");
    detail::reject_unknown_keys(t, {"m", "C_E"}, "threshold.");
    c.threshold_m = detail::config_value<double>(t, "m", c.threshold_m, "threshold.");
    c.threshold_C_E = detail::config_value<double>(t, "C_E", c.threshold_C_E, "threshold.");
  }

  // Resolve fixture specs now so that bad names surface as config errors.
  (void)fixture_field(c.field);
  if (c.pressure.is_object()) {
    (void)scalar_fixture(c.pressure);
  } else if (!(c.pressure.is_string() && (c.pressure == "recover" || c.pressure == "none"))) {
    throw ConfigError("'pressure' must be a fixture spec, \"recover\" or \"none\"");
  }
  try {
    (void)vector_profile_from_json(c.euler_zeta);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad value for 'euler.zeta': ") + e.what());
  }
  (void)recurrence_from_json(c.iterate);
  (void)threshold_constants(c.threshold_m, c.threshold_C_E);
  return c;
}

inline ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file " + path.string());
  try {
    return parse_scenario(nlohmann::json::parse(is, nullptr, true, true));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
}

struct RunOptions {
  std::optional<std::uint64_t> seed;
  double tol_scale = 1.0;
};

struct ReportBundle {
  std::string name = "scenario";
  bool has_profile = false;
  std::vector<MonotonicityReport> profile;
  std::optional<nlohmann::json> projection;
  std::optional<nlohmann::json> euler;
  std::optional<nlohmann::json> pressure;
  std::optional<TorusGrid> pressure_samples;
  std::vector<double> orbit;
  std::optional<nlohmann::json> iterate;
  std::optional<nlohmann::json> threshold;
  std::vector<std::string> failures;

  bool empty() const {
    return !has_profile && !projection && !euler && !pressure && !iterate && !threshold;
  }
};

namespace detail {

inline void expect(ReportBundle& b, bool ok, const std::string& what) {
  if (!ok) b.failures.push_back(what);
}

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline ReportBundle run_scenario(const ScenarioConfig& c, const RunOptions& run = {}) {
  ReportBundle b;
  b.name = c.name;
  const std::uint64_t seed = run.seed.value_or(c.seed);
  Tolerances tol = c.tolerances;
  for (double* t : {&tol.identity, &tol.projection, &tol.euler, &tol.pressure, &tol.iteration}) *t *= run.tol_scale;
  const Resolution res = c.resolution();
  const VectorField u = fixture_field(c.field);

  ScalarField P = zero_scalar_field();
  if (c.pressure.is_object()) {
    P = scalar_fixture(c.pressure);
  } else if (c.pressure == "recover") {
    P = periodic_field(recover_pressure_periodic(sample_torus(u, c.torus_L, c.n_torus)));
  }

  if (c.wants("profile")) {
    b.has_profile = true;
    for (double r : c.radii) {
      const MonotonicityReport row = monotonicity_report(u, P, r, res);
      b.profile.push_back(row);
      if (c.checks) {
        detail::expect(b, std::abs(row.identity_defect) <= tol.identity,
                       "profile: identity defect " + detail::fmt(row.identity_defect) + " at r=" + detail::fmt(r));
        detail::expect(b, row.Q <= row.D + 0.25 * row.M + tol.identity, "profile: Q exceeds D + M/4 at r=" + detail::fmt(r));
      }
    }
  }

  if (c.wants("project")) {
    ProjectionOptions opt;
    opt.degree = c.project_degree;
    opt.level = c.level;
    opt.n_radial = c.n_radial;
    const ProjectionResult p = project(u, c.project_R, opt);
    const double image = gram_inner(p.zeta_star, p.zeta_star, *p.zeta_samples.sphere);
    const double pythagoras = p.energy - image - p.error_sq;
    nlohmann::json j = to_json(p);
    j["pythagoras_defect"] = pythagoras;
    b.projection = std::move(j);
    if (c.checks)
      detail::expect(b, std::abs(pythagoras) <= tol.projection * std::max(1.0, p.energy),
                     "project: Pythagoras defect " + detail::fmt(pythagoras));
  }

  if (c.wants("euler")) {
    const VectorProfile zeta = polynomial_profile(vector_profile_from_json(c.euler_zeta));
    const auto sphere = sphere_samples(c.level);
    const SplitDefects split = split_identity_defects(tangential_part(zeta), *sphere);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<Vec5> probes(c.euler_probes);
    for (auto& p : probes) {
      for (int k = 0; k < kDim; ++k) p(k) = normal(rng);
      p.normalize();
    }
    const double conv = convective_decomposition_defect(zeta, probes);
    XiOptions xo;
    xo.seed = seed;
    const XiResult xi = reconstruct_xi(omega_from_zeta(zeta), unit(4), sphere, xo);
    b.euler = nlohmann::json{{"split", {{"d1", split.d1}, {"d2", split.d2}, {"h_f2", split.h_f2}, {"quartic", split.quartic}}},
                             {"convective_defect", conv},
                             {"xi", {{"radial_defect", xi.radial_defect}, {"loop_defect", xi.loop_defect},
                                     {"non_integrable", xi.non_integrable}}}};
    if (c.checks) {
      detail::expect(b, std::abs(split.d1) <= tol.euler, "euler: split identity d1 " + detail::fmt(split.d1));
      detail::expect(b, std::abs(split.d2) <= tol.euler, "euler: split identity d2 " + detail::fmt(split.d2));
      detail::expect(b, conv <= tol.euler, "euler: convective decomposition defect " + detail::fmt(conv));
    }
  }

  if (c.wants("pressure")) {
    const TorusGrid velocity = sample_torus(u, c.torus_L, c.n_torus);
    TorusGrid p = recover_pressure_periodic(velocity);
    const TorusGrid lap = spectral_laplacian(p);
    const TorusGrid dd = spectral_div_div(velocity);
    double scale = 0.0, defect = 0.0, peak = 0.0;
    for (std::size_t i = 0; i < p.points(); ++i) {
      scale = std::max(scale, std::abs(dd.values[i]));
      defect = std::max(defect, std::abs(-lap.values[i] - dd.values[i]));
      peak = std::max(peak, std::abs(p.values[i]));
    }
    const double relative = scale > 0.0 ? defect / scale : defect;
    const double mean = torus_mean(p);
    b.pressure = nlohmann::json{{"L", p.L}, {"n", p.n}, {"mean", mean}, {"max_abs", peak}, {"laplacian_defect", relative}};
    if (c.torus_write_samples) b.pressure_samples = std::move(p);
    if (c.checks) {
      detail::expect(b, std::abs(mean) <= tol.pressure * std::max(1.0, peak), "pressure: nonzero mean " + detail::fmt(mean));
      detail::expect(b, relative <= tol.pressure, "pressure: Laplacian defect " + detail::fmt(relative));
    }
  }

  if (c.wants("iterate")) {
    const RecurrenceSpec s = recurrence_from_json(c.iterate);
    if (!check_recurrence_premise(s)) throw PremiseViolated("iterate: recurrence premise on delta does not hold");
    b.orbit = simulate_recurrence(s);
    const double bound = iteration_bound(s);
    const double sup = *std::max_element(b.orbit.begin(), b.orbit.end());
    b.iterate = nlohmann::json{{"spec", to_json(s)}, {"bound", bound}, {"sup", sup}, {"orbit", b.orbit}};
    if (c.checks) detail::expect(b, sup <= bound + tol.iteration, "iterate: orbit exceeds the bound");
  }

  if (c.wants("threshold")) {
    const ThresholdConstants t = threshold_constants(c.threshold_m, c.threshold_C_E);
    nlohmann::json j = to_json(t);
    if (t.m > 0.0) {
      const double via = threshold_bound_via_recurrence(t);
      j["bound_via_recurrence"] = via;
      if (c.checks)
        detail::expect(b, std::abs(via - t.C0) <= tol.iteration * std::max(1.0, t.C0),
                       "threshold: C0 differs from the recurrence bound");
    }
    b.threshold = std::move(j);
  }
  return b;
}

// ---------------------------------------------------------------------------
// Report emission
// ---------------------------------------------------------------------------

enum class ReportFormat { csv, json };

inline ReportFormat parse_format(const std::string& s) {
  if (s == "csv") return ReportFormat::csv;
  if (s == "json") return ReportFormat::json;
  throw ConfigError("unknown report format '" + s + "'");
}

inline constexpr const char* kProfileHeader = "r,M,A,D,Q,wp,T,A_prime,identity_defect";

namespace detail {

inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + tmp.string() + " for writing");
    os << content;
    os.flush();
    if (!os) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move report into place at " + path.string());
  }
}

inline std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

inline nlohmann::json row_json(const MonotonicityReport& r) {
  return {{"r", r.r}, {"M", r.M}, {"A", r.A}, {"D", r.D}, {"Q", r.Q}, {"wp", r.wp},
          {"T", r.T}, {"A_prime", r.A_prime}, {"identity_defect", r.identity_defect}};
}

}  // namespace detail

inline std::string profile_csv(const std::vector<MonotonicityReport>& rows) {
  std::ostringstream os;
  os << kProfileHeader << '\n';
  for (const auto& r : rows) {
    using detail::fmt;
    os << fmt(r.r) << ',' << fmt(r.M) << ',' << fmt(r.A) << ',' << fmt(r.D) << ',' << fmt(r.Q) << ',' << fmt(r.wp)
       << ',' << fmt(r.T) << ',' << fmt(r.A_prime) << ',' << fmt(r.identity_defect) << '\n';
  }
  return os.str();
}

/// Writes <dir>/<name>_<kind>.{csv,json}; returns the written paths.
/// Tabular reports (profile, iterate) follow `format`; the others are JSON.
inline std::vector<std::filesystem::path> emit_report(const ReportBundle& b, ReportFormat format,
                                                      const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
  std::vector<std::filesystem::path> written;
  auto put = [&](const std::string& kind, const char* ext, const std::string& content) {
    const auto path = dir / (b.name + "_" + kind + ext);
    detail::write_atomic(path, content);
    written.push_back(path);
  };

  if (b.has_profile || b.empty()) {
    if (format == ReportFormat::csv) {
      put("profile", ".csv", profile_csv(b.profile));
    } else {
      nlohmann::json rows = nlohmann::json::array();
      for (const auto& r : b.profile) rows.push_back(detail::row_json(r));
      put("profile", ".json", detail::dump({{"columns", nlohmann::json::array({"r", "M", "A", "D", "Q", "wp", "T",
                                                                             "A_prime", "identity_defect"})},
                                            {"rows", rows}}));
    }
  }
  if (b.projection) put("projection", ".json", detail::dump(*b.projection));
  if (b.euler) put("euler", ".json", detail::dump(*b.euler));
  if (b.pressure) {
    put("pressure", ".json", detail::dump(*b.pressure));
    if (b.pressure_samples) {
      const auto path = dir / (b.name + "_pressure.bin");
      write_torus(path, *b.pressure_samples);
      written.push_back(path);
    }
  }
  if (b.iterate) {
    if (format == ReportFormat::csv) {
      std::ostringstream os;
      os << "m,F\n";
      for (std::size_t m = 0; m < b.orbit.size(); ++m) os << m << ',' << detail::fmt(b.orbit[m]) << '\n';
      put("iterate", ".csv", os.str());
    } else {
      put("iterate", ".json", detail::dump(*b.iterate));
    }
  }
  if (b.threshold) put("threshold", ".json", detail::dump(*b.threshold));

  nlohmann::json summary = {{"name", b.name}, {"status", b.failures.empty() ? "pass" : "fail"}, {"failures", b.failures}};
  put("summary", ".json", detail::dump(summary));
  return written;
}

}  // namespace nsmono
