#pragma once

#include "nsmono/errors.hpp"
#include "nsmono/field.hpp"
#include "nsmono/quadrature.hpp"
#include "nsmono/sphere_calculus.hpp"
#include "nsmono/sphere_function.hpp"
#include "nsmono/types.hpp"

#include <fftw3.h>
#include <json.hpp>

#include <algorithm>
#include <bit>
#include <complex>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace nsmono {

// ---------------------------------------------------------------------------
// Periodic box
// ---------------------------------------------------------------------------

/// Samples on the periodic box [0, L)^5 at x = (L/n) * index, channel-major:
/// values[c * n^5 + (((i0 n + i1) n + i2) n + i3) n + i4].
struct TorusGrid {
  double L = 2.0 * kPi;
  int n = 16;
  int channels = 1;
  std::vector<double> values;

  std::size_t points() const {
    std::size_t p = 1;
    for (int k = 0; k < kDim; ++k) p *= static_cast<std::size_t>(n);
    return p;
  }
  Vec5 position(std::size_t idx) const {
    Vec5 x;
    for (int k = kDim - 1; k >= 0; --k) {
      x(k) = L / n * static_cast<double>(idx % n);
      idx /= n;
    }
    return x;
  }
  double& at(int c, std::size_t idx) { return values[c * points() + idx]; }
  double at(int c, std::size_t idx) const { return values[c * points() + idx]; }
};

/// Refuse boxes above this many samples per channel (16^5 is about a million).
inline constexpr std::size_t kTorusBudget = std::size_t(1) << 25;

inline void validate_torus(int n) {
  if (n % 2 != 0) throw ConfigError("torus resolution must be even");
  if (n < 8) throw ConfigError("torus resolution must be at least 8");
  double pts = 1.0;
  for (int k = 0; k < kDim; ++k) pts *= n;
  if (pts > static_cast<double>(kTorusBudget)) throw ConfigError("torus resolution exceeds the memory budget");
}

inline TorusGrid sample_torus(const VectorField& u, double L, int n) {
  validate_torus(n);
  TorusGrid g;
  g.L = L;
  g.n = n;
  g.channels = kDim;
  const std::size_t N = g.points();
  g.values.resize(N * kDim);
  for (std::size_t i = 0; i < N; ++i) {
    const Vec5 v = u.eval(g.position(i));
    for (int c = 0; c < kDim; ++c) g.values[c * N + i] = v(c);
  }
  return g;
}

namespace detail {

/// RAII wrapper for an r2c/c2r pair on an n^5 box.
class Fft5 {
 public:
  explicit Fft5(int n) : n_(n) {
    for (int k = 0; k < kDim; ++k) dims_[k] = n;
    real_count_ = 1;
    for (int k = 0; k < kDim; ++k) real_count_ *= static_cast<std::size_t>(n);
    complex_count_ = real_count_ / n * (n / 2 + 1);
    real_ = fftw_alloc_real(real_count_);
    spec_ = fftw_alloc_complex(complex_count_);
    if (!real_ || !spec_) throw ConfigError("could not allocate FFT buffers");
    forward_ = fftw_plan_dft_r2c(kDim, dims_, real_, spec_, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_c2r(kDim, dims_, spec_, real_, FFTW_ESTIMATE);
  }
  ~Fft5() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
    fftw_free(real_);
    fftw_free(spec_);
  }
  Fft5(const Fft5&) = delete;
  Fft5& operator=(const Fft5&) = delete;

  double* real() { return real_; }
  std::complex<double>* spectrum() { return reinterpret_cast<std::complex<double>*>(spec_); }
  std::size_t real_count() const { return real_count_; }
  std::size_t complex_count() const { return complex_count_; }
  void forward() { fftw_execute(forward_); }
  /// Unnormalized inverse; destroys the spectrum buffer.
  void backward() { fftw_execute(backward_); }

  /// Integer wave numbers of a half-spectrum index, Nyquist kept as +n/2.
  std::array<int, kDim> modes(std::size_t idx) const {
    std::array<int, kDim> m{};
    const int half = n_ / 2 + 1;
    m[kDim - 1] = static_cast<int>(idx % half);
    idx /= half;
    for (int k = kDim - 2; k >= 0; --k) {
      const int j = static_cast<int>(idx % n_);
      idx /= n_;
      m[k] = j <= n_ / 2 ? j : j - n_;
    }
    return m;
  }
  bool nyquist(int m) const { return m == n_ / 2; }

 private:
  int n_;
  int dims_[kDim];
  std::size_t real_count_ = 0;
  std::size_t complex_count_ = 0;
  double* real_ = nullptr;
  fftw_complex* spec_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

}  // namespace detail

/// Mean-zero p with p^(k) = -(k_i k_j / |k|^2) (u_i u_j)^(k), i.e. the
/// periodic solution of -lap p = div div(u x u).
inline TorusGrid recover_pressure_periodic(const TorusGrid& u) {
  validate_torus(u.n);
  if (u.channels != kDim) throw ConfigError("pressure recovery needs a 5-component velocity");
  for (double v : u.values)
    if (!std::isfinite(v)) throw EvaluationError("non-finite velocity sample");

  detail::Fft5 fft(u.n);
  const std::size_t N = fft.real_count();
  const std::size_t M = fft.complex_count();
  // The multiplier k_i k_j / |k|^2 does not depend on the box length.
  std::vector<std::complex<double>> acc(M, 0.0);

  for (int i = 0; i < kDim; ++i) {
    for (int j = i; j < kDim; ++j) {
      double* buf = fft.real();
      for (std::size_t p = 0; p < N; ++p) buf[p] = u.at(i, p) * u.at(j, p);
      fft.forward();
      const std::complex<double>* s = fft.spectrum();
      const double mult = i == j ? 1.0 : 2.0;
      for (std::size_t q = 1; q < M; ++q) {
        const auto m = fft.modes(q);
        // Odd symbols k_i k_j (i != j) have no real-valued Nyquist partner.
        if (i != j && (fft.nyquist(m[i]) || fft.nyquist(m[j]))) continue;
        double k2 = 0.0;
        for (int c = 0; c < kDim; ++c) k2 += double(m[c]) * m[c];
        acc[q] -= mult * (double(m[i]) * m[j] / k2) * s[q];
      }
    }
  }
  acc[0] = 0.0;
  std::copy(acc.begin(), acc.end(), fft.spectrum());
  fft.backward();

  TorusGrid p;
  p.L = u.L;
  p.n = u.n;
  p.channels = 1;
  p.values.assign(fft.real(), fft.real() + N);
  for (double& v : p.values) v /= static_cast<double>(N);
  return p;
}

/// Spectral Laplacian of a scalar torus field.
inline TorusGrid spectral_laplacian(const TorusGrid& f) {
  validate_torus(f.n);
  detail::Fft5 fft(f.n);
  const std::size_t N = fft.real_count();
  std::copy(f.values.begin(), f.values.begin() + N, fft.real());
  fft.forward();
  const double kappa = 2.0 * kPi / f.L;
  auto* s = fft.spectrum();
  for (std::size_t q = 0; q < fft.complex_count(); ++q) {
    const auto m = fft.modes(q);
    double k2 = 0.0;
    for (int c = 0; c < kDim; ++c) k2 += double(m[c]) * m[c];
    s[q] *= -kappa * kappa * k2;
  }
  fft.backward();
  TorusGrid out{f.L, f.n, 1, std::vector<double>(fft.real(), fft.real() + N)};
  for (double& v : out.values) v /= static_cast<double>(N);
  return out;
}

/// div div(u x u) = sum_ij d_i d_j (u_i u_j), evaluated spectrally.
inline TorusGrid spectral_div_div(const TorusGrid& u) {
  validate_torus(u.n);
  if (u.channels != kDim) throw ConfigError("div div needs a 5-component velocity");
  detail::Fft5 fft(u.n);
  const std::size_t N = fft.real_count();
  const std::size_t M = fft.complex_count();
  const double kappa = 2.0 * kPi / u.L;
  std::vector<std::complex<double>> acc(M, 0.0);
  for (int i = 0; i < kDim; ++i) {
    for (int j = i; j < kDim; ++j) {
      for (std::size_t p = 0; p < N; ++p) fft.real()[p] = u.at(i, p) * u.at(j, p);
      fft.forward();
      const auto* s = fft.spectrum();
      const double mult = i == j ? 1.0 : 2.0;
      for (std::size_t q = 0; q < M; ++q) {
        const auto m = fft.modes(q);
        if (i != j && (fft.nyquist(m[i]) || fft.nyquist(m[j]))) continue;
        acc[q] -= mult * kappa * kappa * double(m[i]) * m[j] * s[q];
      }
    }
  }
  std::copy(acc.begin(), acc.end(), fft.spectrum());
  fft.backward();
  TorusGrid out{u.L, u.n, 1, std::vector<double>(fft.real(), fft.real() + N)};
  for (double& v : out.values) v /= static_cast<double>(N);
  return out;
}

/// Evaluates a scalar torus field anywhere through its nonzero Fourier
/// modes (exact for band-limited samples).
inline ScalarField periodic_field(const TorusGrid& f, double relative_threshold = 1e-13) {
  validate_torus(f.n);
  detail::Fft5 fft(f.n);
  const std::size_t N = fft.real_count();
  std::copy(f.values.begin(), f.values.begin() + N, fft.real());
  fft.forward();
  const auto* s = fft.spectrum();
  double peak = 0.0;
  for (std::size_t q = 0; q < fft.complex_count(); ++q) peak = std::max(peak, std::abs(s[q]));

  struct Mode {
    Vec5 k;
    std::complex<double> c;
  };
  std::vector<Mode> modes;
  const double kappa = 2.0 * kPi / f.L;
  for (std::size_t q = 0; q < fft.complex_count(); ++q) {
    if (peak == 0.0 || std::abs(s[q]) <= relative_threshold * peak) continue;
    const auto m = fft.modes(q);
    const int last = m[kDim - 1];
    const double weight = (last == 0 || fft.nyquist(last)) ? 1.0 : 2.0;
    Vec5 k;
    for (int c = 0; c < kDim; ++c) k(c) = kappa * m[c];
    modes.push_back({k, weight * s[q] / static_cast<double>(N)});
  }

  ScalarField p;
  p.eval = [modes](const Vec5& x) {
    double v = 0.0;
    for (const auto& m : modes) v += (m.c * std::polar(1.0, m.k.dot(x))).real();
    return v;
  };
  p.grad = [modes](const Vec5& x) -> Vec5 {
    Vec5 g = Vec5::Zero();
    for (const auto& m : modes) g += (m.c * std::complex<double>(0.0, 1.0) * std::polar(1.0, m.k.dot(x))).real() * m.k;
    return g;
  };
  p.identically_zero = modes.empty();
  p.label = "periodic";
  return p;
}

inline double torus_mean(const TorusGrid& f, int channel = 0) {
  const std::size_t N = f.points();
  return pairwise_sum(std::span<const double>(f.values.data() + channel * N, N)) / static_cast<double>(N);
}

// ---------------------------------------------------------------------------
// Torus files: one JSON header line, then little-endian float64 samples.
// ---------------------------------------------------------------------------

namespace detail {

inline void write_le_doubles(std::ostream& os, const std::vector<double>& v) {
  if constexpr (std::endian::native == std::endian::little) {
    os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  } else {
    for (double d : v) {
      std::uint64_t bits;
      std::memcpy(&bits, &d, 8);
      bits = __builtin_bswap64(bits);
      os.write(reinterpret_cast<const char*>(&bits), 8);
    }
  }
}

inline void read_le_doubles(std::istream& is, std::vector<double>& v) {
  is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  if constexpr (std::endian::native != std::endian::little) {
    for (double& d : v) {
      std::uint64_t bits;
      std::memcpy(&bits, &d, 8);
      bits = __builtin_bswap64(bits);
      std::memcpy(&d, &bits, 8);
    }
  }
}

}  // namespace detail

inline void write_torus(const std::filesystem::path& path, const TorusGrid& g) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + tmp.string());
    nlohmann::json header = {{"shape", {g.channels, g.n, g.n, g.n, g.n, g.n}},
                             {"L", g.L},
                             {"dtype", "float64"},
                             {"byte_order", "little"}};
    os << header.dump() << '\n';
    detail::write_le_doubles(os, g.values);
    if (!os) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
}

inline TorusGrid read_torus(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::string line;
  std::getline(is, line);
  TorusGrid g;
  try {
    const auto header = nlohmann::json::parse(line);
    const auto& shape = header.at("shape");
    if (header.at("dtype") != "float64" || header.at("byte_order") != "little")
      throw IoError("unsupported torus sample encoding");
    g.channels = shape.at(0).get<int>();
    g.n = shape.at(1).get<int>();
    g.L = header.at("L").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad torus header: ") + e.what());
  }
  g.values.resize(g.points() * g.channels);
  detail::read_le_doubles(is, g.values);
  if (!is) throw IoError("truncated torus file " + path.string());
  return g;
}

// ---------------------------------------------------------------------------
// Homogeneous pressure on the sphere
// ---------------------------------------------------------------------------

/// omega^i = sum_j (grad_S zeta^i)_j zeta^j - (sigma.zeta) zeta^i, which
/// equals |x|^3 (h.grad)h for h = zeta/|x|.
inline VectorProfile omega_from_zeta(const VectorProfile& zeta, SphereDifferencing d = {}) {
  VectorProfile w;
  w.value = [zeta, d](const Vec5& x) -> Vec5 {
    const Vec5 s = x / x.norm();
    const Vec5 z = zeta(s);
    return tangential_jacobian(zeta, s, d) * z - s.dot(z) * z;
  };
  return w;
}

/// H = |v|^2 + f^2 + 2p.
inline ScalarProfile bernoulli_head(const VectorProfile& v, const ScalarProfile& f, const ScalarProfile& p) {
  return EulerTriple{v, f, p}.head();
}

inline SphericalField bernoulli_head(const SphericalField& v, const SphericalField& f, const SphericalField& p) {
  if (v.channels != kDim || f.channels != 1 || p.channels != 1 || v.size() != f.size() || v.size() != p.size() ||
      v.sphere != f.sphere || v.sphere != p.sphere)
    throw DomainError("bernoulli_head needs samples on one sphere rule");
  SphericalField h;
  h.sphere = v.sphere;
  h.channels = 1;
  h.values.resize(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) h.values[i] = v.vector_at(i).squaredNorm() + f.at(i) * f.at(i) + 2.0 * p.at(i);
  return h;
}

struct XiOptions {
  int panels = 256;  ///< Simpson panels per arc (even)
  int loops = 16;    ///< random great circles for the loop test
  std::uint64_t seed = 0;
  double tolerance = 1e-6;
};

struct XiResult {
  ScalarProfile xi;
  SphericalField samples;
  double radial_defect = 0.0;  ///< range of 2 xi + omega.sigma over the nodes and axis points
  double loop_defect = 0.0;    ///< max |closed line integral|
  bool loop_warning = false;
  bool radial_warning = false;
  /// Set when either defect exceeds the tolerance: omega is then not the
  /// sphere trace of a homogeneous pressure gradient.
  bool non_integrable = false;
};

namespace detail {

/// Simpson rule for int_0^1 g(t) dt on `panels` (even) panels.
template <class G>
double simpson(const G& g, int panels) {
  const double h = 1.0 / panels;
  std::vector<double> terms(panels + 1);
  for (int k = 0; k <= panels; ++k) {
    const double c = (k == 0 || k == panels) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    terms[k] = c * g(k * h);
  }
  return pairwise_sum(terms) * h / 3.0;
}

/// Line integral of omega along the minor great-circle arc a -> b.
inline double arc_integral(const VectorProfile& omega, const Vec5& a, const Vec5& b, int panels) {
  const double c = std::clamp(a.dot(b), -1.0, 1.0);
  Vec5 w = b - c * a;
  const double sn = w.norm();
  if (sn < 1e-14) return 0.0;
  w /= sn;
  const double theta = std::atan2(sn, c);
  return simpson(
      [&](double t) {
        const Vec5 g = std::cos(t * theta) * a + std::sin(t * theta) * w;
        const Vec5 gdot = theta * (-std::sin(t * theta) * a + std::cos(t * theta) * w);
        return gdot.dot(omega(g));
      },
      panels);
}

/// Fixed node orthogonal to s0 used to route antipodal endpoints.
inline Vec5 intermediate_node(const Vec5& s0) {
  int k = 0;
  for (int i = 1; i < kDim; ++i)
    if (std::abs(s0(i)) < std::abs(s0(k))) k = i;
  Vec5 m = unit(k) - s0(k) * s0;
  return m / m.norm();
}

}  // namespace detail

/// xi(sigma) = line integral of omega along the great-circle arc from sigma0;
/// endpoints within 1e-6 of antipodal go through a fixed node orthogonal to sigma0.
inline XiResult reconstruct_xi(const VectorProfile& omega, const Vec5& sigma0, std::shared_ptr<const SphereSamples> sphere,
                               const XiOptions& opt = {}) {
  if (opt.panels < 2 || opt.panels % 2) throw ConfigError("Simpson needs an even number of panels");
  const Vec5 s0 = sigma0 / sigma0.norm();
  const Vec5 mid = detail::intermediate_node(s0);
  const int panels = opt.panels;

  XiResult out;
  out.xi.value = [omega, s0, mid, panels](const Vec5& x) {
    const Vec5 s = x / x.norm();
    if (s.dot(s0) < -1.0 + 5e-13) return detail::arc_integral(omega, s0, mid, panels) + detail::arc_integral(omega, mid, s, panels);
    return detail::arc_integral(omega, s0, s, panels);
  };

  out.samples = sample(out.xi, sphere);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  auto probe = [&](const Vec5& s, double xi) {
    const double v = 2.0 * xi + omega(s).dot(s);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  };
  for (std::size_t i = 0; i < sphere->size(); ++i) probe(sphere->nodes[i], out.samples.values[i]);
  // Product-rule nodes avoid the poles, so the axis points are probed too.
  for (int k = 0; k < kDim; ++k)
    for (double sign : {1.0, -1.0}) {
      const Vec5 s = sign * unit(k);
      probe(s, out.xi(s));
    }
  out.radial_defect = hi - lo;

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal;
  for (int l = 0; l < opt.loops; ++l) {
    Vec5 a, b;
    for (int k = 0; k < kDim; ++k) a(k) = normal(rng);
    for (int k = 0; k < kDim; ++k) b(k) = normal(rng);
    a.normalize();
    b -= b.dot(a) * a;
    b.normalize();
    const double loop = detail::simpson(
        [&](double t) {
          const double th = 2.0 * kPi * t;
          const Vec5 g = std::cos(th) * a + std::sin(th) * b;
          const Vec5 gdot = 2.0 * kPi * (-std::sin(th) * a + std::cos(th) * b);
          return gdot.dot(omega(g));
        },
        panels);
    out.loop_defect = std::max(out.loop_defect, std::abs(loop));
  }
  out.loop_warning = out.loop_defect > opt.tolerance;
  out.radial_warning = out.radial_defect > opt.tolerance;
  out.non_integrable = out.loop_warning || out.radial_warning;
  return out;
}

}  // namespace nsmono
