#pragma once

// Geometry of tau |phi'|: superlevel-set measures in dA / tau^2, their
// decreasing rearrangement, trace integrals, sup norms, (tau, delta)-lattices
// and lattice sums. Disk integrals run over {|z| <= r_max} in the radial
// variable u = log(1/(1 - r)), which keeps the boundary layer resolved.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "bhl/error.hpp"
#include "bhl/hankel.hpp"
#include "bhl/parallel.hpp"
#include "bhl/quadrature.hpp"
#include "bhl/roots.hpp"
#include "bhl/weights.hpp"

namespace bhl {

/// |phi'| for a polynomial phi, or the critical family
/// phi'(z) = 1 / ((1 - z) log^gamma(e / (1 - z))).
class SymbolDerivative {
 public:
  enum class Kind { Polynomial, CriticalExponent };

  static SymbolDerivative polynomial(const PolynomialSymbol& phi) {
    std::vector<cplx> a(phi.degree());
    for (std::size_t k = 1; k <= phi.degree(); ++k) a[k - 1] = static_cast<double>(k) * phi.coeff(k);
    return derivative_coefficients(std::move(a));
  }

  /// phi'(z) = sum_i a[i] z^i
  static SymbolDerivative derivative_coefficients(std::vector<cplx> a) {
    if (a.empty()) throw DomainError("symbol derivative needs at least one coefficient");
    SymbolDerivative d(Kind::Polynomial);
    d.coeffs_ = std::move(a);
    for (const auto& r : polynomial_roots(d.coeffs_)) d.singular_.push_back(r);
    return d;
  }

  static SymbolDerivative critical_exponent(double gamma, double scale = 1.0) {
    if (!(gamma > 0.0)) throw DomainError("critical-exponent symbol needs gamma > 0");
    SymbolDerivative d(Kind::CriticalExponent);
    d.gamma_ = gamma;
    d.scale_ = scale;
    d.singular_.push_back(1.0);
    return d;
  }

  Kind kind() const noexcept { return kind_; }
  double gamma() const noexcept { return gamma_; }
  double scale() const noexcept { return scale_; }
  std::span<const cplx> coefficients() const noexcept { return coeffs_; }
  /// Points near which |phi'| varies sharply in angle (roots of phi', or z = 1).
  std::span<const cplx> singular_points() const noexcept { return singular_; }

  bool is_zero() const {
    if (kind_ == Kind::CriticalExponent) return scale_ == 0.0;
    return std::all_of(coeffs_.begin(), coeffs_.end(), [](cplx c) { return c == 0.0; });
  }

  /// |phi'| is constant on circles (phi' = c z^k).
  bool radial() const {
    if (kind_ == Kind::CriticalExponent) return false;
    return std::count_if(coeffs_.begin(), coeffs_.end(), [](cplx c) { return c != 0.0; }) <= 1;
  }

  SymbolDerivative scaled(double c) const {
    SymbolDerivative d = *this;
    if (kind_ == Kind::CriticalExponent) {
      d.scale_ *= c;
    } else {
      for (auto& a : d.coeffs_) a *= c;
    }
    return d;
  }

  cplx operator()(cplx z) const {
    if (kind_ == Kind::Polynomial) return horner(z);
    const cplx w = 1.0 - z;
    return scale_ / (w * std::pow(1.0 - std::log(w), gamma_));
  }

  /// |phi'(r e^{i theta})| with gap = 1 - r supplied separately, so that
  /// 1 - z keeps full precision next to z = 1.
  double abs_polar(double r, double gap, double theta) const {
    if (kind_ == Kind::Polynomial) return std::abs(horner(std::polar(r, theta)));
    const double sh = std::sin(0.5 * theta);
    const cplx w(gap + 2.0 * r * sh * sh, -r * std::sin(theta));
    return std::abs(scale_) / (std::abs(w) * std::pow(std::abs(1.0 - std::log(w)), gamma_));
  }

  double abs(cplx z) const { return std::abs((*this)(z)); }

  std::string describe() const {
    if (kind_ == Kind::CriticalExponent) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "critical(gamma=%.17g)", gamma_);
      return buf;
    }
    std::string s = "poly'(";
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
      char buf[80];
      std::snprintf(buf, sizeof buf, "%s%.17g%+.17gi", i ? "," : "", coeffs_[i].real(), coeffs_[i].imag());
      s += buf;
    }
    return s + ")";
  }

 private:
  explicit SymbolDerivative(Kind k) : kind_(k) {}

  cplx horner(cplx z) const {
    cplx acc = 0.0;
    for (std::size_t i = coeffs_.size(); i-- > 0;) acc = acc * z + coeffs_[i];
    return acc;
  }

  Kind kind_;
  std::vector<cplx> coeffs_;
  double gamma_ = 0.0;
  double scale_ = 1.0;
  std::vector<cplx> singular_;
};

namespace detail {

inline double wrap_angle(double t) {
  if (t >= -std::numbers::pi && t < std::numbers::pi) return t;  // keeps tiny angles exact
  constexpr double tp = 2.0 * std::numbers::pi;
  t = std::fmod(t + std::numbers::pi, tp);
  if (t < 0.0) t += tp;
  return t - std::numbers::pi;
}

/// Uniform angles plus geometric clusters around every singular direction,
/// starting at the distance of the circle |z| = r from the singular point.
inline std::vector<double> sample_angles(const SymbolDerivative& d, double r, double gap, std::size_t m) {
  if (d.radial()) return {0.0};
  std::vector<double> th;
  th.reserve(m + 64);
  for (std::size_t i = 0; i < m; ++i)
    th.push_back(-std::numbers::pi + 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(m));
  const double step = std::pow(2.0, 0.25);
  for (cplx p : d.singular_points()) {
    const double ang = std::arg(p);
    const double dist = std::max(std::abs(gap - (1.0 - std::abs(p))), 1e-300);
    const double rr = std::max(r, 1e-3);
    th.push_back(wrap_angle(ang));
    for (double a = dist / rr; a < std::numbers::pi; a *= step) {
      th.push_back(wrap_angle(ang + a));
      th.push_back(wrap_angle(ang - a));
    }
  }
  std::sort(th.begin(), th.end());
  th.erase(std::unique(th.begin(), th.end()), th.end());
  return th;
}

/// Measure of {theta : f(theta) > 0} on the circle, from samples `th` (sorted,
/// in [-pi, pi)) with crossings located by bisection.
template <class F>
double superlevel_angle(F&& f, const std::vector<double>& th) {
  const std::size_t n = th.size();
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = f(th[i]);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = th[i];
    const double b = i + 1 < n ? th[i + 1] : th[0] + 2.0 * std::numbers::pi;
    const double fa = v[i];
    const double fb = v[(i + 1) % n];
    const bool pa = fa > 0.0, pb = fb > 0.0;
    if (pa && pb) {
      total += b - a;
    } else if (pa != pb) {
      auto g = [&](double t) { return f(wrap_angle(t)); };
      auto cross = [&](double lo, double flo, double hi) {
        double x0 = lo, x1 = hi;
        for (int it = 0; it < 200; ++it) {
          const double mid = 0.5 * (x0 + x1);
          if (!(mid > x0 && mid < x1)) break;
          const double fm = g(mid);
          if ((fm > 0.0) == (flo > 0.0)) x0 = mid; else x1 = mid;
        }
        return 0.5 * (x0 + x1);
      };
      const double c = cross(a, fa, b);
      total += pa ? c - a : b - c;
    }
  }
  return total;
}

struct PolarSample {
  double r, gap, tau;
};

inline PolarSample polar_at_u(const TauProfile& tau, double u) {
  const double gap = std::exp(-u);
  return {-std::expm1(-u), gap, tau.at_gap(gap)};
}

inline double u_of_r(double r) { return -std::log1p(-r); }

}  // namespace detail

struct LevelOptions {
  double rel_tol = 1e-9;          // radial adaptive quadrature
  double refine_tol = 1e-6;       // stop when successive refinements agree to this
  std::size_t angular_samples = 256;
  int max_refinements = 5;
  bool report_sensitivity = true;  // re-run on the shell out to r_max_next
};

struct LevelMeasure {
  double value = 0.0;
  double error = 0.0;         // refinement difference plus quadrature estimate
  double r_max = 0.0;
  double r_max_next = 0.0;    // radius of the sensitivity re-run
  double r_max_delta = 0.0;   // R(r_max_next) - R(r_max); NaN if the profile ends at r_max
  int refinements = 0;
};

namespace detail {

struct LevelPass {
  double value;
  double error;
};

inline LevelPass level_pass(const TauProfile& tau, const SymbolDerivative& d, double t, double u_lo,
                            double u_hi, std::size_t m, double rel_tol) {
  if (!(u_hi > u_lo)) return {0.0, 0.0};
  auto envelope = [&](double u, double& lo, double& hi) {
    const auto ps = polar_at_u(tau, u);
    const auto th = sample_angles(d, ps.r, ps.gap, m);
    lo = std::numeric_limits<double>::infinity();
    hi = 0.0;
    for (double a : th) {
      const double v = ps.tau * d.abs_polar(ps.r, ps.gap, a);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  };
  // breakpoints where the sampled envelopes cross t
  std::vector<double> bp{u_lo};
  const std::size_t steps = std::max<std::size_t>(8, static_cast<std::size_t>(std::ceil((u_hi - u_lo) * 8.0)));
  double prev_lo, prev_hi;
  envelope(u_lo, prev_lo, prev_hi);
  double prev_u = u_lo;
  bool any = prev_hi > t;
  for (std::size_t i = 1; i <= steps; ++i) {
    const double u = u_lo + (u_hi - u_lo) * static_cast<double>(i) / static_cast<double>(steps);
    double lo, hi;
    envelope(u, lo, hi);
    any = any || hi > t;
    for (int which = 0; which < 2; ++which) {
      const double a = which ? prev_hi : prev_lo, b = which ? hi : lo;
      if ((a > t) == (b > t)) continue;
      double x0 = prev_u, x1 = u;
      const bool s0 = a > t;
      for (int it = 0; it < 48; ++it) {
        const double mid = 0.5 * (x0 + x1);
        double l2, h2;
        envelope(mid, l2, h2);
        const double v = which ? h2 : l2;
        if ((v > t) == s0) x0 = mid; else x1 = mid;
      }
      bp.push_back(0.5 * (x0 + x1));
    }
    prev_lo = lo;
    prev_hi = hi;
    prev_u = u;
  }
  if (!any) return {0.0, 0.0};
  bp.push_back(u_hi);
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());

  auto integrand = [&](double u) {
    const auto ps = polar_at_u(tau, u);
    const double thr = t / ps.tau;
    const auto th = sample_angles(d, ps.r, ps.gap, m);
    const double ang = superlevel_angle(
        [&](double a) { return d.abs_polar(ps.r, ps.gap, a) - thr; }, th);
    return ps.r * ps.gap * ang / (ps.tau * ps.tau);
  };
  const auto res = quad::integrate(integrand, std::span<const double>(bp), quad::Tolerance{rel_tol, 0.0, 8000});
  if (!res.converged) throw NumericError("level_measure: radial quadrature did not converge");
  return {res.value, res.error};
}

}  // namespace detail

/// R(t) = measure of {tau |phi'| > t} ∩ {|z| <= r_max} in dA / tau^2.
/// Angular and radial resolution are doubled until successive values agree to
/// refine_tol; the shell between r_max and r_max_next = 1 - (1 - r_max)/2 (or
/// the end of the profile) is reported as the r_max sensitivity.
inline LevelMeasure level_measure(const TauProfile& tau, const SymbolDerivative& d, double t, double r_max,
                                  const LevelOptions& opt = {}) {
  if (!(t > 0.0)) throw DomainError("level_measure: t must be positive");
  if (!(r_max > 0.0 && r_max < 1.0)) throw DomainError("level_measure: r_max must lie in (0, 1)");
  if (r_max > tau.r_limit()) throw DomainError("level_measure: r_max exceeds the tau profile domain");
  const double u_max = detail::u_of_r(r_max);

  LevelMeasure out;
  out.r_max = r_max;
  double prev = std::numeric_limits<double>::quiet_NaN();
  std::size_t m = opt.angular_samples;
  double rel = opt.rel_tol;
  for (int level = 0; level <= opt.max_refinements; ++level) {
    const auto pass = detail::level_pass(tau, d, t, 0.0, u_max, m, rel);
    out.value = pass.value;
    out.refinements = level;
    if (level > 0) {
      const double diff = std::abs(pass.value - prev);
      out.error = diff + pass.error;
      if (diff <= opt.refine_tol * std::abs(pass.value) || (pass.value == 0.0 && prev == 0.0)) break;
      if (level == opt.max_refinements) throw NumericError("level_measure: refinement did not converge");
    }
    prev = pass.value;
    m *= 2;
    rel /= 16.0;
  }

  // sensitivity: the extra shell out to r_max_next
  const double r_next = std::min(1.0 - 0.5 * (1.0 - r_max), tau.r_limit());
  out.r_max_next = r_next;
  if (!opt.report_sensitivity) {
    out.r_max_delta = std::numeric_limits<double>::quiet_NaN();
  } else if (r_next > r_max) {
    out.r_max_delta = detail::level_pass(tau, d, t, u_max, detail::u_of_r(r_next), m, rel).value;
  } else {
    out.r_max_delta = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

struct BlochNorm {
  double value = 0.0;
  double r = 0.0;
  double theta = 0.0;
};

/// sup of tau(r) |phi'(r e^{i theta})| over |z| <= r_max: grid search in
/// (u, theta) followed by a shrinking pattern search around the best point.
/// r_max <= 0 selects the whole profile domain (capped at 1 - 1e-12).
inline BlochNorm bloch_norm(const TauProfile& tau, const SymbolDerivative& d, double r_max = 0.0) {
  if (r_max <= 0.0) r_max = std::min(tau.r_limit(), 1.0 - 1e-12);
  if (r_max > tau.r_limit()) throw DomainError("bloch_norm: r_max exceeds the tau profile domain");
  if (d.is_zero()) return {};
  const double u_max = detail::u_of_r(r_max);
  auto f = [&](double u, double th) {
    u = std::clamp(u, 0.0, u_max);
    const auto ps = detail::polar_at_u(tau, u);
    return ps.tau * d.abs_polar(ps.r, ps.gap, detail::wrap_angle(th));
  };
  BlochNorm best{-1.0, 0.0, 0.0};
  double best_u = 0.0;
  const std::size_t steps = std::max<std::size_t>(64, static_cast<std::size_t>(std::ceil(u_max * 32.0)));
  for (std::size_t i = 0; i <= steps; ++i) {
    const double u = u_max * static_cast<double>(i) / static_cast<double>(steps);
    const auto ps = detail::polar_at_u(tau, u);
    for (double th : detail::sample_angles(d, ps.r, ps.gap, 256)) {
      const double v = f(u, th);
      if (v > best.value) best = {v, ps.r, th}, best_u = u;
    }
  }
  double hu = u_max / static_cast<double>(steps), ht = 2.0 * std::numbers::pi / 256.0;
  double u = best_u, th = best.theta, val = best.value;
  while (hu > 1e-13 || ht > 1e-13) {
    bool moved = false;
    for (int du = -1; du <= 1; ++du)
      for (int dt = -1; dt <= 1; ++dt) {
        if (!du && !dt) continue;
        const double uu = std::clamp(u + du * hu, 0.0, u_max);
        const double tt = th + dt * ht;
        const double v = f(uu, tt);
        if (v > val) val = v, u = uu, th = tt, moved = true;
      }
    if (!moved) hu *= 0.5, ht *= 0.5;
  }
  return {val, -std::expm1(-u), detail::wrap_angle(th)};
}

/// Generalized inverse sup{t in (0, top] : R(t) >= x} of a nonincreasing
/// distribution function, by bisection in log t carried to adjacent doubles.
/// The returned t always satisfies R(t) >= x.
inline double generalized_inverse(const std::function<double(double)>& R, double top, double x) {
  if (!(x > 0.0)) throw DomainError("generalized inverse: x must be positive");
  if (!(top > 0.0)) throw DomainError("generalized inverse: empty range");
  double hi = top;
  if (R(hi) >= x) return hi;
  if (R(top * 0x1p-50) < x) throw DomainError("generalized inverse: x exceeds the measure of the working region");
  double lo = 0.5 * hi;
  while (R(lo) < x) {
    hi = lo;
    lo *= 0.5;
  }
  for (int it = 0; it < 200; ++it) {
    double mid = std::sqrt(lo * hi);
    if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    (R(mid) >= x ? lo : hi) = mid;
  }
  return lo;
}

/// R+(x) = sup{t in (0, sup tau|phi'|] : R(t) >= x} with R = level_measure.
inline double rearrangement_plus(const TauProfile& tau, const SymbolDerivative& d, double x, double r_max,
                                 const LevelOptions& opt = {}) {
  if (!(x > 0.0)) throw DomainError("rearrangement_plus: x must be positive");
  const double top = bloch_norm(tau, d, r_max).value;
  if (!(top > 0.0)) throw DomainError("rearrangement_plus: tau |phi'| vanishes identically");
  LevelOptions quiet = opt;
  quiet.report_sensitivity = false;
  return generalized_inverse([&](double t) { return level_measure(tau, d, t, r_max, quiet).value; }, top, x);
}

struct TraceIntegral {
  double value = 0.0;
  double error = 0.0;
};

/// int_{|z| <= r_max} h(tau |phi'|) dA / tau^2 by nested adaptive quadrature
/// (angle inside, u outside). h(0) = 0 is required; monotonicity and
/// convexity are spot-checked on [0, sup tau |phi'|].
inline TraceIntegral trace_integral(const TauProfile& tau, const SymbolDerivative& d,
                                    const std::function<double(double)>& h, double r_max, double rel_tol = 1e-9) {
  if (!(r_max > 0.0 && r_max < 1.0) || r_max > tau.r_limit())
    throw DomainError("trace_integral: r_max must lie in (0, 1) and inside the profile domain");
  if (h(0.0) != 0.0) throw DomainError("trace_integral: h(0) must be 0");
  const double top = std::max(bloch_norm(tau, d, r_max).value, 1e-300);
  {
    constexpr int K = 32;
    std::vector<double> hv(K + 1);
    for (int k = 0; k <= K; ++k) hv[k] = h(top * k / K);
    const double scale = std::max(1e-300, std::abs(hv[K]));
    for (int k = 1; k <= K; ++k) {
      if (hv[k] < hv[k - 1] - 1e-12 * scale) throw DomainError("trace_integral: h is not increasing");
      if (k < K && hv[k] > 0.5 * (hv[k - 1] + hv[k + 1]) + 1e-12 * scale)
        throw DomainError("trace_integral: h is not convex");
    }
  }
  if (d.is_zero()) return {};
  const double u_max = detail::u_of_r(r_max);
  double ang_err = 0.0;
  auto radial = [&](double u) {
    const auto ps = detail::polar_at_u(tau, u);
    std::vector<double> bp{-std::numbers::pi};
    for (double a : detail::sample_angles(d, ps.r, ps.gap, 16)) bp.push_back(a);
    bp.push_back(std::numbers::pi);
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
    const auto res = quad::integrate([&](double a) { return h(ps.tau * d.abs_polar(ps.r, ps.gap, a)); },
                                     std::span<const double>(bp), quad::Tolerance{0.01 * rel_tol, 1e-300, 4000});
    const double w = ps.r * ps.gap / (ps.tau * ps.tau);
    ang_err += res.error * w;
    return res.value * w;
  };
  std::vector<double> bp;
  for (int k = 0; k <= 16; ++k) bp.push_back(u_max * k / 16.0);
  const auto res = quad::integrate(radial, std::span<const double>(bp), quad::Tolerance{rel_tol, 0.0, 4000});
  if (!res.converged) throw NumericError("trace_integral: radial quadrature did not converge");
  return {res.value, res.error + ang_err / 15.0};
}

// ---------------------------------------------------------------------------
// Lattices

struct LatticeOptions {
  double dilation = 1.5;      // b in the b-dilated covering
  double scan_density = 4.0;  // scan points per disk radius
  double repair_density = 10.0;
  double test_density = 7.0;
  double max_scan_points = 2e7;  // refuse lattices whose densest scan exceeds this
};

struct Lattice {
  std::vector<cplx> centers;
  std::vector<double> radii;  // delta * tau(center)
  double delta = 0.0;
  double r_max = 0.0;
  double dilation = 1.5;
  double comparability = 1.0;  // measured C: tau ratio across each dilated disk
  std::size_t multiplicity = 0;  // max overlap of the dilated disks on the test grid
  double min_separation = 0.0;   // min |z_i - z_j| / min(radius_i, radius_j)
  std::size_t repaired = 0;      // centres added by the repair pass
  std::size_t test_points = 0;
  std::size_t uncovered_by_radius = 0;  // test points outside every undilated disk
};

namespace detail {

/// Multi-level hash of disks; level l holds disks with reach in (2^{l-1}, 2^l].
class DiskIndex {
 public:
  void insert(std::uint32_t id, cplx z, double reach) {
    const int lvl = static_cast<int>(std::ceil(std::log2(std::max(reach, 1e-300))));
    auto& L = levels_[lvl];
    L.cell = std::ldexp(1.0, lvl);
    L.cells[key(z, L.cell)].push_back(id);
  }

  template <class F>
  void for_near(cplx z, F&& f) const {
    for (const auto& [lvl, L] : levels_) {
      const auto cx = static_cast<std::int64_t>(std::floor(z.real() / L.cell));
      const auto cy = static_cast<std::int64_t>(std::floor(z.imag() / L.cell));
      for (std::int64_t dx = -1; dx <= 1; ++dx)
        for (std::int64_t dy = -1; dy <= 1; ++dy) {
          auto it = L.cells.find(pack(cx + dx, cy + dy));
          if (it == L.cells.end()) continue;
          for (auto id : it->second) f(id);
        }
    }
  }

 private:
  struct Level {
    double cell = 1.0;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> cells;
  };
  static std::uint64_t pack(std::int64_t x, std::int64_t y) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)) << 32) |
           static_cast<std::uint32_t>(y);
  }
  static std::uint64_t key(cplx z, double cell) {
    return pack(static_cast<std::int64_t>(std::floor(z.real() / cell)),
                static_cast<std::int64_t>(std::floor(z.imag() / cell)));
  }
  std::map<int, Level> levels_;
};

/// Polar scan of {|z| <= r_max}: rings spaced radius/density apart, each with
/// points spaced the same way; `phase` in [0, 1) offsets rings and angles.
inline std::vector<cplx> polar_scan(const std::function<double(double)>& radius_at, double r_max, double density,
                                    double phase) {
  std::vector<cplx> pts;
  double r = phase * radius_at(0.0) / density;
  if (phase == 0.0) {
    pts.push_back(0.0);
    r = radius_at(0.0) / density;
  }
  std::size_t ring = 0;
  while (true) {
    const bool last = r >= r_max;
    const double rr = std::min(r, r_max);
    const double h = radius_at(rr) / density;
    const auto count = static_cast<std::size_t>(std::ceil(2.0 * std::numbers::pi * rr / h));
    const double off = phase + 0.618033988749895 * static_cast<double>(ring);
    for (std::size_t k = 0; k < count; ++k)
      pts.push_back(std::polar(rr, 2.0 * std::numbers::pi * (static_cast<double>(k) + off) / static_cast<double>(count)));
    if (last) break;
    r = rr + h;
    ++ring;
  }
  return pts;
}

/// Number of points polar_scan would produce, without building them.
inline double polar_scan_size(const std::function<double(double)>& radius_at, double r_max, double density) {
  double total = 1.0, r = radius_at(0.0) / density;
  while (true) {
    const double rr = std::min(r, r_max);
    const double h = radius_at(rr) / density;
    total += std::ceil(2.0 * std::numbers::pi * rr / h);
    if (r >= r_max || total > 1e12) return total;
    r = rr + h;
  }
}

}  // namespace detail

/// Greedy (tau, delta)-lattice core for an arbitrary radius function and
/// point sets: `scan` points are visited in order and become centres when no
/// accepted disk contains them; uncovered `repair` points are then added the
/// same way (which keeps the separation guarantee). The centres form a
/// maximal separated set on the scan, so the dilated disks cover everything
/// within (dilation - 1) * radius of a scan point; `test` points check that
/// covering and measure the multiplicity of the dilated disks.
inline Lattice build_lattice_on(const std::function<double(cplx)>& radius, const std::vector<cplx>& scan,
                                const std::vector<cplx>& repair, const std::vector<cplx>& test, double dilation,
                                const std::function<bool(cplx)>& in_domain = {}) {
  if (!(dilation >= 1.0)) throw DomainError("lattice dilation must be >= 1");
  Lattice lat;
  lat.dilation = dilation;
  detail::DiskIndex index;
  auto covered = [&](cplx z) {
    bool hit = false;
    index.for_near(z, [&](std::uint32_t id) {
      if (!hit && std::abs(z - lat.centers[id]) < lat.radii[id]) hit = true;
    });
    return hit;
  };
  auto accept = [&](cplx z) {
    const auto id = static_cast<std::uint32_t>(lat.centers.size());
    const double rho = radius(z);
    lat.centers.push_back(z);
    lat.radii.push_back(rho);
    index.insert(id, z, dilation * rho);
  };
  for (cplx z : scan)
    if (!covered(z)) accept(z);
  const std::size_t before = lat.centers.size();
  for (cplx z : repair)
    if (!covered(z)) accept(z);
  lat.repaired = lat.centers.size() - before;

  // covering and multiplicity on the independent test grid
  lat.test_points = test.size();
  for (cplx z : test) {
    std::size_t mult = 0;
    bool hit = false;
    index.for_near(z, [&](std::uint32_t id) {
      const double dist = std::abs(z - lat.centers[id]);
      if (dist < lat.radii[id]) hit = true;
      if (dist < dilation * lat.radii[id]) ++mult;
    });
    if (mult == 0) throw CoverageError("dilated lattice disks do not cover the working region", z.real(), z.imag());
    if (!hit) ++lat.uncovered_by_radius;
    lat.multiplicity = std::max(lat.multiplicity, mult);
  }

  // comparability: tau ratio between each centre and its dilated disk
  double C = 1.0;
  for (std::size_t k = 0; k < lat.centers.size(); ++k) {
    for (int j = 0; j < 16; ++j) {
      const cplx w = lat.centers[k] + std::polar(dilation * lat.radii[k], 2.0 * std::numbers::pi * j / 16.0);
      if (in_domain && !in_domain(w)) continue;
      const double q = radius(w) / lat.radii[k];
      C = std::max({C, q, 1.0 / q});
    }
  }
  lat.comparability = C;

  // separation and disjointness of the shrunk disks
  double sep = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < lat.centers.size(); ++i) {
    index.for_near(lat.centers[i], [&](std::uint32_t j) {
      if (j <= i) return;
      const double dist = std::abs(lat.centers[i] - lat.centers[j]);
      const double ri = lat.radii[i], rj = lat.radii[j];
      if (dist >= dilation * (ri + rj)) return;
      sep = std::min(sep, dist / std::min(ri, rj));
      if (dist < (ri + rj) / (2.0 * C))
        throw NumericError("lattice shrunk disks overlap (centres " + std::to_string(i) + ", " +
                           std::to_string(j) + ")");
    });
  }
  lat.min_separation = sep;
  return lat;
}

/// (tau, delta)-lattice of {|z| <= r_max} with disk radii delta * tau(z).
inline Lattice build_lattice(const TauProfile& tau, double delta, double r_max, const LatticeOptions& opt = {}) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("build_lattice: delta must lie in (0, 1)");
  if (!(r_max > 0.0 && r_max < 1.0) || r_max > tau.r_limit())
    throw DomainError("build_lattice: r_max must lie in (0, 1) and inside the profile domain");
  auto radius_at = [&](double r) { return delta * tau(r); };
  auto radius = [&](cplx z) { return delta * tau(std::abs(z)); };
  const double densest = std::max({opt.scan_density, opt.repair_density, opt.test_density});
  const double size = detail::polar_scan_size(radius_at, r_max, densest);
  if (size > opt.max_scan_points)
    throw NumericError("build_lattice: about " + std::to_string(static_cast<long long>(std::min(size, 1e12))) +
                       " scan points needed; lower r_max or raise delta");
  const auto scan = detail::polar_scan(radius_at, r_max, opt.scan_density, 0.0);
  const auto repair = detail::polar_scan(radius_at, r_max, opt.repair_density, 0.37);
  const auto test = detail::polar_scan(radius_at, r_max, opt.test_density, 0.5);
  const double lim = tau.r_limit();
  auto lat = build_lattice_on(radius, scan, repair, test, opt.dilation,
                              [lim](cplx w) { return std::abs(w) < lim; });
  lat.delta = delta;
  lat.r_max = r_max;
  return lat;
}

/// sum over lattice disks R_k of (mu(R_k) / A(R_k))^p with d mu = tau |phi'| dA;
/// disk averages by local polar Gauss-Legendre quadrature.
inline double besov_sum(const Lattice& lat, const TauProfile& tau, const SymbolDerivative& d, double p) {
  if (!(p > 0.0)) throw DomainError("besov_sum: p must be positive");
  if (d.is_zero()) return 0.0;
  const auto rule = quad::gauss_legendre(8);
  constexpr std::size_t kAng = 24;
  std::vector<double> terms(lat.centers.size());
  parallel_for(lat.centers.size(), [&](std::size_t k) {
    const cplx c = lat.centers[k];
    const double rho = lat.radii[k];
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double s = 0.5 * rho * (rule.nodes[i] + 1.0);
      const double ws = 0.5 * rho * rule.weights[i] * s;
      for (std::size_t j = 0; j < kAng; ++j) {
        const cplx z = c + std::polar(s, 2.0 * std::numbers::pi * (j + 0.5) / kAng);
        const double r = std::abs(z);
        acc += ws * tau(r) * d.abs(z);
      }
    }
    const double avg = acc * (2.0 * std::numbers::pi / kAng) / (std::numbers::pi * rho * rho);
    terms[k] = std::pow(avg, p);
  });
  double sum = 0.0;
  for (double t : terms) sum += t;
  return sum;
}

}  // namespace bhl
