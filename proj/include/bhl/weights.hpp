#pragma once

// Radial weights on the unit disk, their moment sequences m[n] = ||z^n||^2,
// reproducing-kernel norms and the local scale tau(r) = 1/(w(r)^{1/2} ||K_r||).
//
// Convention: dA is plane Lebesgue measure, so
//   m[n] = 2 pi int_0^1 r^{2n+1} w(r) dr = pi int_0^inf e^{-(n+1)x} w(e^{-x/2}) dx
// with x = log(1/r^2). Moments are stored as logarithms; m[n] itself underflows
// for rapidly decaying weights long before the spectral quantities do.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "bhl/error.hpp"
#include "bhl/interpolation.hpp"
#include "bhl/parallel.hpp"
#include "bhl/quadrature.hpp"

namespace bhl {

/// w(z) = (alpha+1)/pi (1-|z|^2)^alpha, alpha > -1. Total mass 1.
struct StandardWeight {
  double alpha;
};

/// w(z) = exp(-alpha / (log 1/|z|^2)^beta), alpha, beta > 0.
struct ExpLogWeight {
  double alpha;
  double beta;
};

/// User profile r -> w(r) > 0 on [0, 1).
struct CustomWeight {
  std::function<double(double)> profile;
  std::string name;
};

class RadialWeight {
 public:
  using Kind = std::variant<StandardWeight, ExpLogWeight, CustomWeight>;

  static RadialWeight standard(double alpha) {
    if (!(alpha > -1.0)) throw DomainError("standard weight needs alpha > -1");
    return RadialWeight(StandardWeight{alpha});
  }

  static RadialWeight exp_log(double alpha, double beta) {
    if (!(alpha > 0.0) || !(beta > 0.0)) throw DomainError("exp-log weight needs alpha, beta > 0");
    return RadialWeight(ExpLogWeight{alpha, beta});
  }

  /// The caller certifies integrability; the certificate is then checked
  /// numerically (positivity on a grid and a finite zeroth moment).
  static RadialWeight custom(std::function<double(double)> profile, bool integrable,
                             std::string name = "custom");

  /// c * w for c > 0.
  RadialWeight scaled(double c) const {
    if (!(c > 0.0)) throw DomainError("weight scale must be positive");
    RadialWeight out = *this;
    out.log_scale_ += std::log(c);
    return out;
  }

  const Kind& kind() const noexcept { return kind_; }
  double log_scale() const noexcept { return log_scale_; }

  /// log w at r = 1 - gap; accurate for tiny gaps.
  double log_value_at_gap(double gap) const {
    const double r = 1.0 - gap;
    return log_scale_ + std::visit(
        [&](const auto& k) -> double {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, StandardWeight>) {
            const double base = std::log((k.alpha + 1.0) / std::numbers::pi);
            if (k.alpha == 0.0) return base;
            return base + k.alpha * std::log(gap * (2.0 - gap));
          } else if constexpr (std::is_same_v<T, ExpLogWeight>) {
            if (r <= 0.0) return 0.0;
            const double x = -2.0 * std::log1p(-gap);
            return -k.alpha / std::pow(x, k.beta);
          } else {
            return std::log(k.profile(r));
          }
        },
        kind_);
  }

  double log_value(double r) const { return log_value_at_gap(1.0 - r); }
  double operator()(double r) const { return std::exp(log_value(r)); }

  /// log(pi w(r)) as a function of x = log(1/r^2).
  double log_density(double x) const {
    return log_scale_ + std::visit(
        [&](const auto& k) -> double {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, StandardWeight>) {
            const double base = std::log(k.alpha + 1.0);
            if (k.alpha == 0.0) return base;
            return base + k.alpha * std::log(-std::expm1(-x));
          } else if constexpr (std::is_same_v<T, ExpLogWeight>) {
            return std::log(std::numbers::pi) - k.alpha / std::pow(x, k.beta);
          } else {
            return std::log(std::numbers::pi * k.profile(std::exp(-0.5 * x)));
          }
        },
        kind_);
  }

  /// Maximiser over x >= 0 of -(n+1) x + log_density(x). Closed form for the
  /// built-in families (for exp-log this is the saddle (alpha beta/(n+1))^{1/(1+beta)}).
  double peak(std::size_t n) const {
    const double np1 = static_cast<double>(n) + 1.0;
    if (const auto* s = std::get_if<StandardWeight>(&kind_))
      return s->alpha > 0.0 ? std::log1p(s->alpha / np1) : 0.0;
    if (const auto* e = std::get_if<ExpLogWeight>(&kind_))
      return std::pow(e->alpha * e->beta / np1, 1.0 / (1.0 + e->beta));
    return numeric_peak(np1);
  }

  std::string describe() const {
    std::string s = std::visit(
        [](const auto& k) -> std::string {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, StandardWeight>)
            return "standard(alpha=" + fmt_num(k.alpha) + ")";
          else if constexpr (std::is_same_v<T, ExpLogWeight>)
            return "explog(alpha=" + fmt_num(k.alpha) + ",beta=" + fmt_num(k.beta) + ")";
          else
            return "custom(" + k.name + ")";
        },
        kind_);
    if (log_scale_ != 0.0) s += "*" + fmt_num(std::exp(log_scale_));
    return s;
  }

 private:
  explicit RadialWeight(Kind k) : kind_(std::move(k)) {}

  static std::string fmt_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  }

  double numeric_peak(double np1) const {
    auto g = [&](double x) { return -np1 * x + log_density(x); };
    double best_x = 0.0, best = -std::numeric_limits<double>::infinity();
    std::vector<double> grid;
    for (double x = 1e-12; x < 400.0; x *= 1.25) grid.push_back(x);
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double v = g(grid[i]);
      if (v > best) best = v, best_x = grid[i], best_i = i;
    }
    if (best_i == 0) return 0.0;
    double lo = grid[best_i - 1];
    double hi = best_i + 1 < grid.size() ? grid[best_i + 1] : grid[best_i];
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 100 && hi - lo > 1e-14 * hi; ++it) {
      const double a = hi - phi * (hi - lo);
      const double b = lo + phi * (hi - lo);
      if (g(a) >= g(b)) hi = b; else lo = a;
    }
    const double x = 0.5 * (lo + hi);
    return g(x) >= best ? x : best_x;
  }

  Kind kind_;
  double log_scale_ = 0.0;
};

namespace detail {

struct LogIntegral {
  double log_value;
  double rel_error;
  bool converged;
};

/// log of int_0^inf exp(-(n+1)x + log_density(x)) * factor(x) dx, integrated
/// around the peak of the exponent with the peak value factored out.
template <class Factor>
LogIntegral log_moment_integral(const RadialWeight& w, std::size_t n, double rel_tol,
                                Factor&& factor) {
  const double np1 = static_cast<double>(n) + 1.0;
  auto g = [&](double x) { return -np1 * x + w.log_density(x); };
  const double xs = w.peak(n);

  double shift = g(xs);
  if (!std::isfinite(shift)) shift = g(std::max(xs, 1.0 / (16.0 * np1)));

  double sigma = 1.0 / np1;
  if (xs > 0.0) {
    const double h = 1e-3 * xs;
    const double d2 = (g(xs + h) - 2.0 * g(xs) + g(xs - h)) / (h * h);
    if (std::isfinite(d2) && d2 < 0.0) sigma = std::min(1.0 / std::sqrt(-d2), std::max(xs, sigma));
  }

  constexpr double kDrop = -60.0;
  double right = xs + sigma;
  for (double h = sigma; g(xs + h) - shift > kDrop && h < 1e5; h *= 2.0) right = xs + 2.0 * h;
  double left = 0.0;
  if (xs > 0.0) {
    for (double h = sigma;; h *= 2.0) {
      if (xs - h <= 0.0) { left = 0.0; break; }
      if (g(xs - h) - shift <= kDrop) { left = xs - h; break; }
    }
  }

  std::vector<double> bp{left};
  for (double k : {16.0, 8.0, 4.0, 2.0, 1.0})
    if (xs - k * sigma > left) bp.push_back(xs - k * sigma);
  if (xs > left) bp.push_back(xs);
  for (double k = 1.0; xs + k * sigma < right; k *= 2.0) bp.push_back(xs + k * sigma);
  bp.push_back(right);

  auto integrand = [&](double x) {
    const double f = factor(x);
    if (f == 0.0) return 0.0;
    return std::exp(g(x) - shift) * f;
  };
  const auto res = quad::integrate(integrand, std::span<const double>(bp),
                                   quad::Tolerance{0.1 * rel_tol, 0.0, 4000});
  if (res.value == 0.0 && res.converged)
    return {-std::numeric_limits<double>::infinity(), 0.0, true};
  if (!(res.value > 0.0) || !std::isfinite(res.value))
    return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::infinity(), false};
  return {shift + std::log(res.value), res.error / res.value, res.converged};
}

}  // namespace detail

inline RadialWeight RadialWeight::custom(std::function<double(double)> profile, bool integrable,
                                         std::string name) {
  if (!profile) throw DomainError("custom weight: empty profile");
  if (!integrable)
    throw DomainError("custom weight '" + name + "' needs an explicit integrability certificate");
  for (int i = 0; i < 200; ++i) {
    const double r = i / 200.0;
    const double v = profile(r);
    if (!(v > 0.0) || !std::isfinite(v))
      throw DomainError("custom weight '" + name + "' is not strictly positive at r = " + std::to_string(r));
  }
  RadialWeight w(CustomWeight{std::move(profile), std::move(name)});
  const auto m0 = detail::log_moment_integral(w, 0, 1e-8, [](double) { return 1.0; });
  if (!m0.converged || !std::isfinite(m0.log_value))
    throw DomainError("custom weight '" + std::get<CustomWeight>(w.kind_).name +
                      "' is not integrable (zeroth moment did not converge)");
  return w;
}

/// The sequence m[0..n_max] with its achieved accuracy.
class MomentTable {
 public:
  static constexpr const char* kConvention =
      "dA = plane Lebesgue measure; m[n] = 2*pi*int_0^1 r^(2n+1) w(r) dr";

  MomentTable(RadialWeight weight, std::vector<double> log_moments, double rel_error)
      : weight_(std::move(weight)), log_m_(std::move(log_moments)), rel_error_(rel_error) {
    if (log_m_.size() < 2) throw DomainError("MomentTable needs at least two moments");
    log_ratio_.resize(log_m_.size() - 1);
    for (std::size_t n = 0; n + 1 < log_m_.size(); ++n) log_ratio_[n] = log_m_[n + 1] - log_m_[n];
  }

  /// With separately known log ratios log(m[n+1]/m[n]); these carry full
  /// relative precision where differences of stored logs would not.
  MomentTable(RadialWeight weight, std::vector<double> log_moments, std::vector<double> log_ratios,
              double rel_error)
      : MomentTable(std::move(weight), std::move(log_moments), rel_error) {
    if (log_ratios.size() != log_ratio_.size()) throw DomainError("MomentTable: ratio count mismatch");
    log_ratio_ = std::move(log_ratios);
  }

  const RadialWeight& weight() const noexcept { return weight_; }
  std::size_t n_max() const noexcept { return log_m_.size() - 1; }
  std::size_t size() const noexcept { return log_m_.size(); }
  double operator[](std::size_t n) const { return std::exp(log_m_.at(n)); }
  double log_moment(std::size_t n) const { return log_m_.at(n); }
  std::span<const double> log_moments() const noexcept { return log_m_; }
  /// log(m[n+1]/m[n]) for n = 0..n_max-1.
  std::span<const double> log_ratios() const noexcept { return log_ratio_; }
  /// Largest estimated relative quadrature error over the table.
  double rel_error() const noexcept { return rel_error_; }

  /// Same sequence for c * w: every m[n] scales by c.
  MomentTable scaled(double c) const {
    std::vector<double> l = log_m_;
    for (auto& v : l) v += std::log(c);
    return MomentTable(weight_.scaled(c), std::move(l), log_ratio_, rel_error_);
  }

 private:
  RadialWeight weight_;
  std::vector<double> log_m_;
  std::vector<double> log_ratio_;
  double rel_error_;
};

/// Gamma(n+1) Gamma(alpha+2) / Gamma(n+alpha+2), evaluated through log-Gamma.
inline double moment_closed_form_standard(double alpha, std::size_t n) {
  if (!(alpha > -1.0)) throw DomainError("moment_closed_form_standard: alpha must exceed -1");
  const double nn = static_cast<double>(n);
  return std::exp(std::lgamma(nn + 1.0) + std::lgamma(alpha + 2.0) - std::lgamma(nn + alpha + 2.0));
}

/// Defect 2 log m[n] - log m[n-1] - log m[n+1]; positive means a violation.
inline double log_convexity_defect(std::span<const double> log_m, std::size_t n) {
  return 2.0 * log_m[n] - log_m[n - 1] - log_m[n + 1];
}

/// Moments by adaptive quadrature in x = log(1/r^2), split at the peak of the
/// integrand. Deterministic regardless of BHL_THREADS.
inline MomentTable compute_moments(const RadialWeight& w, std::size_t n_max, double rel_tol) {
  if (n_max < 1) throw DomainError("compute_moments: n_max must be >= 1");
  if (!(rel_tol > 1e-14 && rel_tol < 1e-3))
    throw DomainError("compute_moments: rel_tol must lie in (1e-14, 1e-3)");

  std::vector<double> log_m(n_max + 1);
  std::vector<double> errs(n_max + 1);
  std::vector<char> ok(n_max + 1, 0);
  parallel_for(n_max + 1, [&](std::size_t n) {
    const auto r = detail::log_moment_integral(w, n, rel_tol, [](double) { return 1.0; });
    log_m[n] = r.log_value;
    errs[n] = r.rel_error;
    ok[n] = r.converged && std::isfinite(r.log_value) && r.rel_error <= rel_tol;
  });
  for (std::size_t n = 0; n <= n_max; ++n)
    if (!ok[n]) throw QuadratureError("moment quadrature did not converge", n);

  const double achieved = *std::max_element(errs.begin(), errs.end());
  for (std::size_t n = 1; n < n_max; ++n) {
    const double defect = log_convexity_defect(log_m, n);
    if (defect > 4.0 * achieved + 1e-14) throw LogConvexityError(n, defect);
  }
  return MomentTable(w, std::move(log_m), achieved);
}

/// Moment table of the Standard weight from the exact ratios
/// m[n]/m[n-1] = n/(n+alpha+1). Accumulating log1p of the ratios keeps the
/// second differences of log m accurate, which lgamma differences do not.
inline MomentTable standard_moments_closed_form(double alpha, std::size_t n_max) {
  if (!(alpha > -1.0)) throw DomainError("standard_moments_closed_form: alpha must exceed -1");
  std::vector<double> l(n_max + 1), ratio(n_max);
  l[0] = 0.0;
  for (std::size_t n = 1; n <= n_max; ++n) {
    const double nn = static_cast<double>(n);
    ratio[n - 1] = std::log1p(-(alpha + 1.0) / (nn + alpha + 1.0));
    l[n] = l[n - 1] + ratio[n - 1];
  }
  return MomentTable(RadialWeight::standard(alpha), std::move(l), std::move(ratio), 0.0);
}

namespace detail {

/// log sum_n exp(n * log_r2 - log m[n]) with a geometric tail bound. Terms
/// have decreasing ratios (log-convex moments), so once the ratio q < 1 the
/// tail after term t is at most t q / (1 - q).
inline double log_kernel_series(const MomentTable& mt, double log_r2, double tail_tol) {
  const auto lm = mt.log_moments();
  if (!std::isfinite(log_r2)) return -lm[0];
  double mx = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  double prev = 0.0;
  double last_q = 1.0;
  for (std::size_t n = 0; n < lm.size(); ++n) {
    const double lt = static_cast<double>(n) * log_r2 - lm[n];
    if (lt > mx) {
      sum = sum * std::exp(mx - lt) + 1.0;
      mx = lt;
    } else {
      sum += std::exp(lt - mx);
    }
    if (n > 0) {
      const double lq = lt - prev;
      last_q = std::exp(lq);
      if (lq < 0.0) {
        const double q = last_q;
        const double tail = std::exp(lt - mx) * q / (1.0 - q);
        if (tail < tail_tol * sum) return mx + std::log(sum);
      }
    }
    prev = lt;
  }
  std::size_t need = 2 * lm.size();
  if (last_q < 1.0) {
    const double term = std::exp(prev - mx);
    const double k = std::log(tail_tol * sum * (1.0 - last_q) / term) / std::log(last_q);
    if (std::isfinite(k) && k > 0) need = lm.size() + static_cast<std::size_t>(std::ceil(k)) + 1;
  }
  throw InsufficientMomentsError("kernel series did not reach its tail bound", need);
}

}  // namespace detail

/// log ||K_r||^2 = log sum_n r^{2n} / m[n].
inline double log_kernel_norm_sq(const MomentTable& mt, double r, double tail_tol = 1e-15) {
  if (!(r >= 0.0 && r < 1.0)) throw DomainError("kernel_norm_sq: r must lie in [0, 1)");
  const double lr2 = r == 0.0 ? -std::numeric_limits<double>::infinity() : 2.0 * std::log(r);
  return detail::log_kernel_series(mt, lr2, tail_tol);
}

/// ||K_r||^2 with relative tail error <= tail_tol. Overflows to +inf for
/// very large norms; use log_kernel_norm_sq there.
inline double kernel_norm_sq(const MomentTable& mt, double r, double tail_tol = 1e-15) {
  return std::exp(log_kernel_norm_sq(mt, r, tail_tol));
}

/// tau at r = 1 - gap, evaluated in log space.
inline double tau_at_gap(const RadialWeight& w, const MomentTable& mt, double gap,
                         double tail_tol = 1e-15) {
  if (!(gap > 0.0 && gap <= 1.0)) throw DomainError("tau: r must lie in [0, 1)");
  const double lr2 = gap == 1.0 ? -std::numeric_limits<double>::infinity() : 2.0 * std::log1p(-gap);
  const double lk = detail::log_kernel_series(mt, lr2, tail_tol);
  return std::exp(-0.5 * (w.log_value_at_gap(gap) + lk));
}

/// tau(r) = (w(r) ||K_r||^2)^{-1/2}.
inline double tau(const RadialWeight& w, const MomentTable& mt, double r, double tail_tol = 1e-15) {
  if (!(r >= 0.0 && r < 1.0)) throw DomainError("tau: r must lie in [0, 1)");
  return tau_at_gap(w, mt, 1.0 - r, tail_tol);
}

/// A radial scale function r -> tau(r). Evaluation is by gap = 1 - r so that
/// profiles stay accurate very close to the boundary.
class TauProfile {
 public:
  enum class Provenance { FromWeight, UserSupplied };

  /// r_limit bounds the domain (1 means the whole open disk).
  static TauProfile user_supplied(std::function<double(double)> tau_of_gap, std::string name,
                                  double r_limit = 1.0) {
    if (!tau_of_gap) throw DomainError("user tau profile is empty");
    TauProfile p(Provenance::UserSupplied, std::move(name), r_limit);
    p.eval_ = std::move(tau_of_gap);
    p.check_boundary_decay();
    return p;
  }

  double operator()(double r) const { return at_gap(1.0 - r); }

  double at_gap(double gap) const {
    if (!(gap > 0.0) || gap > 1.0 || gap < min_gap_ * (1.0 - 1e-12))
      throw DomainError("tau profile '" + name_ + "' evaluated outside its domain (gap " +
                        std::to_string(gap) + ")");
    return eval_(gap);
  }

  Provenance provenance() const noexcept { return provenance_; }
  const std::string& name() const noexcept { return name_; }
  /// Largest r at which the profile may be evaluated (1 means unbounded).
  double r_limit() const noexcept { return 1.0 - min_gap_; }
  double min_gap() const noexcept { return min_gap_; }
  /// Largest relative interpolation error seen in validation (0 for exact profiles).
  double interpolation_error() const noexcept { return interp_error_; }

 private:
  friend TauProfile tau_profile(const RadialWeight&, const MomentTable&, double);

  TauProfile(Provenance p, std::string name, double r_limit)
      : provenance_(p), name_(std::move(name)), min_gap_(std::max(0.0, 1.0 - r_limit)) {}

  // tau(r) = O(1 - r): the ratio tau/gap must not blow up towards the boundary.
  void check_boundary_decay() const {
    const double floor_gap = std::max(min_gap_, 1e-300);
    const double ref = eval_(0.5) / 0.5;
    if (!(ref > 0.0) || !std::isfinite(ref))
      throw DomainError("tau profile '" + name_ + "' is not positive at r = 0.5");
    for (double g = 0.25; g >= floor_gap; g *= 0.25) {
      const double q = eval_(g) / g;
      if (!std::isfinite(q) || q > 1e3 * ref)
        throw DomainError("tau profile '" + name_ + "' is not O(1 - r) near the boundary");
      if (g < 1e-200) break;
    }
  }

  Provenance provenance_;
  std::string name_;
  double min_gap_ = 0.0;
  double interp_error_ = 0.0;
  std::function<double(double)> eval_;
};

/// Cached tau profile of a weight. For r <= 1/2 the kernel series is short and
/// tau is evaluated directly (near r = 0 log tau need not be smooth in r).
/// Beyond that log tau is interpolated in u = log(1/(1-r)) by a monotone
/// cubic, with nodes refined until every interval midpoint agrees with a
/// direct evaluation to 1e-7 relative. r_limit = 0 picks the largest radius
/// the moment table supports.
inline TauProfile tau_profile(const RadialWeight& w, const MomentTable& mt, double r_limit = 0.0) {
  auto log_tau_u = [&](double u) { return std::log(tau_at_gap(w, mt, std::exp(-u))); };
  auto supported = [&](double u) {
    try {
      (void)log_tau_u(u);
      return true;
    } catch (const InsufficientMomentsError&) {
      return false;
    }
  };

  double u_hi;
  if (r_limit > 0.0) {
    if (!(r_limit < 1.0)) throw DomainError("tau_profile: r_limit must be < 1");
    u_hi = -std::log1p(-r_limit);
    if (!supported(u_hi))
      throw InsufficientMomentsError("tau_profile: moments do not reach r_limit",
                                     2 * mt.size());
  } else {
    double lo = 0.0, hi = 60.0;
    if (!supported(1e-3)) throw InsufficientMomentsError("tau_profile: moment table too short", 2 * mt.size());
    lo = 1e-3;
    for (int it = 0; it < 60 && hi - lo > 1e-6; ++it) {
      const double mid = 0.5 * (lo + hi);
      (supported(mid) ? lo : hi) = mid;
    }
    u_hi = lo;
  }

  std::map<double, double> cache;
  auto direct = [&](double u) {
    auto it = cache.find(u);
    if (it != cache.end()) return it->second;
    const double v = log_tau_u(u);
    cache.emplace(u, v);
    return v;
  };

  const double u_lo = std::log(2.0);
  auto direct_eval = [w, mt](double gap) { return tau_at_gap(w, mt, gap); };
  if (u_hi <= u_lo + 1e-3) {
    TauProfile p(TauProfile::Provenance::FromWeight, w.describe(), 1.0 - std::exp(-u_hi));
    p.min_gap_ = std::exp(-u_hi);
    p.eval_ = direct_eval;
    p.check_boundary_decay();
    return p;
  }

  const std::size_t n0 =
      std::max<std::size_t>(8, static_cast<std::size_t>(std::ceil((u_hi - u_lo) * 16.0)));
  std::vector<double> nodes(n0 + 1);
  for (std::size_t i = 0; i <= n0; ++i)
    nodes[i] = u_lo + (u_hi - u_lo) * static_cast<double>(i) / static_cast<double>(n0);

  constexpr double kTarget = 1e-7;
  MonotoneCubic interp;
  double worst = 0.0;
  for (int round = 0; round < 30; ++round) {
    std::vector<double> vals(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) vals[i] = direct(nodes[i]);
    interp = MonotoneCubic(nodes, vals);
    std::vector<double> refined;
    refined.reserve(nodes.size() * 2);
    worst = 0.0;
    bool all_ok = true;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
      refined.push_back(nodes[i]);
      const double mid = 0.5 * (nodes[i] + nodes[i + 1]);
      const double err = std::abs(std::expm1(interp(mid) - direct(mid)));
      worst = std::max(worst, err);
      if (err > kTarget) {
        refined.push_back(mid);
        all_ok = false;
      }
    }
    refined.push_back(nodes.back());
    if (all_ok) break;
    nodes = std::move(refined);
  }
  if (worst > 1e-6) throw NumericError("tau_profile: interpolation did not reach 1e-6");

  TauProfile p(TauProfile::Provenance::FromWeight, w.describe(), 1.0 - std::exp(-u_hi));
  p.min_gap_ = std::exp(-u_hi);
  p.interp_error_ = worst;
  p.eval_ = [interp = std::move(interp), direct_eval](double gap) {
    return gap >= 0.5 ? direct_eval(gap) : std::exp(interp(-std::log(gap)));
  };
  p.check_boundary_decay();
  return p;
}

}  // namespace bhl
