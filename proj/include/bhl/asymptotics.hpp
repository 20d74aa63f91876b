#pragma once

// Predicted singular-value laws, Hardy norms of symbol derivatives, the
// leading-order Laplace approximation of exp-log moments and log-log fits.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bhl/error.hpp"
#include "bhl/quadrature.hpp"
#include "bhl/rearrangement.hpp"
#include "bhl/spectrum.hpp"

namespace bhl {

/// s_n ~ gamma * factor / (n + shift)^exponent.
struct AsymptoticLaw {
  double gamma = 0.0;
  double exponent = 1.0;
  double shift = 0.0;
  std::optional<double> symbol_factor;  // ||phi'||_{H^p} once a symbol is attached
  std::string description;

  double constant() const { return gamma * symbol_factor.value_or(1.0); }

  double operator()(double n) const {
    if (!(n >= 1.0)) throw DomainError("asymptotic law evaluated at n < 1");
    return constant() / std::pow(n + shift, exponent);
  }
};

/// sqrt(alpha + 1) / (n + 1).
inline AsymptoticLaw predict_standard(double alpha) {
  if (!(alpha > -1.0)) throw DomainError("predict_standard: alpha must exceed -1");
  AsymptoticLaw law;
  law.gamma = std::sqrt(alpha + 1.0);
  law.exponent = 1.0;
  law.shift = 1.0;
  law.description = "standard(alpha=" + std::to_string(alpha) + ")";
  return law;
}

/// gamma / n^{(beta+2)/(2(beta+1))} with gamma = sqrt((alpha beta)^{1/(1+beta)} / (1 + beta)).
inline AsymptoticLaw predict_explog(double alpha, double beta) {
  if (!(alpha > 0.0 && beta > 0.0)) throw DomainError("predict_explog: alpha and beta must be positive");
  AsymptoticLaw law;
  law.exponent = (beta + 2.0) / (2.0 * (beta + 1.0));
  law.gamma = std::sqrt(std::pow(alpha * beta, 1.0 / (1.0 + beta)) / (1.0 + beta));
  law.description = "explog(alpha=" + std::to_string(alpha) + ", beta=" + std::to_string(beta) + ")";
  return law;
}

namespace detail {

inline double polynomial_hardy(const SymbolDerivative& d, double p) {
  // breakpoints at the arguments of roots of phi' lying near the circle
  std::vector<double> bp{-std::numbers::pi, std::numbers::pi};
  for (cplx r : d.singular_points())
    if (std::abs(std::abs(r) - 1.0) < 0.25) bp.push_back(std::arg(r));
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  const auto res = quad::integrate([&](double t) { return std::pow(d.abs(std::polar(1.0, t)), p); },
                                   std::span<const double>(bp), quad::Tolerance{1e-13, 1e-300, 4000});
  if (!res.converged) throw NumericError("hardy_norm: circle quadrature did not converge");
  return std::pow(res.value / (2.0 * std::numbers::pi), 1.0 / p);
}

/// Mean of |phi'| on the unit circle for the critical family. With
/// theta = e^{-s}, theta |phi'| -> |1 + s + i pi/2|^{-gamma}; the s-integral
/// runs in v = log s and its tail past s = e^40 is added in closed form.
inline double critical_hardy_one(const SymbolDerivative& d) {
  const double g = d.gamma();
  const double scale = std::abs(d.scale());
  auto at_theta = [&](double th) { return d.abs_polar(1.0, 0.0, th); };
  auto in_s = [&](double s) {  // theta |phi'(e^{i theta})| with theta = e^{-s}
    if (s > 700.0) return scale / std::pow(std::hypot(1.0 + s, 0.5 * std::numbers::pi), g);
    const double th = std::exp(-s);
    return th * at_theta(th);
  };
  const double v_hi = 40.0;
  const auto near = quad::integrate([&](double v) { const double s = std::exp(v); return in_s(s) * s; },
                                    -40.0, v_hi, quad::Tolerance{1e-13, 1e-300, 8000});
  const double S1 = 1.0 + std::exp(v_hi);
  const double tail = scale * (std::pow(S1, 1.0 - g) / (g - 1.0) -
                               g * std::numbers::pi * std::numbers::pi / 8.0 * std::pow(S1, -1.0 - g) / (1.0 + g));
  const auto far = quad::integrate(at_theta, 1.0, std::numbers::pi, quad::Tolerance{1e-13, 1e-300, 4000});
  if (!near.converged || !far.converged) throw NumericError("hardy_norm: boundary quadrature did not converge");
  // theta in (0, 1) and (1, pi), doubled for the conjugate half
  return 2.0 * (near.value + tail + far.value) / (2.0 * std::numbers::pi);
}

}  // namespace detail

/// ||phi'||_{H^p} = sup_r ((1/2pi) int |phi'(r e^{i theta})|^p d theta)^{1/p}.
/// Integral means increase with r, so the supremum is the boundary value.
inline double hardy_norm(const SymbolDerivative& d, double p) {
  if (!(p >= 1.0)) throw DomainError("hardy_norm: p must be >= 1");
  if (d.is_zero()) return 0.0;
  if (d.kind() == SymbolDerivative::Kind::Polynomial) return detail::polynomial_hardy(d, p);
  if (p > 1.0) throw DivergenceError("hardy_norm: the critical family is not in H^p for p > 1");
  if (d.gamma() <= 1.0) throw DivergenceError("hardy_norm: the critical family is in H^1 only for gamma > 1");
  return detail::critical_hardy_one(d);
}

/// (1/2pi) int |phi'(r e^{i theta})|^p d theta at a fixed radius.
inline double integral_mean(const SymbolDerivative& d, double p, double r) {
  if (!(r >= 0.0 && r < 1.0)) throw DomainError("integral_mean: r must lie in [0, 1)");
  const double gap = 1.0 - r;
  std::vector<double> bp{-std::numbers::pi};
  for (double a : detail::sample_angles(d, r, gap, 8)) bp.push_back(a);
  bp.push_back(std::numbers::pi);
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  const auto res = quad::integrate([&](double t) { return std::pow(d.abs_polar(r, gap, t), p); },
                                   std::span<const double>(bp), quad::Tolerance{1e-12, 1e-300, 8000});
  return res.value / (2.0 * std::numbers::pi);
}

/// Attaches ||phi'||_{H^p}; the base exponent must equal 1/p.
inline AsymptoticLaw predict_symbol(const AsymptoticLaw& base, const SymbolDerivative& d, double p) {
  if (!(p >= 1.0)) throw DomainError("predict_symbol: p must be >= 1");
  if (std::abs(base.exponent - 1.0 / p) > 1e-12)
    throw DomainError("predict_symbol: law exponent " + std::to_string(base.exponent) + " does not match 1/p = " +
                      std::to_string(1.0 / p));
  AsymptoticLaw law = base;
  law.symbol_factor = base.symbol_factor.value_or(1.0) * hardy_norm(d, p);
  law.description = base.description + " * ||" + d.describe() + "||_p";
  return law;
}

/// p = 2(1 + beta)/(2 + beta), the Hardy exponent matching the exp-log law.
inline double explog_hardy_exponent(double beta) { return 2.0 * (1.0 + beta) / (2.0 + beta); }

/// x_n = (alpha beta / (n + 1))^{1/(1+beta)}, the saddle of (n+1) x + alpha / x^beta.
inline double laplace_saddle(double alpha, double beta, std::size_t n) {
  return std::pow(alpha * beta / static_cast<double>(n + 1), 1.0 / (1.0 + beta));
}

/// h(u) = beta u + (1 + u)^{-beta} - 1; h(0) = h'(0) = 0, h''(0) = beta (beta + 1).
inline double laplace_phase(double beta, double u) { return beta * u + std::pow(1.0 + u, -beta) - 1.0; }

/// log of the leading-order Laplace approximation to the exp-log moment m[n].
inline double laplace_log_moment_prediction(double alpha, double beta, std::size_t n) {
  if (!(alpha > 0.0 && beta > 0.0)) throw DomainError("laplace_moment_prediction: alpha and beta must be positive");
  if (n < 1) throw DomainError("laplace_moment_prediction: n must be >= 1");
  const double x = laplace_saddle(alpha, beta, n);
  const double t = alpha / std::pow(x, beta);
  return std::log(std::numbers::pi * x) - static_cast<double>(n + 1) * x - t +
         0.5 * std::log(2.0 * std::numbers::pi / (t * beta * (beta + 1.0)));
}

inline double laplace_moment_prediction(double alpha, double beta, std::size_t n) {
  return std::exp(laplace_log_moment_prediction(alpha, beta, n));
}

struct PowerLawFit {
  double exponent = 0.0;  // e_hat in s_n ~ gamma_hat n^{-e_hat}
  double gamma = 0.0;
  double residual = 0.0;  // root mean square of the log residuals
  std::size_t points = 0;
};

/// Least squares of log s_n against log n over the 1-based window [first, last].
inline PowerLawFit fit_power_law(std::span<const double> desc_values, std::size_t first, std::size_t last) {
  if (first < 1 || last > desc_values.size() || last < first)
    throw DomainError("fit_power_law: window outside the computed spectrum");
  if (last - first + 1 < 10) throw DomainError("fit_power_law: window needs at least 10 points");
  const std::size_t m = last - first + 1;
  double mx = 0.0, my = 0.0;
  for (std::size_t n = first; n <= last; ++n) {
    if (!(desc_values[n - 1] > 0.0)) throw DomainError("fit_power_law: nonpositive value in the window");
    mx += std::log(static_cast<double>(n));
    my += std::log(desc_values[n - 1]);
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t n = first; n <= last; ++n) {
    const double dx = std::log(static_cast<double>(n)) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(desc_values[n - 1]) - my);
  }
  const double slope = sxy / sxx;
  PowerLawFit fit;
  fit.exponent = -slope;
  fit.gamma = std::exp(my - slope * mx);
  fit.points = m;
  double ss = 0.0;
  for (std::size_t n = first; n <= last; ++n) {
    const double r = std::log(desc_values[n - 1]) - (my + slope * (std::log(static_cast<double>(n)) - mx));
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / static_cast<double>(m));
  return fit;
}

/// As above, restricted to values the doubling test has confirmed.
inline PowerLawFit fit_power_law(const SingularSpectrum& spec, std::size_t first, std::size_t last) {
  if (last > spec.verified) throw DomainError("fit_power_law: window extends past the verified part of the spectrum");
  if (spec.first_diverging && last >= *spec.first_diverging)
    throw DomainError("fit_power_law: window reaches values that failed the doubling test");
  return fit_power_law(spec.values, first, last);
}

}  // namespace bhl
