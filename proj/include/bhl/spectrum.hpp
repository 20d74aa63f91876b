#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bhl/band_eigen.hpp"
#include "bhl/error.hpp"
#include "bhl/hankel.hpp"
#include "bhl/weights.hpp"

namespace bhl {

/// Singular values sorted descending, with truncation metadata. Indices in
/// the public accessors are 1-based, as in s_1 >= s_2 >= ...
struct SingularSpectrum {
  std::vector<double> values;
  std::string source;
  std::size_t section_size = 0;  // N of the finite section (0: synthetic)
  double eigen_tol = 0.0;
  double doubling_tol = 0.0;
  bool converged = true;
  std::size_t verified = 0;     // leading values checked by the doubling test
  std::optional<std::size_t> first_diverging;  // 1-based
  double max_doubling_deviation = 0.0;

  std::size_t size() const noexcept { return values.size(); }
  double s(std::size_t n) const { return values.at(n - 1); }

  static SingularSpectrum synthetic(std::vector<double> v, std::string source = "synthetic") {
    for (double x : v)
      if (!(x >= 0.0)) throw DomainError("singular values must be nonnegative");
    std::sort(v.begin(), v.end(), std::greater<>());
    SingularSpectrum s;
    s.values = std::move(v);
    s.source = std::move(source);
    s.verified = s.values.size();
    return s;
  }
};

/// s_n = sqrt(max(lambda_n, 0)) from the eigenvalues of a Gram section.
inline SingularSpectrum singular_values(const BandedGram& g, double tol = 1e-10) {
  const auto ev = symmetric_eigenvalues(g, tol);
  const double scale = std::max(g.norm_inf(), std::numeric_limits<double>::min());
  SingularSpectrum out;
  out.values.resize(ev.size());
  for (std::size_t i = 0; i < ev.size(); ++i) {
    if (ev[i] < -tol * scale) throw NumericError("Gram section is not positive semidefinite: eigenvalue " + std::to_string(ev[i]));
    out.values[i] = std::sqrt(std::max(ev[i], 0.0));
  }
  out.source = g.source;
  out.section_size = g.size();
  out.eigen_tol = tol;
  out.verified = 0;
  return out;
}

/// Spectrum of the N-section, accepted when its first N/2 values agree with
/// the 2N-section to `doubling_tol` relative. The result reports the N-section
/// values; `converged` and `first_diverging` record the test.
inline SingularSpectrum hankel_spectrum(const MomentTable& mt, const PolynomialSymbol& phi, std::size_t n,
                                        double doubling_tol = 1e-6, double eigen_tol = 1e-10) {
  if (n < 2) throw DomainError("hankel_spectrum: N must be >= 2");
  auto small = singular_values(polynomial_gram(mt, phi, n), eigen_tol);
  const auto big = singular_values(polynomial_gram(mt, phi, 2 * n), eigen_tol);
  const double floor = 1e-300;
  small.doubling_tol = doubling_tol;
  small.verified = n / 2;
  for (std::size_t i = 0; i < n / 2; ++i) {
    const double a = small.values[i], b = big.values[i];
    const double dev = std::abs(a - b) / std::max(std::abs(b), floor);
    if (a == b) continue;
    small.max_doubling_deviation = std::max(small.max_doubling_deviation, dev);
    if (dev > doubling_tol && !small.first_diverging) small.first_diverging = i + 1;
  }
  small.converged = !small.first_diverging.has_value();
  return small;
}

/// n(s) = #{n : s_n >= s}.
inline std::size_t counting(std::span<const double> desc_values, double s) {
  if (!(s > 0.0)) throw DomainError("counting: s must be positive");
  // values are sorted descending
  return static_cast<std::size_t>(
      std::upper_bound(desc_values.begin(), desc_values.end(), s,
                       [](double x, double v) { return v < x; }) -
      desc_values.begin());
}

inline std::size_t counting(const SingularSpectrum& spec, double s) { return counting(spec.values, s); }

struct PsiStatistics {
  double upper = 0.0;   // sup of psi(s) n(s) over the sampled points
  double lower = 0.0;   // inf
  std::size_t samples = 0;
};

/// Window statistics of psi(s) n(s) with psi(t) = c t^p, sampled at the jump
/// points s = s_n inside [s_lo, s_hi]. Since n(s) is piecewise constant and
/// psi increasing, these are the exact extrema over the window's jump set.
inline PsiStatistics psi_functionals(std::span<const double> desc_values, double p, double c, double s_lo,
                                     double s_hi) {
  if (!(p > 0.0)) throw DomainError("psi_functionals: p must be positive");
  if (desc_values.empty()) throw DomainError("psi_functionals: empty spectrum");
  if (!(s_lo > 0.0 && s_lo < s_hi && s_hi <= desc_values.front()))
    throw DomainError("psi_functionals: need 0 < s_lo < s_hi <= s_1");
  PsiStatistics st;
  st.upper = -std::numeric_limits<double>::infinity();
  st.lower = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < desc_values.size(); ++i) {
    const double s = desc_values[i];
    if (s < s_lo || s > s_hi) continue;
    if (i + 1 < desc_values.size() && desc_values[i + 1] == s) continue;  // last index of a tie
    const double v = c * std::pow(s, p) * static_cast<double>(i + 1);
    st.upper = std::max(st.upper, v);
    st.lower = std::min(st.lower, v);
    ++st.samples;
  }
  if (st.samples == 0) throw DomainError("psi_functionals: no jump point inside the window");
  return st;
}

inline PsiStatistics psi_functionals(const SingularSpectrum& spec, double p, double c, double s_lo, double s_hi) {
  return psi_functionals(spec.values, p, c, s_lo, s_hi);
}

struct SchattenNorm {
  double value = 0.0;
  bool tail_significant = false;  // last term exceeds 1e-6 of the sum
};

/// (sum s_n^p)^{1/p} over the computed values, summed smallest first.
inline SchattenNorm schatten_norm(std::span<const double> desc_values, double p) {
  if (!(p > 0.0)) throw DomainError("schatten_norm: p must be positive");
  double sum = 0.0;
  for (std::size_t i = desc_values.size(); i-- > 0;) sum += std::pow(desc_values[i], p);
  SchattenNorm out;
  out.value = std::pow(sum, 1.0 / p);
  if (!desc_values.empty() && sum > 0.0) out.tail_significant = std::pow(desc_values.back(), p) > 1e-6 * sum;
  return out;
}

inline SchattenNorm schatten_norm(const SingularSpectrum& spec, double p) { return schatten_norm(spec.values, p); }

}  // namespace bhl
