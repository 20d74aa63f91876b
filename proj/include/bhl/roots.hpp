#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

namespace bhl {

/// Roots of sum_{i} a[i] z^i (Durand-Kerner, Newton-polished). Leading zero
/// coefficients are dropped; returns an empty list for constants.
inline std::vector<std::complex<double>> polynomial_roots(std::vector<std::complex<double>> a) {
  using C = std::complex<double>;
  while (!a.empty() && a.back() == C(0.0)) a.pop_back();
  if (a.size() <= 1) return {};
  const std::size_t deg = a.size() - 1;
  const C lead = a.back();
  for (auto& c : a) c /= lead;

  double bound = 0.0;  // Cauchy bound
  for (std::size_t i = 0; i < deg; ++i) bound = std::max(bound, std::abs(a[i]));
  bound += 1.0;

  auto eval = [&](C z) {
    C p = 1.0;
    for (std::size_t i = deg; i-- > 0;) p = p * z + a[i];
    return p;
  };
  auto deriv = [&](C z) {
    C d = static_cast<double>(deg);
    for (std::size_t i = deg; i-- > 1;) d = d * z + static_cast<double>(i) * a[i];
    return d;
  };

  std::vector<C> z(deg);
  const C seed(0.4, 0.9);
  for (std::size_t k = 0; k < deg; ++k) z[k] = std::pow(seed, static_cast<double>(k)) * (0.5 * bound);
  for (int it = 0; it < 1000; ++it) {
    double change = 0.0;
    for (std::size_t k = 0; k < deg; ++k) {
      C den = 1.0;
      for (std::size_t j = 0; j < deg; ++j)
        if (j != k) den *= z[k] - z[j];
      if (den == C(0.0)) den = 1e-300;
      const C step = eval(z[k]) / den;
      z[k] -= step;
      change = std::max(change, std::abs(step) / std::max(1.0, std::abs(z[k])));
    }
    if (change < 1e-15) break;
  }
  for (auto& r : z) {
    for (int it = 0; it < 3; ++it) {
      const C d = deriv(r);
      if (d == C(0.0)) break;
      r -= eval(r) / d;
    }
  }
  return z;
}

}  // namespace bhl
