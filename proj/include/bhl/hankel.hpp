#pragma once

// Finite sections of H*H for the Hankel operator with conjugate-analytic
// symbol conj(phi), phi a polynomial, in the orthonormal monomial basis
// e_m = z^m / sqrt(m[m]) of a radially weighted Bergman space.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "bhl/error.hpp"
#include "bhl/parallel.hpp"
#include "bhl/quadrature.hpp"
#include "bhl/weights.hpp"

namespace bhl {

using cplx = std::complex<double>;

/// phi(z) = sum_{k=1}^{d} c_k z^k. The constant term is irrelevant to the
/// Hankel operator and is not stored.
class PolynomialSymbol {
 public:
  explicit PolynomialSymbol(std::vector<cplx> coeffs) : c_(std::move(coeffs)) {
    if (c_.empty()) throw DomainError("polynomial symbol needs degree >= 1");
  }
  PolynomialSymbol(std::initializer_list<cplx> coeffs) : PolynomialSymbol(std::vector<cplx>(coeffs)) {}

  /// z^k
  static PolynomialSymbol monomial(std::size_t k, cplx c = 1.0) {
    if (k == 0) throw DomainError("monomial symbol needs k >= 1");
    std::vector<cplx> v(k, 0.0);
    v[k - 1] = c;
    return PolynomialSymbol(std::move(v));
  }

  std::size_t degree() const noexcept { return c_.size(); }
  /// c_k for 1 <= k <= degree.
  cplx coeff(std::size_t k) const { return c_.at(k - 1); }
  std::span<const cplx> coefficients() const noexcept { return c_; }

  bool is_real() const {
    return std::all_of(c_.begin(), c_.end(), [](cplx c) { return c.imag() == 0.0; });
  }
  bool is_zero() const {
    return std::all_of(c_.begin(), c_.end(), [](cplx c) { return c == 0.0; });
  }

  cplx operator()(cplx z) const {
    cplx acc = 0.0;
    for (std::size_t k = c_.size(); k >= 1; --k) acc = (acc + c_[k - 1]) * z;
    return acc;
  }

  /// phi'(z)
  cplx derivative(cplx z) const {
    cplx acc = 0.0;
    for (std::size_t k = c_.size(); k >= 1; --k) acc = acc * z + static_cast<double>(k) * c_[k - 1];
    return acc;
  }

  std::string describe() const {
    std::string s;
    for (std::size_t k = 1; k <= c_.size(); ++k) {
      if (c_[k - 1] == 0.0) continue;
      char buf[96];
      if (c_[k - 1].imag() == 0.0)
        std::snprintf(buf, sizeof buf, "%s%.17g*z^%zu", s.empty() ? "" : "+", c_[k - 1].real(), k);
      else
        std::snprintf(buf, sizeof buf, "%s(%.17g%+.17gi)*z^%zu", s.empty() ? "" : "+",
                      c_[k - 1].real(), c_[k - 1].imag(), k);
      s += buf;
    }
    return s.empty() ? "0" : s;
  }

 private:
  std::vector<cplx> c_;
};

/// Hermitian band matrix; the lower band (entries (m, n) with 0 <= m - n <= b)
/// is stored row-major in n.
class BandedGram {
 public:
  BandedGram(std::size_t n, std::size_t bandwidth)
      : n_(n), b_(bandwidth), band_(n * (bandwidth + 1), cplx(0.0)) {}

  std::size_t size() const noexcept { return n_; }
  std::size_t bandwidth() const noexcept { return b_; }

  /// Lower-band entry G(n + i, n), 0 <= i <= bandwidth.
  cplx& lower(std::size_t n, std::size_t i) { return band_[n * (b_ + 1) + i]; }
  cplx lower(std::size_t n, std::size_t i) const { return band_[n * (b_ + 1) + i]; }

  cplx operator()(std::size_t m, std::size_t n) const {
    if (m >= n) return m - n <= b_ ? lower(n, m - n) : cplx(0.0);
    return std::conj((*this)(n, m));
  }

  bool is_real() const {
    return std::all_of(band_.begin(), band_.end(), [](cplx c) { return c.imag() == 0.0; });
  }

  /// Max row-sum norm; bounds the spectral radius.
  double norm_inf() const {
    double best = 0.0;
    for (std::size_t m = 0; m < n_; ++m) {
      double s = 0.0;
      const std::size_t lo = m > b_ ? m - b_ : 0;
      const std::size_t hi = std::min(n_ - 1, m + b_);
      for (std::size_t n = lo; n <= hi; ++n) s += std::abs((*this)(m, n));
      best = std::max(best, s);
    }
    return best;
  }

  double trace() const {
    double t = 0.0;
    for (std::size_t m = 0; m < n_; ++m) t += lower(m, 0).real();
    return t;
  }

  std::string source;  // free-form provenance (weight, symbol)

 private:
  std::size_t n_;
  std::size_t b_;
  std::vector<cplx> band_;
};

namespace detail {

/// sum_{t<len} (D(a+t) - D(b+t)) with D the log moment ratios, i.e.
/// log(m[a+len] m[b] / (m[a] m[b+len])), summed difference by difference.
inline double ratio_gap(std::span<const double> dl, std::size_t a, std::size_t b, std::size_t len) {
  double s = 0.0;
  for (std::size_t t = 0; t < len; ++t) s += dl[a + t] - dl[b + t];
  return s;
}

}  // namespace detail

/// m_w(n)^2 = m[n+1]/m[n] - m[n]/m[n-1] for n >= 1 and m[1]/m[0] for n = 0:
/// the eigenvalues of H*H for phi = z. Evaluated as
/// e^{D(n-1)} expm1(D(n) - D(n-1)) with D(n) = log m[n+1] - log m[n].
inline std::vector<double> hz_squared_sequence(const MomentTable& mt, std::size_t n_max) {
  if (n_max + 1 > mt.n_max())
    throw InsufficientMomentsError("hz_squared_sequence: moment table too short", n_max + 1);
  const auto dl = mt.log_ratios();
  std::vector<double> out(n_max + 1);
  double prev = dl[0];
  out[0] = std::exp(prev);
  for (std::size_t n = 1; n <= n_max; ++n) {
    const double d = dl[n];
    double v = std::exp(prev) * std::expm1(d - prev);
    if (v < -1e-13) throw LogConvexityError(n, -v);
    out[n] = std::max(v, 0.0);
    prev = d;
  }
  return out;
}

/// Diagonal of H*H for phi = z^k (diagonal for radial weights):
/// (m[m+k] - [m >= k] m[m]^2 / m[m-k]) / m[m], m = 0..N-1.
inline std::vector<double> monomial_gram_diagonal(const MomentTable& mt, std::size_t k, std::size_t n) {
  if (k == 0) throw DomainError("monomial_gram_diagonal: k must be >= 1");
  if (n == 0) return {};
  if (n - 1 + k > mt.n_max())
    throw InsufficientMomentsError("monomial_gram_diagonal: moment table too short", n - 1 + k);
  const auto lm = mt.log_moments();
  const auto dl = mt.log_ratios();
  std::vector<double> out(n);
  for (std::size_t m = 0; m < n; ++m) {
    const double lead = std::exp(lm[m + k] - lm[m]);
    if (m < k) {
      out[m] = lead;
      continue;
    }
    const double delta = detail::ratio_gap(dl, m - k, m, k);
    if (delta > 1e-13) throw LogConvexityError(m, delta);
    out[m] = lead * -std::expm1(std::min(delta, 0.0));
  }
  return out;
}

/// Exact N x N section of H*H for a polynomial symbol. Entry (m, n) is
///   sum_{m+k = n+j} conj(c_j) c_k (m[m+k] - [m>=j] m[m] m[n] / m[m-j]) / sqrt(m[m] m[n]),
/// evaluated in log form so that the near-cancelling difference keeps its
/// relative accuracy. Rows are assembled in parallel.
inline BandedGram polynomial_gram(const MomentTable& mt, const PolynomialSymbol& phi, std::size_t n) {
  const std::size_t d = phi.degree();
  if (n == 0) throw DomainError("polynomial_gram: N must be >= 1");
  if (n - 1 + d > mt.n_max())
    throw InsufficientMomentsError("polynomial_gram: moment table too short", n - 1 + d);
  const auto lm = mt.log_moments();
  const auto dl = mt.log_ratios();
  BandedGram g(n, d - 1);
  parallel_for(n, [&](std::size_t col) {
    for (std::size_t i = 0; i < d && col + i < n; ++i) {
      const std::size_t row = col + i;
      cplx acc = 0.0;
      for (std::size_t k = 1; k + i <= d; ++k) {
        const std::size_t j = k + i;  // row + k = col + j
        const cplx cc = std::conj(phi.coeff(j)) * phi.coeff(k);
        if (cc == 0.0) continue;
        const std::size_t s = row + k;
        double t = std::exp(lm[s] - 0.5 * (lm[row] + lm[col]));
        if (row >= j) {
          // log(m[row] m[col] / (m[row-j] m[row+k])), row - j = col - k
          const double delta = detail::ratio_gap(dl, row - j, col, j);
          t *= -std::expm1(std::min(delta, 0.0));
        }
        acc += cc * t;
      }
      g.lower(col, i) = acc;
    }
  });
  g.source = mt.weight().describe() + "; phi=" + phi.describe() + "; N=" + std::to_string(n);
  return g;
}

/// Eigenvalues of the Toeplitz operator with radial symbol density g(r) dA:
/// (2 pi int_0^1 r^{2n+1} g(r) w(r) dr) / m[n], n = 0..N-1.
inline std::vector<double> toeplitz_radial_eigs(const MomentTable& mt,
                                                const std::function<double(double)>& density,
                                                std::size_t n, double rel_tol = 1e-10) {
  if (n > mt.size()) throw InsufficientMomentsError("toeplitz_radial_eigs: moment table too short", n);
  const auto& w = mt.weight();
  std::vector<double> out(n);
  std::vector<char> ok(n, 1);
  parallel_for(n, [&](std::size_t k) {
    const auto r = detail::log_moment_integral(w, k, rel_tol, [&](double x) {
      const double v = density(std::exp(-0.5 * x));
      if (v < 0.0 || !std::isfinite(v)) throw DomainError("toeplitz density must be finite and >= 0");
      return v;
    });
    ok[k] = r.converged;
    out[k] = r.converged ? std::exp(r.log_value - mt.log_moment(k)) : 0.0;
  });
  for (std::size_t k = 0; k < n; ++k)
    if (!ok[k]) throw QuadratureError("toeplitz eigenvalue quadrature did not converge", k);
  return out;
}

struct OracleGrid {
  std::size_t radial_panels = 18;    // geometric panels towards |z| = 1
  std::size_t radial_order = 24;     // Gauss-Legendre points per panel
  std::size_t angular_points = 0;    // 0: smallest count exact for the band
};

struct DenseGram {
  std::size_t n = 0;
  std::vector<cplx> a;       // row-major n x n
  double error_estimate = 0.0;
  cplx operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }
};

namespace detail {

inline DenseGram dense_gram_once(const RadialWeight& w, const PolynomialSymbol& phi, std::size_t n,
                                 std::size_t panels, std::size_t order, std::size_t m_ang) {
  const auto rule = quad::gauss_legendre(order);
  std::vector<double> rn, rw;  // radial nodes and weights (including r dr)
  for (std::size_t p = 0; p < panels; ++p) {
    const double a = p == 0 ? 0.0 : 1.0 - std::ldexp(1.0, -static_cast<int>(p));
    const double b = p + 1 == panels ? 1.0 : 1.0 - std::ldexp(1.0, -static_cast<int>(p + 1));
    for (std::size_t i = 0; i < order; ++i) {
      const double r = 0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[i];
      rn.push_back(r);
      rw.push_back(0.5 * (b - a) * rule.weights[i] * r * w(r));
    }
  }
  const double dth = 2.0 * std::numbers::pi / static_cast<double>(m_ang);

  // squared norms of z^m by the same 2D rule
  std::vector<double> norm2(n, 0.0);
  for (std::size_t i = 0; i < rn.size(); ++i) {
    double pw = 1.0;
    for (std::size_t m = 0; m < n; ++m) {
      norm2[m] += rw[i] * pw * dth * static_cast<double>(m_ang);
      pw *= rn[i] * rn[i];
    }
  }
  std::vector<double> inv_norm(n);
  for (std::size_t m = 0; m < n; ++m) inv_norm[m] = 1.0 / std::sqrt(norm2[m]);

  // A = <conj(phi) e_m, conj(phi) e_n>, B(j, m) = <conj(phi) e_m, e_j>
  std::vector<cplx> a(n * n, 0.0), b(n * n, 0.0), em(n);
  for (std::size_t i = 0; i < rn.size(); ++i) {
    for (std::size_t t = 0; t < m_ang; ++t) {
      const cplx z = std::polar(rn[i], dth * static_cast<double>(t));
      const double wt = rw[i] * dth;
      const cplx f = std::conj(phi(z));
      const double f2 = std::norm(f);
      cplx pw = 1.0;
      for (std::size_t m = 0; m < n; ++m) {
        em[m] = pw * inv_norm[m];
        pw *= z;
      }
      for (std::size_t r = 0; r < n; ++r) {
        const cplx er = em[r] * wt;
        for (std::size_t c = 0; c < n; ++c) {
          a[r * n + c] += f2 * er * std::conj(em[c]);
          b[c * n + r] += f * er * std::conj(em[c]);
        }
      }
    }
  }
  DenseGram out;
  out.n = n;
  out.a.assign(n * n, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      cplx proj = 0.0;
      for (std::size_t j = 0; j < n; ++j) proj += b[j * n + r] * std::conj(b[j * n + c]);
      out.a[r * n + c] = a[r * n + c] - proj;
    }
  return out;
}

}  // namespace detail

/// Independent dense evaluation of the same section by 2D polar quadrature
/// (composite Gauss-Legendre in r, trapezoid in theta), with its own monomial
/// norms and an explicit projection step. The error estimate is the largest
/// entry change under doubling the radial resolution.
inline DenseGram dense_gram_oracle(const RadialWeight& w, const PolynomialSymbol& phi, std::size_t n,
                                   const OracleGrid& grid = {}) {
  if (n == 0 || n > 64) throw DomainError("dense_gram_oracle: N must lie in [1, 64]");
  const std::size_t m_ang = grid.angular_points
                                ? grid.angular_points
                                : 2 * (n + 2 * phi.degree()) + 8;
  auto coarse = detail::dense_gram_once(w, phi, n, grid.radial_panels, grid.radial_order, m_ang);
  const auto fine = detail::dense_gram_once(w, phi, n, grid.radial_panels + 6, 2 * grid.radial_order, m_ang);
  double err = 0.0;
  for (std::size_t i = 0; i < n * n; ++i) err = std::max(err, std::abs(coarse.a[i] - fine.a[i]));
  auto out = fine;
  out.error_estimate = err;
  return out;
}

}  // namespace bhl
