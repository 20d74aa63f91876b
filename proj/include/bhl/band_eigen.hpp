#pragma once

// Eigenvalues of Hermitian band matrices: Givens band-to-tridiagonal
// reduction (bulge chasing, bandwidth lowered by one per sweep) followed by
// the implicit QL iteration on the real symmetric tridiagonal.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <type_traits>
#include <vector>

#include "bhl/error.hpp"
#include "bhl/hankel.hpp"

namespace bhl {

namespace band_detail {

template <class T>
T conj_of(T x) {
  if constexpr (std::is_same_v<T, double>) return x; else return std::conj(x);
}

template <class T>
double real_of(T x) {
  if constexpr (std::is_same_v<T, double>) return x; else return x.real();
}

/// Lower band of a Hermitian matrix with one extra subdiagonal for the bulge.
template <class T>
class WorkBand {
 public:
  WorkBand(std::size_t n, std::size_t width) : n_(n), w_(width), a_(n * (width + 1), T(0)) {}

  std::size_t size() const { return n_; }
  std::size_t width() const { return w_; }
  // (i, j) with 0 <= i - j <= width
  T& at(std::size_t i, std::size_t j) { return a_[j * (w_ + 1) + (i - j)]; }
  T at(std::size_t i, std::size_t j) const { return a_[j * (w_ + 1) + (i - j)]; }

 private:
  std::size_t n_, w_;
  std::vector<T> a_;
};

/// A <- U A U^H with U = [[c, s], [-conj(s), c]] acting on indices p, q = p + 1.
/// `reach` bounds the column offset of nonzeros.
template <class T>
void rotate(WorkBand<T>& a, std::size_t p, double c, T s, std::size_t reach) {
  const std::size_t q = p + 1;
  const std::size_t n = a.size();
  const std::size_t lo = q > reach ? q - reach : 0;
  for (std::size_t col = lo; col < p; ++col) {  // columns left of the block
    const T x = a.at(p, col), y = a.at(q, col);
    a.at(p, col) = c * x + s * y;
    a.at(q, col) = -conj_of(s) * x + c * y;
  }
  const std::size_t hi = std::min(n - 1, p + reach);
  for (std::size_t row = q + 1; row <= hi; ++row) {  // rows below the block
    const T x = a.at(row, p), y = a.at(row, q);
    a.at(row, p) = c * x + conj_of(s) * y;
    a.at(row, q) = -s * x + c * y;
  }
  const double app = real_of(a.at(p, p)), aqq = real_of(a.at(q, q));
  const T aqp = a.at(q, p);
  // U B U^H for B = [[app, conj(aqp)], [aqp, aqq]]
  const double sn = std::norm(std::complex<double>(s));
  const double new_pp = c * c * app + sn * aqq + 2.0 * c * real_of(s * aqp);
  const double new_qq = sn * app + c * c * aqq - 2.0 * c * real_of(s * aqp);
  const T new_qp = c * c * aqp - conj_of(s) * conj_of(s) * conj_of(aqp) + c * conj_of(s) * (aqq - app);
  a.at(p, p) = new_pp;
  a.at(q, q) = new_qq;
  a.at(q, p) = new_qp;
}

/// Rotation in plane (q-1, q) that zeroes entry (q, col) against (q-1, col).
template <class T>
void annihilate(WorkBand<T>& a, std::size_t q, std::size_t col, std::size_t reach) {
  const T y = a.at(q, col);
  if (y == T(0)) return;
  const T x = a.at(q - 1, col);
  const double ax = std::abs(x), ay = std::abs(y);
  const double rho = std::hypot(ax, ay);
  double c;
  T s;
  if (ax == 0.0) {
    c = 0.0;
    s = T(1);
  } else {
    c = ax / rho;
    s = (x / ax) * conj_of(y) / rho;
  }
  rotate(a, q - 1, c, s, reach);
  a.at(q, col) = T(0);
}

/// Reduce to tridiagonal form; returns the diagonal and |subdiagonal|.
template <class T>
void tridiagonalize(WorkBand<T>& a, std::size_t band, std::vector<double>& d, std::vector<double>& e) {
  const std::size_t n = a.size();
  for (std::size_t k = band; k >= 2; --k) {
    const std::size_t reach = k + 1;
    for (std::size_t j = 0; j + k < n; ++j) {
      // zero (j+k, j), then chase the bulge down the band
      annihilate(a, j + k, j, reach);
      std::size_t row = j + 2 * k, col = j + k - 1;
      while (row < n) {
        annihilate(a, row, col, reach);
        col = row - 1;
        row += k;
      }
    }
  }
  d.assign(n, 0.0);
  e.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = real_of(a.at(i, i));
    if (i + 1 < n) e[i] = std::abs(a.at(i + 1, i));
  }
}

/// Implicit QL with Wilkinson-type shifts (tqli); eigenvalues overwrite d.
inline void tql(std::vector<double>& d, std::vector<double>& e, std::size_t max_iter = 60) {
  const std::size_t n = d.size();
  if (n == 0) return;
  for (std::size_t l = 0; l < n; ++l) {
    std::size_t iter = 0;
    std::size_t m;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= std::numeric_limits<double>::epsilon() * dd) break;
      }
      if (m != l) {
        if (iter++ == max_iter) throw ConvergenceError("tridiagonal QL iteration did not converge", l, iter);
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        std::size_t i = m;
        bool early = false;
        while (i-- > l) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            early = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
        }
        if (early) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

template <class T>
std::vector<double> band_eigenvalues(const BandedGram& g) {
  const std::size_t n = g.size(), b = g.bandwidth();
  WorkBand<T> a(n, b + 1);
  for (std::size_t col = 0; col < n; ++col)
    for (std::size_t i = 0; i <= b && col + i < n; ++i) {
      if constexpr (std::is_same_v<T, double>)
        a.at(col + i, col) = g.lower(col, i).real();
      else
        a.at(col + i, col) = g.lower(col, i);
    }
  std::vector<double> d, e;
  tridiagonalize(a, b, d, e);
  tql(d, e);
  return d;
}

/// Solve (G - shift) x = rhs for a Hermitian band matrix by banded Gaussian
/// elimination with partial pivoting (upper fill up to 2b).
inline std::vector<cplx> band_solve(const BandedGram& g, double shift, std::vector<cplx> rhs) {
  const std::size_t n = g.size(), b = g.bandwidth();
  const std::size_t up = 2 * b;
  const std::size_t width = b + up + 1;  // columns j in [i - b, i + up]
  std::vector<cplx> m(n * width, 0.0);
  auto at = [&](std::size_t i, std::size_t j) -> cplx& { return m[i * width + (j + b - i)]; };
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i > b ? i - b : 0;
    const std::size_t hi = std::min(n - 1, i + b);
    for (std::size_t j = lo; j <= hi; ++j) at(i, j) = g(i, j) - (i == j ? shift : 0.0);
  }
  const double tiny = std::numeric_limits<double>::epsilon() * std::max(1.0, g.norm_inf()) * 1e-3;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    const std::size_t last = std::min(n - 1, k + b);
    for (std::size_t i = k + 1; i <= last; ++i)
      if (std::abs(at(i, k)) > std::abs(at(piv, k))) piv = i;
    const std::size_t jmax = std::min(n - 1, k + up);
    if (piv != k) {
      for (std::size_t j = k; j <= jmax; ++j) {
        // row piv may not store j when j > piv + up; those entries are zero
        cplx tmp = at(k, j);
        if (j + b >= piv && j <= piv + up) {
          at(k, j) = at(piv, j);
          at(piv, j) = tmp;
        } else {
          at(k, j) = 0.0;
          (void)tmp;
        }
      }
      std::swap(rhs[k], rhs[piv]);
    }
    if (std::abs(at(k, k)) < tiny) at(k, k) = tiny;
    for (std::size_t i = k + 1; i <= last; ++i) {
      const cplx f = at(i, k) / at(k, k);
      if (f == 0.0) continue;
      for (std::size_t j = k; j <= jmax; ++j) at(i, j) -= f * at(k, j);
      rhs[i] -= f * rhs[k];
    }
  }
  for (std::size_t k = n; k-- > 0;) {
    cplx s = rhs[k];
    const std::size_t jmax = std::min(n - 1, k + up);
    for (std::size_t j = k + 1; j <= jmax; ++j) s -= at(k, j) * rhs[j];
    rhs[k] = s / at(k, k);
  }
  return rhs;
}

}  // namespace band_detail

/// ||G v - lambda v|| / ||G|| for an eigenvector of `lambda` reconstructed by
/// two steps of inverse iteration.
inline double eigen_residual(const BandedGram& g, double lambda) {
  const std::size_t n = g.size();
  std::vector<cplx> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = cplx(1.0 + 0.37 * std::sin(1.3 * i), 0.11 * std::cos(0.7 * i));
  for (int it = 0; it < 3; ++it) {
    v = band_detail::band_solve(g, lambda, std::move(v));
    double nv = 0.0;
    for (auto x : v) nv += std::norm(x);
    nv = std::sqrt(nv);
    for (auto& x : v) x /= nv;
  }
  double res = 0.0;
  const std::size_t b = g.bandwidth();
  for (std::size_t i = 0; i < n; ++i) {
    cplx s = -lambda * v[i];
    const std::size_t lo = i > b ? i - b : 0;
    const std::size_t hi = std::min(n - 1, i + b);
    for (std::size_t j = lo; j <= hi; ++j) s += g(i, j) * v[j];
    res += std::norm(s);
  }
  const double gn = g.norm_inf();
  return gn > 0.0 ? std::sqrt(res) / gn : std::sqrt(res);
}

/// All eigenvalues, sorted descending. A sample of up to eight eigenpairs is
/// reconstructed and must satisfy ||Gv - lambda v|| <= tol ||G||.
inline std::vector<double> symmetric_eigenvalues(const BandedGram& g, double tol = 1e-10) {
  const std::size_t n = g.size();
  std::vector<double> ev;
  if (g.bandwidth() == 0) {
    ev.resize(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = g.lower(i, 0).real();
  } else if (g.is_real()) {
    ev = band_detail::band_eigenvalues<double>(g);
  } else {
    ev = band_detail::band_eigenvalues<cplx>(g);
  }
  std::sort(ev.begin(), ev.end(), std::greater<>());
  if (g.bandwidth() > 0 && n > 0) {
    const std::size_t samples = std::min<std::size_t>(8, n);
    for (std::size_t s = 0; s < samples; ++s) {
      const std::size_t idx = samples == 1 ? 0 : s * (n - 1) / (samples - 1);
      const double r = eigen_residual(g, ev[idx]);
      if (!(r <= tol)) throw ConvergenceError("eigenpair residual " + std::to_string(r) + " exceeds tolerance", idx, 0);
    }
  }
  return ev;
}

}  // namespace bhl
