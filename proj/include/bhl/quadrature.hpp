#pragma once

// One-dimensional quadrature: a globally adaptive Gauss-Kronrod (7/15)
// integrator and Gauss-Legendre rules of arbitrary order.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <queue>
#include <span>
#include <vector>

#include "bhl/error.hpp"

namespace bhl::quad {

namespace detail {

// Kronrod abscissae on [0, 1]; odd positions are the 7-point Gauss nodes.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

}  // namespace detail

struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

/// Single 15-point Kronrod panel on [a, b]; the error is |K15 - G7|.
template <class F>
Estimate gauss_kronrod15(F&& f, double a, double b) {
  using namespace detail;
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double fsum = f(center - dx) + f(center + dx);
    kronrod += kWgk[j] * fsum;
    if (j % 2 == 1) gauss += kWg[j / 2] * fsum;
  }
  return {kronrod * half, std::abs((kronrod - gauss) * half)};
}

struct Tolerance {
  double rel = 1e-10;
  double abs = 0.0;
  std::size_t max_intervals = 4000;
};

struct Result {
  double value = 0.0;
  double error = 0.0;
  std::size_t intervals = 0;
  bool converged = false;
};

/// Globally adaptive integration over the partition given by `breakpoints`
/// (sorted, at least two entries). The panel with the largest error estimate
/// is bisected until sum(error) <= max(abs, rel * |value|).
template <class F>
Result integrate(F&& f, std::span<const double> breakpoints, const Tolerance& tol) {
  struct Panel {
    double a, b;
    Estimate est;
    bool operator<(const Panel& o) const { return est.error < o.est.error; }
  };
  if (breakpoints.size() < 2) throw DomainError("integrate: need at least two breakpoints");

  std::priority_queue<Panel> heap;
  double value = 0.0;
  double error = 0.0;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    const double a = breakpoints[i];
    const double b = breakpoints[i + 1];
    if (!(b > a)) continue;
    Panel p{a, b, gauss_kronrod15(f, a, b)};
    value += p.est.value;
    error += p.est.error;
    heap.push(p);
  }

  Result out;
  while (!heap.empty()) {
    if (error <= std::max(tol.abs, tol.rel * std::abs(value))) {
      out.converged = true;
      break;
    }
    if (heap.size() >= tol.max_intervals) break;
    Panel worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;  // interval at round-off width
    heap.pop();
    Panel left{worst.a, mid, gauss_kronrod15(f, worst.a, mid)};
    Panel right{mid, worst.b, gauss_kronrod15(f, mid, worst.b)};
    value += left.est.value + right.est.value - worst.est.value;
    error += left.est.error + right.est.error - worst.est.error;
    heap.push(left);
    heap.push(right);
  }
  if (heap.empty()) out.converged = true;

  // Re-sum from the panels to avoid drift in the running totals.
  double v = 0.0, e = 0.0;
  std::vector<Panel> panels;
  panels.reserve(heap.size());
  while (!heap.empty()) {
    panels.push_back(heap.top());
    heap.pop();
  }
  std::sort(panels.begin(), panels.end(),
            [](const Panel& x, const Panel& y) { return x.a < y.a; });
  for (const auto& p : panels) {
    v += p.est.value;
    e += p.est.error;
  }
  out.value = v;
  out.error = e;
  out.intervals = panels.size();
  if (!out.converged) out.converged = e <= std::max(tol.abs, tol.rel * std::abs(v));
  return out;
}

template <class F>
Result integrate(F&& f, double a, double b, const Tolerance& tol) {
  const std::array<double, 2> bp{a, b};
  return integrate(std::forward<F>(f), std::span<const double>(bp), tol);
}

/// Gauss-Legendre rule on [-1, 1].
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline Rule gauss_legendre(std::size_t n) {
  if (n == 0) throw DomainError("gauss_legendre: order must be positive");
  Rule rule{std::vector<double>(n), std::vector<double>(n)};
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = p2;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0, p1 = x;
    for (std::size_t k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
      p0 = p1;
      p1 = p2;
    }
    dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

/// Composite Gauss-Legendre sum of f over [a, b] with `panels` equal panels.
template <class F>
double composite_gauss(F&& f, double a, double b, std::size_t panels, const Rule& rule) {
  const double h = (b - a) / static_cast<double>(panels);
  double total = 0.0;
  for (std::size_t p = 0; p < panels; ++p) {
    const double lo = a + h * static_cast<double>(p);
    const double c = lo + 0.5 * h;
    double s = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * f(c + 0.5 * h * rule.nodes[i]);
    total += 0.5 * h * s;
  }
  return total;
}

}  // namespace bhl::quad
