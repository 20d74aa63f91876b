#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "bhl/rearrangement.hpp"
#include "bhl/spectrum.hpp"

using namespace bhl;

namespace {

const double kSqrtPi = std::sqrt(std::numbers::pi);

// tau for the standard weight with parameter alpha, exact: sqrt(pi/(alpha+1)) (1 - r^2)
TauProfile standard_tau(double alpha = 0.0) {
  const double c = std::sqrt(std::numbers::pi / (alpha + 1.0));
  return TauProfile::user_supplied([c](double g) { return c * g * (2.0 - g); }, "standard-exact");
}

SymbolDerivative poly(std::initializer_list<cplx> c) { return SymbolDerivative::polynomial(PolynomialSymbol(c)); }

}  // namespace

TEST(SymbolDerivative, PolynomialAndCriticalValues) {
  const auto d = poly({1.0, 2.0, 0.5});  // phi = z + 2 z^2 + 0.5 z^3
  const cplx z(0.3, -0.4);
  EXPECT_NEAR(std::abs(d(z) - (1.0 + 4.0 * z + 1.5 * z * z)), 0.0, 1e-15);
  ASSERT_EQ(d.singular_points().size(), 2u);
  for (cplx r : d.singular_points()) EXPECT_LT(std::abs(1.0 + 4.0 * r + 1.5 * r * r), 1e-12);

  const auto ce = SymbolDerivative::critical_exponent(1.5);
  const cplx w = 1.0 - z;
  const cplx expect = 1.0 / (w * std::pow(std::log(std::numbers::e / w), 1.5));
  EXPECT_NEAR(ce.abs(z), std::abs(expect), 1e-14);
  // polar evaluation keeps 1 - z accurate near z = 1
  const double gap = 1e-12, th = 3e-13;
  const cplx wz(gap + 2.0 * (1 - gap) * std::pow(std::sin(th / 2), 2), -(1 - gap) * std::sin(th));
  EXPECT_NEAR(ce.abs_polar(1.0 - gap, gap, th) * std::abs(wz) * std::pow(std::abs(1.0 - std::log(wz)), 1.5), 1.0,
              1e-12);
  EXPECT_THROW(SymbolDerivative::critical_exponent(0.0), DomainError);
}

TEST(LevelMeasure, StandardLinearClosedForm) {
  const auto tau = standard_tau();
  const auto d = poly({1.0});
  for (double t : {0.05, 0.2, 0.7, 1.3, 1.7}) {
    const auto lm = level_measure(tau, d, t, 0.999);
    const double expect = kSqrtPi / t - 1.0;
    EXPECT_NEAR(lm.value / expect, 1.0, 1e-7) << "t=" << t;
    EXPECT_LT(lm.error, 1e-6 * expect);
    EXPECT_EQ(lm.r_max_delta, 0.0);  // superlevel set sits inside r_max
  }
}

TEST(LevelMeasure, VanishesAboveTheSupremum) {
  const auto tau = standard_tau();
  EXPECT_EQ(level_measure(tau, poly({1.0}), 1.8, 0.99).value, 0.0);
  EXPECT_EQ(level_measure(tau, poly({0.0, 1.0}), 2.0 * kSqrtPi * 2.0 / (3.0 * std::sqrt(3.0)) * 1.001, 0.99).value,
            0.0);
  EXPECT_THROW(level_measure(tau, poly({1.0}), 0.0, 0.9), DomainError);
  EXPECT_THROW(level_measure(tau, poly({1.0}), 0.1, 1.0), DomainError);
}

TEST(LevelMeasure, NonincreasingInT) {
  const auto tau = standard_tau(1.0);
  const auto d = poly({0.3, cplx(0.0, 1.0), -0.5});
  double prev = std::numeric_limits<double>::infinity();
  for (double t = 0.02; t < 1.5; t *= 1.4) {
    const double v = level_measure(tau, d, t, 0.995).value;
    EXPECT_LE(v, prev) << "t=" << t;
    prev = v;
  }
}

TEST(LevelMeasure, AgreesWithBruteForceGridForAPolynomial) {
  // midpoint polar grid in u, fine enough for a 1e-3 check
  const auto tau = standard_tau();
  const auto d = poly({1.0, -0.8});
  const double t = 0.6, r_max = 0.99;
  const double u_max = -std::log1p(-r_max);
  const int nu = 800, nt = 1600;
  double acc = 0.0;
  for (int i = 0; i < nu; ++i) {
    const double u = (i + 0.5) * u_max / nu, g = std::exp(-u), r = 1.0 - g, ta = tau.at_gap(g);
    int hits = 0;
    for (int j = 0; j < nt; ++j)
      if (ta * d.abs(std::polar(r, -std::numbers::pi + (j + 0.5) * 2.0 * std::numbers::pi / nt)) > t) ++hits;
    acc += r * g * (2.0 * std::numbers::pi * hits / nt) / (ta * ta);
  }
  acc *= u_max / nu;
  EXPECT_NEAR(level_measure(tau, d, t, r_max).value / acc, 1.0, 2e-3);
}

TEST(LevelMeasure, CriticalFamilyAgainstLogAngleGrid) {
  // midpoint rule in u = log(1/(1-r)) and v = log(1/theta); the level set
  // hugs theta = 0 at depth, which a uniform angle grid cannot resolve
  const auto tau = TauProfile::user_supplied([](double g) { return g / (1.0 - std::log(g)); }, "critical");
  const auto d = SymbolDerivative::critical_exponent(1.5);
  const double r_max = 1.0 - 1e-12;
  for (double t : {0.1, 0.01}) {
    const int nu = 3000, nv = 3000;
    const double u_hi = 20.0, v_lo = -std::log(std::numbers::pi), v_hi = 40.0;
    const double hu = u_hi / nu, hv = (v_hi - v_lo) / nv;
    double acc = 0.0;
    for (int i = 0; i < nu; ++i) {
      const double u = (i + 0.5) * hu, g = std::exp(-u), r = -std::expm1(-u);
      const double tg = tau.at_gap(g);
      double row = 0.0;
      for (int j = 0; j < nv; ++j) {
        const double th = std::exp(-(v_lo + (j + 0.5) * hv));
        if (tg * d.abs_polar(r, g, th) > t) row += th;
      }
      acc += row * r * g / (tg * tg);
    }
    const double brute = 2.0 * acc * hu * hv;
    const double v = level_measure(tau, d, t, r_max).value;
    EXPECT_NEAR(v / brute, 1.0, 5e-3) << "t=" << t << " brute " << brute << " level " << v;
  }
}

TEST(LevelMeasure, ReportsRMaxSensitivity) {
  const auto tau = standard_tau();
  const auto lm = level_measure(tau, poly({1.0}), 0.01, 0.99);
  // region |z| < sqrt(1 - t/sqrt(pi)) ~ 0.99718 extends past r_max
  EXPECT_GT(lm.r_max_delta, 0.0);
  EXPECT_DOUBLE_EQ(lm.r_max_next, 0.995);
  const double shell = 2.0 * std::numbers::pi *
                       (1.0 / (2.0 * std::numbers::pi) * ((1.0 / (1 - 0.995 * 0.995)) - 1.0 / (1 - 0.99 * 0.99)));
  EXPECT_NEAR(lm.r_max_delta / shell, 1.0, 1e-6);
}

TEST(Rearrangement, GeneralizedInverseOfReciprocal) {
  auto R = [](double t) { return 3.0 / t; };
  for (double x : {0.5, 2.0, 17.0, 1000.0}) EXPECT_NEAR(generalized_inverse(R, 1e6, x), 3.0 / x, 1e-15 * 3.0 / x * 4);
  // a flat piece: sup of the level where R jumps
  auto step = [](double t) { return t < 1.0 ? 5.0 : 1.0; };
  EXPECT_NEAR(generalized_inverse(step, 2.0, 3.0), 1.0, 1e-15);
  EXPECT_EQ(generalized_inverse(step, 2.0, 1.0), 2.0);
  EXPECT_THROW(generalized_inverse(step, 2.0, 6.0), DomainError);
}

TEST(Rearrangement, StandardLinearInverse) {
  const auto tau = standard_tau();
  const auto d = poly({1.0});
  for (double n : {1.0, 10.0, 100.0}) {
    const double v = rearrangement_plus(tau, d, n, 0.999);
    EXPECT_NEAR(v / (kSqrtPi / (n + 1.0)), 1.0, 1e-7) << "n=" << n;
  }
}

TEST(Rearrangement, OrderingAndMonotonicity) {
  const auto tau = standard_tau();
  const auto d = poly({1.0});
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> U(std::log(0.05), std::log(1.7));
  for (int k = 0; k < 20; ++k) {
    const double t = std::exp(U(rng));
    const double x = level_measure(tau, d, t, 0.999).value;
    EXPECT_GE(rearrangement_plus(tau, d, x, 0.999), t) << "t=" << t;
  }
  double prev = std::numeric_limits<double>::infinity();
  for (double x : {0.5, 1.0, 4.0, 20.0, 60.0}) {
    const double v = rearrangement_plus(tau, d, x, 0.999);
    EXPECT_LE(v, prev);
    prev = v;
  }
}

TEST(TraceIntegral, SquareCollapsesToDirichletIntegral) {
  auto sq = [](double t) { return t * t; };
  const double R = 0.99;
  const auto std0 = standard_tau();
  // unrelated profile: the integrand collapse makes the answer weight free
  const auto other = TauProfile::user_supplied([](double g) { return 0.7 * g / (1.0 + std::log(1.0 / g)); }, "other");
  for (const auto* tau : {&std0, &other}) {
    EXPECT_NEAR(trace_integral(*tau, poly({1.0}), sq, R).value, std::numbers::pi * R * R, 1e-8);
    EXPECT_NEAR(trace_integral(*tau, poly({0.0, 1.0}), sq, R).value, 2.0 * std::numbers::pi * std::pow(R, 4), 1e-8);
  }
  EXPECT_EQ(trace_integral(std0, poly({1.0}), [](double) { return 0.0; }, R).value, 0.0);
}

TEST(TraceIntegral, RejectsInvalidH) {
  const auto tau = standard_tau();
  EXPECT_THROW(trace_integral(tau, poly({1.0}), [](double t) { return 1.0 + t; }, 0.9), DomainError);
  EXPECT_THROW(trace_integral(tau, poly({1.0}), [](double t) { return std::sqrt(t); }, 0.9), DomainError);
  EXPECT_THROW(trace_integral(tau, poly({1.0}), [](double t) { return -t; }, 0.9), DomainError);
}

TEST(BlochNorm, ClosedForms) {
  const auto tau = standard_tau();
  const auto b1 = bloch_norm(tau, poly({1.0}));
  EXPECT_NEAR(b1.value, kSqrtPi, 1e-12);
  EXPECT_NEAR(b1.r, 0.0, 1e-6);  // the maximum is flat at r = 0

  const auto b2 = bloch_norm(tau, poly({0.0, 1.0}));
  EXPECT_NEAR(b2.value, 2.0 * kSqrtPi * 2.0 / (3.0 * std::sqrt(3.0)), 1e-12);
  EXPECT_NEAR(b2.r, 1.0 / std::sqrt(3.0), 1e-6);

  EXPECT_EQ(bloch_norm(tau, poly({0.0})).value, 0.0);
}

TEST(BlochNorm, NotBelowABruteForceGrid) {
  const auto tau = standard_tau(2.0);
  const auto d = poly({cplx(0.2, 0.1), -1.0, cplx(0.0, 0.7)});
  double grid = 0.0;
  for (int i = 0; i < 400; ++i) {
    const double r = i / 400.0;
    for (int j = 0; j < 400; ++j) grid = std::max(grid, tau(r) * d.abs(std::polar(r, j * 2 * std::numbers::pi / 400)));
  }
  const double b = bloch_norm(tau, d).value;
  EXPECT_GE(b, grid);
  EXPECT_LT(b, grid * 1.01);
}

TEST(BlochNorm, ComparableToTheLargestSingularValue) {
  // s_1 / bloch_norm stays in a fixed band across the family
  double lo = 1e300, hi = 0.0;
  for (double alpha : {0.0, 1.0, 2.0}) {
    const auto tau = standard_tau(alpha);
    const auto mt = standard_moments_closed_form(alpha, 400);
    for (const auto& phi : {PolynomialSymbol{1.0}, PolynomialSymbol{0.0, 1.0}, PolynomialSymbol{1.0, 1.0},
                            PolynomialSymbol{0.0, 0.0, 1.0}, PolynomialSymbol{cplx(1.0, 1.0), -0.5}}) {
      const double s1 = hankel_spectrum(mt, phi, 100).s(1);
      const double b = bloch_norm(tau, SymbolDerivative::polynomial(phi)).value;
      lo = std::min(lo, s1 / b);
      hi = std::max(hi, s1 / b);
    }
  }
  const double B = std::max(hi, 1.0 / lo);
  std::cout << "measured B = " << B << "\n";
  EXPECT_TRUE(std::isfinite(B));
  EXPECT_LE(B, 10.0);
}

TEST(Lattice, StandardProfileCoversTheWorkingDisk) {
  const auto tau = standard_tau();
  const auto lat = build_lattice(tau, 0.1, 0.99);
  EXPECT_GT(lat.centers.size(), 100u);
  EXPECT_GE(lat.min_separation, 1.0);
  EXPECT_GE(lat.comparability, 1.0);
  // tau ~ 2 sqrt(pi) (1 - r): across a dilated disk 1 - r shrinks by at most 1.5 * 0.1 * 2 sqrt(pi)
  EXPECT_LE(lat.comparability, 1.0 / (1.0 - 1.5 * 0.1 * 2.0 * kSqrtPi));
  // shrunk disks are disjoint: brute force over all pairs
  for (std::size_t i = 0; i < lat.centers.size(); ++i)
    for (std::size_t j = i + 1; j < lat.centers.size(); ++j)
      ASSERT_GE(std::abs(lat.centers[i] - lat.centers[j]),
                0.1 * std::min(tau(std::abs(lat.centers[i])), tau(std::abs(lat.centers[j]))) / (2 * lat.comparability));
  // covering on an independent random sample
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int k = 0; k < 20000; ++k) {
    const cplx z(U(rng), U(rng));
    if (std::abs(z) > 0.99) continue;
    bool hit = false;
    for (std::size_t i = 0; i < lat.centers.size() && !hit; ++i)
      hit = std::abs(z - lat.centers[i]) < lat.radii[i] * lat.dilation;
    ASSERT_TRUE(hit) << z;
  }
}

TEST(Lattice, MultiplicityStableUnderRefinement) {
  const auto tau = standard_tau();
  const auto coarse = build_lattice(tau, 0.1, 0.99);
  LatticeOptions fine;
  fine.scan_density = 8.0;
  fine.repair_density = 16.0;
  fine.test_density = 11.0;
  const auto f = build_lattice(tau, 0.1, 0.99, fine);
  std::cout << "multiplicity " << coarse.multiplicity << " -> " << f.multiplicity << "\n";
  EXPECT_LE(coarse.multiplicity, 12u);
  EXPECT_LE(f.multiplicity, 12u);
  EXPECT_LE(std::max(coarse.multiplicity, f.multiplicity) - std::min(coarse.multiplicity, f.multiplicity), 2u);
}

TEST(Lattice, ConstantTauOnASquare) {
  const double rho = 0.05;
  auto grid = [](double h, double off) {
    std::vector<cplx> pts;
    for (double x = off * h; x <= 1.0; x += h)
      for (double y = off * h; y <= 1.0; y += h) pts.emplace_back(x, y);
    return pts;
  };
  const auto lat = build_lattice_on([rho](cplx) { return rho; }, grid(rho / 4, 0.0), grid(rho / 10, 0.37),
                                    grid(rho / 7, 0.5), 1.5);
  EXPECT_LE(lat.multiplicity, 9u);
  EXPECT_EQ(lat.comparability, 1.0);
  EXPECT_GE(lat.min_separation, 1.0);
}

TEST(Lattice, CoverageFailureCarriesAWitness) {
  std::vector<cplx> scan{0.0};
  std::vector<cplx> test{0.0, cplx(0.5, 0.25)};
  try {
    build_lattice_on([](cplx) { return 0.1; }, scan, {}, test, 1.5);  // dilated radius 0.15
    FAIL() << "expected CoverageError";
  } catch (const CoverageError& e) {
    EXPECT_EQ(e.witness_x(), 0.5);
    EXPECT_EQ(e.witness_y(), 0.25);
  }
}

TEST(BesovSum, SquareSumComparableToTheTraceIntegral) {
  const auto tau = standard_tau();
  const double delta = 0.1, R = 0.99;
  const auto lat = build_lattice(tau, delta, R);
  const double sum = besov_sum(lat, tau, poly({1.0}), 2.0);
  const double integral = trace_integral(tau, poly({1.0}), [](double t) { return t * t; }, R).value;
  // each lattice disk carries area ~ pi (delta tau)^2 in dA / tau^2
  const double ratio = std::numbers::pi * delta * delta * sum / integral;
  std::cout << "normalized ratio " << ratio << "\n";
  EXPECT_GE(ratio, 0.25);
  EXPECT_LE(ratio, 4.0);
  EXPECT_EQ(besov_sum(lat, tau, poly({0.0}), 2.0), 0.0);
}

TEST(BesovSum, LinearSymbolGrowsWithRMaxAtPEqualOne) {
  const auto tau = standard_tau();
  std::vector<double> sums;
  for (double R : {0.9, 0.99, 0.999}) sums.push_back(besov_sum(build_lattice(tau, 0.1, R), tau, poly({1.0}), 1.0));
  std::cout << "p=1 sums " << sums[0] << " " << sums[1] << " " << sums[2] << "\n";
  EXPECT_GT(sums[1], sums[0]);
  EXPECT_GT(sums[2], sums[1]);
  // logarithmic growth: the increments do not shrink
  EXPECT_GT(sums[2] - sums[1], 0.5 * (sums[1] - sums[0]));
}
