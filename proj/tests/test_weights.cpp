#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <numbers>

#include "bhl/weights.hpp"

using namespace bhl;

namespace {

// Independent oracle: m[n] = pi int_0^inf e^{-(n+1)x} w(e^{-x/2}) dx, written
// as an integral over t = log x and summed by the plain trapezoid rule (the
// integrand is smooth and decays doubly exponentially at both ends).
template <class LogDensity>
double trapezoid_moment(std::size_t n, LogDensity&& log_pi_w) {
  const double h = 1.0 / 512.0;
  double s = 0.0;
  for (double t = -45.0; t <= 8.0; t += h) {
    const double x = std::exp(t);
    s += std::exp(-(n + 1.0) * x + log_pi_w(x)) * x;
  }
  return s * h;
}

struct ThreadsEnv {
  explicit ThreadsEnv(const char* v) { setenv("BHL_THREADS", v, 1); }
  ~ThreadsEnv() { unsetenv("BHL_THREADS"); }
};

}  // namespace

TEST(Weights, StandardMomentsMatchGammaClosedForm) {
  for (double alpha : {-0.5, 0.0, 1.0, 3.0}) {
    const auto mt = compute_moments(RadialWeight::standard(alpha), 400, 1e-12);
    for (std::size_t n = 0; n <= 400; ++n) {
      const double exact = moment_closed_form_standard(alpha, n);
      EXPECT_NEAR(mt[n] / exact, 1.0, 1e-11) << "alpha=" << alpha << " n=" << n;
    }
  }
}

TEST(Weights, ClosedFormSmallCases) {
  EXPECT_DOUBLE_EQ(moment_closed_form_standard(0.0, 0), 1.0);
  EXPECT_NEAR(moment_closed_form_standard(0.0, 3), 0.25, 1e-15);
  EXPECT_NEAR(moment_closed_form_standard(1.0, 1), 2.0 / 6.0, 1e-15);
}

TEST(Weights, ExpLogMomentsMatchTrapezoidOracle) {
  for (auto [a, b] : {std::pair{1.0, 1.0}, std::pair{2.0, 0.5}, std::pair{0.5, 2.0}}) {
    const auto mt = compute_moments(RadialWeight::exp_log(a, b), 2000, 1e-12);
    for (std::size_t n : {0u, 1u, 7u, 50u, 400u, 2000u}) {
      const double oracle = trapezoid_moment(n, [&](double x) {
        return std::log(std::numbers::pi) - a / std::pow(x, b);
      });
      EXPECT_NEAR(mt[n] / oracle, 1.0, 1e-10) << "a=" << a << " b=" << b << " n=" << n;
    }
  }
}

TEST(Weights, LogConvexityHoldsEverywhere) {
  for (const auto& w : {RadialWeight::standard(-0.7), RadialWeight::standard(2.5),
                        RadialWeight::exp_log(1.0, 1.0), RadialWeight::exp_log(3.0, 0.3)}) {
    const auto mt = compute_moments(w, 3000, 1e-12);
    for (std::size_t n = 1; n < mt.n_max(); ++n)
      ASSERT_LE(log_convexity_defect(mt.log_moments(), n), 1e-13) << w.describe() << " n=" << n;
  }
}

TEST(Weights, MomentsAreDecreasing) {
  const auto mt = compute_moments(RadialWeight::exp_log(1.0, 1.0), 500, 1e-12);
  for (std::size_t n = 1; n <= 500; ++n) ASSERT_LT(mt.log_moment(n), mt.log_moment(n - 1));
}

TEST(Weights, ScalingScalesMomentsAndKernel) {
  const auto w = RadialWeight::exp_log(1.0, 2.0);
  const auto a = compute_moments(w, 100, 1e-12);
  const auto b = compute_moments(w.scaled(3.0), 100, 1e-12);
  for (std::size_t n = 0; n <= 100; ++n) EXPECT_NEAR(b[n] / a[n], 3.0, 3e-11);
  EXPECT_NEAR(kernel_norm_sq(b, 0.5) * 3.0 / kernel_norm_sq(a, 0.5), 1.0, 1e-10);
  // tau is invariant under scaling the weight
  EXPECT_NEAR(tau(w.scaled(3.0), b, 0.5) / tau(w, a, 0.5), 1.0, 1e-10);
}

TEST(Weights, CustomProfileMatchesStandardFamily) {
  const auto w = RadialWeight::custom([](double r) { return (1 - r * r) * (1 - r * r); }, true, "sq");
  const auto mt = compute_moments(w, 200, 1e-11);
  for (std::size_t n = 0; n <= 200; n += 13)
    EXPECT_NEAR(mt[n] / (moment_closed_form_standard(2.0, n) * std::numbers::pi / 3.0), 1.0, 1e-9);
}

TEST(Weights, CustomProfileRequiresCertificate) {
  auto flat = [](double) { return 1.0; };
  EXPECT_THROW(RadialWeight::custom(flat, false, "flat"), DomainError);
  EXPECT_NO_THROW(RadialWeight::custom(flat, true, "flat"));
  EXPECT_THROW(RadialWeight::custom([](double r) { return 1.0 / ((1 - r) * (1 - r)); }, true, "bad"),
               DomainError);
  EXPECT_THROW(RadialWeight::custom([](double r) { return r - 0.5; }, true, "neg"), DomainError);
}

TEST(Weights, ParameterValidation) {
  EXPECT_THROW(RadialWeight::standard(-1.0), DomainError);
  EXPECT_THROW(RadialWeight::exp_log(0.0, 1.0), DomainError);
  EXPECT_THROW(RadialWeight::exp_log(1.0, -1.0), DomainError);
  const auto w = RadialWeight::standard(0.0);
  EXPECT_THROW(compute_moments(w, 0, 1e-10), DomainError);
  EXPECT_THROW(compute_moments(w, 10, 1e-2), DomainError);
}

TEST(Weights, DeterministicAcrossThreadCounts) {
  const auto w = RadialWeight::exp_log(1.5, 0.75);
  std::vector<double> one, four;
  {
    ThreadsEnv env("1");
    const auto mt = compute_moments(w, 700, 1e-12);
    one.assign(mt.log_moments().begin(), mt.log_moments().end());
  }
  {
    ThreadsEnv env("4");
    const auto mt = compute_moments(w, 700, 1e-12);
    four.assign(mt.log_moments().begin(), mt.log_moments().end());
  }
  ASSERT_EQ(one.size(), four.size());
  for (std::size_t i = 0; i < one.size(); ++i) ASSERT_EQ(one[i], four[i]) << i;
}

TEST(Kernel, StandardClosedForm) {
  // ||K_r||^2 = (1 - r^2)^{-(2 + alpha)} for the normalised standard weights.
  for (double alpha : {0.0, 1.0, -0.5}) {
    const auto mt = standard_moments_closed_form(alpha, 20000);
    for (double r : {0.0, 0.1, 0.5, 0.9, 0.99}) {
      const double exact = std::pow(1 - r * r, -(2.0 + alpha));
      EXPECT_NEAR(kernel_norm_sq(mt, r) / exact, 1.0, 1e-13) << alpha << " " << r;
    }
  }
}

TEST(Kernel, InsufficientMomentsReportsRequiredSize) {
  const auto mt = standard_moments_closed_form(0.0, 100);
  try {
    (void)kernel_norm_sq(mt, 0.99);
    FAIL() << "expected InsufficientMomentsError";
  } catch (const InsufficientMomentsError& e) {
    EXPECT_GT(e.required_n_max(), 100u);
    const auto bigger = standard_moments_closed_form(0.0, e.required_n_max() + 10);
    EXPECT_NO_THROW((void)kernel_norm_sq(bigger, 0.99));
  }
  EXPECT_THROW((void)kernel_norm_sq(mt, 1.0), DomainError);
  EXPECT_THROW((void)kernel_norm_sq(mt, -0.1), DomainError);
}

TEST(Tau, StandardIsMultipleOfOneMinusRSquared) {
  for (double alpha : {0.0, 1.0, 2.0}) {
    const auto w = RadialWeight::standard(alpha);
    const auto mt = standard_moments_closed_form(alpha, 20000);
    for (double r : {0.0, 0.3, 0.7, 0.95, 0.995}) {
      const double exact = std::sqrt(std::numbers::pi / (alpha + 1)) * (1 - r * r);
      EXPECT_NEAR(tau(w, mt, r) / exact, 1.0, 1e-12);
    }
  }
}

TEST(Tau, ProfileInterpolatesDirectEvaluation) {
  const auto w = RadialWeight::exp_log(1.0, 1.0);
  const auto mt = compute_moments(w, 4000, 1e-12);
  const auto prof = tau_profile(w, mt);
  EXPECT_EQ(prof.provenance(), TauProfile::Provenance::FromWeight);
  EXPECT_GT(prof.r_limit(), 0.98);  // 4000 moments reach r ~ 0.984
  EXPECT_LE(prof.interpolation_error(), 1e-7);
  for (double r = 0.0; r < prof.r_limit(); r += 0.00731)
    EXPECT_NEAR(prof(r) / tau(w, mt, r), 1.0, 2e-7) << r;
  EXPECT_THROW((void)prof(0.5 * (1 + prof.r_limit())), DomainError);
}

TEST(Tau, UserSuppliedProfile) {
  const auto p = TauProfile::user_supplied([](double g) { return g; }, "gap");
  EXPECT_EQ(p.provenance(), TauProfile::Provenance::UserSupplied);
  EXPECT_DOUBLE_EQ(p(0.75), 0.25);
  EXPECT_THROW(TauProfile::user_supplied([](double g) { return std::sqrt(g); }, "sqrt"), DomainError);
}
