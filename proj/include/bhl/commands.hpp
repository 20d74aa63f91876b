#pragma once

// Config-driven commands behind the bhl tool. Each returns a CSV table, a
// short human summary and an exit code; writing is left to the caller.

#include <cmath>
#include <string>
#include <vector>

#include "bhl/acceptance.hpp"
#include "bhl/asymptotics.hpp"
#include "bhl/config.hpp"
#include "bhl/csv.hpp"
#include "bhl/hankel.hpp"
#include "bhl/rearrangement.hpp"
#include "bhl/spectrum.hpp"
#include "bhl/weights.hpp"

namespace bhl {

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitUsage = 2 };

struct CommandOutput {
  CsvTable table;
  std::string summary;
  int exit_code = kExitOk;
};

namespace command_detail {

inline RadialWeight weight_of(const ExperimentConfig& c) {
  return c.weight == ExperimentConfig::WeightKind::Standard ? RadialWeight::standard(c.alpha)
                                                            : RadialWeight::exp_log(c.alpha, c.beta);
}

inline PolynomialSymbol polynomial_of(const ExperimentConfig& c) {
  if (c.symbol != ExperimentConfig::SymbolKind::Polynomial)
    throw ConfigError("this command needs a polynomial symbol", 0, "symbol.kind");
  return PolynomialSymbol(c.coefficients);
}

inline SymbolDerivative derivative_of(const ExperimentConfig& c) {
  if (c.symbol == ExperimentConfig::SymbolKind::Critical) return SymbolDerivative::critical_exponent(c.symbol_gamma);
  return SymbolDerivative::polynomial(PolynomialSymbol(c.coefficients));
}

/// Hardy exponent p of the weight's law (1 for the standard family).
inline double law_exponent_p(const ExperimentConfig& c) {
  return c.weight == ExperimentConfig::WeightKind::Standard ? 1.0 : explog_hardy_exponent(c.beta);
}

inline AsymptoticLaw base_law(const ExperimentConfig& c) {
  return c.weight == ExperimentConfig::WeightKind::Standard ? predict_standard(c.alpha)
                                                            : predict_explog(c.alpha, c.beta);
}

/// Moments up to at least n_max, extended when a consumer asks for more.
template <class Use>
auto with_moments(const ExperimentConfig& c, std::size_t n_min, Use&& use) {
  std::size_t n = std::max(c.n_max, n_min);
  for (int attempt = 0;; ++attempt) {
    const auto mt = compute_moments(weight_of(c), n, c.rel_tol);
    try {
      return use(mt);
    } catch (const InsufficientMomentsError& e) {
      if (attempt >= 2 || e.required_n_max() <= n) throw;
      n = e.required_n_max();
    }
  }
}

inline void common_footer(CsvTable& t, const ExperimentConfig& c, const std::string& command,
                          bool uses_weight = true) {
  t.add_footer("command", command);
  t.add_footer("config_hash", format_hash(c.hash));
  if (uses_weight) {
    t.add_footer("weight", weight_of(c).describe());
    t.add_footer("moment_rel_tol", c.rel_tol);
  }
}

inline TauProfile tau_of(const ExperimentConfig& c) {
  if (c.tau == ExperimentConfig::TauKind::Critical) {
    const double a = c.tau_alpha;
    return TauProfile::user_supplied([a](double g) { return g / std::pow(1.0 - std::log(g), a); },
                                     "g/(1+log(1/g))^" + format_number(a));
  }
  const auto mt = compute_moments(weight_of(c), c.n_max, c.rel_tol);
  return tau_profile(mt.weight(), mt);
}

}  // namespace command_detail

/// n, m[n], m[n+1]/m[n] for n = 0..n_max.
inline CommandOutput cmd_moments(const ExperimentConfig& c) {
  using namespace command_detail;
  const auto mt = compute_moments(weight_of(c), c.n_max + 1, c.rel_tol);
  CommandOutput out{CsvTable({"n", "moment", "ratio"}), "", kExitOk};
  const auto lr = mt.log_ratios();
  for (std::size_t n = 0; n <= c.n_max; ++n)
    out.table.add_row({static_cast<long long>(n), mt[n], std::exp(lr[n])});
  common_footer(out.table, c, "moments");
  out.table.add_footer("convention", MomentTable::kConvention);
  out.table.add_footer("estimated_rel_error", mt.rel_error());
  out.table.add_footer("converged", "true");
  out.summary = "computed " + std::to_string(c.n_max + 1) + " moments of " + mt.weight().describe();
  return out;
}

/// n, s_n, law prediction and their ratio over the verified half of the section.
inline CommandOutput cmd_spectrum(const ExperimentConfig& c) {
  using namespace command_detail;
  const auto phi = polynomial_of(c);
  const auto spec = with_moments(c, 2 * c.section + 2 * phi.degree() + 2, [&](const MomentTable& mt) {
    return hankel_spectrum(mt, phi, c.section, c.doubling_tol, c.eigen_tol);
  });
  const double p = law_exponent_p(c);
  const auto law = predict_symbol(base_law(c), SymbolDerivative::polynomial(phi), p);

  CommandOutput out{CsvTable({"n", "s_n", "predicted", "ratio"}), "", kExitOk};
  for (std::size_t n = 1; n <= spec.verified; ++n) {
    const double pred = law(static_cast<double>(n));
    out.table.add_row({static_cast<long long>(n), spec.s(n), pred, pred > 0.0 ? spec.s(n) / pred : NAN});
  }
  common_footer(out.table, c, "spectrum");
  out.table.add_footer("symbol", phi.describe());
  out.table.add_footer("section_n", format_number(static_cast<double>(c.section)));
  out.table.add_footer("doubling_tol", c.doubling_tol);
  out.table.add_footer("eigen_tol", c.eigen_tol);
  out.table.add_footer("max_doubling_deviation", spec.max_doubling_deviation);
  out.table.add_footer("law", law.description);
  out.table.add_footer("law_constant", law.constant());
  out.table.add_footer("law_exponent", law.exponent);
  out.table.add_footer("converged", spec.converged ? "true" : "false");
  if (spec.first_diverging)
    out.table.add_footer("first_diverging", format_number(static_cast<double>(*spec.first_diverging)));

  std::string fit;
  if (c.window_first && spec.converged) {
    const auto f = fit_power_law(spec, c.window_first, c.window_last);
    out.table.add_footer("fit_window", std::to_string(c.window_first) + "-" + std::to_string(c.window_last));
    out.table.add_footer("fit_exponent", f.exponent);
    out.table.add_footer("fit_gamma", f.gamma);
    out.table.add_footer("fit_residual", f.residual);
    fit = "; fitted exponent " + format_number(f.exponent);
  }
  if (!spec.converged) {
    out.exit_code = kExitFailure;
    out.summary = "doubling test failed: first diverging index n = " + std::to_string(*spec.first_diverging);
  } else {
    out.summary = "spectrum of " + phi.describe() + " with N = " + std::to_string(c.section) + ", " +
                  std::to_string(spec.verified) + " values verified" + fit;
  }
  return out;
}

/// t, R(t) with its error estimate and r_max sensitivity, and R+ at R(t).
inline CommandOutput cmd_rearrange(const ExperimentConfig& c) {
  using namespace command_detail;
  const auto d = derivative_of(c);
  const auto tau = tau_of(c);
  const bool from_weight = c.tau == ExperimentConfig::TauKind::FromWeight;
  if (c.r_max >= tau.r_limit())
    throw InsufficientMomentsError("rearrange: tau profile stops at r = " + format_number(tau.r_limit()) +
                                       " below r_max",
                                   2 * c.n_max);

  std::vector<double> ts(c.t_count);
  for (std::size_t i = 0; i < c.t_count; ++i)
    ts[i] = c.t_count == 1 ? c.t_min
                           : std::exp(std::log(c.t_min) + (std::log(c.t_max) - std::log(c.t_min)) *
                                                              static_cast<double>(i) /
                                                              static_cast<double>(c.t_count - 1));
  std::vector<LevelMeasure> lm(ts.size());
  std::vector<double> plus(ts.size());
  parallel_for(ts.size(), [&](std::size_t i) {
    lm[i] = level_measure(tau, d, ts[i], c.r_max);
    plus[i] = lm[i].value > 0.0 ? rearrangement_plus(tau, d, lm[i].value, c.r_max) : NAN;
  }, 1);

  CommandOutput out{CsvTable({"t", "level_measure", "error", "r_max_delta", "rearrangement_plus"}), "", kExitOk};
  for (std::size_t i = 0; i < ts.size(); ++i)
    out.table.add_row({ts[i], lm[i].value, lm[i].error, lm[i].r_max_delta, plus[i]});

  const auto bn = bloch_norm(tau, d, c.r_max);
  const auto lat = build_lattice(tau, c.delta, c.lattice_r_max);
  common_footer(out.table, c, "rearrange", from_weight);
  out.table.add_footer("tau", tau.name());
  out.table.add_footer("symbol_derivative", d.describe());
  out.table.add_footer("r_max", c.r_max);
  out.table.add_footer("level_rel_tol", LevelOptions{}.rel_tol);
  out.table.add_footer("level_refine_tol", LevelOptions{}.refine_tol);
  out.table.add_footer("bloch_norm", bn.value);
  out.table.add_footer("lattice_delta", c.delta);
  out.table.add_footer("lattice_r_max", c.lattice_r_max);
  out.table.add_footer("lattice_centers", format_number(static_cast<double>(lat.centers.size())));
  out.table.add_footer("lattice_comparability", lat.comparability);
  out.table.add_footer("lattice_multiplicity", format_number(static_cast<double>(lat.multiplicity)));
  out.table.add_footer("besov_sum_p1", besov_sum(lat, tau, d, 1.0));
  out.table.add_footer("converged", "true");
  out.summary = "level measure at " + std::to_string(ts.size()) + " levels; Bloch norm " + format_number(bn.value);
  return out;
}

/// One row per selected acceptance criterion; fails if any criterion fails.
inline CommandOutput cmd_verify(const std::string& suite, std::uint64_t config_hash = 0) {
  const auto selected = select_criteria(suite);
  CommandOutput out{CsvTable({"id", "criterion", "suite", "result", "detail"}), "", kExitOk};
  for (const auto* entry : selected) {
    const auto r = run_criterion(*entry);
    out.table.add_row({static_cast<long long>(r.id), r.name, std::string(entry->suite),
                       std::string(r.passed ? "PASS" : "FAIL"), r.detail});
    char buf[64];
    std::snprintf(buf, sizeof buf, " (%.1f s)", r.seconds);
    out.summary += std::string(r.passed ? "PASS" : "FAIL") + " [" + std::to_string(r.id) + "] " + r.name + buf +
                   ": " + r.detail + "\n";
    if (!r.passed) out.exit_code = kExitFailure;
  }
  out.table.add_footer("command", "verify");
  out.table.add_footer("suite", suite);
  out.table.add_footer("config_hash", format_hash(config_hash));
  out.table.add_footer("all_passed", out.exit_code == kExitOk ? "true" : "false");
  return out;
}

/// Summary of one experiment: identities, fitted law against the prediction,
/// and the norms that set the constants.
inline CommandOutput cmd_report(const ExperimentConfig& c) {
  using namespace command_detail;
  const auto phi = polynomial_of(c);
  CommandOutput out{CsvTable({"quantity", "value", "reference"}), "", kExitOk};
  with_moments(c, 2 * c.section + 2 * phi.degree() + 2, [&](const MomentTable& mt) {
    const std::size_t N = c.section;
    const auto hz2 = hz_squared_sequence(mt, N);
    double sum = 0.0;
    for (double v : hz2) sum += v;
    const double ratio = std::exp(mt.log_ratios()[N]);
    out.table.add_row({std::string("trace_sum"), sum, ratio});
    out.table.add_row({std::string("moment_ratio_at_N"), ratio, 1.0});

    const auto spec = hankel_spectrum(mt, phi, N, c.doubling_tol, c.eigen_tol);
    const double p = law_exponent_p(c);
    const auto d = SymbolDerivative::polynomial(phi);
    const auto law = predict_symbol(base_law(c), d, p);
    out.table.add_row({std::string("hardy_norm"), hardy_norm(d, p), NAN});
    out.table.add_row({std::string("s_1"), spec.s(1), NAN});
    out.table.add_row({std::string("schatten_norm_p"), schatten_norm(spec, p).value, NAN});
    const std::size_t first = c.window_first ? c.window_first : std::max<std::size_t>(1, spec.verified / 10);
    const std::size_t last = c.window_first ? c.window_last : spec.verified;
    if (spec.converged && last >= first + 9) {
      const auto f = fit_power_law(spec, first, last);
      out.table.add_row({std::string("fit_exponent"), f.exponent, law.exponent});
      out.table.add_row({std::string("fit_gamma"), f.gamma, law.constant()});
      out.table.add_row({std::string("fit_residual"), f.residual, 0.0});
      out.summary = "fitted exponent " + format_number(f.exponent) + " against " + format_number(law.exponent);
    }
    common_footer(out.table, c, "report");
    out.table.add_footer("symbol", phi.describe());
    out.table.add_footer("section_n", format_number(static_cast<double>(N)));
    out.table.add_footer("fit_window", std::to_string(first) + "-" + std::to_string(last));
    out.table.add_footer("doubling_tol", c.doubling_tol);
    out.table.add_footer("converged", spec.converged ? "true" : "false");
    if (!spec.converged) {
      out.exit_code = kExitFailure;
      out.summary = "doubling test failed: first diverging index n = " + std::to_string(*spec.first_diverging);
    }
    return 0;
  });
  return out;
}

}  // namespace bhl
