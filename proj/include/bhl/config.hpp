#pragma once

// Experiment configuration: flat INI text, one level of [sections].
//
//   [weight]    kind = standard | explog, alpha, beta
//   [tau]       kind = weight | critical, alpha   (critical: (1-r)/log^alpha(e/(1-r)))
//   [symbol]    coefficients = c1, c2, ...  (phi = c1 z + c2 z^2 + ..., complex as 1+2i)
//               or kind = critical, gamma
//   [moments]   n_max, rel_tol
//   [spectrum]  N, doubling_tol, eigen_tol, window_first, window_last
//   [rearrange] r_max, t_min, t_max, t_count, delta, lattice_r_max
//   [output]    path

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bhl/error.hpp"

namespace bhl {

namespace config_detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace config_detail

/// Parsed key/value text with line numbers kept for diagnostics.
class IniDocument {
 public:
  struct Entry {
    std::string value;
    std::size_t line = 0;
  };

  static IniDocument parse(const std::string& text) {
    using config_detail::trim;
    IniDocument doc;
    std::istringstream in(text);
    std::string raw, section;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      const auto hash = raw.find_first_of("#;");
      const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']' || line.size() < 3) throw ConfigError("malformed section header", line_no, line);
        section = config_detail::lower(trim(line.substr(1, line.size() - 2)));
        if (doc.sections_.count(section)) throw ConfigError("duplicate section", line_no, section);
        doc.sections_[section];
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError("expected key = value", line_no, line);
      const std::string key = config_detail::lower(trim(line.substr(0, eq)));
      const std::string value = trim(line.substr(eq + 1));
      if (section.empty()) throw ConfigError("key outside any section", line_no, key);
      if (key.empty()) throw ConfigError("empty key", line_no, section);
      auto& sec = doc.sections_[section];
      if (sec.count(key)) throw ConfigError("duplicate key", line_no, section + "." + key);
      sec[key] = Entry{value, line_no};
    }
    return doc;
  }

  static IniDocument load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open config file '" + path + "'", 0, "");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
  }

  bool has_section(const std::string& s) const { return sections_.count(s) > 0; }

  const Entry* find(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
  }

  /// Every key must appear in `allowed` for its section (catches typos).
  void check_keys(const std::map<std::string, std::vector<std::string>>& allowed) const {
    for (const auto& [sec, keys] : sections_) {
      auto a = allowed.find(sec);
      if (a == allowed.end()) {
        const std::size_t line = keys.empty() ? 0 : keys.begin()->second.line;
        throw ConfigError("unknown section", line, sec);
      }
      for (const auto& [k, e] : keys)
        if (std::find(a->second.begin(), a->second.end(), k) == a->second.end())
          throw ConfigError("unknown key", e.line, sec + "." + k);
    }
  }

  /// Sorted key=value lines; the config hash is taken over this text so
  /// comments, ordering and spacing do not matter.
  std::string canonical() const {
    std::string out;
    for (const auto& [sec, keys] : sections_)
      for (const auto& [k, e] : keys) out += sec + "." + k + "=" + e.value + "\n";
    return out;
  }

 private:
  std::map<std::string, std::map<std::string, Entry>> sections_;
};

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

struct ExperimentConfig {
  enum class WeightKind { Standard, ExpLog };
  enum class TauKind { FromWeight, Critical };
  enum class SymbolKind { Polynomial, Critical };

  WeightKind weight = WeightKind::Standard;
  double alpha = 0.0;
  double beta = 1.0;

  TauKind tau = TauKind::FromWeight;
  double tau_alpha = 1.0;

  SymbolKind symbol = SymbolKind::Polynomial;
  std::vector<std::complex<double>> coefficients{1.0};  // phi = z by default
  double symbol_gamma = 1.5;

  std::size_t n_max = 500;
  double rel_tol = 1e-12;

  std::size_t section = 1000;
  double doubling_tol = 1e-6;
  double eigen_tol = 1e-10;
  std::size_t window_first = 0;  // 0: derived from the section size
  std::size_t window_last = 0;

  double r_max = 0.99;
  double t_min = 0.05;
  double t_max = 1.0;
  std::size_t t_count = 20;
  double delta = 0.1;
  double lattice_r_max = 0.0;  // 0: min(r_max, 0.99)

  std::string output;
  std::uint64_t hash = 0;
};

namespace config_detail {

inline double parse_double(const IniDocument::Entry& e, const std::string& field) {
  double v = 0.0;
  const char* b = e.value.data();
  const char* end = b + e.value.size();
  auto [p, ec] = std::from_chars(b, end, v);
  if (ec != std::errc() || p != end || !std::isfinite(v))
    throw ConfigError("expected a finite number, got '" + e.value + "'", e.line, field);
  return v;
}

inline std::size_t parse_size(const IniDocument::Entry& e, const std::string& field) {
  unsigned long long v = 0;
  const char* b = e.value.data();
  const char* end = b + e.value.size();
  auto [p, ec] = std::from_chars(b, end, v);
  if (ec != std::errc() || p != end) throw ConfigError("expected a nonnegative integer, got '" + e.value + "'", e.line, field);
  return static_cast<std::size_t>(v);
}

/// "3", "-0.5i", "1+2i", "1.5e-3-2i"
inline std::complex<double> parse_complex(const std::string& tok, std::size_t line, const std::string& field) {
  const std::string s = trim(tok);
  auto num = [&](const std::string& part) {
    double v = 0.0;
    if (part == "+" || part.empty()) return 1.0;
    if (part == "-") return -1.0;
    const char* b = part.data();
    const char* e = b + part.size();
    if (*b == '+') ++b;
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e) throw ConfigError("bad coefficient '" + tok + "'", line, field);
    return v;
  };
  if (s.empty()) throw ConfigError("empty coefficient", line, field);
  if (s.back() != 'i') return {num(s), 0.0};
  // split at the last sign that is not part of an exponent
  std::size_t split = std::string::npos;
  for (std::size_t i = s.size() - 1; i-- > 0;)
    if ((s[i] == '+' || s[i] == '-') && i > 0 && s[i - 1] != 'e' && s[i - 1] != 'E') {
      split = i;
      break;
    }
  if (split == std::string::npos) return {0.0, num(s.substr(0, s.size() - 1))};
  return {num(s.substr(0, split)), num(s.substr(split, s.size() - 1 - split))};
}

}  // namespace config_detail

inline ExperimentConfig parse_config(const IniDocument& doc) {
  using namespace config_detail;
  doc.check_keys({{"weight", {"kind", "alpha", "beta"}},
                  {"tau", {"kind", "alpha"}},
                  {"symbol", {"kind", "coefficients", "gamma"}},
                  {"moments", {"n_max", "rel_tol"}},
                  {"spectrum", {"n", "doubling_tol", "eigen_tol", "window_first", "window_last"}},
                  {"rearrange", {"r_max", "t_min", "t_max", "t_count", "delta", "lattice_r_max"}},
                  {"output", {"path"}}});
  ExperimentConfig c;
  auto num = [&](const char* sec, const char* key, double& out) {
    if (const auto* e = doc.find(sec, key)) out = parse_double(*e, std::string(sec) + "." + key);
  };
  auto size = [&](const char* sec, const char* key, std::size_t& out) {
    if (const auto* e = doc.find(sec, key)) out = parse_size(*e, std::string(sec) + "." + key);
  };
  auto require = [&](bool ok, const char* sec, const char* key, const std::string& what) {
    if (ok) return;
    const auto* e = doc.find(sec, key);
    throw ConfigError(what, e ? e->line : 0, std::string(sec) + "." + key);
  };

  if (const auto* e = doc.find("weight", "kind")) {
    const auto k = lower(e->value);
    if (k == "standard") c.weight = ExperimentConfig::WeightKind::Standard;
    else if (k == "explog") c.weight = ExperimentConfig::WeightKind::ExpLog;
    else throw ConfigError("weight kind must be standard or explog", e->line, "weight.kind");
  }
  num("weight", "alpha", c.alpha);
  num("weight", "beta", c.beta);
  if (c.weight == ExperimentConfig::WeightKind::Standard) {
    require(c.alpha > -1.0, "weight", "alpha", "standard weight needs alpha > -1");
  } else {
    require(c.alpha > 0.0, "weight", "alpha", "explog weight needs alpha > 0");
    require(c.beta > 0.0, "weight", "beta", "explog weight needs beta > 0");
  }

  if (const auto* e = doc.find("tau", "kind")) {
    const auto k = lower(e->value);
    if (k == "weight") c.tau = ExperimentConfig::TauKind::FromWeight;
    else if (k == "critical") c.tau = ExperimentConfig::TauKind::Critical;
    else throw ConfigError("tau kind must be weight or critical", e->line, "tau.kind");
  }
  num("tau", "alpha", c.tau_alpha);
  require(c.tau_alpha >= 0.0, "tau", "alpha", "tau alpha must be >= 0");

  if (const auto* e = doc.find("symbol", "kind")) {
    const auto k = lower(e->value);
    if (k == "polynomial") c.symbol = ExperimentConfig::SymbolKind::Polynomial;
    else if (k == "critical") c.symbol = ExperimentConfig::SymbolKind::Critical;
    else throw ConfigError("symbol kind must be polynomial or critical", e->line, "symbol.kind");
  }
  if (const auto* e = doc.find("symbol", "coefficients")) {
    if (c.symbol != ExperimentConfig::SymbolKind::Polynomial)
      throw ConfigError("coefficients apply to polynomial symbols only", e->line, "symbol.coefficients");
    c.coefficients.clear();
    std::stringstream ss(e->value);
    std::string tok;
    while (std::getline(ss, tok, ',')) c.coefficients.push_back(parse_complex(tok, e->line, "symbol.coefficients"));
    if (c.coefficients.empty()) throw ConfigError("no coefficients", e->line, "symbol.coefficients");
    if (c.coefficients.size() > 64) throw ConfigError("at most 64 coefficients", e->line, "symbol.coefficients");
  }
  num("symbol", "gamma", c.symbol_gamma);
  require(c.symbol_gamma > 0.0, "symbol", "gamma", "critical symbol needs gamma > 0");

  size("moments", "n_max", c.n_max);
  num("moments", "rel_tol", c.rel_tol);
  require(c.n_max >= 1 && c.n_max <= 10000000, "moments", "n_max", "n_max must lie in [1, 1e7]");
  require(c.rel_tol > 1e-14 && c.rel_tol < 1e-3, "moments", "rel_tol", "rel_tol must lie in (1e-14, 1e-3)");

  size("spectrum", "n", c.section);
  num("spectrum", "doubling_tol", c.doubling_tol);
  num("spectrum", "eigen_tol", c.eigen_tol);
  size("spectrum", "window_first", c.window_first);
  size("spectrum", "window_last", c.window_last);
  require(c.section >= 2 && c.section <= 2000000, "spectrum", "n", "N must lie in [2, 2e6]");
  require(c.doubling_tol > 0.0 && c.doubling_tol < 1.0, "spectrum", "doubling_tol", "doubling_tol must lie in (0, 1)");
  require(c.eigen_tol > 0.0 && c.eigen_tol < 1.0, "spectrum", "eigen_tol", "eigen_tol must lie in (0, 1)");
  if (c.window_first || c.window_last) {
    require(c.window_first >= 1 && c.window_last >= c.window_first + 9, "spectrum", "window_last",
            "window needs 1 <= first and at least 10 points");
    require(c.window_last <= c.section / 2, "spectrum", "window_last", "window must lie in the verified half (N/2)");
  }

  num("rearrange", "r_max", c.r_max);
  num("rearrange", "t_min", c.t_min);
  num("rearrange", "t_max", c.t_max);
  size("rearrange", "t_count", c.t_count);
  num("rearrange", "delta", c.delta);
  require(c.r_max > 0.0 && c.r_max < 1.0, "rearrange", "r_max", "r_max must lie in (0, 1)");
  require(c.t_min > 0.0, "rearrange", "t_min", "t_min must be positive");
  require(c.t_max >= c.t_min, "rearrange", "t_max", "t_max must be >= t_min");
  require(c.t_count >= 1 && c.t_count <= 10000, "rearrange", "t_count", "t_count must lie in [1, 10000]");
  require(c.delta > 0.0 && c.delta < 1.0, "rearrange", "delta", "delta must lie in (0, 1)");
  num("rearrange", "lattice_r_max", c.lattice_r_max);
  if (doc.find("rearrange", "lattice_r_max"))
    require(c.lattice_r_max > 0.0 && c.lattice_r_max <= c.r_max, "rearrange", "lattice_r_max",
            "lattice_r_max must lie in (0, r_max]");
  else
    c.lattice_r_max = std::min(c.r_max, 0.99);

  if (const auto* e = doc.find("output", "path")) c.output = e->value;
  c.hash = fnv1a(doc.canonical());
  return c;
}

inline ExperimentConfig load_config(const std::string& path) { return parse_config(IniDocument::load(path)); }

}  // namespace bhl
