#pragma once

// CSV output: header row, %.17g numbers, '\n' line ends and a trailing
// "# key=value" footer. Files are written to a temporary and renamed.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "bhl/error.hpp"

namespace bhl {

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_hash(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

class CsvTable {
 public:
  using Cell = std::variant<double, long long, std::string>;

  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<Cell> row) {
    if (row.size() != header_.size()) throw DomainError("csv row width does not match the header");
    rows_.push_back(std::move(row));
  }

  void add_footer(std::string key, std::string value) { footer_.emplace_back(std::move(key), std::move(value)); }
  void add_footer(std::string key, double value) { add_footer(std::move(key), format_number(value)); }

  std::size_t rows() const { return rows_.size(); }

  std::string render() const {
    std::string out;
    for (std::size_t i = 0; i < header_.size(); ++i) out += (i ? "," : "") + header_[i];
    out += '\n';
    for (const auto& row : rows_) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out += ',';
        out += cell(row[i]);
      }
      out += '\n';
    }
    for (const auto& [k, v] : footer_) out += "# " + k + "=" + v + "\n";
    return out;
  }

  /// Temp file in the target directory, then rename over the destination.
  void write_atomic(const std::string& path) const {
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path tmp = target.string() + ".tmp";
    {
      std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
      if (!f) throw Error("cannot write '" + tmp.string() + "'");
      const auto text = render();
      f.write(text.data(), static_cast<std::streamsize>(text.size()));
      if (!f) throw Error("write to '" + tmp.string() + "' failed");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
      fs::remove(tmp, ec);
      throw Error("cannot rename output into '" + path + "'");
    }
  }

 private:
  static std::string cell(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
    if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
    const auto& s = std::get<std::string>(c);
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  }

  std::vector<std::string> header_;
  std::vector<std::vector<Cell>> rows_;
  std::vector<std::pair<std::string, std::string>> footer_;
};

}  // namespace bhl
