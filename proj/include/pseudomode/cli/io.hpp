#pragma once

// Deterministic file emission: CSV tables, JSON reports and gnuplot scripts.

#include <json.hpp>

#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "pseudomode/errors.hpp"

namespace pseudomode::cli {

/// Shortest round-trip decimal form.
inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path root) : root_(std::move(root)) {
    std::error_code ec;
    std::filesystem::create_directories(root_, ec);
    if (ec) throw ConfigError("cannot create output directory '" + root_.string() + "': " + ec.message());
  }

  std::filesystem::path path(const std::string& name) const { return root_ / name; }

  std::ofstream open(const std::string& name) const {
    std::ofstream out(path(name), std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path(name).string() + "'");
    return out;
  }

  void write_json(const std::string& name, const nlohmann::json& j) const {
    auto out = open(name);
    out << j.dump(2) << '\n';
  }

  const std::filesystem::path& root() const noexcept { return root_; }

 private:
  std::filesystem::path root_;
};

class CsvWriter {
 public:
  CsvWriter(const OutputDir& dir, const std::string& name, const std::vector<std::string>& header)
      : out_(dir.open(name)) {
    for (std::size_t k = 0; k < header.size(); ++k) out_ << (k ? "," : "") << header[k];
    out_ << '\n';
  }

  /// File with no header, left empty until rows arrive.
  CsvWriter(const OutputDir& dir, const std::string& name) : out_(dir.open(name)) {}

  CsvWriter& cell(double v) { return raw(format_number(v)); }
  CsvWriter& cell(int v) { return raw(std::to_string(v)); }
  CsvWriter& cell(const std::string& v) { return raw(v); }
  CsvWriter& cell(std::complex<double> v) { return cell(v.real()).cell(v.imag()); }

  void end_row() {
    out_ << '\n';
    first_ = true;
  }

 private:
  CsvWriter& raw(const std::string& s) {
    out_ << (first_ ? "" : ",") << s;
    first_ = false;
    return *this;
  }

  std::ofstream out_;
  bool first_ = true;
};

inline nlohmann::json complex_json(std::complex<double> z) { return nlohmann::json::array({z.real(), z.imag()}); }

/// Finite value or the string "inf"/"nan" for JSON reports.
inline nlohmann::json number_json(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

}  // namespace pseudomode::cli
