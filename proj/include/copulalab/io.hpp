#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "copulalab/sample.hpp"

namespace copulalab {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// CSV with one observation per row, d numeric columns, optional header row.
Sample read_csv(const std::filesystem::path& path,
                TiePolicy ties = TiePolicy::Reject,
                std::uint64_t jitter_seed = 1);
void write_csv(const std::filesystem::path& path, const Sample& s);

// Flat key-value configuration with [section] headers, '#' comments.
class IniConfig {
 public:
  static IniConfig parse_file(const std::filesystem::path& path);
  static IniConfig parse_string(const std::string& text);

  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key) const;
  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key) const;
  long long get_int(const std::string& section, const std::string& key) const;
  std::vector<double> get_list(const std::string& section,
                               const std::string& key) const;

 private:
  std::map<std::string, std::map<std::string, std::string>> values_;
};

// Minimal self-contained SVG charts (well-formed XML, single root).
struct SvgSeries {
  std::string label;
  std::vector<double> x, y;
};
std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label,
                           const std::vector<SvgSeries>& series,
                           bool log_log = false);
std::string svg_qq_plot(const std::string& title, std::vector<double> a,
                        std::vector<double> b);

}  // namespace copulalab
