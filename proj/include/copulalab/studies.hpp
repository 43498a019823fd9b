#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "copulalab/copula.hpp"
#include "copulalab/io.hpp"
#include "copulalab/kernels.hpp"

namespace copulalab {

enum class StudyKind {
  Convergence,
  DistributionComparison,
  Lil,
  Smoothing,
  RankStatNormality
};

std::string to_string(StudyKind k);
StudyKind study_kind_from_string(const std::string& name);

struct ModelSpec {
  std::string family = "independence";
  int dimension = 2;
  std::vector<double> params;
  CopulaModel build() const;
};

struct KernelSpec {
  std::string shape = "quartic";
  int order = 2;
  std::string h_rule = "default";  // "default" or "fixed"
  double h_fixed = 0.0;
  int quad_nodes = 32;
  Kernel build() const;
  double bandwidth_for(std::size_t n, int d) const;
};

struct StudyConfig {
  StudyKind kind = StudyKind::Convergence;
  ModelSpec model;
  int grid_resolution = 21;
  std::vector<std::size_t> n_ladder;
  std::size_t replicates = 1;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::size_t meta_replicates = 1;      // distribution comparison
  std::size_t field_replicates = 0;     // 0: same as replicates
  KernelSpec kernel;                    // smoothing
  std::string score = "spearman_pair";  // rank-stat normality
  std::string out_dir;

  void validate() const;  // throws ConfigError
  static StudyConfig from_file(const std::filesystem::path& path);
  static StudyConfig from_ini(const IniConfig& ini);
  nlohmann::json echo() const;
};

struct StudyRecord {
  std::size_t n = 0;
  std::size_t replicate = 0;
  std::map<std::string, double> stats;
};

struct SummaryRow {
  std::size_t n = 0;
  std::map<std::string, double> median;
  std::map<std::string, double> mad;
};

struct StudyResult {
  nlohmann::json config_echo;
  std::vector<StudyRecord> records;
  std::vector<SummaryRow> summaries;
  std::map<std::string, double> scalars;
  std::map<std::string, std::vector<double>> tables;
  std::string version;
  double wall_ms = 0.0;

  nlohmann::json payload_json() const;  // deterministic, excludes wall time
  nlohmann::json full_json() const;
  static StudyResult from_json(const nlohmann::json& j);
  bool same_payload(const StudyResult& other) const;
};

StudyResult run_study(const StudyConfig& cfg);
StudyResult run_convergence(const StudyConfig& cfg);
StudyResult run_distribution_comparison(const StudyConfig& cfg);
StudyResult run_lil(const StudyConfig& cfg);
StudyResult run_smoothing(const StudyConfig& cfg);
StudyResult run_rankstat_normality(const StudyConfig& cfg);

// Exact two-sample Kolmogorov-Smirnov statistic via a merged sort walk.
double two_sample_ks(std::vector<double> a, std::vector<double> b);

// Anderson-Darling statistic against N(0,1) after standardizing by the
// sample mean and variance (finite-n adjusted).
double anderson_darling_normal(std::vector<double> x);

enum class ReportFormat { Csv, Json, Svg };
std::filesystem::path emit_report(const StudyResult& result, ReportFormat format,
                                  const std::filesystem::path& out_dir,
                                  const std::string& stem = "study");

double median_of(std::vector<double> v);
double mad_of(const std::vector<double>& v);

}  // namespace copulalab
