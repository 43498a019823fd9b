#include "copulalab/studies.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "copulalab/empirical.hpp"
#include "copulalab/fields.hpp"
#include "copulalab/normal.hpp"
#include "copulalab/parallel.hpp"
#include "copulalab/rankstats.hpp"
#include "copulalab/rng.hpp"
#include "copulalab/version.hpp"

using nlohmann::json;

namespace copulalab {

namespace {

// Seed-stream tags keep the random inputs of distinct study phases disjoint.
enum : std::uint64_t {
  kStreamSample = 0xA1,
  kStreamField = 0xB2,
  kStreamLil = 0xC3
};

void parallel_for_checked(std::size_t count,
                          const std::function<void(std::size_t)>& fn) {
  std::exception_ptr err;
  std::mutex m;
  parallel_for(count, [&](std::size_t i) {
    try {
      fn(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(m);
      if (!err) err = std::current_exception();
    }
  });
  if (err) std::rethrow_exception(err);
}

std::vector<double> grid_cdf_values(const CopulaModel& model, const Grid& g) {
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = model.cdf(g.point(i));
  return out;
}

double sup_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::fmax(m, std::fabs(a[i] - b[i]));
  return m;
}

struct SlopeFit {
  double slope = 0.0;
  double stderr_ = 0.0;
  bool defined = false;
};

SlopeFit fit_loglog(const std::vector<double>& n_values,
                    const std::vector<double>& medians) {
  SlopeFit fit;
  const std::size_t k = n_values.size();
  if (k < 2) return fit;
  std::vector<double> x(k), y(k);
  for (std::size_t i = 0; i < k; ++i) {
    if (!(medians[i] > 0.0)) return fit;
    x[i] = std::log(n_values[i]);
    y[i] = std::log(medians[i]);
  }
  const double xbar = std::accumulate(x.begin(), x.end(), 0.0) / k;
  const double ybar = std::accumulate(y.begin(), y.end(), 0.0) / k;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (x[i] - xbar) * (x[i] - xbar);
    sxy += (x[i] - xbar) * (y[i] - ybar);
  }
  fit.slope = sxy / sxx;
  fit.defined = true;
  if (k > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double fitv = ybar + fit.slope * (x[i] - xbar);
      rss += (y[i] - fitv) * (y[i] - fitv);
    }
    fit.stderr_ = std::sqrt(rss / (k - 2) / sxx);
  }
  return fit;
}

std::vector<double> collect(const std::vector<StudyRecord>& records,
                            std::size_t n, const std::string& key) {
  std::vector<double> out;
  for (const auto& r : records)
    if (r.n == n && r.stats.count(key)) out.push_back(r.stats.at(key));
  return out;
}

void summarize(StudyResult& result, const std::vector<std::size_t>& ladder) {
  for (std::size_t n : ladder) {
    SummaryRow row;
    row.n = n;
    std::vector<std::string> keys;
    for (const auto& r : result.records)
      if (r.n == n)
        for (const auto& [k, v] : r.stats)
          if (std::find(keys.begin(), keys.end(), k) == keys.end())
            keys.push_back(k);
    for (const auto& k : keys) {
      auto vals = collect(result.records, n, k);
      row.median[k] = median_of(vals);
      row.mad[k] = mad_of(vals);
    }
    result.summaries.push_back(std::move(row));
  }
}

std::vector<double> empirical_quantiles(std::vector<double> v,
                                        const std::vector<double>& levels) {
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (double q : levels) {
    std::size_t k = static_cast<std::size_t>(std::ceil(q * v.size()));
    if (k == 0) k = 1;
    if (k > v.size()) k = v.size();
    out.push_back(v[k - 1]);
  }
  return out;
}

StudyResult make_result(const StudyConfig& cfg) {
  StudyResult r;
  r.config_echo = cfg.echo();
  r.version = kVersion;
  r.scalars["hypothesis_flag"] =
      cfg.model.build().corner_derivative_blowup() ? 1.0 : 0.0;
  return r;
}

}  // namespace

double median_of(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double mad_of(const std::vector<double>& v) {
  if (v.empty()) return std::nan("");
  const double med = median_of(std::vector<double>(v));
  std::vector<double> dev(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) dev[i] = std::fabs(v[i] - med);
  return median_of(std::move(dev));
}

std::string to_string(StudyKind k) {
  switch (k) {
    case StudyKind::Convergence: return "convergence";
    case StudyKind::DistributionComparison: return "distribution_comparison";
    case StudyKind::Lil: return "lil";
    case StudyKind::Smoothing: return "smoothing";
    case StudyKind::RankStatNormality: return "rankstat_normality";
  }
  return "?";
}

StudyKind study_kind_from_string(const std::string& name) {
  if (name == "convergence") return StudyKind::Convergence;
  if (name == "distribution_comparison") return StudyKind::DistributionComparison;
  if (name == "lil") return StudyKind::Lil;
  if (name == "smoothing") return StudyKind::Smoothing;
  if (name == "rankstat_normality") return StudyKind::RankStatNormality;
  throw ConfigError("unknown study kind: " + name);
}

CopulaModel ModelSpec::build() const {
  return CopulaModel::from_name(family, dimension, params);
}

Kernel KernelSpec::build() const {
  std::string s;
  for (char c : shape) s.push_back(static_cast<char>(std::tolower(c)));
  if (s == "epanechnikov") return Kernel::epanechnikov();
  if (s == "quartic") return Kernel::quartic();
  if (s == "gaussian" || s == "gaussian_truncated")
    return Kernel::gaussian_truncated();
  if (s == "poly" || s == "higher_order")
    return Kernel::higher_order_polynomial(order);
  throw ConfigError("unknown kernel shape: " + shape);
}

double KernelSpec::bandwidth_for(std::size_t n, int d) const {
  if (h_rule == "default") return Bandwidth::default_h(n, order, d);
  return h_fixed;
}

void StudyConfig::validate() const {
  if (!seed_set) throw ConfigError("config: seed is required (no clock default)");
  if (n_ladder.empty()) throw ConfigError("config: n ladder is empty");
  for (std::size_t i = 1; i < n_ladder.size(); ++i)
    if (n_ladder[i] <= n_ladder[i - 1])
      throw ConfigError("config: n ladder must be strictly increasing");
  if (replicates < 1) throw ConfigError("config: replicates must be >= 1");
  if (grid_resolution < 2) throw ConfigError("config: grid resolution < 2");
  if (kind == StudyKind::Lil) {
    for (std::size_t n : n_ladder)
      if (n < 3)
        throw ConfigError("config: lil study needs n >= 3 (log log undefined)");
  }
  if (kind == StudyKind::DistributionComparison && meta_replicates < 1)
    throw ConfigError("config: meta_replicates must be >= 1");
  if (kind == StudyKind::Smoothing) {
    if (kernel.h_rule != "default" && !(kernel.h_fixed > 0.0))
      throw ConfigError("config: fixed bandwidth must be positive");
  }
  model.build();  // parameter validation
}

StudyConfig StudyConfig::from_file(const std::filesystem::path& path) {
  return from_ini(IniConfig::parse_file(path));
}

StudyConfig StudyConfig::from_ini(const IniConfig& ini) {
  StudyConfig cfg;
  cfg.kind = study_kind_from_string(ini.get("study", "kind"));
  if (!ini.has("study", "seed"))
    throw ConfigError("config: [study] seed is required");
  cfg.seed = static_cast<std::uint64_t>(ini.get_int("study", "seed"));
  cfg.seed_set = true;
  cfg.out_dir = ini.get_or("study", "out", "");
  cfg.meta_replicates = static_cast<std::size_t>(
      ini.has("study", "meta_replicates") ? ini.get_int("study", "meta_replicates")
                                          : 1);
  if (ini.has("study", "field_replicates"))
    cfg.field_replicates =
        static_cast<std::size_t>(ini.get_int("study", "field_replicates"));

  cfg.model.family = ini.get_or("model", "copula", "independence");
  cfg.model.dimension =
      static_cast<int>(ini.has("model", "dim") ? ini.get_int("model", "dim") : 2);
  if (ini.has("model", "theta"))
    cfg.model.params = {ini.get_double("model", "theta")};
  else if (ini.has("model", "rho"))
    cfg.model.params = {ini.get_double("model", "rho")};
  else if (ini.has("model", "params"))
    cfg.model.params = ini.get_list("model", "params");

  if (ini.has("grid", "resolution"))
    cfg.grid_resolution = static_cast<int>(ini.get_int("grid", "resolution"));

  if (!ini.has("ladder", "n")) throw ConfigError("config: [ladder] n is required");
  for (double v : ini.get_list("ladder", "n")) {
    if (v < 1) throw ConfigError("config: ladder entries must be >= 1");
    cfg.n_ladder.push_back(static_cast<std::size_t>(v));
  }
  cfg.replicates = static_cast<std::size_t>(
      ini.has("ladder", "replicates") ? ini.get_int("ladder", "replicates") : 1);

  if (ini.has("kernel", "shape")) cfg.kernel.shape = ini.get("kernel", "shape");
  if (ini.has("kernel", "order"))
    cfg.kernel.order = static_cast<int>(ini.get_int("kernel", "order"));
  if (ini.has("kernel", "h")) {
    const std::string h = ini.get("kernel", "h");
    if (h == "default") {
      cfg.kernel.h_rule = "default";
    } else {
      cfg.kernel.h_rule = "fixed";
      cfg.kernel.h_fixed = ini.get_double("kernel", "h");
    }
  }
  if (ini.has("kernel", "nodes"))
    cfg.kernel.quad_nodes = static_cast<int>(ini.get_int("kernel", "nodes"));

  cfg.score = ini.get_or("score", "name", "spearman_pair");

  cfg.validate();
  return cfg;
}

json StudyConfig::echo() const {
  json j;
  j["kind"] = to_string(kind);
  j["model"] = {{"family", model.family},
                {"dim", model.dimension},
                {"params", model.params}};
  j["grid_resolution"] = grid_resolution;
  j["n_ladder"] = n_ladder;
  j["replicates"] = replicates;
  j["meta_replicates"] = meta_replicates;
  j["field_replicates"] = field_replicates;
  j["seed"] = seed;
  j["kernel"] = {{"shape", kernel.shape},
                 {"order", kernel.order},
                 {"h_rule", kernel.h_rule},
                 {"h_fixed", kernel.h_fixed},
                 {"nodes", kernel.quad_nodes}};
  j["score"] = score;
  return j;
}

json StudyResult::payload_json() const {
  json j;
  j["config"] = config_echo;
  j["version"] = version;
  json recs = json::array();
  for (const auto& r : records) {
    json jr;
    jr["n"] = r.n;
    jr["replicate"] = r.replicate;
    jr["stats"] = r.stats;
    recs.push_back(std::move(jr));
  }
  j["records"] = std::move(recs);
  json sums = json::array();
  for (const auto& s : summaries) {
    json js;
    js["n"] = s.n;
    js["median"] = s.median;
    js["mad"] = s.mad;
    sums.push_back(std::move(js));
  }
  j["summaries"] = std::move(sums);
  j["scalars"] = scalars;
  j["tables"] = tables;
  return j;
}

json StudyResult::full_json() const {
  json j = payload_json();
  j["wall_ms"] = wall_ms;
  return j;
}

StudyResult StudyResult::from_json(const json& j) {
  StudyResult r;
  r.config_echo = j.at("config");
  r.version = j.at("version").get<std::string>();
  for (const auto& jr : j.at("records")) {
    StudyRecord rec;
    rec.n = jr.at("n").get<std::size_t>();
    rec.replicate = jr.at("replicate").get<std::size_t>();
    rec.stats = jr.at("stats").get<std::map<std::string, double>>();
    r.records.push_back(std::move(rec));
  }
  for (const auto& js : j.at("summaries")) {
    SummaryRow s;
    s.n = js.at("n").get<std::size_t>();
    s.median = js.at("median").get<std::map<std::string, double>>();
    s.mad = js.at("mad").get<std::map<std::string, double>>();
    r.summaries.push_back(std::move(s));
  }
  r.scalars = j.at("scalars").get<std::map<std::string, double>>();
  r.tables = j.at("tables").get<std::map<std::string, std::vector<double>>>();
  if (j.contains("wall_ms")) r.wall_ms = j.at("wall_ms").get<double>();
  return r;
}

bool StudyResult::same_payload(const StudyResult& other) const {
  return payload_json() == other.payload_json();
}

StudyResult run_convergence(const StudyConfig& cfg) {
  cfg.validate();
  const CopulaModel model = cfg.model.build();
  const Grid grid = Grid::regular(model.dimension(), cfg.grid_resolution);
  const auto c_values = grid_cdf_values(model, grid);

  StudyResult result = make_result(cfg);
  const std::size_t reps = cfg.replicates;
  result.records.resize(cfg.n_ladder.size() * reps);

  for (std::size_t ni = 0; ni < cfg.n_ladder.size(); ++ni) {
    const std::size_t n = cfg.n_ladder[ni];
    parallel_for_checked(reps, [&, ni, n](std::size_t rep) {
      const Sample s =
          model.sample(n, derive_seed(cfg.seed, kStreamSample, ni, rep));
      const auto cn = empirical_copula_on_grid(s, grid);
      StudyRecord rec{n, rep, {}};
      rec.stats["sup_cn_minus_c"] = sup_abs_diff(cn, c_values);
      result.records[ni * reps + rep] = std::move(rec);
    });
  }
  summarize(result, cfg.n_ladder);

  std::vector<double> nv, med;
  for (const auto& row : result.summaries) {
    nv.push_back(static_cast<double>(row.n));
    med.push_back(row.median.at("sup_cn_minus_c"));
  }
  const SlopeFit fit = fit_loglog(nv, med);
  result.scalars["slope_defined"] = fit.defined ? 1.0 : 0.0;
  if (fit.defined) {
    result.scalars["slope"] = fit.slope;
    result.scalars["slope_se"] = fit.stderr_;
  }
  return result;
}

StudyResult run_distribution_comparison(const StudyConfig& cfg) {
  cfg.validate();
  const CopulaModel model = cfg.model.build();
  const Grid grid = Grid::regular(model.dimension(), cfg.grid_resolution, true);
  const auto c_values = grid_cdf_values(model, grid);
  const CovarianceFactor factor = build_factor(model, grid);
  const KStarTransform transform(model, grid);

  StudyResult result = make_result(cfg);
  result.scalars["factor_jitter"] = factor.jitter_used;
  const std::size_t reps = cfg.replicates;
  const std::size_t field_reps =
      cfg.field_replicates ? cfg.field_replicates : reps;
  const std::size_t metas = cfg.meta_replicates;
  result.records.resize(cfg.n_ladder.size() * metas);

  const std::vector<double> levels{0.5, 0.9, 0.95, 0.99};
  result.tables["quantile_levels"] = levels;

  for (std::size_t ni = 0; ni < cfg.n_ladder.size(); ++ni) {
    const std::size_t n = cfg.n_ladder[ni];
    const double root_n = std::sqrt(static_cast<double>(n));
    for (std::size_t meta = 0; meta < metas; ++meta) {
      std::vector<double> an_sups(reps), ks_sups(field_reps);
      parallel_for_checked(reps, [&, ni, meta, n](std::size_t rep) {
        const Sample s = model.sample(
            n, derive_seed(cfg.seed, kStreamSample, ni * metas + meta, rep));
        const auto cn = empirical_copula_on_grid(s, grid);
        an_sups[rep] = root_n * sup_abs_diff(cn, c_values);
      });
      parallel_for_checked(field_reps, [&, ni, meta](std::size_t rep) {
        const FieldSample f = sample_kstar(
            factor, transform, 1,
            derive_seed(cfg.seed, kStreamField, ni * metas + meta, rep));
        double sup = 0.0;
        for (double v : f.values) sup = std::fmax(sup, std::fabs(v));
        ks_sups[rep] = sup;
      });
      StudyRecord rec{n, meta, {}};
      rec.stats["ks"] = two_sample_ks(an_sups, ks_sups);
      result.records[ni * metas + meta] = std::move(rec);

      if (meta == 0) {
        const std::string suffix = "_n" + std::to_string(n);
        result.tables["sup_an_q" + suffix] = empirical_quantiles(an_sups, levels);
        result.tables["sup_kstar_q" + suffix] =
            empirical_quantiles(ks_sups, levels);
        if (ni + 1 == cfg.n_ladder.size()) {
          result.tables["sup_an_last"] = an_sups;
          result.tables["sup_kstar_last"] = ks_sups;
        }
      }
    }
  }
  summarize(result, cfg.n_ladder);

  bool nonincreasing = true;
  for (std::size_t i = 1; i < result.summaries.size(); ++i) {
    if (result.summaries[i].median.at("ks") >
        result.summaries[i - 1].median.at("ks"))
      nonincreasing = false;
  }
  result.scalars["ks_median_nonincreasing"] =
      result.summaries.size() > 1 ? (nonincreasing ? 1.0 : 0.0) : 1.0;
  result.scalars["ks_first_run"] =
      result.records.empty() ? std::nan("") : result.records[0].stats.at("ks");
  return result;
}

StudyResult run_lil(const StudyConfig& cfg) {
  cfg.validate();
  const CopulaModel model = cfg.model.build();
  const Grid grid = Grid::regular(model.dimension(), cfg.grid_resolution);
  const auto c_values = grid_cdf_values(model, grid);
  const double rho = lil_rho(model, grid);

  StudyResult result = make_result(cfg);
  result.scalars["rho"] = rho;
  const std::size_t reps = cfg.replicates;
  const std::size_t steps = cfg.n_ladder.size();
  result.records.resize(steps * reps);
  std::vector<double> max_ratio(reps, 0.0);

  parallel_for_checked(reps, [&](std::size_t rep) {
    Rng rng(derive_seed(cfg.seed, kStreamLil, rep));
    const std::size_t d = static_cast<std::size_t>(model.dimension());
    std::vector<double> rows;
    std::size_t have = 0;
    Sample current({0.0}, 1, 1, SampleKind::Raw);  // placeholder
    std::uint64_t prev_hash = 0;
    for (std::size_t step = 0; step < steps; ++step) {
      const std::size_t n = cfg.n_ladder[step];
      rows.resize((n - have) * d);
      for (std::size_t i = 0; i < n - have; ++i)
        model.sample_row(rng, {rows.data() + i * d, d});
      if (step == 0) {
        current = Sample(rows, n, d, SampleKind::PseudoUniform);
      } else {
        current = current.extended(rows, n - have);
        // Growing-sample contract: the previous ladder step must be a
        // bit-identical prefix.
        if (current.prefix_hash(have) != prev_hash)
          throw NumericalError("lil study: prefix extension violated");
      }
      prev_hash = current.prefix_hash(n);
      have = n;

      const auto cn = empirical_copula_on_grid(current, grid);
      const double sup = sup_abs_diff(cn, c_values);
      const double ratio =
          std::sqrt(static_cast<double>(n) /
                    (2.0 * std::log(std::log(static_cast<double>(n))))) *
          sup;
      StudyRecord rec{n, rep, {}};
      rec.stats["ratio"] = ratio;
      max_ratio[rep] = std::fmax(max_ratio[rep], ratio);
      result.records[step * reps + rep] = std::move(rec);
    }
  });
  summarize(result, cfg.n_ladder);
  result.tables["max_ratio"] = max_ratio;

  std::size_t inside = 0;
  for (double r : max_ratio)
    if (r >= 0.5 * rho && r <= 2.0 * rho) ++inside;
  result.scalars["corridor_fraction"] =
      static_cast<double>(inside) / static_cast<double>(reps);
  return result;
}

StudyResult run_smoothing(const StudyConfig& cfg) {
  cfg.validate();
  const CopulaModel model = cfg.model.build();
  const int d = model.dimension();
  const Grid grid = Grid::regular(d, cfg.grid_resolution);
  const Kernel kernel = cfg.kernel.build();

  const MomentReport order_report = verify_order(kernel, d);
  if (!order_report.pass)
    throw ConfigError("smoothing study: kernel fails its order conditions: " +
                      order_report.summary());

  StudyResult result = make_result(cfg);
  // Fixed interior mask from the widest window in the ladder keeps the
  // sup-statistics comparable across n.
  double max_b = 0.0;
  for (std::size_t n : cfg.n_ladder) {
    Bandwidth bw{cfg.kernel.bandwidth_for(n, d), n, kernel.order(), d};
    max_b = std::fmax(max_b, bw.axis_scale());
  }
  auto mask = interior_window_mask(grid, max_b, kernel.support_radius());
  std::size_t interior_count = 0;
  for (bool b : mask) interior_count += b;
  if (interior_count == 0) {
    // Bandwidths so wide that every window crosses the boundary (negative
    // controls): fall back to the full grid, flagged by interior_points = 0.
    mask.assign(grid.size(), true);
  }
  result.scalars["interior_points"] = static_cast<double>(interior_count);

  const std::size_t reps = cfg.replicates;
  result.records.resize(cfg.n_ladder.size() * reps);
  for (std::size_t ni = 0; ni < cfg.n_ladder.size(); ++ni) {
    const std::size_t n = cfg.n_ladder[ni];
    const Bandwidth bw{cfg.kernel.bandwidth_for(n, d), n, kernel.order(), d};
    result.scalars["admissible_n" + std::to_string(n)] =
        bw.flags().admissible() ? 1.0 : 0.0;
    const auto refs =
        precompute_smoothing_refs(kernel, bw, model, grid, cfg.kernel.quad_nodes);
    parallel_for_checked(reps, [&, ni, n](std::size_t rep) {
      const Sample s =
          model.sample(n, derive_seed(cfg.seed, kStreamSample, ni, rep));
      const auto stats =
          smoothing_replicate_stats(s, kernel, bw, grid, refs, mask);
      StudyRecord rec{n, rep, {}};
      rec.stats["sup_gap"] = stats.sup_smoothed_minus_raw;
      rec.stats["nabla1"] = stats.decomposition.modulus_term;
      rec.stats["nabla2"] = stats.decomposition.mass_term;
      rec.stats["nabla3"] = stats.decomposition.bias_term;
      rec.stats["nabla4"] = stats.decomposition.c_mass_term;
      rec.stats["corner_gap"] = stats.corner_gap;
      result.records[ni * reps + rep] = std::move(rec);
    });
  }
  summarize(result, cfg.n_ladder);

  auto medians_of = [&](const std::string& key) {
    std::vector<double> out;
    for (const auto& row : result.summaries) out.push_back(row.median.at(key));
    return out;
  };
  const auto sup_gap = medians_of("sup_gap");
  bool strict = true;
  for (std::size_t i = 1; i < sup_gap.size(); ++i)
    strict = strict && sup_gap[i] < sup_gap[i - 1];
  result.scalars["sup_gap_decreasing"] = strict ? 1.0 : 0.0;

  bool all_noninc = strict;
  for (const std::string key : {"nabla1", "nabla2", "nabla3", "nabla4"}) {
    const auto m = medians_of(key);
    for (std::size_t i = 1; i < m.size(); ++i)
      all_noninc = all_noninc && m[i] <= m[i - 1] + 1e-12;
  }
  result.scalars["all_terms_nonincreasing"] = all_noninc ? 1.0 : 0.0;

  const auto n3 = medians_of("nabla3");
  result.scalars["nabla3_first"] = n3.front();
  result.scalars["nabla3_last"] = n3.back();
  result.scalars["nabla3_nonvanishing"] =
      (n3.back() >= 0.5 * n3.front() && n3.back() > 1e-6) ? 1.0 : 0.0;
  return result;
}

StudyResult run_rankstat_normality(const StudyConfig& cfg) {
  cfg.validate();
  const CopulaModel model = cfg.model.build();
  RankScore score = RankScore::spearman_pair();
  if (cfg.score == "product")
    score = RankScore::product();
  else if (cfg.score == "constant_one")
    score = RankScore::constant_one();
  else if (cfg.score != "spearman_pair")
    throw ConfigError("unknown rank score: " + cfg.score);

  StudyResult result = make_result(cfg);
  const std::size_t reps = cfg.replicates;
  result.records.resize(cfg.n_ladder.size() * reps);
  std::vector<double> ad_stats;
  for (std::size_t ni = 0; ni < cfg.n_ladder.size(); ++ni) {
    const std::size_t n = cfg.n_ladder[ni];
    std::vector<double> values(reps);
    parallel_for_checked(reps, [&, ni, n](std::size_t rep) {
      const Sample s =
          model.sample(n, derive_seed(cfg.seed, kStreamSample, ni, rep));
      values[rep] = rank_statistic(s, score);
      StudyRecord rec{n, rep, {}};
      rec.stats["rn"] = values[rep];
      result.records[ni * reps + rep] = std::move(rec);
    });
    ad_stats.push_back(anderson_darling_normal(values));
  }
  summarize(result, cfg.n_ladder);
  result.tables["ad_stat"] = ad_stats;
  // 1% critical value for the statistic with estimated mean and variance.
  bool pass = true;
  for (double a : ad_stats) pass = pass && a < 1.092;
  result.scalars["ad_pass_all"] = pass ? 1.0 : 0.0;
  return result;
}

StudyResult run_study(const StudyConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  StudyResult result;
  switch (cfg.kind) {
    case StudyKind::Convergence: result = run_convergence(cfg); break;
    case StudyKind::DistributionComparison:
      result = run_distribution_comparison(cfg);
      break;
    case StudyKind::Lil: result = run_lil(cfg); break;
    case StudyKind::Smoothing: result = run_smoothing(cfg); break;
    case StudyKind::RankStatNormality:
      result = run_rankstat_normality(cfg);
      break;
  }
  const auto t1 = std::chrono::steady_clock::now();
  result.wall_ms =
      std::chrono::duration_cast<std::chrono::microseconds>(t1 - t0).count() /
      1000.0;
  return result;
}

double two_sample_ks(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("two_sample_ks: empty input");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::fmin(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::fmax(d, std::fabs(i / na - j / nb));
  }
  return d;
}

double anderson_darling_normal(std::vector<double> x) {
  const std::size_t n = x.size();
  if (n < 8) throw std::invalid_argument("anderson_darling_normal: n too small");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= (n - 1);
  const double sd = std::sqrt(var);
  std::sort(x.begin(), x.end());
  double a2 = -static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double zi = (x[i] - mean) / sd;
    const double zr = (x[n - 1 - i] - mean) / sd;
    const double pi = std::clamp(normal_cdf(zi), 1e-300, 1.0 - 1e-16);
    const double pr = std::clamp(normal_cdf(zr), 1e-300, 1.0 - 1e-16);
    a2 -= (2.0 * i + 1.0) / n * (std::log(pi) + std::log1p(-pr));
  }
  return a2 * (1.0 + 0.75 / n + 2.25 / (n * n));
}

std::filesystem::path emit_report(const StudyResult& result, ReportFormat format,
                                  const std::filesystem::path& out_dir,
                                  const std::string& stem) {
  std::filesystem::create_directories(out_dir);
  const StudyKind kind =
      study_kind_from_string(result.config_echo.at("kind").get<std::string>());

  if (format == ReportFormat::Json) {
    const auto path = out_dir / (stem + ".json");
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write " + path.string());
    os << result.full_json().dump(2) << "\n";
    return path;
  }
  if (format == ReportFormat::Csv) {
    const auto path = out_dir / (stem + ".csv");
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write " + path.string());
    std::vector<std::string> keys;
    for (const auto& r : result.records)
      for (const auto& [k, v] : r.stats)
        if (std::find(keys.begin(), keys.end(), k) == keys.end())
          keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    os << "n,replicate";
    for (const auto& k : keys) os << "," << k;
    os << "\n";
    os.precision(17);
    for (const auto& r : result.records) {
      os << r.n << "," << r.replicate;
      for (const auto& k : keys) {
        os << ",";
        const auto it = r.stats.find(k);
        if (it != r.stats.end()) os << it->second;
      }
      os << "\n";
    }
    return path;
  }

  // SVG
  const auto path = out_dir / (stem + ".svg");
  std::string svg;
  if (kind == StudyKind::DistributionComparison &&
      result.tables.count("sup_an_last") &&
      result.tables.count("sup_kstar_last")) {
    svg = svg_qq_plot("sup |A_n| vs sup |K*| quantiles",
                      result.tables.at("sup_an_last"),
                      result.tables.at("sup_kstar_last"));
  } else {
    std::vector<SvgSeries> series;
    std::vector<std::string> keys;
    for (const auto& row : result.summaries)
      for (const auto& [k, v] : row.median)
        if (std::find(keys.begin(), keys.end(), k) == keys.end())
          keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    for (const auto& k : keys) {
      SvgSeries s{k, {}, {}};
      for (const auto& row : result.summaries) {
        s.x.push_back(static_cast<double>(row.n));
        s.y.push_back(row.median.at(k));
      }
      series.push_back(std::move(s));
    }
    svg = svg_line_chart("median statistics by sample size", "n", "median",
                         series, true);
  }
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path.string());
  os << svg;
  return path;
}

}  // namespace copulalab
