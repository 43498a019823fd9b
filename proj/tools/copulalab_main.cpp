#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <nlohmann/json.hpp>

#include "copulalab/empirical.hpp"
#include "copulalab/fields.hpp"
#include "copulalab/io.hpp"
#include "copulalab/kernels.hpp"
#include "copulalab/rankstats.hpp"
#include "copulalab/rng.hpp"
#include "copulalab/studies.hpp"
#include "copulalab/version.hpp"

using nlohmann::json;
namespace cl = copulalab;

namespace {

struct ModelFlags {
  std::string family = "independence";
  int dim = 2;
  double theta = std::nan("");
  double rho = std::nan("");

  void attach(CLI::App* app, bool required = false) {
    auto* opt = app->add_option("--copula", family, "copula family name");
    if (required) opt->required();
    app->add_option("--dim", dim, "dimension (default 2)");
    app->add_option("--theta", theta, "family parameter");
    app->add_option("--rho", rho, "gaussian correlation");
  }

  cl::CopulaModel build() const {
    std::vector<double> params;
    if (!std::isnan(theta)) params.push_back(theta);
    if (!std::isnan(rho)) params.push_back(rho);
    if (params.size() > 1)
      throw cl::ConfigError("give either --theta or --rho, not both");
    return cl::CopulaModel::from_name(family, dim, params);
  }
};

cl::Sample load_sample(const std::string& path, const std::string& ties,
                       std::uint64_t seed) {
  const cl::TiePolicy policy =
      ties == "jitter" ? cl::TiePolicy::Jitter : cl::TiePolicy::Reject;
  return cl::read_csv(path, policy, seed);
}

json grid_points_json(const cl::Grid& grid) {
  json pts = json::array();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto p = grid.point(i);
    pts.push_back(std::vector<double>(p.begin(), p.end()));
  }
  return pts;
}

void write_json(const std::string& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw cl::ConfigError("cannot write " + path);
  os << j.dump(2) << "\n";
}

int run(int argc, char** argv) {
  CLI::App app{"copulalab: empirical copula processes, smoothed estimators and "
               "their Gaussian limit fields"};
  app.set_version_flag("--version", cl::kVersion);
  app.set_help_flag("--help", "print help");  // frees -h for the bandwidth
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "draw a pseudo-uniform sample");
  ModelFlags sim_model;
  sim_model.attach(sim);
  std::size_t sim_n = 1000;
  std::uint64_t sim_seed = 0;
  bool sim_seed_set = false;
  std::string sim_out = "sample.csv";
  sim->add_option("--n", sim_n, "sample size");
  sim->add_option("--seed", sim_seed, "rng seed")
      ->each([&](const std::string&) { sim_seed_set = true; });
  sim->add_option("--out", sim_out, "output CSV");

  // estimate
  auto* est = app.add_subcommand("estimate",
                                 "empirical copula and process on a grid");
  ModelFlags est_model;
  est_model.attach(est);
  std::string est_input, est_out = "result.json", est_ties = "reject";
  int est_grid = 21;
  bool est_pseudo = false;
  est->add_option("--input", est_input, "input CSV")->required();
  est->add_option("--grid", est_grid, "grid points per axis");
  est->add_option("--out", est_out, "output JSON");
  est->add_option("--ties", est_ties, "tie policy: reject|jitter");
  est->add_flag("--pseudo-uniform", est_pseudo,
                "input already has uniform margins");

  // smooth
  auto* smo = app.add_subcommand("smooth", "kernel-smoothed empirical copula");
  smo->set_help_flag("--help", "print help");
  ModelFlags smo_model;
  smo_model.attach(smo);
  std::string smo_input, smo_out = "smooth.json", smo_kernel = "quartic",
              smo_ties = "reject";
  int smo_order = 2, smo_grid = 21, smo_nodes = 32;
  double smo_h = 0.0;
  bool smo_have_model = false;
  smo->add_option("--input", smo_input, "input CSV")->required();
  smo->add_option("--kernel", smo_kernel, "epanechnikov|quartic|gaussian|poly");
  smo->add_option("--order", smo_order, "kernel order (even)");
  smo->add_option("--h", smo_h, "bandwidth (volume scale); 0 = default rule");
  smo->add_option("--grid", smo_grid, "grid points per axis");
  smo->add_option("--nodes", smo_nodes, "quadrature nodes per axis");
  smo->add_option("--ties", smo_ties, "tie policy: reject|jitter");
  smo->callback([&] { smo_have_model = smo->count("--copula") > 0; });
  smo->add_option("--out", smo_out, "output JSON");

  // field
  auto* fld = app.add_subcommand("field", "sample Gaussian limit fields");
  ModelFlags fld_model;
  fld_model.attach(fld);
  std::string fld_process = "kstar", fld_out = "fields.csv";
  int fld_grid = 21, fld_time = 1, fld_tmax = 4;
  std::size_t fld_reps = 1000;
  std::uint64_t fld_seed = 0;
  bool fld_seed_set = false;
  fld->add_option("--grid", fld_grid, "grid points per axis");
  fld->add_option("--process", fld_process, "bridge|kiefer|kstar");
  fld->add_option("--reps", fld_reps, "number of field draws");
  fld->add_option("--time", fld_time, "integer time index for kstar");
  fld->add_option("--tmax", fld_tmax, "max time for kiefer");
  fld->add_option("--seed", fld_seed, "rng seed")
      ->each([&](const std::string&) { fld_seed_set = true; });
  fld->add_option("--out", fld_out, "output CSV");

  // rankstat
  auto* rnk = app.add_subcommand("rankstat", "rank statistics of a sample");
  std::string rnk_input, rnk_stat = "spearman", rnk_out = "stats.json",
              rnk_ties = "reject", rnk_config;
  rnk->add_option("--input", rnk_input, "input CSV")->required();
  rnk->add_option("--stat", rnk_stat, "spearman|kendall|custom");
  rnk->add_option("--config", rnk_config,
                  "score config (custom polynomial terms)");
  rnk->add_option("--ties", rnk_ties, "tie policy: reject|jitter");
  rnk->add_option("--out", rnk_out, "output JSON");

  // study
  auto* stu = app.add_subcommand("study", "run a declarative Monte Carlo study");
  std::string stu_config, stu_out;
  stu->add_option("--config", stu_config, "study config file")->required();
  stu->add_option("--out", stu_out, "output directory (overrides config)");
  stu->footer(
      "config keys (flat key = value, one [section] per block):\n"
      "  [study]   kind = convergence|distribution_comparison|lil|smoothing|\n"
      "            rankstat_normality; seed (required); out;\n"
      "            meta_replicates, field_replicates (distribution comparison)\n"
      "  [model]   copula, dim, theta | rho | params\n"
      "  [grid]    resolution\n"
      "  [ladder]  n = comma list (strictly increasing); replicates\n"
      "  [kernel]  shape = epanechnikov|quartic|gaussian|poly; order;\n"
      "            h = default | <number>; nodes   (smoothing only)\n"
      "  [score]   name = spearman_pair|product|constant_one (normality only)");

  CLI11_PARSE(app, argc, argv);

  if (sim->parsed()) {
    if (!sim_seed_set) throw cl::ConfigError("simulate: --seed is required");
    const auto model = sim_model.build();
    cl::write_csv(sim_out, model.sample(sim_n, sim_seed));
    std::cout << "wrote " << sim_out << " (" << sim_n << " x " << model.dimension()
              << ")\n";
    return 0;
  }

  if (est->parsed()) {
    cl::Sample raw = load_sample(est_input, est_ties, 1);
    const auto model = est_model.build();
    if (static_cast<int>(raw.dimension()) != model.dimension())
      throw cl::ConfigError("estimate: data dimension does not match model");
    const bool approximate_margins =
        !est_pseudo && raw.kind() == cl::SampleKind::Raw;
    const cl::Grid grid = cl::Grid::regular(model.dimension(), est_grid);
    const auto cn = cl::empirical_copula_on_grid(raw, grid);
    const auto an = cl::copula_process(raw, model, grid);
    json out;
    out["model"] = model.name();
    out["n"] = raw.size();
    out["margins"] = approximate_margins ? "rank-approximate" : "known-uniform";
    out["grid"] = grid_points_json(grid);
    out["cn"] = cn;
    out["an"] = an.values;
    write_json(est_out, out);
    std::cout << "wrote " << est_out << "\n";
    return 0;
  }

  if (smo->parsed()) {
    cl::Sample raw = load_sample(smo_input, smo_ties, 1);
    const int d = static_cast<int>(raw.dimension());
    cl::Kernel kernel = cl::Kernel::quartic();
    if (smo_kernel == "epanechnikov") kernel = cl::Kernel::epanechnikov();
    else if (smo_kernel == "quartic") kernel = cl::Kernel::quartic();
    else if (smo_kernel == "gaussian") kernel = cl::Kernel::gaussian_truncated();
    else if (smo_kernel == "poly")
      kernel = cl::Kernel::higher_order_polynomial(smo_order);
    else throw cl::ConfigError("unknown kernel: " + smo_kernel);
    const double h =
        smo_h > 0.0 ? smo_h : cl::Bandwidth::default_h(raw.size(), kernel.order(), d);
    const cl::Bandwidth bw{h, raw.size(), kernel.order(), d};
    if (!bw.flags().admissible())
      std::cerr << "warning: bandwidth h=" << h
                << " fails an admissibility condition\n";
    const cl::Grid grid = cl::Grid::regular(d, smo_grid);
    json out;
    out["kernel"] = kernel.name();
    out["h"] = h;
    out["n"] = raw.size();
    out["grid"] = grid_points_json(grid);
    std::vector<double> smoothed(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
      smoothed[i] = cl::smoothed_copula_quadrature(raw, kernel, bw,
                                                   grid.point(i), smo_nodes);
    out["smoothed_cn"] = smoothed;
    if (smo_have_model) {
      const auto model = smo_model.build();
      const auto decomp =
          cl::decompose_smoothing_error(raw, kernel, bw, model, grid);
      out["nabla"] = {{"modulus", decomp.modulus_term},
                      {"mass", decomp.mass_term},
                      {"bias", decomp.bias_term},
                      {"c_mass", decomp.c_mass_term}};
    }
    write_json(smo_out, out);
    std::cout << "wrote " << smo_out << "\n";
    return 0;
  }

  if (fld->parsed()) {
    if (!fld_seed_set) throw cl::ConfigError("field: --seed is required");
    const auto model = fld_model.build();
    const cl::Grid grid = cl::Grid::regular(model.dimension(), fld_grid, true);
    const auto factor = cl::build_factor(model, grid);
    std::ofstream os(fld_out);
    if (!os) throw cl::ConfigError("cannot write " + fld_out);
    os.precision(17);
    os << "replicate";
    for (int j = 0; j < model.dimension(); ++j) os << ",u" << (j + 1);
    os << ",value\n";
    auto emit = [&](std::size_t rep, const cl::FieldSample& f) {
      for (std::size_t i = 0; i < grid.size(); ++i) {
        os << rep;
        for (double c : grid.point(i)) os << "," << c;
        os << "," << f.values[i] << "\n";
      }
    };
    if (fld_process != "bridge" && fld_process != "kiefer" &&
        fld_process != "kstar")
      throw cl::ConfigError("unknown process: " + fld_process);
    std::optional<cl::KStarTransform> transform;
    if (fld_process == "kstar") transform.emplace(model, grid);
    for (std::size_t rep = 0; rep < fld_reps; ++rep) {
      const std::uint64_t seed = cl::derive_seed(fld_seed, 0xF1E1D, rep);
      if (fld_process == "bridge") {
        emit(rep, cl::sample_bridge(factor, seed));
      } else if (fld_process == "kiefer") {
        for (const auto& f : cl::sample_kiefer(factor, fld_tmax, seed))
          emit(rep, f);
      } else {
        emit(rep, cl::sample_kstar(factor, *transform, fld_time, seed));
      }
    }
    std::cout << "wrote " << fld_out << "\n";
    return 0;
  }

  if (rnk->parsed()) {
    cl::Sample raw = load_sample(rnk_input, rnk_ties, 1);
    if (raw.dimension() != 2)
      throw cl::ConfigError("rankstat: statistics are bivariate (d = 2)");
    json out;
    out["n"] = raw.size();
    if (rnk_stat == "spearman") {
      out["stat"] = "spearman";
      out["value"] =
          cl::spearman_functional(raw, cl::ScoreFunction::spearman());
    } else if (rnk_stat == "kendall") {
      out["stat"] = "kendall";
      out["value"] = cl::kendall_functional(raw, cl::ScoreFunction::kendall()).value;
    } else if (rnk_stat == "custom") {
      if (rnk_config.empty())
        throw cl::ConfigError("rankstat: --config required for custom scores");
      // [score] terms = coeff:pu:pv:pz entries, comma separated via keys
      const auto ini = cl::IniConfig::parse_file(rnk_config);
      std::vector<cl::ScoreFunction::Term> terms;
      const auto coeffs = ini.get_list("score", "coeff");
      const auto pu = ini.get_list("score", "pu");
      const auto pv = ini.get_list("score", "pv");
      const auto pz = ini.get_list("score", "pz");
      if (coeffs.size() != pu.size() || pu.size() != pv.size() ||
          pv.size() != pz.size())
        throw cl::ConfigError("rankstat: score term lists differ in length");
      for (std::size_t i = 0; i < coeffs.size(); ++i)
        terms.push_back({static_cast<int>(pu[i]), static_cast<int>(pv[i]),
                         static_cast<int>(pz[i]), coeffs[i]});
      const auto score = cl::ScoreFunction::custom(std::move(terms));
      out["stat"] = "custom";
      out["value"] = cl::spearman_functional(raw, score);
      out["kendall_form"] = cl::kendall_functional(raw, score).value;
    } else {
      throw cl::ConfigError("rankstat: unknown stat " + rnk_stat);
    }
    write_json(rnk_out, out);
    std::cout << "wrote " << rnk_out << "\n";
    return 0;
  }

  if (stu->parsed()) {
    auto cfg = cl::StudyConfig::from_file(stu_config);
    if (!stu_out.empty()) cfg.out_dir = stu_out;
    if (cfg.out_dir.empty()) cfg.out_dir = ".";
    const auto result = cl::run_study(cfg);
    const auto jsonp = cl::emit_report(result, cl::ReportFormat::Json, cfg.out_dir);
    cl::emit_report(result, cl::ReportFormat::Csv, cfg.out_dir);
    cl::emit_report(result, cl::ReportFormat::Svg, cfg.out_dir);
    std::cout << "study complete: " << jsonp << "\n";
    for (const auto& [k, v] : result.scalars)
      std::cout << "  " << k << " = " << v << "\n";
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const cl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const cl::TieError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
}
