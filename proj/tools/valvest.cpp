// valvest: valve-constant estimation for CO2 refrigeration plants.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "valvest/catalog.hpp"
#include "valvest/csv.hpp"
#include "valvest/errors.hpp"
#include "valvest/pipeline.hpp"
#include "valvest/simulator.hpp"

namespace {

using namespace valvest;
namespace pl = valvest::pipeline;

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

struct Common {
  std::optional<std::string> config;
  std::optional<std::string> data;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
  std::optional<double> vs;
  std::optional<double> eta_vol;
  std::optional<int> dt;
  bool svg = false;
};

void add_common(CLI::App* cmd, Common& c, bool constants = true) {
  cmd->add_option("--config", c.config, "JSON run configuration; flags override its keys");
  cmd->add_option("--data", c.data, "monitoring CSV");
  cmd->add_option("--out-dir", c.out_dir, "output directory");
  cmd->add_option("--seed", c.seed, "seed for every stochastic step");
  cmd->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_flag("--svg", c.svg, "also write SVG plots");
  if (constants) {
    cmd->add_option("--vs", c.vs, "compressor stroke volume (m3)")->check(CLI::PositiveNumber);
    cmd->add_option("--eta-vol", c.eta_vol, "volumetric efficiency");
  }
}

pl::RunConfig make_config(const Common& c) {
  pl::RunConfig cfg;
  if (c.config) {
    const std::filesystem::path path(*c.config);
    cfg = pl::RunConfig::from_json(csv::read_file(path), path.parent_path());
  }
  if (c.data) cfg.dataset = *c.data;
  if (c.out_dir) cfg.output_dir = *c.out_dir;
  if (c.seed) cfg.seed = *c.seed;
  if (c.jobs) cfg.jobs = *c.jobs;
  if (c.vs) cfg.vs_m3 = *c.vs;
  if (c.eta_vol) cfg.eta_vol = *c.eta_vol;
  if (c.dt) cfg.sampling_min = *c.dt;
  cfg.svg = cfg.svg || c.svg;
  return cfg;
}

design::SystemConstants constants(const pl::RunConfig& cfg) {
  if (!cfg.vs_m3) throw DataError("stroke volume unknown: pass --vs or run estimate-vs first");
  design::SystemConstants consts{*cfg.vs_m3, cfg.eta_vol};
  consts.validate();
  return consts;
}

void report_written(const std::filesystem::path& dir, const pl::Outputs& files) {
  pl::write_outputs(dir, files);
  for (const auto& f : files) std::cout << (dir / f.name).string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Valve-constant estimation for CO2 supermarket refrigeration plants"};
  app.require_subcommand(1);

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "generate a synthetic plant with known valve constants");
  std::string preset_name = "otterup-like";
  std::string sim_out = "data.csv";
  std::optional<std::string> sim_truth;
  std::optional<double> sim_days;
  std::optional<double> sim_vs;
  std::optional<std::uint64_t> sim_seed;
  bool list_presets = false;
  sim_cmd->add_option("--preset", preset_name, "scenario preset")->capture_default_str();
  sim_cmd->add_option("--out", sim_out, "dataset CSV")->capture_default_str();
  sim_cmd->add_option("--truth", sim_truth, "ground-truth CSV");
  sim_cmd->add_option("--days", sim_days, "simulated duration in days")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--vs", sim_vs, "true stroke volume (m3)")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", sim_seed, "random seed");
  sim_cmd->add_flag("--list-presets", list_presets, "print preset names and exit");

  // spectrum
  Common spec_opts;
  auto* spec_cmd = app.add_subcommand("spectrum", "dominant cycle and suggested sampling time per evaporator");
  add_common(spec_cmd, spec_opts, false);

  // estimate-ols
  Common ols_opts;
  bool intercept = false;
  bool export_problem = false;
  std::optional<std::size_t> max_lag;
  auto* ols_cmd = app.add_subcommand("estimate-ols", "least-squares valve constants");
  add_common(ols_cmd, ols_opts);
  ols_cmd->add_option("--dt", ols_opts.dt, "sampling time in minutes")->check(CLI::Range(1, 30));
  ols_cmd->add_flag("--intercept", intercept, "add a constant column (diagnostic only)");
  ols_cmd->add_flag("--export-problem", export_problem, "write the regression problem as problem.csv");
  ols_cmd->add_option("--max-lag", max_lag, "ACF / Ljung-Box lag");

  // estimate-armax
  Common armax_opts;
  std::optional<std::size_t> p_order;
  std::optional<std::size_t> q_order;
  auto* armax_cmd = app.add_subcommand("estimate-armax", "regression with ARMA(p, q) errors");
  add_common(armax_cmd, armax_opts);
  armax_cmd->add_option("--dt", armax_opts.dt, "sampling time in minutes")->check(CLI::Range(1, 30));
  armax_cmd->add_option("--p", p_order, "AR order (default 4)");
  armax_cmd->add_option("--q", q_order, "MA order (default 1)");

  // estimate-vs
  Common vs_opts;
  std::optional<std::string> catalog_path;
  std::optional<double> vs_guess;
  bool refit = false;
  auto* vs_cmd = app.add_subcommand("estimate-vs", "search stroke volume and installed valve types");
  add_common(vs_cmd, vs_opts);
  vs_cmd->add_option("--dt", vs_opts.dt, "sampling time in minutes")->check(CLI::Range(1, 30));
  vs_cmd->add_option("--catalog", catalog_path, "valve catalog CSV (name,A)");
  vs_cmd->add_option("--vs-guess", vs_guess, "rough stroke volume; brackets the search at [0.1, 10] x guess")
      ->check(CLI::PositiveNumber);
  vs_cmd->add_flag("--refit-armax", refit, "refit ARMAX at the winning stroke volume");

  // sweep and report
  Common sweep_opts;
  std::optional<std::string> sweep_list;
  std::optional<std::string> models;
  auto* sweep_cmd = app.add_subcommand("sweep", "estimates as a function of sampling time");
  auto* report_cmd = app.add_subcommand("report", "spectrum, sweep and a markdown digest");
  for (auto* cmd : {sweep_cmd, report_cmd}) {
    add_common(cmd, sweep_opts);
    cmd->add_option("--sweep", sweep_list, "sampling times, e.g. 1..30 or 1,5,15");
    cmd->add_option("--models", models, "comma-separated: ols, armax");
    cmd->add_option("--p", p_order, "ARMAX AR order");
    cmd->add_option("--q", q_order, "ARMAX MA order");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (sim_cmd->parsed()) {
      if (list_presets) {
        for (const auto& p : sim::scenario_presets()) std::cout << p.name << "\n";
        return kOk;
      }
      auto spec = sim::preset(preset_name);
      if (sim_days) spec.duration_days = *sim_days;
      if (sim_vs) spec.vs_m3 = *sim_vs;
      if (sim_seed) spec.seed = *sim_seed;
      spec.log_internals = false;
      const auto result = sim::simulate(spec);
      csv::write_file(sim_out, serialize_dataset(result.data));
      std::cout << sim_out << "\n";
      if (sim_truth) {
        csv::write_file(*sim_truth, sim::truth_csv(result.truth));
        std::cout << *sim_truth << "\n";
      }
      return kOk;
    }

    if (spec_cmd->parsed()) {
      const auto cfg = make_config(spec_opts);
      const auto ds = pl::load_dataset(cfg);
      report_written(cfg.output_dir,
                     pl::spectrum_outputs(pl::spectrum_analysis(ds, thermo::SaturationTable::bundled(), cfg.jobs), cfg.svg));
      return kOk;
    }

    if (ols_cmd->parsed()) {
      const auto cfg = make_config(ols_opts);
      const auto ds = pl::resample_to(pl::load_dataset(cfg), cfg.sampling_min);
      const auto problem = design::build_problem(ds, constants(cfg), thermo::SaturationTable::bundled());
      ols::Options o;
      o.intercept = intercept;
      if (max_lag) o.max_lag = *max_lag;
      auto files = pl::ols_outputs(ols::fit_ols(problem, o), cfg.svg);
      if (export_problem) files.push_back({"problem.csv", design::export_problem_csv(problem)});
      report_written(cfg.output_dir, files);
      return kOk;
    }

    if (armax_cmd->parsed()) {
      auto cfg = make_config(armax_opts);
      if (p_order) cfg.armax.p = *p_order;
      if (q_order) cfg.armax.q = *q_order;
      const auto ds = pl::resample_to(pl::load_dataset(cfg), cfg.sampling_min);
      const auto problem = design::build_problem(ds, constants(cfg), thermo::SaturationTable::bundled());
      const auto fit = armax::fit_armax(problem, cfg.armax);
      report_written(cfg.output_dir, pl::armax_outputs(fit, cfg.armax, cfg.svg));
      if (!fit.converged) std::cerr << "warning: optimiser stopped before convergence\n";
      return kOk;
    }

    if (vs_cmd->parsed()) {
      auto cfg = make_config(vs_opts);
      if (catalog_path) cfg.catalog = *catalog_path;
      if (vs_guess) cfg.vs_guess = *vs_guess;
      const auto ds = pl::resample_to(pl::load_dataset(cfg), cfg.sampling_min);
      const ValveCatalog catalog =
          cfg.catalog ? ValveCatalog::from_csv(csv::read_file(*cfg.catalog)) : ValveCatalog::bundled();
      const vs::ProblemBuilder builder(ds, cfg.eta_vol);
      vs::SearchOptions opts;
      opts.vs_guess = cfg.vs_guess;
      opts.seed = cfg.seed;
      opts.jobs = cfg.jobs;
      const auto report = vs::search_valve_sets(builder, catalog, opts);
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
      auto files = pl::search_outputs(report, catalog);
      if (refit && !report.rows.empty() && report.rows.front().ok()) {
        const double vs_hat = report.rows.front().result.vs_hat;
        const auto problem =
            design::build_problem(ds, design::SystemConstants{vs_hat, cfg.eta_vol}, thermo::SaturationTable::bundled());
        for (auto& f : pl::armax_outputs(armax::fit_armax(problem, cfg.armax), cfg.armax, cfg.svg)) {
          f.name = "refit_" + f.name;
          files.push_back(std::move(f));
        }
      }
      report_written(cfg.output_dir, files);
      return kOk;
    }

    if (sweep_cmd->parsed() || report_cmd->parsed()) {
      auto cfg = make_config(sweep_opts);
      if (sweep_list) cfg.sweep = pl::parse_sweep(*sweep_list);
      if (models) {
        cfg.models.clear();
        for (const auto& m : pl::parse_models(*models)) cfg.models.push_back(m);
      }
      if (p_order) cfg.armax.p = *p_order;
      if (q_order) cfg.armax.q = *q_order;
      cfg.validate_sweep();
      const auto ds = pl::load_dataset(cfg);
      const auto report = pl::run_sweep(cfg, ds);
      auto files = pl::sweep_outputs(report, cfg.svg);
      if (report_cmd->parsed()) files.push_back({"report.md", pl::report_markdown(cfg, report)});
      report_written(cfg.output_dir, files);
      return kOk;
    }
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}
