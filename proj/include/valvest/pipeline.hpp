#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "valvest/armax.hpp"
#include "valvest/design_matrix.hpp"
#include "valvest/ols.hpp"
#include "valvest/spectrum.hpp"
#include "valvest/stroke_volume.hpp"
#include "valvest/thermo.hpp"
#include "valvest/timeseries.hpp"

namespace valvest::pipeline {

enum class Model { Ols, Armax };
std::string to_string(Model m);
Model parse_model(const std::string& name);
/// Comma-separated model names.
std::vector<Model> parse_models(const std::string& text);

/// Everything a CLI run needs. Loaded from a JSON file; flags override individual keys.
struct RunConfig {
  std::filesystem::path dataset;
  std::optional<Schema> schema;  ///< inferred from the header when absent
  std::optional<double> vs_m3;
  double eta_vol = 0.9;
  std::vector<int> sweep;  ///< sampling times in minutes; default 1..30
  std::vector<Model> models{Model::Ols};
  armax::ArmaxSpec armax;
  int sampling_min = 1;  ///< sampling time of the single-fit subcommands
  std::filesystem::path output_dir{"out"};
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
  bool svg = false;
  std::optional<std::filesystem::path> catalog;
  std::optional<double> vs_guess;

  RunConfig();

  /// Sweep values are whole minutes in [1, 30], non-empty and unique.
  void validate_sweep() const;

  /// Keys: dataset, schema{timestamp, p_rec, f_comp, h_gc, evaporators[]}, system{vs_m3, eta_vol},
  /// sweep, models, armax{p, q}, sampling_min, output_dir, seed, jobs, svg, catalog, vs_guess.
  /// Relative paths resolve against `base`. Throws DataError on malformed content.
  static RunConfig from_json(const std::string& text, const std::filesystem::path& base = {});
};

/// "1..30", "1,5,10" or a mix such as "1..5,10,15".
std::vector<int> parse_sweep(const std::string& text);

/// Reads and parses the configured dataset.
PlantDataset load_dataset(const RunConfig& cfg);

/// Resamples to `minutes`; the dataset spacing must divide it. Throws DataError.
PlantDataset resample_to(const PlantDataset& ds, int minutes);

/// A file the run will write, relative to the output directory.
struct OutputFile {
  std::string name;
  std::string content;
};
using Outputs = std::vector<OutputFile>;

/// Writes the files in order, creating the directory.
void write_outputs(const std::filesystem::path& dir, const Outputs& files);

struct SpectrumRow {
  std::string evaporator;
  std::optional<spectrum::Periodogram> periodogram;
  std::optional<spectrum::CycleEstimate> cycle;
  int optimal_dt_min = 0;
  std::string error;
};

/// Periodogram of every evaporator's regressor channel.
std::vector<SpectrumRow> spectrum_analysis(const PlantDataset& ds, const thermo::SaturationTable& table,
                                           std::size_t jobs = 1);

/// `spectrum_summary.csv` plus `spectrum_<id>.csv` per evaporator (and SVGs when asked).
Outputs spectrum_outputs(const std::vector<SpectrumRow>& rows, bool svg);

/// `coefficients.csv`, `acf.csv` (and `acf.svg`).
Outputs ols_outputs(const ols::FitResult& fit, bool svg);

/// OLS files plus `model.csv` with phi, theta, sigma2, loglik, aic, converged.
Outputs armax_outputs(const armax::ArmaxFit& fit, const armax::ArmaxSpec& spec, bool svg);

struct SweepPoint {
  int dt_min = 0;
  Model model = Model::Ols;
  std::string evaporator;
  double beta = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double ljung_box_p = 0.0;
  std::string error;  ///< empty on success
};

struct SweepReport {
  std::vector<std::string> evaporators;
  std::vector<SweepPoint> points;  ///< ordered by model, dt, evaporator; |sweep| x n_V per model
  std::vector<SpectrumRow> spectrum;
};

/// Resample, build, fit for every sampling time and model. Failures become tagged rows.
/// Throws DataError before any work when the sweep is invalid or V_s is missing.
SweepReport run_sweep(const RunConfig& cfg, const PlantDataset& ds,
                      const thermo::SaturationTable& table = thermo::SaturationTable::bundled());

/// `sweep_<model>_<id>.csv` with `dt_min,beta,ci_lo,ci_hi,ljung_box_p,status`, plus the spectrum files.
Outputs sweep_outputs(const SweepReport& report, bool svg);

/// Search outputs: `valve_sets.csv` and, when requested, the ARMAX refit at the winner.
Outputs search_outputs(const vs::SearchReport& report, const ValveCatalog& catalog);

/// Markdown digest of a sweep.
std::string report_markdown(const RunConfig& cfg, const SweepReport& report);

}  // namespace valvest::pipeline
