#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "valvest/design_matrix.hpp"
#include "valvest/thermo.hpp"
#include "valvest/timeseries.hpp"

namespace valvest::sim {

/// On/off valve: a square wave whose period is redrawn each cycle within +-10 %.
struct Hysteresis {
  double period_min = 40.0;
  double duty = 0.5;  ///< open fraction of each cycle
};

/// Continuous valve: mean-reverting random walk clipped to [0, 1].
struct Modulating {
  double mean = 0.5;
  double wander = 0.02;  ///< innovation standard deviation per minute
};

using Control = std::variant<Hysteresis, Modulating>;

/// mean + amplitude sin(2 pi t / period + phase) + iid N(0, noise_sd^2).
struct Profile {
  double mean = 0.0;
  double amplitude = 0.0;
  double period_min = 1440.0;
  double phase = 0.0;  ///< radians
  double noise_sd = 0.0;
};

struct EvaporatorSpec {
  std::string id;
  Group group = Group::MT;
  std::string valve;  ///< catalog name, e.g. "AKV 10-3"
  Control control;
  Profile p_e;  ///< bar
};

struct NoiseSpec {
  /// Response disturbance added to the cabinet mass-flow sum (kg/s) and carried
  /// into f_comp. ARMA(phi, theta) with innovation variance sigma2.
  std::vector<double> phi;
  std::vector<double> theta;
  double sigma2 = 0.0;
  /// Independent measurement noise on the logged channels.
  double p_sd = 0.0;       ///< bar, on P_rec and every P_e
  double lambda_sd = 0.0;  ///< on every lambda (re-clipped to [0, 1])
  double h_sd = 0.0;       ///< J/kg, on h_gc
  double f_sd = 0.0;       ///< on f_comp (re-clipped to [0, 1])
};

struct PlantSpec {
  std::string name;
  std::vector<EvaporatorSpec> evaporators;  ///< any order; output puts LT first
  Profile p_rec{35.0, 1.0, 1440.0, 0.0, 0.01};
  Profile h_gc{260000.0, 5000.0, 1440.0, 1.0, 200.0};
  double vs_m3 = 0.008;
  double eta_vol = 0.9;
  NoiseSpec noise;
  double duration_days = 240.0;
  std::uint64_t seed = 1;
  /// Keep the per-sample regressors and cabinet flows in GroundTruth.
  bool log_internals = true;

  /// Throws InfeasibleSpec / DataError on violated invariants: duty in (0, 1),
  /// positive periods, P_rec above every P_e, pressures inside the table.
  void validate(const thermo::SaturationTable& table) const;
};

struct GroundTruth {
  std::vector<std::string> ids;     ///< dataset order
  std::vector<std::string> valves;  ///< catalog names
  Eigen::VectorXd a;                ///< true valve constants, catalog units
  double vs_m3 = 0.0;
  double eta_vol = 0.0;
  NoiseSpec noise;
  Eigen::MatrixXd x;      ///< regressors (rows = samples), empty unless logged
  Eigen::MatrixXd m_cab;  ///< cabinet mass flows, kg/s
  Eigen::VectorXd disturbance;  ///< response disturbance, kg/s
  std::size_t clipped = 0;      ///< samples where f_comp hit a bound after noise
};

struct Simulation {
  PlantDataset data;
  GroundTruth truth;
};

/// Generates the plant. Without noise the mass balance closes exactly:
/// the design matrix built from the output reproduces x, and y = x a.
/// Throws InfeasibleSpec when the compressor would need more than full load.
Simulation simulate(const PlantSpec& spec, const thermo::SaturationTable& table = thermo::SaturationTable::bundled());

/// Named scenarios: otterup-like, iid-noise, arma-noise, modulating-only, hysteresis-only.
std::vector<PlantSpec> scenario_presets();

/// Throws std::invalid_argument for an unknown name.
PlantSpec preset(const std::string& name);

/// `evaporator,A_true` rows followed by a `vs_m3` row.
std::string truth_csv(const GroundTruth& truth);

/// AR coefficients (e_t = sum phi_k e_{t-k}) with the given reciprocal roots.
std::vector<double> ar_from_roots(const std::vector<double>& roots);

}  // namespace valvest::sim
