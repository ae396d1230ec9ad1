#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "valvest/thermo.hpp"
#include "valvest/timeseries.hpp"

namespace valvest::design {

inline constexpr double kPascalPerBar = 1e5;

/// Valve area (m^2) represented by one catalog unit. Regressors carry this factor,
/// so coefficients come out directly in catalog units and x * A is in kg/s.
inline constexpr double kValveAreaPerCatalogUnit = 1e-6;

struct SystemConstants {
  double vs_m3 = 0.0;     ///< MT compressor stroke volume at full load
  double eta_vol = 0.9;   ///< volumetric efficiency

  /// vs > 0 and eta_vol in (0.5, 1]. Throws DataError.
  void validate() const;
};

/// y = x * beta + e, one column per evaporator (LT block then MT block).
struct RegressionProblem {
  Eigen::VectorXd y;  ///< kg/s
  Eigen::MatrixXd x;  ///< kg/s per catalog unit
  std::vector<std::string> labels;
  std::vector<TimePoint> timestamps;
  std::vector<std::size_t> grid_index;  ///< row position on the source dataset grid
  std::chrono::seconds dt{60};          ///< grid spacing of the source dataset

  Eigen::Index rows() const noexcept { return x.rows(); }
  Eigen::Index cols() const noexcept { return x.cols(); }
};

/// f * eta_vol * V_s * rho_gas.
double compressor_massflow(double f_comp, const SystemConstants& consts, double rho_gas);

/// Q(h_gc, p_rec) * m_mt.
double bypass_massflow(double m_mt, double h_gc, double p_rec, const thermo::SaturationTable& table);

/// sqrt(max(p_rec - p_e, 0) * rho_liq) * lambda, pressures in bar converted to Pa,
/// scaled by kValveAreaPerCatalogUnit.
double regressor(double p_rec_bar, double p_e_bar, double lambda, double rho_liq);

/// State point for the compressor gas density: the highest MT evaporator pressure
/// (all evaporators when the plant has no MT group). nullopt if any are missing.
std::optional<double> suction_pressure(const PlantDataset& ds, std::size_t t);

/// Regressor of one evaporator on the dataset grid (missing where any input is).
Channel regressor_channel(const PlantDataset& ds, std::size_t evaporator,
                          const thermo::SaturationTable& table);

/// Response y_t = compressor mass flow minus by-pass flow, on the dataset grid.
Channel response_channel(const PlantDataset& ds, const SystemConstants& consts,
                         const thermo::SaturationTable& table);

/// Builds the mass-balance regression. Rows with any missing input are dropped.
/// Throws DegenerateColumn for an all-zero column and InsufficientRows when
/// fewer than 10 rows per column remain.
RegressionProblem build_problem(const PlantDataset& ds, const SystemConstants& consts,
                                const thermo::SaturationTable& table);

struct ColinearityEntry {
  std::string column;
  double max_abs_corr = 0.0;
  double vif = 1.0;
  bool flagged = false;  ///< max_abs_corr > 0.7 or vif > 10
};

inline constexpr double kCorrelationFlag = 0.7;
inline constexpr double kVifFlag = 10.0;

/// Pairwise Pearson correlations of the regressors and VIF_j = 1 / (1 - R_j^2),
/// with R_j^2 from regressing column j on the others plus an intercept.
/// Exact co-linearity yields VIF = +inf. Throws ZeroVariance.
std::vector<ColinearityEntry> colinearity_report(const RegressionProblem& p);

Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& x);

/// `timestamp,y,<label_1>..<label_nV>` CSV.
std::string export_problem_csv(const RegressionProblem& p);

}  // namespace valvest::design
