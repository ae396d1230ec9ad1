#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "valvest/design_matrix.hpp"

namespace valvest::ols {

/// Residual autocorrelation summary.
struct DiagnosticsReport {
  std::vector<double> acf;  ///< lags 1..max_lag, 1/n normalisation
  std::size_t max_lag = 0;
  double conf_band = 0.0;  ///< 1.96 / sqrt(n)
  double ljung_box = 0.0;
  double ljung_box_p = 1.0;
  std::size_t ljung_box_dof = 0;
  double durbin_watson = 0.0;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct FitResult {
  std::vector<std::string> labels;
  Eigen::VectorXd beta;  ///< valve constants, catalog units
  Eigen::VectorXd se;
  std::vector<Interval> ci95;
  Eigen::VectorXd residuals;
  double sigma2 = 0.0;  ///< RSS / dof
  long dof = 0;
  DiagnosticsReport diagnostics;
};

struct Options {
  /// Appends a constant column labelled "intercept". Diagnostic use only; the
  /// mass balance itself has no constant term.
  bool intercept = false;
  /// ACF / Ljung-Box lag; 0 selects default_max_lag for the problem's spacing.
  std::size_t max_lag = 0;
};

/// 50 lags for 1-minute data, 20 otherwise.
std::size_t default_max_lag(double dt_minutes);

/// Two-sided Student-t quantile t_{p, dof}.
double t_quantile(double p, double dof);

/// Upper tail of the chi-square distribution.
double chi2_sf(double x, double dof);

/// Thin QR factorisation of a design matrix, reusable across responses.
///
/// Rank is checked on construction: when the smallest singular value falls below
/// 1e-10 times the largest, RankDeficient lists the columns spanning the null space.
class LeastSquares {
 public:
  explicit LeastSquares(Eigen::MatrixXd x);

  const Eigen::MatrixXd& x() const noexcept { return x_; }

  /// beta minimising ||y - x beta||^2.
  Eigen::VectorXd solve(const Eigen::VectorXd& y) const;

  /// Diagonal of (x^T x)^{-1}.
  const Eigen::VectorXd& inverse_gram_diagonal() const noexcept { return inv_gram_diag_; }

 private:
  Eigen::MatrixXd x_;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr_;
  Eigen::MatrixXd r_inv_;
  Eigen::VectorXd inv_gram_diag_;
};

/// Estimates, standard errors, t-based 95 % intervals and residual diagnostics
/// for a factorised design.
FitResult fit(const LeastSquares& ls, const Eigen::VectorXd& y, std::vector<std::string> labels,
              std::size_t max_lag);

FitResult fit_ols(const design::RegressionProblem& p, const Options& options = {});

/// Sample ACF, Ljung-Box (chi-square with max_lag - fitted_params dof) and
/// Durbin-Watson. The lag is reduced to n/4 when fewer than 4*max_lag residuals exist.
DiagnosticsReport residual_diagnostics(const Eigen::VectorXd& residuals, std::size_t max_lag,
                                       std::size_t fitted_params = 0);

}  // namespace valvest::ols
