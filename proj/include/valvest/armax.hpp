#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "valvest/arma.hpp"
#include "valvest/design_matrix.hpp"
#include "valvest/ols.hpp"

namespace valvest::armax {

/// Orders of the ARMA error model. The exogenous input enters without lags.
struct ArmaxSpec {
  std::size_t p = 4;
  std::size_t q = 1;

  /// p + q >= 1, both <= 10.
  void validate() const;
};

/// Half-open row range [begin, end) of a regression problem without grid gaps.
struct Segment {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const noexcept { return end - begin; }
};

/// Splits the rows of a problem wherever consecutive rows are not adjacent on the grid.
std::vector<Segment> contiguous_segments(const design::RegressionProblem& p);

struct ArmaxFit {
  std::vector<std::string> labels;
  Eigen::VectorXd beta;
  Eigen::VectorXd se;
  std::vector<ols::Interval> ci95;
  std::vector<double> phi;    ///< AR coefficients, e_t = sum phi_k e_{t-k} + ...
  std::vector<double> theta;  ///< MA coefficients, ... + eps_t + sum theta_k eps_{t-k}
  double sigma2 = 0.0;        ///< innovation variance (ML)
  double loglik = 0.0;
  double aic = 0.0;
  long dof = 0;
  std::vector<double> innovations;  ///< standardised one-step prediction errors
  Eigen::VectorXd residuals;        ///< y - x beta on the rows used
  std::vector<std::size_t> rows;    ///< problem rows entering the likelihood
  ols::DiagnosticsReport diagnostics;  ///< computed on the innovations
  bool converged = false;
  int iterations = 0;
};

struct FitOptions {
  int max_iterations = 500;
  double tolerance = 1e-8;   ///< relative log-likelihood change
  std::size_t max_lag = 0;   ///< 0 selects ols::default_max_lag
};

/// Exact Gaussian log-likelihood of a regression with ARMA errors, summed over
/// independent stationary segments.
///
/// The optimisation variables are unconstrained: tanh maps them to partial
/// autocorrelations, which the Durbin-Levinson recursion turns into stationary AR
/// and invertible MA coefficients. Beta and the innovation variance are profiled
/// out by generalised least squares on the whitened data.
class ArmaxLikelihood {
 public:
  /// Segments no longer than 10 (p + q) rows are left out. Throws SegmentTooShort
  /// when the remaining rows do not exceed 10 (p + q) + n_V.
  ArmaxLikelihood(const design::RegressionProblem& problem, ArmaxSpec spec,
                  std::vector<Segment> segments);

  struct Profile {
    double loglik = 0.0;
    Eigen::VectorXd beta;
    double rss = 0.0;
    double sigma2 = 0.0;
    Eigen::MatrixXd whitened_gram;  ///< X~^T X~
    std::vector<double> innovations;
  };

  std::size_t dimension() const noexcept { return spec_.p + spec_.q; }
  std::size_t observations() const noexcept { return n_; }
  const ArmaxSpec& spec() const noexcept { return spec_; }
  const std::vector<Segment>& segments() const noexcept { return segments_; }

  /// Concentrated log-likelihood at fixed ARMA coefficients. With all
  /// coefficients zero this is the OLS fit.
  Profile profile(std::span<const double> phi, std::span<const double> theta) const;

  /// Concentrated log-likelihood at unconstrained parameters; -inf when the
  /// filter breaks down.
  double profile_loglik(const Eigen::VectorXd& u) const;

  /// Full Gaussian log-likelihood at explicit parameter values.
  double loglik(const Eigen::VectorXd& beta, std::span<const double> phi,
                std::span<const double> theta, double sigma2) const;

  /// Central-difference gradient of profile_loglik.
  Eigen::VectorXd gradient(const Eigen::VectorXd& u, double step = 1e-5) const;

  void decode(const Eigen::VectorXd& u, std::vector<double>& phi, std::vector<double>& theta) const;
  Eigen::VectorXd encode(std::span<const double> phi, std::span<const double> theta) const;

  /// Hannan-Rissanen starting values from OLS residuals, shrunk into the
  /// stationary / invertible region when needed.
  void initial_coefficients(std::vector<double>& phi, std::vector<double>& theta) const;

 private:
  ArmaxSpec spec_;
  std::vector<Segment> segments_;
  std::size_t n_ = 0;
  std::size_t max_segment_ = 0;
  Eigen::MatrixXd x_;  // rows of the used segments, stacked
  Eigen::VectorXd y_;
  std::vector<std::size_t> rows_;
  std::vector<Segment> local_segments_;  // segments in stacked coordinates
};

/// Maximum-likelihood fit of the regression with ARMA(p, q) errors.
/// Starts from OLS beta with Hannan-Rissanen ARMA values and runs BFGS on the
/// unconstrained parameters. `converged` is false when the optimiser stalls; the best
/// parameters found are returned.
ArmaxFit fit_armax(const design::RegressionProblem& problem, const ArmaxSpec& spec,
                   const std::vector<Segment>& segments, const FitOptions& options = {});

ArmaxFit fit_armax(const design::RegressionProblem& problem, const ArmaxSpec& spec,
                   const FitOptions& options = {});

}  // namespace valvest::armax
