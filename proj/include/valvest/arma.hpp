#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace valvest::arma {

// Sign convention used throughout the library (identical to R's arima):
//
//   e_t = phi_1 e_{t-1} + ... + phi_p e_{t-p} + eps_t + theta_1 eps_{t-1} + ... + theta_q eps_{t-q}
//
// i.e. AR polynomial 1 - sum phi_k B^k and MA polynomial 1 + sum theta_k B^k.
// An AR polynomial written as 1 + sum phi'_k B^k maps via phi'_k = -phi_k.

/// All roots of 1 - sum phi_k z^k strictly outside the unit circle.
bool is_stationary(std::span<const double> phi);

/// All roots of 1 + sum theta_k z^k strictly outside the unit circle.
bool is_invertible(std::span<const double> theta);

/// Largest modulus among the reciprocal roots of 1 - sum a_k z^k.
double max_reciprocal_root(std::span<const double> a);

/// Durbin-Levinson map from partial autocorrelations in (-1, 1) to the
/// coefficients of a stationary AR polynomial.
std::vector<double> pacf_to_ar(std::span<const double> pacf);

/// Inverse of pacf_to_ar (step-down recursion). Requires stationary input.
std::vector<double> ar_to_pacf(std::span<const double> ar);

/// Stationary Gaussian ARMA draw of length n (burn-in of 10(p+q)+100 discarded).
/// Throws UnstableParameters when phi is not stationary or theta not invertible.
std::vector<double> simulate_arma(std::span<const double> phi, std::span<const double> theta,
                                  double sigma2, std::size_t n, std::uint64_t seed);

/// Autocovariances gamma_0..gamma_max_lag of the ARMA process with unit innovation
/// variance, from the state-space representation.
std::vector<double> theoretical_acvf(std::span<const double> phi, std::span<const double> theta,
                                     std::size_t max_lag);

/// Innovations recursion (Kalman filter) for a zero-mean ARMA(p, q) process with unit
/// innovation variance, in Harvey's state-space form. The gain sequence depends
/// only on (phi, theta), so it is computed once and replayed for any number of series.
class InnovationsFilter {
 public:
  /// Precomputes gains up to `max_length` steps, or until the state covariance settles.
  InnovationsFilter(std::span<const double> phi, std::span<const double> theta, std::size_t max_length);

  std::size_t state_dim() const noexcept { return r_; }

  /// Standardised innovations v_t / sqrt(F_t) of `z` written to `out`
  /// (same length as z). Returns sum of log F_t.
  double whiten(std::span<const double> z, std::span<double> out) const;

  /// Sum of log F_t over a series of the given length.
  double log_det(std::size_t length) const;

 private:
  std::size_t r_;
  std::vector<double> phi_;                     // padded to r
  std::vector<double> f_;                       // F_t for t < converged length
  std::vector<double> gain_;                    // K_t, row-major (t, r)
  std::vector<double> log_det_prefix_;          // cumulative sum of log F_t
  double f_ss_ = 1.0;
  std::vector<double> gain_ss_;
};

}  // namespace valvest::arma
