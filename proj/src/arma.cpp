#include "valvest/arma.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "valvest/errors.hpp"

namespace valvest::arma {

namespace {

Eigen::MatrixXd transition(std::span<const double> phi, std::size_t r) {
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r));
  for (std::size_t i = 0; i < r; ++i) {
    if (i < phi.size()) t(static_cast<Eigen::Index>(i), 0) = phi[i];
    if (i + 1 < r) t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i + 1)) = 1.0;
  }
  return t;
}

Eigen::VectorXd disturbance(std::span<const double> theta, std::size_t r) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(r));
  v(0) = 1.0;
  for (std::size_t j = 1; j < r; ++j) {
    if (j - 1 < theta.size()) v(static_cast<Eigen::Index>(j)) = theta[j - 1];
  }
  return v;
}

// Solves P = T P T' + Q through the Kronecker form.
Eigen::MatrixXd stationary_covariance(const Eigen::MatrixXd& t, const Eigen::MatrixXd& q) {
  const Eigen::Index r = t.rows();
  const Eigen::Index rr = r * r;
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(rr, rr);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < r; ++j)
      for (Eigen::Index k = 0; k < r; ++k)
        for (Eigen::Index l = 0; l < r; ++l) a(i * r + k, j * r + l) -= t(i, j) * t(k, l);
  Eigen::VectorXd vq(rr);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index k = 0; k < r; ++k) vq(i * r + k) = q(i, k);
  const Eigen::VectorXd vp = a.partialPivLu().solve(vq);
  Eigen::MatrixXd p(r, r);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index k = 0; k < r; ++k) p(i, k) = vp(i * r + k);
  return 0.5 * (p + p.transpose());
}

std::size_t state_dimension(std::size_t p, std::size_t q) { return std::max<std::size_t>({p, q + 1, 1}); }

}  // namespace

double max_reciprocal_root(std::span<const double> a) {
  std::size_t m = a.size();
  while (m > 0 && a[m - 1] == 0.0) --m;
  if (m == 0) return 0.0;
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (std::size_t k = 0; k < m; ++k) c(0, static_cast<Eigen::Index>(k)) = a[k];
  for (std::size_t k = 1; k < m; ++k) c(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k - 1)) = 1.0;
  const Eigen::EigenSolver<Eigen::MatrixXd> es(c, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

bool is_stationary(std::span<const double> phi) { return max_reciprocal_root(phi) < 1.0; }

bool is_invertible(std::span<const double> theta) {
  std::vector<double> neg(theta.begin(), theta.end());
  for (auto& v : neg) v = -v;
  return max_reciprocal_root(neg) < 1.0;
}

std::vector<double> pacf_to_ar(std::span<const double> pacf) {
  std::vector<double> a;
  a.reserve(pacf.size());
  for (std::size_t k = 0; k < pacf.size(); ++k) {
    const double pk = pacf[k];
    std::vector<double> next(k + 1);
    for (std::size_t j = 0; j < k; ++j) next[j] = a[j] - pk * a[k - 1 - j];
    next[k] = pk;
    a = std::move(next);
  }
  return a;
}

std::vector<double> ar_to_pacf(std::span<const double> ar) {
  std::vector<double> a(ar.begin(), ar.end());
  std::vector<double> pacf(a.size());
  for (std::size_t k = a.size(); k-- > 0;) {
    const double pk = a[k];
    pacf[k] = pk;
    if (!(std::abs(pk) < 1.0)) throw UnstableParameters("AR polynomial is not stationary");
    std::vector<double> prev(k);
    for (std::size_t j = 0; j < k; ++j) prev[j] = (a[j] + pk * a[k - 1 - j]) / (1.0 - pk * pk);
    a = std::move(prev);
  }
  return pacf;
}

std::vector<double> theoretical_acvf(std::span<const double> phi, std::span<const double> theta,
                                     std::size_t max_lag) {
  const std::size_t r = state_dimension(phi.size(), theta.size());
  const Eigen::MatrixXd t = transition(phi, r);
  const Eigen::VectorXd rv = disturbance(theta, r);
  Eigen::MatrixXd cov = stationary_covariance(t, rv * rv.transpose());
  std::vector<double> out;
  out.reserve(max_lag + 1);
  for (std::size_t k = 0; k <= max_lag; ++k) {
    out.push_back(cov(0, 0));
    cov = t * cov;
  }
  return out;
}

std::vector<double> simulate_arma(std::span<const double> phi, std::span<const double> theta,
                                  double sigma2, std::size_t n, std::uint64_t seed) {
  if (!is_stationary(phi)) throw UnstableParameters("AR part is not stationary");
  if (!is_invertible(theta)) throw UnstableParameters("MA part is not invertible");
  if (!(sigma2 >= 0.0)) throw UnstableParameters("innovation variance must be non-negative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sigma = std::sqrt(sigma2);
  const std::size_t r = state_dimension(phi.size(), theta.size());
  const Eigen::MatrixXd t = transition(phi, r);
  const Eigen::VectorXd rv = disturbance(theta, r);

  // Exact stationary start, then burn-in.
  const Eigen::MatrixXd p0 = stationary_covariance(t, rv * rv.transpose());
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(p0);
  Eigen::VectorXd z(static_cast<Eigen::Index>(r));
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
  const Eigen::VectorXd d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
  Eigen::VectorXd state = ldlt.transpositionsP().transpose() * (ldlt.matrixL() * d.cwiseProduct(z));
  state *= sigma;

  const std::size_t burn = 10 * (phi.size() + theta.size()) + 100;
  std::vector<double> out;
  out.reserve(n);
  std::vector<double> pad_phi(r, 0.0);
  std::copy(phi.begin(), phi.end(), pad_phi.begin());
  Eigen::VectorXd next(static_cast<Eigen::Index>(r));
  for (std::size_t step = 0; step < burn + n; ++step) {
    if (step >= burn) out.push_back(state(0));
    const double eps = sigma * normal(rng);
    for (std::size_t i = 0; i < r; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      next(ii) = pad_phi[i] * state(0) + (i + 1 < r ? state(ii + 1) : 0.0) + rv(ii) * eps;
    }
    state.swap(next);
  }
  return out;
}

InnovationsFilter::InnovationsFilter(std::span<const double> phi, std::span<const double> theta,
                                     std::size_t max_length)
    : r_(state_dimension(phi.size(), theta.size())), phi_(r_, 0.0) {
  std::copy(phi.begin(), phi.end(), phi_.begin());
  const Eigen::MatrixXd t = transition(phi, r_);
  const Eigen::VectorXd rv = disturbance(theta, r_);
  const Eigen::MatrixXd q = rv * rv.transpose();
  Eigen::MatrixXd p = stationary_covariance(t, q);
  const auto r = static_cast<Eigen::Index>(r_);

  gain_ss_.assign(r_, 0.0);
  log_det_prefix_.push_back(0.0);
  for (std::size_t step = 0; step < max_length; ++step) {
    const double f = p(0, 0);
    if (!(f > 0.0) || !std::isfinite(f)) throw NonFiniteLikelihood("innovation variance is not positive");
    const Eigen::VectorXd k = t * p.col(0) / f;
    Eigen::MatrixXd p_next = t * p * t.transpose() + q - f * k * k.transpose();
    p_next = 0.5 * (p_next + p_next.transpose());
    f_.push_back(f);
    for (Eigen::Index i = 0; i < r; ++i) gain_.push_back(k(i));
    log_det_prefix_.push_back(log_det_prefix_.back() + std::log(f));
    const double change = (p_next - p).cwiseAbs().maxCoeff();
    p = std::move(p_next);
    if (change < 1e-15 && std::abs(f - 1.0) < 1e-13) break;
  }
  // Steady state: the state is recovered exactly, F = 1 and K = T R.
  f_ss_ = p(0, 0);
  const Eigen::VectorXd k = t * p.col(0) / f_ss_;
  for (Eigen::Index i = 0; i < r; ++i) gain_ss_[static_cast<std::size_t>(i)] = k(i);
}

double InnovationsFilter::log_det(std::size_t length) const {
  const std::size_t stored = f_.size();
  if (length <= stored) return log_det_prefix_[length];
  return log_det_prefix_[stored] + static_cast<double>(length - stored) * std::log(f_ss_);
}

double InnovationsFilter::whiten(std::span<const double> z, std::span<double> out) const {
  const std::size_t n = z.size();
  const std::size_t r = r_;
  double a[32] = {0.0};
  double nxt[32];
  const std::size_t stored = f_.size();
  const double inv_sqrt_ss = 1.0 / std::sqrt(f_ss_);
  for (std::size_t t = 0; t < n; ++t) {
    const double v = z[t] - a[0];
    const double* k;
    double inv_sqrt_f;
    if (t < stored) {
      k = &gain_[t * r];
      inv_sqrt_f = 1.0 / std::sqrt(f_[t]);
    } else {
      k = gain_ss_.data();
      inv_sqrt_f = inv_sqrt_ss;
    }
    out[t] = v * inv_sqrt_f;
    for (std::size_t i = 0; i < r; ++i) {
      nxt[i] = phi_[i] * a[0] + (i + 1 < r ? a[i + 1] : 0.0) + k[i] * v;
    }
    std::copy(nxt, nxt + r, a);
  }
  return log_det(n);
}

}  // namespace valvest::arma
