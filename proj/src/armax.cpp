#include "valvest/armax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "valvest/errors.hpp"

namespace valvest::armax {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Scales coefficient k by c^k until every reciprocal root has modulus <= limit.
std::vector<double> shrink_into_region(std::vector<double> a, double limit) {
  double m = arma::max_reciprocal_root(a);
  if (!(m <= limit) || !std::isfinite(m)) {
    const double c = std::isfinite(m) && m > 0.0 ? limit / m : 0.0;
    double ck = c;
    for (auto& v : a) {
      v *= ck;
      ck *= c;
    }
  }
  return a;
}

// Yule-Walker AR(m) through Durbin-Levinson.
std::vector<double> yule_walker(const std::vector<double>& acvf, std::size_t m) {
  std::vector<double> a;
  double v = acvf[0];
  for (std::size_t k = 1; k <= m; ++k) {
    double num = acvf[k];
    for (std::size_t j = 0; j + 1 < k; ++j) num -= a[j] * acvf[k - 1 - j];
    const double pk = v > 0.0 ? num / v : 0.0;
    std::vector<double> next(k);
    for (std::size_t j = 0; j + 1 < k; ++j) next[j] = a[j] - pk * a[k - 2 - j];
    next[k - 1] = pk;
    a = std::move(next);
    v *= (1.0 - pk * pk);
  }
  return a;
}

}  // namespace

void ArmaxSpec::validate() const {
  if (p + q < 1) throw std::invalid_argument("ARMAX needs p + q >= 1");
  if (p > 10 || q > 10) throw std::invalid_argument("ARMAX orders are limited to 10");
}

std::vector<Segment> contiguous_segments(const design::RegressionProblem& p) {
  std::vector<Segment> out;
  const auto& g = p.grid_index;
  if (g.empty()) return out;
  std::size_t begin = 0;
  for (std::size_t i = 1; i < g.size(); ++i) {
    if (g[i] != g[i - 1] + 1) {
      out.push_back({begin, i});
      begin = i;
    }
  }
  out.push_back({begin, g.size()});
  return out;
}

ArmaxLikelihood::ArmaxLikelihood(const design::RegressionProblem& problem, ArmaxSpec spec,
                                 std::vector<Segment> segments)
    : spec_(spec) {
  spec_.validate();
  const std::size_t min_len = 10 * (spec_.p + spec_.q);
  for (const auto& s : segments) {
    if (s.end > static_cast<std::size_t>(problem.rows()) || s.begin >= s.end) {
      throw std::invalid_argument("segment outside the problem rows");
    }
    if (s.size() > min_len) segments_.push_back(s);
  }
  for (const auto& s : segments_) {
    n_ += s.size();
    max_segment_ = std::max(max_segment_, s.size());
  }
  const auto k = static_cast<std::size_t>(problem.cols());
  if (n_ <= min_len + k) {
    throw SegmentTooShort("ARMAX(" + std::to_string(spec_.p) + "," + std::to_string(spec_.q) +
                          ") needs more than " + std::to_string(min_len + k) +
                          " rows in segments longer than " + std::to_string(min_len) + ", got " +
                          std::to_string(n_));
  }
  x_.resize(static_cast<Eigen::Index>(n_), problem.cols());
  y_.resize(static_cast<Eigen::Index>(n_));
  std::size_t pos = 0;
  for (const auto& s : segments_) {
    const auto len = static_cast<Eigen::Index>(s.size());
    x_.middleRows(static_cast<Eigen::Index>(pos), len) = problem.x.middleRows(static_cast<Eigen::Index>(s.begin), len);
    y_.segment(static_cast<Eigen::Index>(pos), len) = problem.y.segment(static_cast<Eigen::Index>(s.begin), len);
    local_segments_.push_back({pos, pos + s.size()});
    for (std::size_t r = s.begin; r < s.end; ++r) rows_.push_back(r);
    pos += s.size();
  }
}

void ArmaxLikelihood::decode(const Eigen::VectorXd& u, std::vector<double>& phi,
                             std::vector<double>& theta) const {
  std::vector<double> pa(spec_.p);
  std::vector<double> pm(spec_.q);
  for (std::size_t i = 0; i < spec_.p; ++i) pa[i] = std::tanh(u(static_cast<Eigen::Index>(i)));
  for (std::size_t i = 0; i < spec_.q; ++i) pm[i] = std::tanh(u(static_cast<Eigen::Index>(spec_.p + i)));
  phi = arma::pacf_to_ar(pa);
  theta = arma::pacf_to_ar(pm);
  for (auto& v : theta) v = -v;
}

Eigen::VectorXd ArmaxLikelihood::encode(std::span<const double> phi, std::span<const double> theta) const {
  Eigen::VectorXd u(static_cast<Eigen::Index>(dimension()));
  const auto pa = arma::ar_to_pacf(phi);
  std::vector<double> neg(theta.begin(), theta.end());
  for (auto& v : neg) v = -v;
  const auto pm = arma::ar_to_pacf(neg);
  constexpr double kEdge = 0.999;
  for (std::size_t i = 0; i < spec_.p; ++i) {
    u(static_cast<Eigen::Index>(i)) = std::atanh(std::clamp(pa[i], -kEdge, kEdge));
  }
  for (std::size_t i = 0; i < spec_.q; ++i) {
    u(static_cast<Eigen::Index>(spec_.p + i)) = std::atanh(std::clamp(pm[i], -kEdge, kEdge));
  }
  return u;
}

ArmaxLikelihood::Profile ArmaxLikelihood::profile(std::span<const double> phi,
                                                  std::span<const double> theta) const {
  const arma::InnovationsFilter filter(phi, theta, max_segment_);
  const auto k = x_.cols();
  const auto n = static_cast<Eigen::Index>(n_);
  Eigen::MatrixXd xw(n, k);
  Eigen::VectorXd yw(n);
  double log_det = 0.0;
  for (const auto& s : local_segments_) {
    const auto b = static_cast<Eigen::Index>(s.begin);
    const auto len = s.size();
    log_det += filter.whiten(std::span<const double>(y_.data() + b, len), std::span<double>(yw.data() + b, len));
    for (Eigen::Index j = 0; j < k; ++j) {
      filter.whiten(std::span<const double>(x_.col(j).data() + b, len),
                    std::span<double>(xw.col(j).data() + b, len));
    }
  }
  Profile out;
  out.whitened_gram = Eigen::MatrixXd::Zero(k, k);
  out.whitened_gram.selfadjointView<Eigen::Lower>().rankUpdate(xw.transpose());
  out.whitened_gram = out.whitened_gram.selfadjointView<Eigen::Lower>();
  const Eigen::VectorXd xty = xw.transpose() * yw;
  out.beta = out.whitened_gram.llt().solve(xty);
  const Eigen::VectorXd resid = yw - xw * out.beta;
  out.rss = resid.squaredNorm();
  const double nd = static_cast<double>(n_);
  out.sigma2 = out.rss / nd;
  out.loglik = -0.5 * nd * (std::log(2.0 * std::numbers::pi * out.sigma2) + 1.0) - 0.5 * log_det;
  out.innovations.assign(resid.data(), resid.data() + resid.size());
  return out;
}

double ArmaxLikelihood::profile_loglik(const Eigen::VectorXd& u) const {
  if (!u.allFinite()) return kNegInf;
  std::vector<double> phi;
  std::vector<double> theta;
  decode(u, phi, theta);
  try {
    const double ll = profile(phi, theta).loglik;
    return std::isfinite(ll) ? ll : kNegInf;
  } catch (const NonFiniteLikelihood&) {
    return kNegInf;
  }
}

double ArmaxLikelihood::loglik(const Eigen::VectorXd& beta, std::span<const double> phi,
                               std::span<const double> theta, double sigma2) const {
  const arma::InnovationsFilter filter(phi, theta, max_segment_);
  const Eigen::VectorXd e = y_ - x_ * beta;
  std::vector<double> w(n_);
  double log_det = 0.0;
  for (const auto& s : local_segments_) {
    log_det += filter.whiten(std::span<const double>(e.data() + s.begin, s.size()),
                             std::span<double>(w.data() + s.begin, s.size()));
  }
  double ss = 0.0;
  for (double v : w) ss += v * v;
  const double nd = static_cast<double>(n_);
  return -0.5 * (nd * std::log(2.0 * std::numbers::pi * sigma2) + log_det + ss / sigma2);
}

Eigen::VectorXd ArmaxLikelihood::gradient(const Eigen::VectorXd& u, double step) const {
  Eigen::VectorXd g(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double h = step * std::max(1.0, std::abs(u(i)));
    Eigen::VectorXd up = u;
    Eigen::VectorXd dn = u;
    up(i) += h;
    dn(i) -= h;
    g(i) = (profile_loglik(up) - profile_loglik(dn)) / (2.0 * h);
  }
  return g;
}

void ArmaxLikelihood::initial_coefficients(std::vector<double>& phi, std::vector<double>& theta) const {
  const std::size_t p = spec_.p;
  const std::size_t q = spec_.q;
  phi.assign(p, 0.0);
  theta.assign(q, 0.0);

  const ols::LeastSquares ls(x_);
  const Eigen::VectorXd e = y_ - x_ * ls.solve(y_);
  const double mean = e.mean();

  // Long autoregression on the pooled segments gives innovation estimates.
  std::size_t shortest = n_;
  for (const auto& s : local_segments_) shortest = std::min(shortest, s.size());
  const std::size_t m = std::min<std::size_t>(std::max<std::size_t>(20, p + q + 5), shortest / 4);
  if (m < std::max(p, q) + 1) return;
  std::vector<double> acvf(m + 1, 0.0);
  for (const auto& s : local_segments_) {
    for (std::size_t k = 0; k <= m; ++k) {
      for (std::size_t t = s.begin + k; t < s.end; ++t) {
        acvf[k] += (e(static_cast<Eigen::Index>(t)) - mean) * (e(static_cast<Eigen::Index>(t - k)) - mean);
      }
    }
  }
  for (auto& v : acvf) v /= static_cast<double>(n_);
  if (!(acvf[0] > 0.0)) return;
  const auto a = yule_walker(acvf, m);

  std::vector<double> eps(n_, 0.0);
  for (const auto& s : local_segments_) {
    for (std::size_t t = s.begin + m; t < s.end; ++t) {
      double v = e(static_cast<Eigen::Index>(t));
      for (std::size_t j = 1; j <= m; ++j) v -= a[j - 1] * e(static_cast<Eigen::Index>(t - j));
      eps[t] = v;
    }
  }
  const std::size_t lead = m + q;
  std::size_t rows = 0;
  for (const auto& s : local_segments_) rows += s.size() > lead ? s.size() - lead : 0;
  if (rows <= 2 * (p + q)) return;
  Eigen::MatrixXd z(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(p + q));
  Eigen::VectorXd target(static_cast<Eigen::Index>(rows));
  Eigen::Index r = 0;
  for (const auto& s : local_segments_) {
    for (std::size_t t = s.begin + lead; t < s.end; ++t, ++r) {
      for (std::size_t j = 1; j <= p; ++j) z(r, static_cast<Eigen::Index>(j - 1)) = e(static_cast<Eigen::Index>(t - j));
      for (std::size_t j = 1; j <= q; ++j) z(r, static_cast<Eigen::Index>(p + j - 1)) = eps[t - j];
      target(r) = e(static_cast<Eigen::Index>(t));
    }
  }
  const Eigen::VectorXd coef = z.colPivHouseholderQr().solve(target);
  if (!coef.allFinite()) return;
  for (std::size_t j = 0; j < p; ++j) phi[j] = coef(static_cast<Eigen::Index>(j));
  for (std::size_t j = 0; j < q; ++j) theta[j] = coef(static_cast<Eigen::Index>(p + j));
  constexpr double kLimit = 0.98;
  phi = shrink_into_region(phi, kLimit);
  std::vector<double> neg = theta;
  for (auto& v : neg) v = -v;
  neg = shrink_into_region(neg, kLimit);
  for (std::size_t j = 0; j < q; ++j) theta[j] = -neg[j];
}

namespace {

struct Bfgs {
  Eigen::VectorXd u;
  double f = 0.0;  // negative log-likelihood
  int iterations = 0;
  bool converged = false;
};

Bfgs maximise(const ArmaxLikelihood& lik, Eigen::VectorXd u0, const FitOptions& opt) {
  Bfgs st;
  st.u = std::move(u0);
  const auto dim = st.u.size();
  st.f = -lik.profile_loglik(st.u);
  if (!std::isfinite(st.f)) throw NonFiniteLikelihood("log-likelihood is not finite at the starting point");
  Eigen::VectorXd g = -lik.gradient(st.u);
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(dim, dim);
  int small_steps = 0;
  bool scaled = false;
  for (int it = 0; it < opt.max_iterations; ++it) {
    st.iterations = it + 1;
    if (!g.allFinite()) break;
    Eigen::VectorXd d = -h * g;
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      h.setIdentity();
      d = -g;
      slope = g.dot(d);
      if (!(slope < 0.0)) {
        st.converged = true;
        break;
      }
    }
    const double max_step = 2.0;
    const double norm = d.lpNorm<Eigen::Infinity>();
    double alpha = norm > max_step ? max_step / norm : 1.0;
    double f_new = std::numeric_limits<double>::infinity();
    Eigen::VectorXd u_new;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      u_new = st.u + alpha * d;
      f_new = -lik.profile_loglik(u_new);
      if (std::isfinite(f_new) && f_new <= st.f + 1e-4 * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      // No decrease along the direction: stationary up to gradient noise, or stuck.
      st.converged = g.lpNorm<Eigen::Infinity>() < 1e-3 * std::max(1.0, std::abs(st.f)) * 1e-3;
      if (!st.converged && !h.isIdentity()) {
        h.setIdentity();
        continue;
      }
      break;
    }
    const Eigen::VectorXd g_new = -lik.gradient(u_new);
    const Eigen::VectorXd s = u_new - st.u;
    const Eigen::VectorXd yv = g_new - g;
    const double rel = std::abs(st.f - f_new) / std::max(1.0, std::abs(st.f));
    st.u = u_new;
    st.f = f_new;
    g = g_new;
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      if (!scaled) {
        h *= sy / yv.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd i_rsy = Eigen::MatrixXd::Identity(dim, dim) - rho * s * yv.transpose();
      h = i_rsy * h * i_rsy.transpose() + rho * s * s.transpose();
    }
    if (rel < opt.tolerance) {
      if (++small_steps >= 2) {
        st.converged = true;
        break;
      }
    } else {
      small_steps = 0;
    }
  }
  return st;
}

}  // namespace

ArmaxFit fit_armax(const design::RegressionProblem& problem, const ArmaxSpec& spec,
                   const std::vector<Segment>& segments, const FitOptions& options) {
  const ArmaxLikelihood lik(problem, spec, segments);

  std::vector<double> phi0;
  std::vector<double> theta0;
  lik.initial_coefficients(phi0, theta0);
  Eigen::VectorXd u0 = lik.encode(phi0, theta0);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(u0.size());
  if (!(lik.profile_loglik(u0) >= lik.profile_loglik(zero))) u0 = zero;

  const Bfgs st = maximise(lik, u0, options);

  ArmaxFit fit;
  fit.labels = problem.labels;
  lik.decode(st.u, fit.phi, fit.theta);
  const auto prof = lik.profile(fit.phi, fit.theta);
  fit.beta = prof.beta;
  fit.loglik = prof.loglik;
  fit.sigma2 = prof.sigma2;
  fit.converged = st.converged;
  fit.iterations = st.iterations;
  const auto k = static_cast<std::size_t>(problem.cols());
  const std::size_t n = lik.observations();
  fit.dof = static_cast<long>(n - k - spec.p - spec.q);
  fit.aic = -2.0 * fit.loglik + 2.0 * static_cast<double>(k + spec.p + spec.q + 1);
  const double s2 = prof.rss / static_cast<double>(fit.dof);
  const Eigen::MatrixXd cov = s2 * prof.whitened_gram.llt().solve(Eigen::MatrixXd::Identity(
                                        static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)));
  fit.se = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  const double tq = ols::t_quantile(0.975, static_cast<double>(fit.dof));
  for (std::size_t j = 0; j < k; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    fit.ci95.push_back({fit.beta(jj) - tq * fit.se(jj), fit.beta(jj) + tq * fit.se(jj)});
  }
  fit.innovations = prof.innovations;
  for (const auto& s : lik.segments()) {
    for (std::size_t r = s.begin; r < s.end; ++r) fit.rows.push_back(r);
  }
  fit.residuals.resize(static_cast<Eigen::Index>(fit.rows.size()));
  for (std::size_t i = 0; i < fit.rows.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(fit.rows[i]);
    fit.residuals(static_cast<Eigen::Index>(i)) = problem.y(r) - problem.x.row(r).dot(fit.beta);
  }
  const std::size_t lag = options.max_lag != 0
                              ? options.max_lag
                              : ols::default_max_lag(static_cast<double>(problem.dt.count()) / 60.0);
  const Eigen::Map<const Eigen::VectorXd> innov(fit.innovations.data(),
                                                static_cast<Eigen::Index>(fit.innovations.size()));
  fit.diagnostics = ols::residual_diagnostics(innov, lag, spec.p + spec.q);
  return fit;
}

ArmaxFit fit_armax(const design::RegressionProblem& problem, const ArmaxSpec& spec,
                   const FitOptions& options) {
  return fit_armax(problem, spec, contiguous_segments(problem), options);
}

}  // namespace valvest::armax
