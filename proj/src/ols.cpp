#include "valvest/ols.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "valvest/errors.hpp"

namespace valvest::ols {

std::size_t default_max_lag(double dt_minutes) { return dt_minutes <= 1.0 ? 50 : 20; }

double t_quantile(double p, double dof) {
  boost::math::students_t dist(dof);
  return boost::math::quantile(dist, p);
}

double chi2_sf(double x, double dof) {
  if (!(x > 0.0)) return 1.0;
  boost::math::chi_squared dist(dof);
  return boost::math::cdf(boost::math::complement(dist, x));
}

LeastSquares::LeastSquares(Eigen::MatrixXd x) : x_(std::move(x)), qr_(x_) {
  const Eigen::Index k = x_.cols();
  if (x_.rows() <= k) {
    throw InsufficientRows("least squares needs more rows than columns");
  }
  const Eigen::MatrixXd r = qr_.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(r, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double tol = 1e-10 * sv(0);
  if (!(sv(k - 1) > tol)) {
    std::vector<std::size_t> cols;
    for (Eigen::Index j = 0; j < k; ++j) {
      double weight = 0.0;
      for (Eigen::Index s = 0; s < k; ++s) {
        if (!(sv(s) > tol)) weight = std::max(weight, std::abs(svd.matrixV()(j, s)));
      }
      if (weight > 1e-6) cols.push_back(static_cast<std::size_t>(j + 1));
    }
    std::string list;
    for (auto c : cols) list += (list.empty() ? "" : ",") + std::to_string(c);
    throw RankDeficient("design matrix is rank deficient; dependent columns {" + list + "}",
                        std::move(cols));
  }
  r_inv_ = r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  inv_gram_diag_ = r_inv_.rowwise().squaredNorm();
}

Eigen::VectorXd LeastSquares::solve(const Eigen::VectorXd& y) const {
  const Eigen::Index k = x_.cols();
  const Eigen::VectorXd qty = qr_.householderQ().adjoint() * y;
  return r_inv_ * qty.head(k);
}

FitResult fit(const LeastSquares& ls, const Eigen::VectorXd& y, std::vector<std::string> labels,
              std::size_t max_lag) {
  const auto& x = ls.x();
  FitResult r;
  r.labels = std::move(labels);
  r.beta = ls.solve(y);
  r.residuals = y - x * r.beta;
  r.dof = static_cast<long>(x.rows() - x.cols());
  r.sigma2 = r.residuals.squaredNorm() / static_cast<double>(r.dof);
  r.se = (r.sigma2 * ls.inverse_gram_diagonal().array()).sqrt();
  const double tq = t_quantile(0.975, static_cast<double>(r.dof));
  r.ci95.reserve(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    r.ci95.push_back({r.beta(j) - tq * r.se(j), r.beta(j) + tq * r.se(j)});
  }
  r.diagnostics = residual_diagnostics(r.residuals, max_lag);
  return r;
}

FitResult fit_ols(const design::RegressionProblem& p, const Options& options) {
  Eigen::MatrixXd x = p.x;
  auto labels = p.labels;
  if (options.intercept) {
    x.conservativeResize(Eigen::NoChange, x.cols() + 1);
    x.col(x.cols() - 1).setOnes();
    labels.emplace_back("intercept");
  }
  const std::size_t lag = options.max_lag != 0
                              ? options.max_lag
                              : default_max_lag(static_cast<double>(p.dt.count()) / 60.0);
  const LeastSquares ls(std::move(x));
  return fit(ls, p.y, std::move(labels), lag);
}

DiagnosticsReport residual_diagnostics(const Eigen::VectorXd& residuals, std::size_t max_lag,
                                       std::size_t fitted_params) {
  const auto n = static_cast<std::size_t>(residuals.size());
  DiagnosticsReport d;
  if (n < 8) {
    d.max_lag = 0;
    return d;
  }
  const std::size_t lag = std::max<std::size_t>(1, std::min(max_lag, n / 4));
  d.max_lag = lag;
  const double mean = residuals.mean();
  const Eigen::VectorXd e = residuals.array() - mean;
  const double c0 = e.squaredNorm();
  d.acf.resize(lag, 0.0);
  double q = 0.0;
  for (std::size_t k = 1; k <= lag; ++k) {
    const auto len = static_cast<Eigen::Index>(n - k);
    const double ck = e.head(len).dot(e.tail(len));
    const double rho = c0 > 0.0 ? ck / c0 : 0.0;
    d.acf[k - 1] = rho;
    q += rho * rho / static_cast<double>(n - k);
  }
  const double nd = static_cast<double>(n);
  d.ljung_box = nd * (nd + 2.0) * q;
  d.ljung_box_dof = lag > fitted_params ? lag - fitted_params : 1;
  d.ljung_box_p = chi2_sf(d.ljung_box, static_cast<double>(d.ljung_box_dof));
  d.conf_band = 1.96 / std::sqrt(nd);
  const double ss = residuals.squaredNorm();
  double num = 0.0;
  for (std::size_t t = 1; t < n; ++t) {
    const double diff = residuals(static_cast<Eigen::Index>(t)) - residuals(static_cast<Eigen::Index>(t - 1));
    num += diff * diff;
  }
  d.durbin_watson = ss > 0.0 ? num / ss : 0.0;
  return d;
}

}  // namespace valvest::ols
