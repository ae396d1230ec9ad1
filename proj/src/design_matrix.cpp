#include "valvest/design_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "valvest/csv.hpp"
#include "valvest/errors.hpp"

namespace valvest::design {

void SystemConstants::validate() const {
  if (!(vs_m3 > 0.0) || !std::isfinite(vs_m3)) throw DataError("stroke volume must be positive");
  if (!(eta_vol > 0.5 && eta_vol <= 1.0)) throw DataError("volumetric efficiency must be in (0.5, 1]");
}

double compressor_massflow(double f_comp, const SystemConstants& consts, double rho_gas) {
  return f_comp * consts.eta_vol * consts.vs_m3 * rho_gas;
}

double bypass_massflow(double m_mt, double h_gc, double p_rec, const thermo::SaturationTable& table) {
  return table.gas_quality(h_gc, p_rec) * m_mt;
}

double regressor(double p_rec_bar, double p_e_bar, double lambda, double rho_liq) {
  const double dp = std::max(p_rec_bar - p_e_bar, 0.0) * kPascalPerBar;
  return kValveAreaPerCatalogUnit * std::sqrt(dp * rho_liq) * lambda;
}

std::optional<double> suction_pressure(const PlantDataset& ds, std::size_t t) {
  const bool has_mt = ds.n_mt() > 0;
  std::optional<double> best;
  for (std::size_t i = 0; i < ds.n_evaporators(); ++i) {
    if (has_mt && ds.evaporators[i].group != Group::MT) continue;
    const auto& v = ds.p_e[i][t];
    if (!v) return std::nullopt;
    if (!best || *v > *best) best = *v;
  }
  return best;
}

Channel regressor_channel(const PlantDataset& ds, std::size_t evaporator,
                          const thermo::SaturationTable& table) {
  Channel out(ds.size());
  for (std::size_t t = 0; t < ds.size(); ++t) {
    const auto& prec = ds.p_rec[t];
    const auto& pe = ds.p_e[evaporator][t];
    const auto& lam = ds.lambda[evaporator][t];
    if (!prec || !pe || !lam) continue;
    out[t] = regressor(*prec, *pe, *lam, table.props(*prec).rho_liq);
  }
  return out;
}

Channel response_channel(const PlantDataset& ds, const SystemConstants& consts,
                         const thermo::SaturationTable& table) {
  Channel out(ds.size());
  for (std::size_t t = 0; t < ds.size(); ++t) {
    const auto& prec = ds.p_rec[t];
    const auto& fc = ds.f_comp[t];
    const auto& hgc = ds.h_gc[t];
    const auto psuc = suction_pressure(ds, t);
    if (!prec || !fc || !hgc || !psuc) continue;
    const double m_mt = compressor_massflow(*fc, consts, table.props(*psuc).rho_gas);
    out[t] = m_mt - bypass_massflow(m_mt, *hgc, *prec, table);
  }
  return out;
}

RegressionProblem build_problem(const PlantDataset& ds, const SystemConstants& consts,
                                const thermo::SaturationTable& table) {
  consts.validate();
  const std::size_t nv = ds.n_evaporators();
  const auto y = response_channel(ds, consts, table);
  std::vector<Channel> cols;
  cols.reserve(nv);
  for (std::size_t i = 0; i < nv; ++i) cols.push_back(regressor_channel(ds, i, table));

  std::vector<std::size_t> keep;
  keep.reserve(ds.size());
  for (std::size_t t = 0; t < ds.size(); ++t) {
    if (!y[t]) continue;
    bool ok = true;
    for (const auto& c : cols) {
      if (!c[t]) {
        ok = false;
        break;
      }
    }
    if (ok) keep.push_back(t);
  }
  if (keep.size() < 10 * nv || keep.empty()) {
    throw InsufficientRows("only " + std::to_string(keep.size()) + " complete rows for " +
                           std::to_string(nv) + " regressors (need " + std::to_string(10 * nv) + ")");
  }

  RegressionProblem p;
  const auto n = static_cast<Eigen::Index>(keep.size());
  p.y.resize(n);
  p.x.resize(n, static_cast<Eigen::Index>(nv));
  p.timestamps.reserve(keep.size());
  p.grid_index = keep;
  p.dt = ds.dt;
  for (Eigen::Index r = 0; r < n; ++r) {
    const std::size_t t = keep[static_cast<std::size_t>(r)];
    p.y(r) = *y[t];
    for (std::size_t i = 0; i < nv; ++i) p.x(r, static_cast<Eigen::Index>(i)) = *cols[i][t];
    p.timestamps.push_back(ds.time_at(t));
  }
  for (std::size_t i = 0; i < nv; ++i) {
    p.labels.push_back(ds.evaporators[i].id);
    if (p.x.col(static_cast<Eigen::Index>(i)).cwiseAbs().maxCoeff() == 0.0) {
      throw DegenerateColumn(ds.evaporators[i].id);
    }
  }
  return p;
}

Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& x) {
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  const Eigen::VectorXd norms = centered.colwise().norm();
  Eigen::MatrixXd corr = centered.transpose() * centered;
  for (Eigen::Index i = 0; i < corr.rows(); ++i) {
    for (Eigen::Index j = 0; j < corr.cols(); ++j) corr(i, j) /= norms(i) * norms(j);
  }
  return corr;
}

std::vector<ColinearityEntry> colinearity_report(const RegressionProblem& p) {
  const Eigen::Index k = p.cols();
  if (k < 2) throw std::invalid_argument("co-linearity needs at least two columns");
  const Eigen::RowVectorXd mean = p.x.colwise().mean();
  const Eigen::MatrixXd centered = p.x.rowwise() - mean;
  for (Eigen::Index j = 0; j < k; ++j) {
    const double scale = p.x.col(j).cwiseAbs().maxCoeff();
    if (!(centered.col(j).norm() > 1e-12 * scale * std::sqrt(static_cast<double>(p.rows()))) ) {
      throw ZeroVariance(p.labels[static_cast<std::size_t>(j)]);
    }
  }
  const Eigen::MatrixXd corr = correlation_matrix(p.x);

  std::vector<ColinearityEntry> out;
  for (Eigen::Index j = 0; j < k; ++j) {
    ColinearityEntry e;
    e.column = p.labels[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < k; ++i) {
      if (i != j) e.max_abs_corr = std::max(e.max_abs_corr, std::abs(corr(i, j)));
    }
    // Regress centered column j on the other centered columns (intercept absorbed).
    Eigen::MatrixXd others(p.rows(), k - 1);
    for (Eigen::Index i = 0, c = 0; i < k; ++i) {
      if (i != j) others.col(c++) = centered.col(i);
    }
    const Eigen::VectorXd target = centered.col(j);
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(others);
    const Eigen::VectorXd coef = qr.solve(target);
    const double rss = (target - others * coef).squaredNorm();
    const double tss = target.squaredNorm();
    if (rss <= 1e-20 * tss) {
      e.vif = std::numeric_limits<double>::infinity();
    } else {
      e.vif = tss / rss;
    }
    e.flagged = e.max_abs_corr > kCorrelationFlag || e.vif > kVifFlag;
    out.push_back(std::move(e));
  }
  return out;
}

std::string export_problem_csv(const RegressionProblem& p) {
  std::string out = "timestamp,y";
  for (const auto& l : p.labels) out += "," + l;
  out += '\n';
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    out += format_rfc3339(p.timestamps[static_cast<std::size_t>(r)]);
    out += "," + csv::format_double(p.y(r));
    for (Eigen::Index c = 0; c < p.cols(); ++c) out += "," + csv::format_double(p.x(r, c));
    out += '\n';
  }
  return out;
}

}  // namespace valvest::design
