#include "valvest/stroke_volume.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "valvest/brent.hpp"
#include "valvest/csv.hpp"
#include "valvest/errors.hpp"
#include "valvest/kmeans.hpp"
#include "valvest/parallel.hpp"

namespace valvest::vs {

std::string CandidateSet::label(const ValveCatalog& catalog) const {
  std::string out;
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (i > 0) out += ';';
    out += catalog.entries()[members[i]].name;
  }
  return out;
}

std::vector<CandidateSet> all_candidate_sets(const ValveCatalog& catalog) {
  const std::size_t m = catalog.size();
  if (m >= 32) throw std::invalid_argument("catalog too large for exhaustive search");
  std::vector<CandidateSet> out;
  for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
    CandidateSet s;
    for (std::size_t i = 0; i < m; ++i) {
      if (mask & (1u << i)) {
        s.members.push_back(i);
        s.a.push_back(catalog.entries()[i].a);
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

ProblemBuilder::ProblemBuilder(const PlantDataset& ds, double eta_vol, const thermo::SaturationTable& table)
    : problem_(design::build_problem(ds, design::SystemConstants{1.0, eta_vol}, table)),
      ls_(problem_.x),
      eta_vol_(eta_vol) {}

Eigen::VectorXd ProblemBuilder::response(double vs_m3) const {
  if (!(vs_m3 > 0.0)) throw std::invalid_argument("stroke volume must be positive");
  // The compressor flow, and with it the response, is proportional to V_s.
  return vs_m3 * problem_.y;
}

Eigen::VectorXd ProblemBuilder::estimate(double vs_m3) const { return ls_.solve(response(vs_m3)); }

double e1_error(const std::vector<double>& centers, const std::vector<double>& a) {
  if (centers.size() != a.size() || a.empty()) throw std::invalid_argument("E1 needs matching, non-empty sets");
  double ss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = std::log(centers[i]) - std::log(a[i]);
    ss += d * d;
  }
  return std::sqrt(ss) / static_cast<double>(a.size());
}

double e2_error(const Eigen::VectorXd& beta, const ClusterResult& clusters) {
  double ss = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    const auto c = clusters.assignment[static_cast<std::size_t>(j)];
    if (c == kExcluded) continue;
    const double d = std::log(clusters.centers[c]) - std::log(beta(j));
    ss += d * d;
  }
  return ss / static_cast<double>(beta.size());
}

ClusterResult cluster_and_score(const Eigen::VectorXd& beta, const CandidateSet& a, std::uint64_t seed) {
  ClusterResult r;
  std::vector<double> values;
  std::vector<std::size_t> index;
  std::size_t first_bad = kExcluded;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (beta(j) > 0.0) {
      values.push_back(beta(j));
      index.push_back(static_cast<std::size_t>(j));
    } else {
      r.excluded.push_back(static_cast<std::size_t>(j));
      if (first_bad == kExcluded) first_bad = static_cast<std::size_t>(j);
    }
  }
  std::vector<double> distinct = values;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < a.a.size()) {
    if (first_bad != kExcluded) {
      throw NonPositiveBeta("too few positive coefficients for " + std::to_string(a.a.size()) +
                                " clusters; coefficient " + std::to_string(first_bad + 1) + " is not positive",
                            first_bad);
    }
    throw KTooLarge("k = " + std::to_string(a.a.size()) + " exceeds the distinct coefficients");
  }
  const auto km = kmeans::kmeans_1d(values, a.a.size(), seed);
  r.centers = km.centers;
  r.assignment.assign(static_cast<std::size_t>(beta.size()), kExcluded);
  for (std::size_t i = 0; i < index.size(); ++i) r.assignment[index[i]] = km.assignment[i];
  r.e1 = e1_error(r.centers, a.a);
  r.e2 = e2_error(beta, r);
  return r;
}

ClusterResult candidate_error(const ProblemBuilder& builder, double vs_m3, const CandidateSet& a, std::uint64_t seed) {
  ClusterResult r = cluster_and_score(builder.estimate(vs_m3), a, seed);
  r.vs_hat = vs_m3;
  return r;
}

SearchReport search_valve_sets(const ProblemBuilder& builder, const ValveCatalog& catalog,
                               const SearchOptions& options) {
  double lo = options.vs_lo;
  double hi = options.vs_hi;
  if (options.vs_guess) {
    if (!(*options.vs_guess > 0.0)) throw std::invalid_argument("stroke volume guess must be positive");
    lo = 0.1 * *options.vs_guess;
    hi = 10.0 * *options.vs_guess;
  }
  if (!(lo > 0.0 && lo < hi)) throw std::invalid_argument("invalid stroke volume bracket");

  SearchReport report;
  report.labels = builder.labels();
  const auto n_coef = static_cast<std::size_t>(builder.problem().cols());
  const Eigen::VectorXd beta1 = builder.estimate(1.0);
  for (Eigen::Index j = 0; j < beta1.size(); ++j) {
    if (!(beta1(j) > 0.0)) {
      report.warnings.push_back("coefficient " + report.labels[static_cast<std::size_t>(j)] +
                                " is not positive and is left out of the clustering");
    }
  }

  std::vector<CandidateSet> sets;
  for (auto& s : all_candidate_sets(catalog)) {
    if (s.a.size() <= n_coef) sets.push_back(std::move(s));
  }
  std::vector<CandidateRow> rows(sets.size());
  parallel_for(sets.size(), options.jobs, [&](std::size_t i) {
    CandidateRow& row = rows[i];
    row.set = sets[i];
    row.label = sets[i].label(catalog);
    try {
      auto objective = [&](double u) { return candidate_error(builder, std::exp(u), row.set, options.seed).e1; };
      const auto m = brent::brent_min(objective, std::log(lo), std::log(hi), options.log_tolerance);
      row.result = candidate_error(builder, std::exp(m.x), row.set, options.seed);
    } catch (const Error& e) {
      row.error = e.what();
    }
  });

  // E1 alone cannot rank sets of different size: one cluster always matches
  // exactly after rescaling, so the within-cluster spread E2 enters the score.
  std::stable_sort(rows.begin(), rows.end(), [](const CandidateRow& a, const CandidateRow& b) {
    if (a.ok() != b.ok()) return a.ok();
    if (!a.ok()) return false;
    const double sa = a.result.e1 + a.result.e2;
    const double sb = b.result.e1 + b.result.e2;
    if (sa != sb) return sa < sb;
    return a.result.e2 < b.result.e2;
  });
  report.rows = std::move(rows);
  return report;
}

std::string search_csv(const SearchReport& report, const ValveCatalog& catalog) {
  std::string out = "rank,valve_set,vs_hat_m3,E1,E2,beta_assignments\n";
  for (std::size_t r = 0; r < report.rows.size(); ++r) {
    const auto& row = report.rows[r];
    out += std::to_string(r + 1) + "," + row.label + ",";
    if (!row.ok()) {
      out += ",,," + csv::escape("error: " + row.error) + "\n";
      continue;
    }
    out += csv::format_double(row.result.vs_hat) + "," + csv::format_double(row.result.e1) + "," +
           csv::format_double(row.result.e2) + ",";
    for (std::size_t j = 0; j < row.result.assignment.size(); ++j) {
      if (j > 0) out += ';';
      const auto c = row.result.assignment[j];
      out += report.labels[j] + "=" + (c == kExcluded ? std::string("excluded") : catalog.entries()[row.set.members[c]].name);
    }
    out += "\n";
  }
  return out;
}

}  // namespace valvest::vs
