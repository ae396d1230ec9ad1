#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "valvest/catalog.hpp"
#include "valvest/design_matrix.hpp"
#include "valvest/ols.hpp"

namespace valvest::vs {

/// Sorted, distinct subset of catalog valve types.
struct CandidateSet {
  std::vector<std::size_t> members;  ///< catalog indices, ascending
  std::vector<double> a;              ///< matching valve constants, ascending

  /// Names joined with ';'.
  std::string label(const ValveCatalog& catalog) const;
};

/// Every non-empty subset of the catalog (2^m - 1), ordered by bitmask.
std::vector<CandidateSet> all_candidate_sets(const ValveCatalog& catalog);

/// Regression problem as a function of the stroke volume.
///
/// The regressors do not depend on V_s, so the design is factorised once; each
/// evaluation rebuilds the response for the requested V_s and solves by OLS.
class ProblemBuilder {
 public:
  ProblemBuilder(const PlantDataset& ds, double eta_vol,
                 const thermo::SaturationTable& table = thermo::SaturationTable::bundled());

  const design::RegressionProblem& problem() const noexcept { return problem_; }
  const std::vector<std::string>& labels() const noexcept { return problem_.labels; }

  /// Response y at the given stroke volume.
  Eigen::VectorXd response(double vs_m3) const;

  /// OLS coefficients at the given stroke volume.
  Eigen::VectorXd estimate(double vs_m3) const;

 private:
  design::RegressionProblem problem_;  // built at V_s = 1
  ols::LeastSquares ls_;
  double eta_vol_;
};

struct ClusterResult {
  std::vector<double> centers;          ///< ascending
  std::vector<std::size_t> assignment;  ///< coefficient index -> cluster; npos when excluded
  std::vector<std::size_t> excluded;    ///< coefficients <= 0, left out of the clustering
  double e1 = 0.0;
  double e2 = 0.0;
  double vs_hat = 0.0;
};

inline constexpr std::size_t kExcluded = static_cast<std::size_t>(-1);

/// E1 = sqrt(sum_i (ln C_i - ln a_i)^2) / k for sorted centers C and sorted a.
double e1_error(const std::vector<double>& centers, const std::vector<double>& a);

/// E2 = (1 / n_V) sum_i sum_{j in S_i} (ln C_i - ln beta_j)^2 over clustered coefficients;
/// n_V counts every coefficient, excluded ones included.
double e2_error(const Eigen::VectorXd& beta, const ClusterResult& clusters);

/// Clusters the positive coefficients into |a| groups and scores them against a.
/// Throws NonPositiveBeta when fewer than |a| distinct positive coefficients remain.
ClusterResult cluster_and_score(const Eigen::VectorXd& beta, const CandidateSet& a, std::uint64_t seed);

/// E1 with centers and assignment for the problem rebuilt at `vs_m3`.
ClusterResult candidate_error(const ProblemBuilder& builder, double vs_m3, const CandidateSet& a, std::uint64_t seed);

struct SearchOptions {
  /// Brent bracket for V_s in m^3; [0.1, 10] x guess when a guess is given,
  /// otherwise [1e-5, 1e-1].
  std::optional<double> vs_guess;
  double vs_lo = 1e-5;
  double vs_hi = 1e-1;
  /// Absolute tolerance of the search in ln V_s.
  double log_tolerance = 1e-6;
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
};

struct CandidateRow {
  CandidateSet set;
  std::string label;
  ClusterResult result;
  std::string error;  ///< empty on success
  bool ok() const noexcept { return error.empty(); }
};

struct SearchReport {
  std::vector<CandidateRow> rows;  ///< ranked; failures last
  std::vector<std::string> labels;  ///< coefficient labels
  std::vector<std::string> warnings;
};

/// Brent search over V_s for every feasible candidate set, ranked by E1 + E2
/// with E2 as tie-break. Sets larger than the number of coefficients are skipped.
SearchReport search_valve_sets(const ProblemBuilder& builder, const ValveCatalog& catalog,
                               const SearchOptions& options = {});

/// `rank,valve_set,vs_hat_m3,E1,E2,beta_assignments`.
std::string search_csv(const SearchReport& report, const ValveCatalog& catalog);

}  // namespace valvest::vs
