// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "../support/kmeans_dp.hpp"
#include "valvest/arma.hpp"
#include "valvest/armax.hpp"
#include "valvest/assets.hpp"
#include "valvest/csv.hpp"
#include "valvest/design_matrix.hpp"
#include "valvest/kmeans.hpp"
#include "valvest/ols.hpp"
#include "valvest/pipeline.hpp"
#include "valvest/simulator.hpp"
#include "valvest/spectrum.hpp"
#include "valvest/stroke_volume.hpp"

using namespace valvest;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int digits = 3) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

const thermo::SaturationTable& table() { return thermo::SaturationTable::bundled(); }

bool covers(const ols::Interval& ci, double v) { return ci.lo <= v && v <= ci.hi; }

// 1. The bundled catalog is the published table, character for character.
Outcome catalog_asset() {
  const std::string expected =
      "name,A\n"
      "AKV 10-0,0.07145\n"
      "AKV 10-1,0.23828\n"
      "AKV 10-2,0.37191\n"
      "AKV 10-3,0.58765\n"
      "AKV 10-4,0.94185\n"
      "AKV 10-5,1.48523\n"
      "AKV 10-6,2.64687\n";
  const std::string embedded(assets::valve_catalog_csv());
  const std::string on_disk = csv::read_file(VALVEST_CATALOG_CSV);
  const auto& cat = ValveCatalog::bundled();
  const bool ok = embedded == expected && on_disk == expected && cat.size() == 7 &&
                  cat.find("AKV 10-6").a == 2.64687 && cat.find("AKV 10-0").a == 0.07145;
  return {ok, "embedded asset " + std::string(embedded == expected ? "matches" : "differs")};
}

// 2. Noise-free plant, eight months at one-minute sampling.
Outcome noise_free_recovery() {
  const auto t0 = Clock::now();
  auto spec = sim::preset("otterup-like");
  spec.noise = {};
  spec.log_internals = false;
  const auto s = sim::simulate(spec);
  const auto p = design::build_problem(s.data, {spec.vs_m3, spec.eta_vol}, table());
  const auto fit = ols::fit_ols(p);
  const double elapsed = seconds_since(t0);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < fit.beta.size(); ++j) {
    worst = std::max(worst, std::abs(fit.beta(j) - s.truth.a(j)) / s.truth.a(j));
  }
  return {worst <= 1e-8 && elapsed < 10.0 && fit.beta.size() == 11,
          "max relative error " + fmt(worst) + ", " + fmt(elapsed) + " s for " + std::to_string(p.rows()) + " rows"};
}

// 3. OLS interval coverage with iid disturbances.
Outcome ols_coverage() {
  const auto t0 = Clock::now();
  const int reps = 200;
  std::vector<int> hits(11, 0);
  for (int r = 0; r < reps; ++r) {
    auto spec = sim::preset("iid-noise");
    spec.seed = 1000 + static_cast<std::uint64_t>(r);
    spec.log_internals = false;
    const auto s = sim::simulate(spec);
    const auto fit = ols::fit_ols(design::build_problem(s.data, {spec.vs_m3, spec.eta_vol}, table()));
    for (std::size_t j = 0; j < 11; ++j) hits[j] += covers(fit.ci95[j], s.truth.a(static_cast<Eigen::Index>(j)));
  }
  const double elapsed = seconds_since(t0);
  double lo = 1.0;
  double hi = 0.0;
  for (int h : hits) {
    lo = std::min(lo, h / double(reps));
    hi = std::max(hi, h / double(reps));
  }
  const bool ok = lo >= 0.90 && hi <= 0.99 && elapsed < 300.0;
  return {ok, "coverage range [" + fmt(lo) + ", " + fmt(hi) + "] over " + std::to_string(reps) + " replicates, " +
                  fmt(elapsed) + " s"};
}

design::RegressionProblem ar_error_problem(std::size_t n, double phi, std::uint64_t seed, const Eigen::Vector2d& beta) {
  const std::vector<double> ar{0.8};
  const std::vector<double> e_ar{phi};
  const auto x1 = arma::simulate_arma(ar, {}, 1.0, n, seed * 7 + 1);
  const auto x2 = arma::simulate_arma(ar, {}, 1.0, n, seed * 7 + 2);
  const auto e = arma::simulate_arma(e_ar, {}, 0.04, n, seed * 7 + 3);
  design::RegressionProblem p;
  p.labels = {"a", "b"};
  p.x.resize(static_cast<Eigen::Index>(n), 2);
  p.y.resize(static_cast<Eigen::Index>(n));
  for (std::size_t t = 0; t < n; ++t) {
    const auto r = static_cast<Eigen::Index>(t);
    p.x(r, 0) = 2.0 + x1[t];
    p.x(r, 1) = 2.0 + x2[t];
    p.y(r) = p.x.row(r).dot(beta) + e[t];
    p.grid_index.push_back(t);
  }
  return p;
}

// 4. ARMAX on AR(1) errors, plus the likelihood gradient against a Richardson difference.
Outcome armax_correctness() {
  const Eigen::Vector2d beta{3.0, 5.0};
  const int reps = 100;
  int phi_ok = 0;
  int cover = 0;
  double phi_lo = 1.0;
  double phi_hi = 0.0;
  for (int r = 0; r < reps; ++r) {
    const auto p = ar_error_problem(10000, 0.5, 500 + static_cast<std::uint64_t>(r), beta);
    const auto fit = armax::fit_armax(p, {1, 0});
    const double ph = fit.phi[0];
    phi_lo = std::min(phi_lo, ph);
    phi_hi = std::max(phi_hi, ph);
    phi_ok += ph >= 0.45 && ph <= 0.55;
    for (int j = 0; j < 2; ++j) cover += covers(fit.ci95[static_cast<std::size_t>(j)], beta(j));
  }
  const double coverage = cover / (2.0 * reps);

  const auto p = ar_error_problem(10000, 0.5, 77, beta);
  const armax::ArmaxLikelihood lik(p, {2, 1}, armax::contiguous_segments(p));
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const Eigen::Vector3d at{u(rng), u(rng), u(rng)};
    const Eigen::VectorXd g = lik.gradient(at);
    for (Eigen::Index i = 0; i < 3; ++i) {
      auto diff = [&](double h) {
        Eigen::VectorXd a = at;
        Eigen::VectorXd b = at;
        a(i) += h;
        b(i) -= h;
        return (lik.profile_loglik(a) - lik.profile_loglik(b)) / (2.0 * h);
      };
      const double ref = (4.0 * diff(1e-3) - diff(2e-3)) / 3.0;
      worst = std::max(worst, std::abs(g(i) - ref) / std::max(std::abs(ref), 1.0));
    }
  }
  const bool ok = phi_ok == reps && coverage >= 0.90 && coverage <= 0.99 && worst <= 1e-4;
  return {ok, "phi in [" + fmt(phi_lo) + ", " + fmt(phi_hi) + "], beta coverage " + fmt(coverage) +
                  ", gradient relative error " + fmt(worst)};
}

// 5. Residual whiteness at 15-minute sampling.
Outcome residual_whiteness() {
  const auto t0 = Clock::now();
  const int reps = 100;
  int ols_reject = 0;
  int armax_white = 0;
  for (int r = 0; r < reps; ++r) {
    auto spec = sim::preset("arma-noise");
    spec.seed = 2000 + static_cast<std::uint64_t>(r);
    spec.log_internals = false;
    const auto s = sim::simulate(spec);
    const auto ds = pipeline::resample_to(s.data, 15);
    const auto p = design::build_problem(ds, {spec.vs_m3, spec.eta_vol}, table());
    ols_reject += ols::fit_ols(p).diagnostics.ljung_box_p < 0.05;
    armax_white += armax::fit_armax(p, {4, 1}).diagnostics.ljung_box_p > 0.05;
  }
  const bool ok = ols_reject >= 90 && armax_white >= 80;
  return {ok, "OLS rejects " + std::to_string(ols_reject) + "/100, ARMAX(4,1) white " + std::to_string(armax_white) +
                  "/100, " + fmt(seconds_since(t0)) + " s"};
}

// 6. Dominant cycle of a 40-minute hysteresis loop, and the sampling-time rule.
Outcome spectrum_cycle() {
  int within = 0;
  double lo = 1e9;
  double hi = 0.0;
  for (int r = 0; r < 50; ++r) {
    sim::PlantSpec spec;
    spec.name = "cycle";
    spec.evaporators = {{"MT1", Group::MT, "AKV 10-3", sim::Hysteresis{40.0, 0.5}, sim::Profile{28.0, 0.2, 1440.0, 0.0, 0.01}}};
    spec.duration_days = 6.0;
    spec.seed = 300 + static_cast<std::uint64_t>(r);
    const auto s = sim::simulate(spec);
    const auto x = design::regressor_channel(s.data, 0, table());
    const double c = spectrum::dominant_cycle(spectrum::periodogram(s.data.series(x))).cycle_minutes;
    lo = std::min(lo, c);
    hi = std::max(hi, c);
    within += std::abs(c - 40.0) <= 2.0;
  }
  const int a = spectrum::optimal_sampling_time(41.58);
  const int b = spectrum::optimal_sampling_time(21.23);
  return {within == 50 && a == 20 && b == 10,
          std::to_string(within) + "/50 within 2 min (range " + fmt(lo, 4) + ".." + fmt(hi, 4) + "), rule gives " +
              std::to_string(a) + " and " + std::to_string(b)};
}

// 7. Unknown stroke volume: the true valve set {10-2, 10-3, 10-5} and V_s.
Outcome stroke_volume_search() {
  const auto& cat = ValveCatalog::bundled();
  const int reps = 50;
  int hits = 0;
  double slowest = 0.0;
  for (int r = 0; r < reps; ++r) {
    auto spec = sim::preset("iid-noise");
    for (auto& e : spec.evaporators) {
      if (e.valve == "AKV 10-4") e.valve = "AKV 10-5";
    }
    spec.duration_days = 60.0;
    spec.seed = 4000 + static_cast<std::uint64_t>(r);
    spec.log_internals = false;
    const auto s = sim::simulate(spec);
    const auto t0 = Clock::now();
    const vs::ProblemBuilder builder(s.data, spec.eta_vol);
    vs::SearchOptions opt;
    opt.seed = 7;
    const auto report = vs::search_valve_sets(builder, cat, opt);
    slowest = std::max(slowest, seconds_since(t0));
    const auto& best = report.rows.front();
    hits += best.ok() && best.label == "AKV 10-2;AKV 10-3;AKV 10-5" &&
            std::abs(best.result.vs_hat / spec.vs_m3 - 1.0) <= 0.05;
  }
  return {hits >= 45 && slowest < 120.0,
          std::to_string(hits) + "/50 exact set with V_s within 5 %, slowest search " + fmt(slowest) + " s"};
}

// 8. Restarted Lloyd against the exact dynamic-programming optimum.
Outcome kmeans_oracle() {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> size(5, 64);
  std::uniform_int_distribution<int> kk(1, 5);
  std::lognormal_distribution<double> ln(0.0, 1.0);
  int agree = 0;
  double worst = 0.0;
  for (int r = 0; r < 200; ++r) {
    std::vector<double> v(static_cast<std::size_t>(size(rng)));
    for (auto& x : v) x = ln(rng);
    const auto k = static_cast<std::size_t>(kk(rng));
    const double got = kmeans::kmeans_1d(v, k, static_cast<std::uint64_t>(r)).sse;
    const double want = oracle::kmeans_dp_sse(v, k);
    const double err = std::abs(got - want) / std::max(want, 1e-300);
    worst = std::max(worst, want > 0.0 ? err : std::abs(got));
    agree += std::abs(got - want) <= 1e-9 * std::max(want, 1.0);
  }
  return {agree == 200, std::to_string(agree) + "/200 instances match, worst relative gap " + fmt(worst)};
}

// 9. Variance inflation sanity checks.
Outcome vif_sanity() {
  Eigen::MatrixXd h(8, 4);
  h << 1, 1, 1, 1, -1, 1, -1, 1, 1, -1, -1, 1, -1, -1, 1, 1, 1, 1, 1, -1, -1, 1, -1, -1, 1, -1, -1, -1, -1, -1, 1, -1;
  design::RegressionProblem p;
  p.x = h;
  p.y = Eigen::VectorXd::Zero(8);
  p.labels = {"a", "b", "c", "d"};
  double worst = 0.0;
  for (const auto& e : design::colinearity_report(p)) worst = std::max(worst, std::abs(e.vif - 1.0));

  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, 1.0);
  p.x = Eigen::MatrixXd::NullaryExpr(100, 3, [&] { return n(rng); });
  p.x.col(2) = p.x.col(0);
  p.y = Eigen::VectorXd::Zero(100);
  p.labels = {"a", "b", "c"};
  const auto dup = design::colinearity_report(p);
  const bool dup_flagged = dup[0].flagged && dup[2].flagged;

  auto spec = sim::preset("otterup-like");
  spec.log_internals = false;
  const auto s = sim::simulate(spec);
  double max_vif = 0.0;
  for (const auto& e : design::colinearity_report(design::build_problem(s.data, {spec.vs_m3, spec.eta_vol}, table()))) {
    max_vif = std::max(max_vif, e.vif);
  }
  return {worst <= 1e-9 && dup_flagged && max_vif < 2.0,
          "orthogonal |VIF-1| " + fmt(worst) + ", duplicate " + (dup_flagged ? "flagged" : "missed") +
              ", otterup-like max VIF " + fmt(max_vif, 4)};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + VALVEST_CLI + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = csv::read_file(e.path());
  }
  return out;
}

// 10. Every subcommand, run twice with the same configuration and seed.
Outcome cli_determinism() {
  const fs::path root = fs::temp_directory_path() / "valvest_acceptance_cli";
  fs::remove_all(root);
  std::vector<std::string> differing;
  std::size_t files = 0;
  int failures = 0;
  for (const char* run : {"a", "b"}) {
    const fs::path dir = root / run;
    fs::create_directories(dir);
    const auto data = (dir / "plant.csv").string();
    const auto q = [](const fs::path& p) { return "\"" + p.string() + "\""; };
    csv::write_file(dir / "run.json", R"({"dataset": "plant.csv", "system": {"vs_m3": 0.008}, "sweep": "1,5,15",
      "models": ["ols", "armax"], "armax": {"p": 2, "q": 1}, "seed": 11, "jobs": 2, "svg": true})");
    failures += run_cli("simulate --preset otterup-like --days 8 --seed 5 --out " + q(data) + " --truth " + q(dir / "truth.csv")) != 0;
    failures += run_cli("spectrum --data " + q(data) + " --svg --out-dir " + q(dir / "spectrum")) != 0;
    failures += run_cli("estimate-ols --data " + q(data) + " --vs 0.008 --dt 5 --export-problem --svg --out-dir " + q(dir / "ols")) != 0;
    failures += run_cli("estimate-armax --data " + q(data) + " --vs 0.008 --dt 15 --out-dir " + q(dir / "armax")) != 0;
    failures += run_cli("estimate-vs --data " + q(data) + " --seed 3 --jobs 2 --refit-armax --out-dir " + q(dir / "vs")) != 0;
    failures += run_cli("sweep --config " + q(dir / "run.json") + " --out-dir " + q(dir / "sweep")) != 0;
    failures += run_cli("report --config " + q(dir / "run.json") + " --out-dir " + q(dir / "report")) != 0;
  }
  const auto a = snapshot(root / "a");
  const auto b = snapshot(root / "b");
  for (const auto& [name, content] : a) {
    ++files;
    const auto it = b.find(name);
    if (it == b.end() || it->second != content) differing.push_back(name);
  }
  const bool ok = failures == 0 && differing.empty() && a.size() == b.size() && files > 20;
  std::string detail = std::to_string(files) + " files compared, " + std::to_string(differing.size()) + " differ";
  if (failures != 0) detail += ", " + std::to_string(failures) + " commands failed";
  if (!differing.empty()) detail += " (first: " + differing.front() + ")";
  return {ok, detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"valve catalog asset", catalog_asset},
      {"noise-free recovery", noise_free_recovery},
      {"OLS interval coverage", ols_coverage},
      {"ARMAX estimates and gradient", armax_correctness},
      {"residual whiteness at 15 min", residual_whiteness},
      {"dominant hysteresis cycle", spectrum_cycle},
      {"stroke-volume search", stroke_volume_search},
      {"k-means optimum", kmeans_oracle},
      {"VIF sanity", vif_sanity},
      {"CLI determinism", cli_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
