#include <doctest.h>

#include <cmath>

#include "valvest/arma.hpp"
#include "valvest/catalog.hpp"
#include "valvest/design_matrix.hpp"
#include "valvest/errors.hpp"
#include "valvest/simulator.hpp"
#include "valvest/spectrum.hpp"

using namespace valvest;
using namespace valvest::sim;

namespace {

const thermo::SaturationTable& table() { return thermo::SaturationTable::bundled(); }

PlantSpec short_spec(const std::string& name, double days = 2.0) {
  auto s = preset(name);
  s.duration_days = days;
  return s;
}

double mean_f(const PlantDataset& d) {
  double s = 0.0;
  for (const auto& v : d.f_comp) s += *v;
  return s / static_cast<double>(d.size());
}

}  // namespace

TEST_CASE("presets") {
  const auto all = scenario_presets();
  std::vector<std::string> names;
  for (const auto& p : all) names.push_back(p.name);
  CHECK(names == std::vector<std::string>{"otterup-like", "iid-noise", "arma-noise", "modulating-only", "hysteresis-only"});
  CHECK_THROWS_AS(preset("nope"), std::invalid_argument);

  const auto o = preset("otterup-like");
  REQUIRE(o.evaporators.size() == 11);
  const std::vector<std::string> valves{"AKV 10-3", "AKV 10-2", "AKV 10-2", "AKV 10-2", "AKV 10-3", "AKV 10-5",
                                        "AKV 10-4", "AKV 10-5", "AKV 10-5", "AKV 10-5", "AKV 10-2"};
  for (std::size_t i = 0; i < 11; ++i) CHECK(o.evaporators[i].valve == valves[i]);
  CHECK(std::count_if(o.evaporators.begin(), o.evaporators.end(), [](const auto& e) { return e.group == Group::LT; }) == 4);
  CHECK(arma::is_stationary(o.noise.phi));

  const auto iid = preset("iid-noise");
  CHECK(iid.noise.phi.empty());
  CHECK(iid.noise.theta.empty());
  CHECK(iid.noise.sigma2 > 0.0);

  for (const auto& e : preset("modulating-only").evaporators) CHECK(std::holds_alternative<Modulating>(e.control));
  for (const auto& e : preset("hysteresis-only").evaporators) CHECK(std::holds_alternative<Hysteresis>(e.control));
}

TEST_CASE("AR polynomial from reciprocal roots") {
  const auto a = ar_from_roots({0.5, 0.2});
  REQUIRE(a.size() == 2);
  CHECK(a[0] == doctest::Approx(0.7));
  CHECK(a[1] == doctest::Approx(-0.1));
  CHECK(arma::max_reciprocal_root(ar_from_roots({0.99, 0.5, -0.3, 0.2})) == doctest::Approx(0.99));
}

TEST_CASE("reproducible for a seed") {
  const auto spec = short_spec("otterup-like", 1.0);
  const auto a = simulate(spec);
  const auto b = simulate(spec);
  CHECK(a.data.f_comp == b.data.f_comp);
  CHECK(a.data.lambda == b.data.lambda);
  CHECK(a.data.p_e == b.data.p_e);
  auto other = spec;
  other.seed = 2;
  CHECK(simulate(other).data.f_comp != a.data.f_comp);
  CHECK(serialize_dataset(a.data) == serialize_dataset(b.data));
}

TEST_CASE("dataset layout") {
  auto spec = short_spec("otterup-like", 1.0);
  std::rotate(spec.evaporators.begin(), spec.evaporators.begin() + 6, spec.evaporators.end());
  const auto s = simulate(spec);
  CHECK(s.data.size() == 1440);
  CHECK(s.data.dt == std::chrono::seconds{60});
  CHECK_NOTHROW(s.data.validate());
  CHECK(s.data.evaporators.front().id == "LT1");
  // LT block first, relative order kept within each group.
  CHECK(s.truth.ids == std::vector<std::string>{"LT1", "LT2", "LT3", "LT4", "MT3", "MT4", "MT5", "MT6", "MT7", "MT1", "MT2"});
  const auto& cat = ValveCatalog::bundled();
  for (std::size_t i = 0; i < 11; ++i) CHECK(s.truth.a(static_cast<Eigen::Index>(i)) == cat.find(s.truth.valves[i]).a);
  const auto csv = truth_csv(s.truth);
  CHECK(csv.rfind("evaporator,A_true\n", 0) == 0);
  CHECK(csv.find("vs_m3,") != std::string::npos);
}

TEST_CASE("response closes with the disturbance") {
  const auto s = simulate(short_spec("iid-noise"));
  const auto p = design::build_problem(s.data, {s.truth.vs_m3, s.truth.eta_vol}, table());
  REQUIRE(p.rows() == static_cast<Eigen::Index>(s.data.size()));
  const Eigen::VectorXd r = p.y - p.x * s.truth.a;
  std::size_t matched = 0;
  for (Eigen::Index t = 0; t < p.rows(); ++t) {
    const double f = *s.data.f_comp[static_cast<std::size_t>(t)];
    if (f <= 0.0 || f >= 1.0) continue;
    CHECK(r(t) == doctest::Approx(s.truth.disturbance(t)).epsilon(1e-9).scale(1e-12));
    ++matched;
  }
  CHECK(matched + s.truth.clipped == s.data.size());
}

TEST_CASE("larger valves draw more compressor capacity") {
  auto spec = short_spec("otterup-like", 1.0);
  spec.noise = {};
  double prev = 0.0;
  for (const char* v : {"AKV 10-1", "AKV 10-2", "AKV 10-3"}) {
    for (auto& e : spec.evaporators) e.valve = v;
    const double f = mean_f(simulate(spec).data);
    CHECK(f > prev);
    prev = f;
  }
}

TEST_CASE("infeasible plants are reported") {
  auto spec = short_spec("otterup-like", 1.0);
  spec.vs_m3 = 0.001;
  CHECK_THROWS_AS(simulate(spec), InfeasibleSpec);
}

TEST_CASE("hysteresis cycle shows in the spectrum") {
  PlantSpec spec;
  spec.name = "single";
  spec.evaporators = {{"MT1", Group::MT, "AKV 10-3", Hysteresis{40.0, 0.5}, Profile{28.0, 0.2, 1440.0, 0.0, 0.01}}};
  spec.duration_days = 6.0;
  const auto s = simulate(spec);
  const auto x = design::regressor_channel(s.data, 0, table());
  const auto c = spectrum::dominant_cycle(spectrum::periodogram(s.data.series(x)));
  CHECK(c.cycle_minutes == doctest::Approx(40.0).epsilon(0.05));
  CHECK_FALSE(c.low_confidence);
}
