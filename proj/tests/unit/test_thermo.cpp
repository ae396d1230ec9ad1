#include <doctest.h>

#include <cmath>

#include "valvest/errors.hpp"
#include "valvest/thermo.hpp"

using valvest::thermo::SaturationProps;
using valvest::thermo::SaturationRow;
using valvest::thermo::SaturationTable;

namespace {

// Reference saturation properties from CoolProp (Span-Wagner), evaluated independently
// of the bundled table: p [bar], rho_liq, rho_gas [kg/m3], h_liq, h_gas [J/kg].
struct Reference {
  double p, rho_liq, rho_gas, h_liq, h_gas;
};
constexpr Reference kReference[] = {
    {35.0, 926.466, 98.1478, 200393.0, 430799.0},
    {35.25, 924.843, 98.9924, 201052.0, 430639.0},
    {13.7, 1080.87, 35.5811, 130807.0, 436707.0},
    {28.3, 970.619, 76.6624, 181881.0, 434396.0},
    {50.8, 821.71, 160.393, 239815.0, 416721.0},
};

bool within(double got, double want, double rel) { return std::abs(got - want) <= rel * std::abs(want); }

std::vector<SaturationRow> synthetic_rows(std::size_t n) {
  std::vector<SaturationRow> rows;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = 10.0 + static_cast<double>(i);
    rows.push_back({p, {1000.0 - p, 10.0 + p, 1e5 + 1000.0 * p, 4e5}});
  }
  return rows;
}

}  // namespace

TEST_CASE("bundled table matches the reference property database") {
  const auto& t = SaturationTable::bundled();
  for (const auto& r : kReference) {
    CAPTURE(r.p);
    const auto s = t.props(r.p);
    CHECK(within(s.rho_liq, r.rho_liq, 5e-3));
    CHECK(within(s.rho_gas, r.rho_gas, 5e-3));
    CHECK(within(s.h_liq, r.h_liq, 5e-3));
    CHECK(within(s.h_gas, r.h_gas, 5e-3));
  }
}

TEST_CASE("interpolation is exact at knots and linear between them") {
  const auto& t = SaturationTable::bundled();
  const auto& rows = t.rows();
  REQUIRE(rows.size() >= 50);
  for (const auto& row : rows) CHECK(t.props(row.p_bar) == row.props);

  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const double mid = 0.5 * (rows[i].p_bar + rows[i + 1].p_bar);
    const auto s = t.props(mid);
    const auto& a = rows[i].props;
    const auto& b = rows[i + 1].props;
    CHECK(s.rho_liq == doctest::Approx(0.5 * (a.rho_liq + b.rho_liq)).epsilon(1e-13));
    CHECK(s.rho_gas == doctest::Approx(0.5 * (a.rho_gas + b.rho_gas)).epsilon(1e-13));
    CHECK(s.h_liq == doctest::Approx(0.5 * (a.h_liq + b.h_liq)).epsilon(1e-13));
    CHECK(s.h_gas == doctest::Approx(0.5 * (a.h_gas + b.h_gas)).epsilon(1e-13));
  }
}

TEST_CASE("bundled table is monotone in pressure") {
  const auto& rows = SaturationTable::bundled().rows();
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].props.rho_liq < rows[i - 1].props.rho_liq);
    CHECK(rows[i].props.rho_gas > rows[i - 1].props.rho_gas);
  }
}

TEST_CASE("pressures outside the table are rejected") {
  const auto& t = SaturationTable::bundled();
  CHECK_THROWS_AS(t.props(t.min_pressure() - 0.01), valvest::OutOfRange);
  CHECK_THROWS_AS(t.props(t.max_pressure() + 0.01), valvest::OutOfRange);
  CHECK_THROWS_AS(t.props(std::nan("")), valvest::OutOfRange);
  CHECK_THROWS_AS(t.gas_quality(3e5, 100.0), valvest::OutOfRange);
  CHECK_NOTHROW(t.props(t.min_pressure()));
  CHECK_NOTHROW(t.props(t.max_pressure()));
}

TEST_CASE("gas quality") {
  const auto& t = SaturationTable::bundled();
  for (double p : {12.0, 27.3, 35.0, 44.4}) {
    const auto s = t.props(p);
    CHECK(t.gas_quality(s.h_liq, p) == 0.0);
    CHECK(t.gas_quality(s.h_gas, p) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(t.gas_quality(0.5 * (s.h_liq + s.h_gas), p) == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(t.gas_quality(s.h_liq - 5e4, p) == 0.0);
    CHECK(t.gas_quality(s.h_gas + 5e4, p) == 1.0);
    double last = -1.0;
    for (double h = 1e5; h < 5e5; h += 7e3) {
      const double q = t.gas_quality(h, p);
      CHECK(q >= last);
      CHECK(q >= 0.0);
      CHECK(q <= 1.0);
      last = q;
    }
  }
}

TEST_CASE("table invariants are enforced") {
  CHECK_NOTHROW(SaturationTable(synthetic_rows(50)));
  CHECK_THROWS_AS(SaturationTable(synthetic_rows(49)), valvest::DataError);

  auto rows = synthetic_rows(60);
  rows[10].p_bar = rows[9].p_bar;
  CHECK_THROWS_AS(SaturationTable{rows}, valvest::DataError);

  rows = synthetic_rows(60);
  rows[3].props.rho_gas = rows[3].props.rho_liq + 1.0;
  CHECK_THROWS_AS(SaturationTable{rows}, valvest::DataError);

  rows = synthetic_rows(60);
  rows[4].props.h_gas = rows[4].props.h_liq;
  CHECK_THROWS_AS(SaturationTable{rows}, valvest::DataError);

  rows = synthetic_rows(70);  // reaches 79 bar
  CHECK_THROWS_AS(SaturationTable{rows}, valvest::DataError);
}

TEST_CASE("csv loader") {
  std::string text = "p_bar,rho_liq,rho_gas,h_liq,h_gas\n";
  for (const auto& r : synthetic_rows(55)) {
    text += std::to_string(r.p_bar) + "," + std::to_string(r.props.rho_liq) + "," + std::to_string(r.props.rho_gas) +
            "," + std::to_string(r.props.h_liq) + "," + std::to_string(r.props.h_gas) + "\n";
  }
  const auto t = SaturationTable::from_csv(text);
  CHECK(t.rows().size() == 55);
  CHECK(t.props(12.5).rho_liq == doctest::Approx(987.5));
  CHECK_THROWS_AS(SaturationTable::from_csv("p_bar,rho_liq\n1,2\n"), valvest::SchemaError);
}
