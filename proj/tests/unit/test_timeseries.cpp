#include <doctest.h>

#include <cmath>
#include <random>

#include "valvest/errors.hpp"
#include "valvest/timeseries.hpp"

using namespace valvest;

namespace {

std::string header() { return "timestamp,P_rec,f_comp,h_gc,P_e_LT1,lambda_LT1,P_e_MT1,lambda_MT1\n"; }

std::string row(const std::string& ts, double lam = 0.5) {
  return ts + ",35,0.4,260000,13," + std::to_string(lam) + ",28,1\n";
}

Channel iota_channel(std::size_t n) {
  Channel c;
  for (std::size_t i = 0; i < n; ++i) c.push_back(static_cast<double>(i % 17) * 0.25 + std::sin(static_cast<double>(i)));
  return c;
}

}  // namespace

TEST_CASE("RFC 3339 timestamps") {
  const auto t = parse_rfc3339("2013-11-01T00:00:00Z");
  CHECK(format_rfc3339(t) == "2013-11-01T00:00:00Z");
  CHECK(parse_rfc3339("2013-11-01T01:00:00+01:00") == t);
  CHECK(parse_rfc3339("2013-11-01 00:00:00.000Z") == t);
  CHECK(format_rfc3339(parse_rfc3339("2013-11-01T00:00:00.250Z")) == "2013-11-01T00:00:00.250Z");
  CHECK_THROWS_AS(parse_rfc3339("2013-13-01T00:00:00Z"), TimebaseError);
  CHECK_THROWS_AS(parse_rfc3339("yesterday"), TimebaseError);
}

TEST_CASE("three rows at 60 s") {
  const auto ds = parse_dataset(header() + row("2020-01-01T00:00:00Z") + row("2020-01-01T00:01:00Z") +
                                row("2020-01-01T00:02:00Z"));
  CHECK(ds.size() == 3);
  CHECK(ds.dt.count() == 60);
  REQUIRE(ds.n_evaporators() == 2);
  CHECK(ds.evaporators[0].id == "LT1");
  CHECK(ds.evaporators[0].group == Group::LT);
  CHECK(ds.n_mt() == 1);
  CHECK(*ds.p_rec[2] == 35.0);
  CHECK(*ds.lambda[0][1] == 0.5);
}

TEST_CASE("absent middle row becomes a gap") {
  const auto ds = parse_dataset(header() + row("2020-01-01T00:00:00Z") + row("2020-01-01T00:02:00Z") +
                                row("2020-01-01T00:03:00Z") + row("2020-01-01T00:04:00Z"));
  CHECK(ds.size() == 5);
  CHECK_FALSE(ds.p_rec[1].has_value());
  CHECK(ds.p_rec[2].has_value());
  const auto gaps = find_gaps(ds.p_rec);
  REQUIRE(gaps.size() == 1);
  CHECK(gaps[0] == Gap{1, 2});
}

TEST_CASE("jittered timestamps snap; far ones are dropped") {
  const auto ds = parse_dataset(header() + row("2020-01-01T00:00:00Z") + row("2020-01-01T00:01:00Z") +
                                row("2020-01-01T00:02:00Z") + row("2020-01-01T00:03:10Z", 0.25) +
                                row("2020-01-01T00:04:00Z") + row("2020-01-01T00:05:30Z", 0.9) +
                                row("2020-01-01T00:06:00Z") + row("2020-01-01T00:07:00Z"));
  CHECK(ds.dt.count() == 60);
  REQUIRE(ds.size() == 8);
  CHECK(*ds.lambda[0][3] == 0.25);
  CHECK_FALSE(ds.lambda[0][5].has_value());
  CHECK(ds.lambda[0][6].has_value());
}

TEST_CASE("percent lambda is scaled") {
  Schema s = Schema::infer({"timestamp", "P_rec", "f_comp", "h_gc", "P_e_MT1", "lambda_MT1"});
  s.evaporators[0].lambda.unit = "percent";
  s.f_comp.unit = "percent";
  s.p_rec.unit = "kPa";
  s.h_gc.unit = "kJ/kg";
  const std::string text =
      "timestamp,P_rec,f_comp,h_gc,P_e_MT1,lambda_MT1\n"
      "2020-01-01T00:00:00Z,3500,40,260,28,55\n"
      "2020-01-01T00:01:00Z,3500,40,260,28,100\n";
  const auto ds = parse_dataset(text, s);
  CHECK(*ds.lambda[0][0] == doctest::Approx(0.55));
  CHECK(*ds.lambda[0][1] == 1.0);
  CHECK(*ds.f_comp[0] == doctest::Approx(0.4));
  CHECK(*ds.p_rec[0] == doctest::Approx(35.0));
  CHECK(*ds.h_gc[0] == doctest::Approx(260000.0));

  const std::string bad =
      "timestamp,P_rec,f_comp,h_gc,P_e_MT1,lambda_MT1\n"
      "2020-01-01T00:00:00Z,3500,40,260,28,155\n"
      "2020-01-01T00:01:00Z,3500,40,260,28,10\n";
  CHECK_THROWS_AS(parse_dataset(bad, s), UnitError);
  s.evaporators[0].lambda.unit = "fraction";
  CHECK_THROWS_AS(parse_dataset(text, s), UnitError);
}

TEST_CASE("schema and timebase errors") {
  CHECK_THROWS_AS(parse_dataset("timestamp,P_rec,f_comp,h_gc\n2020-01-01T00:00:00Z,1,1,1\n"), SchemaError);
  CHECK_THROWS_AS(parse_dataset(header() + row("2020-01-01T00:01:00Z") + row("2020-01-01T00:00:00Z")), TimebaseError);
  CHECK_THROWS_AS(parse_dataset(header() + row("2020-01-01T00:00:00Z") + row("2020-01-01T00:00:00Z") +
                                row("2020-01-01T00:01:00Z")),
                  TimebaseError);
  auto s = Schema::infer({"timestamp", "P_rec", "f_comp", "h_gc", "P_e_MT1", "lambda_MT1"});
  s.evaporators[0].lambda.column = "nope";
  CHECK_THROWS_AS(parse_dataset(header() + row("2020-01-01T00:00:00Z") + row("2020-01-01T00:01:00Z"), s),
                  SchemaError);
}

TEST_CASE("serialize and parse round-trip bit-identically") {
  PlantDataset ds;
  ds.start = parse_rfc3339("2021-03-04T05:06:00Z");
  ds.dt = std::chrono::seconds{60};
  ds.evaporators = {{"LT1", Group::LT}, {"MT1", Group::MT}, {"MT2", Group::MT}};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = 200;
  auto channel = [&](double lo, double hi) {
    Channel c;
    for (std::size_t i = 0; i < n; ++i) c.push_back(lo + (hi - lo) * u(rng));
    return c;
  };
  ds.p_rec = channel(33, 37);
  ds.f_comp = channel(0, 1);
  ds.h_gc = channel(2.5e5, 2.7e5);
  for (int i = 0; i < 3; ++i) {
    ds.p_e.push_back(channel(12, 29));
    ds.lambda.push_back(channel(0, 1));
  }
  ds.p_e[1][17] = std::nullopt;
  const auto text = serialize_dataset(ds);
  const auto back = parse_dataset(text);
  CHECK(back.start == ds.start);
  CHECK(back.dt == ds.dt);
  CHECK(back.p_rec == ds.p_rec);
  CHECK(back.f_comp == ds.f_comp);
  CHECK(back.h_gc == ds.h_gc);
  CHECK(back.p_e == ds.p_e);
  CHECK(back.lambda == ds.lambda);
  CHECK(serialize_dataset(back) == text);
}

TEST_CASE("resample_average") {
  const Channel c{1.0, 2.0, 3.0, 4.0};
  CHECK(resample_average(c, 2) == Channel{1.5, 3.5});
  CHECK(resample_average(c, 1) == c);
  CHECK(resample_average(Channel{1.0, 2.0, 3.0, 4.0, 5.0}, 2) == Channel{1.5, 3.5});

  // Majority rule: 2 of 4 missing keeps the window, 3 of 4 drops it.
  const Channel g{1.0, std::nullopt, std::nullopt, 3.0, std::nullopt, std::nullopt, std::nullopt, 8.0};
  const auto r = resample_average(g, 4);
  REQUIRE(r.size() == 2);
  CHECK(*r[0] == 2.0);
  CHECK_FALSE(r[1].has_value());

  SampledSeries s{parse_rfc3339("2020-01-01T00:00:00Z"), std::chrono::seconds{60}, c};
  const auto rs = resample_average(s, 2);
  CHECK(rs.dt.count() == 120);
  CHECK(rs.start == s.start);
}

TEST_CASE("resampling composes and preserves the mean") {
  const auto c = iota_channel(600);
  const auto ab = resample_average(resample_average(c, 3), 5);
  const auto direct = resample_average(c, 15);
  REQUIRE(ab.size() == direct.size());
  double in_mean = 0.0;
  for (const auto& v : c) in_mean += *v;
  in_mean /= static_cast<double>(c.size());
  double out_mean = 0.0;
  for (std::size_t i = 0; i < ab.size(); ++i) {
    CHECK(*ab[i] == doctest::Approx(*direct[i]).epsilon(1e-13));
    out_mean += *direct[i];
  }
  out_mean /= static_cast<double>(direct.size());
  CHECK(out_mean == doctest::Approx(in_mean).epsilon(1e-12));
}

TEST_CASE("averaging white noise divides the variance by the factor") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 2.0);
  Channel c;
  for (int i = 0; i < 100000; ++i) c.push_back(n(rng));
  const auto r = resample_average(c, 4);
  double m = 0.0;
  for (const auto& v : r) m += *v;
  m /= static_cast<double>(r.size());
  double var = 0.0;
  for (const auto& v : r) var += (*v - m) * (*v - m);
  var /= static_cast<double>(r.size() - 1);
  CHECK(var == doctest::Approx(4.0 / 4.0).epsilon(0.15));
}

TEST_CASE("dataset validation") {
  PlantDataset ds;
  ds.evaporators = {{"MT1", Group::MT}, {"LT1", Group::LT}};
  ds.p_rec = Channel(3, 35.0);
  ds.f_comp = Channel(3, 0.5);
  ds.h_gc = Channel(3, 2.6e5);
  ds.p_e = {Channel(3, 28.0), Channel(3, 13.0)};
  ds.lambda = {Channel(3, 1.0), Channel(3, 0.0)};
  CHECK_THROWS_AS(ds.validate(), DataError);  // MT before LT
  std::swap(ds.evaporators[0], ds.evaporators[1]);
  CHECK_NOTHROW(ds.validate());
  ds.lambda[0][1] = 1.5;
  CHECK_THROWS_AS(ds.validate(), DataError);
}
