#include "valvest/thermo.hpp"

#include <algorithm>
#include <cmath>

#include "valvest/assets.hpp"
#include "valvest/csv.hpp"
#include "valvest/errors.hpp"

namespace valvest::thermo {

SaturationTable::SaturationTable(std::vector<SaturationRow> rows) : rows_(std::move(rows)) {
  if (rows_.size() < 50) {
    throw DataError("saturation table needs at least 50 rows, got " + std::to_string(rows_.size()));
  }
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const auto& r = rows_[i];
    if (!(r.p_bar > 5.0 && r.p_bar < 73.0)) {
      throw DataError("saturation table pressure outside the subcritical band: " +
                      csv::format_double(r.p_bar));
    }
    if (i > 0 && !(r.p_bar > rows_[i - 1].p_bar)) {
      throw DataError("saturation table pressures must be strictly increasing");
    }
    if (!(r.props.rho_liq > r.props.rho_gas && r.props.rho_gas > 0.0)) {
      throw DataError("saturation table needs rho_liq > rho_gas > 0 at " + csv::format_double(r.p_bar));
    }
    if (!(r.props.h_gas > r.props.h_liq)) {
      throw DataError("saturation table needs h_gas > h_liq at " + csv::format_double(r.p_bar));
    }
  }
}

SaturationTable SaturationTable::from_csv(std::string_view text) {
  const auto table = csv::parse(text);
  const auto ip = table.column("p_bar");
  const auto irl = table.column("rho_liq");
  const auto irg = table.column("rho_gas");
  const auto ihl = table.column("h_liq");
  const auto ihg = table.column("h_gas");
  std::vector<SaturationRow> rows;
  rows.reserve(table.rows.size());
  for (const auto& cells : table.rows) {
    rows.push_back({csv::to_double(cells[ip]),
                    {csv::to_double(cells[irl]), csv::to_double(cells[irg]),
                     csv::to_double(cells[ihl]), csv::to_double(cells[ihg])}});
  }
  return SaturationTable(std::move(rows));
}

const SaturationTable& SaturationTable::bundled() {
  static const SaturationTable table = from_csv(assets::saturation_table_csv());
  return table;
}

SaturationProps SaturationTable::props(double p_bar) const {
  if (!(p_bar >= min_pressure() && p_bar <= max_pressure())) {
    throw OutOfRange("pressure " + csv::format_double(p_bar) + " bar outside saturation table [" +
                         csv::format_double(min_pressure()) + ", " +
                         csv::format_double(max_pressure()) + "]",
                     p_bar);
  }
  // First knot strictly above p; the bracket is [hi-1, hi].
  auto hi = std::upper_bound(rows_.begin(), rows_.end(), p_bar,
                             [](double p, const SaturationRow& r) { return p < r.p_bar; });
  if (hi == rows_.begin()) return rows_.front().props;
  const auto& a = *(hi - 1);
  if (a.p_bar == p_bar || hi == rows_.end()) return a.props;
  const auto& b = *hi;
  const double w = (p_bar - a.p_bar) / (b.p_bar - a.p_bar);
  auto lerp = [w](double x0, double x1) { return x0 + w * (x1 - x0); };
  return {lerp(a.props.rho_liq, b.props.rho_liq), lerp(a.props.rho_gas, b.props.rho_gas),
          lerp(a.props.h_liq, b.props.h_liq), lerp(a.props.h_gas, b.props.h_gas)};
}

double SaturationTable::gas_quality(double h, double p_bar) const {
  const auto s = props(p_bar);
  const double q = (h - s.h_liq) / (s.h_gas - s.h_liq);
  return std::clamp(q, 0.0, 1.0);
}

}  // namespace valvest::thermo
