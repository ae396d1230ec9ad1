#pragma once

#include <string_view>
#include <vector>

namespace valvest::thermo {

/// Saturated CO2 state at one pressure. Pressures in bar (absolute), densities
/// in kg/m^3, enthalpies in J/kg.
struct SaturationProps {
  double rho_liq = 0.0;
  double rho_gas = 0.0;
  double h_liq = 0.0;
  double h_gas = 0.0;

  friend bool operator==(const SaturationProps&, const SaturationProps&) = default;
};

struct SaturationRow {
  double p_bar = 0.0;
  SaturationProps props;
};

/// Tabulated CO2 saturation line with linear interpolation between knots.
///
/// The bundled table spans 6..72 bar in 0.5 bar steps, generated from the
/// Span-Wagner equation of state (CoolProp) by tools/gen_saturation_table.py.
/// Pressures are absolute. Immutable after construction.
class SaturationTable {
 public:
  /// Validates the rows: strictly increasing pressure inside (5, 73) bar,
  /// rho_liq > rho_gas > 0, h_gas > h_liq, and at least 50 knots.
  explicit SaturationTable(std::vector<SaturationRow> rows);

  /// Parses the `p_bar,rho_liq,rho_gas,h_liq,h_gas` CSV asset.
  static SaturationTable from_csv(std::string_view text);

  /// The table compiled into the library.
  static const SaturationTable& bundled();

  const std::vector<SaturationRow>& rows() const noexcept { return rows_; }
  double min_pressure() const noexcept { return rows_.front().p_bar; }
  double max_pressure() const noexcept { return rows_.back().p_bar; }

  /// Linearly interpolated saturation properties; exact at knots.
  /// Throws OutOfRange outside [min_pressure, max_pressure].
  SaturationProps props(double p_bar) const;

  /// Vapour mass fraction of a state with enthalpy `h` at pressure `p_bar`,
  /// clamped to [0, 1].
  double gas_quality(double h, double p_bar) const;

 private:
  std::vector<SaturationRow> rows_;
};

}  // namespace valvest::thermo
