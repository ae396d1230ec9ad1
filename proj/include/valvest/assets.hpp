#pragma once

#include <string_view>

namespace valvest::assets {

/// Contents of data/saturation_co2.csv, embedded at build time.
std::string_view saturation_table_csv();

/// Contents of data/valve_catalog.csv, embedded at build time.
std::string_view valve_catalog_csv();

}  // namespace valvest::assets
