#include "valvest/catalog.hpp"

#include <set>

#include "valvest/assets.hpp"
#include "valvest/csv.hpp"
#include "valvest/errors.hpp"

namespace valvest {

ValveCatalog::ValveCatalog(std::vector<ValveType> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw DataError("valve catalog is empty");
  std::set<std::string> names;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (!names.insert(e.name).second) throw DataError("duplicate valve name '" + e.name + "'");
    if (!(e.a > 0.0)) throw DataError("valve '" + e.name + "' has a non-positive constant");
    if (i > 0 && !(e.a > entries_[i - 1].a)) {
      throw DataError("valve constants must increase strictly ('" + e.name + "')");
    }
  }
}

ValveCatalog ValveCatalog::from_csv(std::string_view text) {
  const auto table = csv::parse(text);
  const auto in = table.column("name");
  const auto ia = table.column("A");
  std::vector<ValveType> entries;
  for (const auto& row : table.rows) {
    entries.push_back({row[in], csv::to_double(row[ia])});
  }
  return ValveCatalog(std::move(entries));
}

const ValveCatalog& ValveCatalog::bundled() {
  static const ValveCatalog catalog = from_csv(assets::valve_catalog_csv());
  return catalog;
}

const ValveType& ValveCatalog::find(std::string_view name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return e;
  }
  throw DataError("unknown valve '" + std::string(name) + "'");
}

}  // namespace valvest
