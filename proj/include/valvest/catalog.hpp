#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace valvest {

struct ValveType {
  std::string name;
  double a = 0.0;  ///< valve constant, catalog units
};

/// Valve types available for the search, ascending in valve constant.
class ValveCatalog {
 public:
  /// Requires unique names and strictly increasing positive constants. Throws DataError.
  explicit ValveCatalog(std::vector<ValveType> entries);

  /// `name,A` CSV.
  static ValveCatalog from_csv(std::string_view text);

  /// AKV 10-0 .. AKV 10-6, compiled into the library.
  static const ValveCatalog& bundled();

  const std::vector<ValveType>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

  /// Throws DataError for an unknown name.
  const ValveType& find(std::string_view name) const;

 private:
  std::vector<ValveType> entries_;
};

}  // namespace valvest
