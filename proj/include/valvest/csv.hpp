#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace valvest::csv {

/// A parsed comma-separated file. Cells are kept as text; callers convert.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws SchemaError when absent.
  std::size_t column(std::string_view name) const;
  std::optional<std::size_t> find_column(std::string_view name) const;
};

/// Parses RFC 4180-style CSV (double-quoted cells may contain commas). Blank
/// lines are skipped, CRLF is accepted. Every row must have the header's width.
Table parse(std::string_view text);

/// Strict numeric conversion of a whole cell; throws DataError on junk.
double to_double(std::string_view cell);

/// True for cells that encode a missing value ("", "NA", "NaN", "nan", "null").
bool is_missing(std::string_view cell);

/// Cell text, double-quoted when it contains a comma, quote or line break.
std::string escape(std::string_view cell);

/// Shortest representation that parses back to the same double.
std::string format_double(double v);

/// Fixed-notation formatting with a given number of decimals.
std::string format_fixed(double v, int decimals);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace valvest::csv
