#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace valvest {

using TimePoint = std::chrono::sys_time<std::chrono::milliseconds>;

/// One value per grid point; std::nullopt marks a missing sample.
using Channel = std::vector<std::optional<double>>;

/// Parses an RFC 3339 timestamp ("2013-11-01T00:00:00Z", offsets and
/// fractional seconds accepted). Throws TimebaseError on malformed input.
TimePoint parse_rfc3339(std::string_view text);

/// Formats as UTC with a trailing 'Z'; milliseconds are printed only when non-zero.
std::string format_rfc3339(TimePoint t);

/// Uniformly sampled scalar channel.
struct SampledSeries {
  TimePoint start{};
  std::chrono::seconds dt{60};
  Channel values;

  std::size_t size() const noexcept { return values.size(); }
  double dt_minutes() const noexcept { return static_cast<double>(dt.count()) / 60.0; }
  TimePoint time_at(std::size_t i) const { return start + dt * static_cast<long long>(i); }

  /// dt > 0, at least two present values, no NaN stored as a present value.
  void validate() const;
};

/// Half-open run [begin, end) of missing grid points.
struct Gap {
  std::size_t begin = 0;
  std::size_t end = 0;

  friend bool operator==(const Gap&, const Gap&) = default;
};

/// Sorted, disjoint missing stretches of one channel.
using GapMap = std::vector<Gap>;

GapMap find_gaps(const Channel& channel);

enum class Group { LT, MT };

std::string_view to_string(Group g);

struct Evaporator {
  std::string id;
  Group group = Group::MT;
};

/// Aligned multichannel monitoring data on a common grid.
///
/// Evaporators are ordered LT block first, then MT block. Pressures are absolute bar,
/// opening degrees and compressor load are fractions in [0, 1], enthalpy is J/kg.
struct PlantDataset {
  TimePoint start{};
  std::chrono::seconds dt{60};
  std::vector<Evaporator> evaporators;
  std::vector<Channel> p_e;
  std::vector<Channel> lambda;
  Channel p_rec;
  Channel f_comp;
  Channel h_gc;

  std::size_t size() const noexcept { return p_rec.size(); }
  std::size_t n_evaporators() const noexcept { return evaporators.size(); }
  std::size_t n_lt() const;
  std::size_t n_mt() const;
  TimePoint time_at(std::size_t i) const { return start + dt * static_cast<long long>(i); }
  double dt_minutes() const noexcept { return static_cast<double>(dt.count()) / 60.0; }

  SampledSeries series(const Channel& channel) const { return {start, dt, channel}; }

  /// Structural invariants: equal lengths, LT-before-MT ordering, unique ids,
  /// lambda and f_comp inside [0, 1]. Throws DataError.
  void validate() const;
};

/// Where a channel lives in the CSV and what unit it is logged in.
///
/// Units: pressures "bar" | "kPa" | "MPa"; fractions "fraction" | "percent";
/// enthalpy "J/kg" | "kJ/kg". Pressures must be absolute.
struct ColumnMapping {
  std::string column;
  std::string unit;
};

struct EvaporatorMapping {
  std::string id;
  Group group = Group::MT;
  ColumnMapping p_e;
  ColumnMapping lambda;
};

struct Schema {
  std::string timestamp_column = "timestamp";
  ColumnMapping p_rec{"P_rec", "bar"};
  ColumnMapping f_comp{"f_comp", "fraction"};
  ColumnMapping h_gc{"h_gc", "J/kg"};
  std::vector<EvaporatorMapping> evaporators;

  /// Schema of the canonical dialect written by serialize_dataset: evaporator
  /// columns `P_e_<id>` and `lambda_<id>`, group taken from the id prefix (LT/MT).
  static Schema infer(const std::vector<std::string>& header);
};

/// Reads a monitoring CSV. The grid spacing is the median row spacing; rows within
/// dt/4 of a grid point snap to it, others are discarded; grid points without a
/// row are missing.
PlantDataset parse_dataset(std::string_view csv_text, const Schema& schema);

/// Parses with Schema::infer.
PlantDataset parse_dataset(std::string_view csv_text);

/// Canonical CSV: timestamp,P_rec,f_comp,h_gc, then P_e_<id>,lambda_<id> per evaporator.
/// Values are written in shortest round-trip form; missing cells are empty.
std::string serialize_dataset(const PlantDataset& ds);

/// Block averages over windows of `factor` samples. A window is missing when more
/// than half of it is missing; a trailing partial window is dropped.
SampledSeries resample_average(const SampledSeries& series, int factor);
Channel resample_average(const Channel& channel, int factor);

/// Applies the channel resampler to every channel of the dataset.
PlantDataset resample_average(const PlantDataset& ds, int factor);

}  // namespace valvest
