#include "valvest/timeseries.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <set>

#include "valvest/csv.hpp"
#include "valvest/errors.hpp"

namespace valvest {

namespace {

using std::chrono::milliseconds;

int parse_digits(std::string_view s, std::size_t pos, std::size_t count, std::string_view full) {
  if (pos + count > s.size()) throw TimebaseError("malformed timestamp '" + std::string(full) + "'");
  int v = 0;
  for (std::size_t i = pos; i < pos + count; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) {
      throw TimebaseError("malformed timestamp '" + std::string(full) + "'");
    }
    v = v * 10 + (s[i] - '0');
  }
  return v;
}

double pressure_scale(const ColumnMapping& m) {
  if (m.unit == "bar" || m.unit.empty()) return 1.0;
  if (m.unit == "kPa") return 0.01;
  if (m.unit == "MPa") return 10.0;
  throw UnitError("unknown pressure unit '" + m.unit + "' for column '" + m.column + "'");
}

double fraction_scale(const ColumnMapping& m) {
  if (m.unit == "fraction" || m.unit.empty()) return 1.0;
  if (m.unit == "percent") return 0.01;
  throw UnitError("unknown fraction unit '" + m.unit + "' for column '" + m.column + "'");
}

double enthalpy_scale(const ColumnMapping& m) {
  if (m.unit == "J/kg" || m.unit.empty()) return 1.0;
  if (m.unit == "kJ/kg") return 1000.0;
  throw UnitError("unknown enthalpy unit '" + m.unit + "' for column '" + m.column + "'");
}

void require_present_values(const Channel& c, const std::string& name) {
  const auto present = std::count_if(c.begin(), c.end(), [](const auto& v) { return v.has_value(); });
  if (present < 2) throw DataError("channel '" + name + "' has fewer than two present values");
}

Group group_from_id(std::string_view id) {
  if (id.size() >= 2) {
    const char a = static_cast<char>(std::toupper(static_cast<unsigned char>(id[0])));
    const char b = static_cast<char>(std::toupper(static_cast<unsigned char>(id[1])));
    if (a == 'L' && b == 'T') return Group::LT;
    if (a == 'M' && b == 'T') return Group::MT;
  }
  throw SchemaError("cannot infer LT/MT group from evaporator id '" + std::string(id) + "'");
}

}  // namespace

TimePoint parse_rfc3339(std::string_view text) {
  std::string_view s = text;
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  if (s.size() < 19 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != 't' && s[10] != ' ') ||
      s[13] != ':' || s[16] != ':') {
    throw TimebaseError("malformed timestamp '" + std::string(text) + "'");
  }
  const int year = parse_digits(s, 0, 4, text);
  const int month = parse_digits(s, 5, 2, text);
  const int day = parse_digits(s, 8, 2, text);
  const int hour = parse_digits(s, 11, 2, text);
  const int minute = parse_digits(s, 14, 2, text);
  const int second = parse_digits(s, 17, 2, text);
  const std::chrono::year_month_day ymd{std::chrono::year{year},
                                        std::chrono::month{static_cast<unsigned>(month)},
                                        std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok() || hour > 23 || minute > 59 || second > 60) {
    throw TimebaseError("invalid date/time in '" + std::string(text) + "'");
  }
  std::size_t pos = 19;
  long long millis = 0;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    long long scale = 100;
    const std::size_t digits_start = pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
      millis += (s[pos] - '0') * scale;
      scale /= 10;
      ++pos;
    }
    if (pos == digits_start) throw TimebaseError("malformed fraction in '" + std::string(text) + "'");
  }
  long long offset_minutes = 0;
  if (pos < s.size()) {
    const char z = s[pos];
    if (z == 'Z' || z == 'z') {
      ++pos;
    } else if (z == '+' || z == '-') {
      if (pos + 6 != s.size() || s[pos + 3] != ':') {
        throw TimebaseError("malformed offset in '" + std::string(text) + "'");
      }
      const int oh = parse_digits(s, pos + 1, 2, text);
      const int om = parse_digits(s, pos + 4, 2, text);
      offset_minutes = (z == '+' ? 1 : -1) * (oh * 60 + om);
      pos += 6;
    }
  }
  if (pos != s.size()) throw TimebaseError("trailing characters in timestamp '" + std::string(text) + "'");
  const std::chrono::sys_days days{ymd};
  return TimePoint{std::chrono::duration_cast<milliseconds>(days.time_since_epoch())} +
         std::chrono::hours{hour} + std::chrono::minutes{minute} + std::chrono::seconds{second} +
         milliseconds{millis} - std::chrono::minutes{offset_minutes};
}

std::string format_rfc3339(TimePoint t) {
  const auto days = std::chrono::floor<std::chrono::days>(t);
  const std::chrono::year_month_day ymd{days};
  auto rest = t - days;
  const auto h = std::chrono::duration_cast<std::chrono::hours>(rest);
  rest -= h;
  const auto m = std::chrono::duration_cast<std::chrono::minutes>(rest);
  rest -= m;
  const auto sec = std::chrono::duration_cast<std::chrono::seconds>(rest);
  rest -= sec;
  const auto ms = rest.count();
  char buf[48];
  if (ms != 0) {
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(h.count()), static_cast<int>(m.count()),
                  static_cast<int>(sec.count()), static_cast<int>(ms));
  } else {
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(h.count()), static_cast<int>(m.count()),
                  static_cast<int>(sec.count()));
  }
  return buf;
}

void SampledSeries::validate() const {
  if (dt.count() <= 0) throw TimebaseError("series dt must be positive");
  std::size_t present = 0;
  for (const auto& v : values) {
    if (v) {
      if (std::isnan(*v)) throw DataError("NaN stored as a present value");
      ++present;
    }
  }
  if (present < 2) throw DataError("series needs at least two present values");
}

GapMap find_gaps(const Channel& channel) {
  GapMap gaps;
  std::size_t i = 0;
  while (i < channel.size()) {
    if (channel[i]) {
      ++i;
      continue;
    }
    const std::size_t begin = i;
    while (i < channel.size() && !channel[i]) ++i;
    gaps.push_back({begin, i});
  }
  return gaps;
}

std::string_view to_string(Group g) { return g == Group::LT ? "LT" : "MT"; }

std::size_t PlantDataset::n_lt() const {
  return static_cast<std::size_t>(std::count_if(evaporators.begin(), evaporators.end(),
                                                [](const auto& e) { return e.group == Group::LT; }));
}

std::size_t PlantDataset::n_mt() const { return evaporators.size() - n_lt(); }

void PlantDataset::validate() const {
  if (dt.count() <= 0) throw TimebaseError("dataset dt must be positive");
  const std::size_t n = size();
  if (f_comp.size() != n || h_gc.size() != n) throw DataError("system channels differ in length");
  if (p_e.size() != evaporators.size() || lambda.size() != evaporators.size()) {
    throw DataError("per-evaporator channel count does not match evaporator list");
  }
  std::set<std::string> ids;
  bool seen_mt = false;
  for (std::size_t i = 0; i < evaporators.size(); ++i) {
    if (!ids.insert(evaporators[i].id).second) {
      throw SchemaError("duplicate evaporator id '" + evaporators[i].id + "'");
    }
    if (evaporators[i].group == Group::MT) seen_mt = true;
    if (evaporators[i].group == Group::LT && seen_mt) {
      throw SchemaError("evaporators must be ordered LT block first, then MT");
    }
    if (p_e[i].size() != n || lambda[i].size() != n) {
      throw DataError("channels of evaporator '" + evaporators[i].id + "' differ in length");
    }
    for (const auto& v : lambda[i]) {
      if (v && !(*v >= 0.0 && *v <= 1.0)) {
        throw UnitError("opening degree of '" + evaporators[i].id + "' outside [0, 1]");
      }
    }
  }
  for (const auto& v : f_comp) {
    if (v && !(*v >= 0.0 && *v <= 1.0)) throw UnitError("compressor load outside [0, 1]");
  }
}

Schema Schema::infer(const std::vector<std::string>& header) {
  Schema schema;
  std::vector<EvaporatorMapping> lt;
  std::vector<EvaporatorMapping> mt;
  const std::string pe_prefix = "P_e_";
  for (const auto& col : header) {
    if (col.rfind(pe_prefix, 0) != 0) continue;
    const std::string id = col.substr(pe_prefix.size());
    EvaporatorMapping m{id, group_from_id(id), {col, "bar"}, {"lambda_" + id, "fraction"}};
    (m.group == Group::LT ? lt : mt).push_back(std::move(m));
  }
  if (lt.empty() && mt.empty()) throw SchemaError("no P_e_<id> evaporator columns found");
  schema.evaporators = std::move(lt);
  schema.evaporators.insert(schema.evaporators.end(), mt.begin(), mt.end());
  return schema;
}

PlantDataset parse_dataset(std::string_view csv_text) {
  const auto table = csv::parse(csv_text);
  return parse_dataset(csv_text, Schema::infer(table.header));
}

PlantDataset parse_dataset(std::string_view csv_text, const Schema& schema) {
  const auto table = csv::parse(csv_text);
  if (schema.evaporators.empty()) throw SchemaError("schema lists no evaporators");

  // Stable LT-then-MT ordering.
  std::vector<EvaporatorMapping> evaps;
  for (const auto& e : schema.evaporators)
    if (e.group == Group::LT) evaps.push_back(e);
  for (const auto& e : schema.evaporators)
    if (e.group == Group::MT) evaps.push_back(e);

  const auto its = table.column(schema.timestamp_column);
  const auto iprec = table.column(schema.p_rec.column);
  const auto ifc = table.column(schema.f_comp.column);
  const auto ihgc = table.column(schema.h_gc.column);
  std::vector<std::size_t> ipe;
  std::vector<std::size_t> ilam;
  for (const auto& e : evaps) {
    ipe.push_back(table.column(e.p_e.column));
    ilam.push_back(table.column(e.lambda.column));
  }
  const double s_prec = pressure_scale(schema.p_rec);
  const double s_hgc = enthalpy_scale(schema.h_gc);

  if (table.rows.size() < 2) throw TimebaseError("need at least two rows to infer the timebase");
  std::vector<TimePoint> times;
  times.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    times.push_back(parse_rfc3339(row[its]));
    if (times.size() > 1 && !(times.back() > times[times.size() - 2])) {
      throw TimebaseError("timestamps not strictly increasing at '" + row[its] + "'");
    }
  }
  std::vector<long long> diffs;
  diffs.reserve(times.size() - 1);
  for (std::size_t i = 1; i < times.size(); ++i) diffs.push_back((times[i] - times[i - 1]).count());
  std::nth_element(diffs.begin(), diffs.begin() + static_cast<long>(diffs.size() / 2), diffs.end());
  const long long median_ms = diffs[diffs.size() / 2];
  const long long dt_s = std::llround(static_cast<double>(median_ms) / 1000.0);
  if (dt_s <= 0) throw TimebaseError("median row spacing below one second");
  const long long dt_ms = dt_s * 1000;

  const TimePoint start = times.front();
  const auto last_index = static_cast<std::size_t>(
      std::llround(static_cast<double>((times.back() - start).count()) / static_cast<double>(dt_ms)));
  const std::size_t n = last_index + 1;

  PlantDataset ds;
  ds.start = start;
  ds.dt = std::chrono::seconds{dt_s};
  for (const auto& e : evaps) ds.evaporators.push_back({e.id, e.group});
  ds.p_rec.assign(n, std::nullopt);
  ds.f_comp.assign(n, std::nullopt);
  ds.h_gc.assign(n, std::nullopt);
  ds.p_e.assign(evaps.size(), Channel(n, std::nullopt));
  ds.lambda.assign(evaps.size(), Channel(n, std::nullopt));

  auto cell = [](const std::string& text, double scale) -> std::optional<double> {
    if (csv::is_missing(text)) return std::nullopt;
    const double v = csv::to_double(text) * scale;
    if (!std::isfinite(v)) return std::nullopt;
    return v;
  };
  auto fraction_cell = [&](const std::string& text, const ColumnMapping& m) -> std::optional<double> {
    if (csv::is_missing(text)) return std::nullopt;
    const double raw = csv::to_double(text);
    const double upper = (m.unit == "percent") ? 100.0 : 1.0;
    if (!(raw >= 0.0 && raw <= upper)) {
      throw UnitError("column '" + m.column + "' value " + text + " outside [0, " +
                      csv::format_double(upper) + "] in " + (m.unit.empty() ? "fraction" : m.unit) +
                      " mode");
    }
    return raw * fraction_scale(m);
  };

  std::vector<bool> filled(n, false);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const long long offset = (times[r] - start).count();
    const long long idx = std::llround(static_cast<double>(offset) / static_cast<double>(dt_ms));
    const long long residual = offset - idx * dt_ms;
    if (std::llabs(residual) * 4 > dt_ms) continue;  // off-grid
    const auto k = static_cast<std::size_t>(idx);
    if (filled[k]) continue;
    filled[k] = true;
    const auto& row = table.rows[r];
    ds.p_rec[k] = cell(row[iprec], s_prec);
    ds.h_gc[k] = cell(row[ihgc], s_hgc);
    ds.f_comp[k] = fraction_cell(row[ifc], schema.f_comp);
    for (std::size_t e = 0; e < evaps.size(); ++e) {
      ds.p_e[e][k] = cell(row[ipe[e]], pressure_scale(evaps[e].p_e));
      ds.lambda[e][k] = fraction_cell(row[ilam[e]], evaps[e].lambda);
    }
  }

  require_present_values(ds.p_rec, schema.p_rec.column);
  require_present_values(ds.f_comp, schema.f_comp.column);
  require_present_values(ds.h_gc, schema.h_gc.column);
  for (std::size_t e = 0; e < evaps.size(); ++e) {
    require_present_values(ds.p_e[e], evaps[e].p_e.column);
    require_present_values(ds.lambda[e], evaps[e].lambda.column);
  }
  ds.validate();
  return ds;
}

std::string serialize_dataset(const PlantDataset& ds) {
  std::string out = "timestamp,P_rec,f_comp,h_gc";
  for (const auto& e : ds.evaporators) out += ",P_e_" + e.id + ",lambda_" + e.id;
  out += '\n';
  auto put = [&out](const std::optional<double>& v) {
    out += ',';
    if (v) out += csv::format_double(*v);
  };
  for (std::size_t t = 0; t < ds.size(); ++t) {
    out += format_rfc3339(ds.time_at(t));
    put(ds.p_rec[t]);
    put(ds.f_comp[t]);
    put(ds.h_gc[t]);
    for (std::size_t e = 0; e < ds.n_evaporators(); ++e) {
      put(ds.p_e[e][t]);
      put(ds.lambda[e][t]);
    }
    out += '\n';
  }
  return out;
}

Channel resample_average(const Channel& channel, int factor) {
  if (factor < 1) throw std::invalid_argument("resampling factor must be >= 1");
  const auto m = static_cast<std::size_t>(factor);
  if (m == 1) return channel;
  const std::size_t n_out = channel.size() / m;
  Channel out(n_out);
  for (std::size_t k = 0; k < n_out; ++k) {
    double sum = 0.0;
    std::size_t present = 0;
    for (std::size_t j = k * m; j < k * m + m; ++j) {
      if (channel[j]) {
        sum += *channel[j];
        ++present;
      }
    }
    const std::size_t missing = m - present;
    if (2 * missing > m || present == 0) {
      out[k] = std::nullopt;
    } else {
      out[k] = sum / static_cast<double>(present);
    }
  }
  return out;
}

SampledSeries resample_average(const SampledSeries& series, int factor) {
  return {series.start, series.dt * factor, resample_average(series.values, factor)};
}

PlantDataset resample_average(const PlantDataset& ds, int factor) {
  PlantDataset out;
  out.start = ds.start;
  out.dt = ds.dt * factor;
  out.evaporators = ds.evaporators;
  out.p_rec = resample_average(ds.p_rec, factor);
  out.f_comp = resample_average(ds.f_comp, factor);
  out.h_gc = resample_average(ds.h_gc, factor);
  for (const auto& c : ds.p_e) out.p_e.push_back(resample_average(c, factor));
  for (const auto& c : ds.lambda) out.lambda.push_back(resample_average(c, factor));
  return out;
}

}  // namespace valvest
