#pragma once

// Crime-record ingestion: civil dates, holiday calendars, raw/processed CSV
// schemas and per-label splitting.

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "crimefis/error.hpp"

namespace crimefis {

using Date = std::chrono::year_month_day;

namespace detail {

inline std::string_view trim(std::string_view s) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  text = trim(text);
  if (text.empty()) return false;
  if constexpr (std::is_floating_point_v<T>) {
    // from_chars rejects a leading '+'; strtod would also accept hex and
    // locale-dependent forms, which we do not want here.
    if (text.front() == '+') text.remove_prefix(1);
  }
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

/// Shortest decimal text that round-trips to the same double.
inline std::string format_shortest(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

}  // namespace detail

/// Parses a strict ISO-8601 calendar date `YYYY-MM-DD`.
/// Returns false for malformed text or impossible dates (2013-02-30).
inline bool try_parse_date(std::string_view text, Date& out) {
  text = detail::trim(text);
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9}) {
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) return false;
  }
  int y = 0;
  unsigned m = 0, d = 0;
  detail::parse_number(text.substr(0, 4), y);
  detail::parse_number(text.substr(5, 2), m);
  detail::parse_number(text.substr(8, 2), d);
  Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!date.ok()) return false;
  out = date;
  return true;
}

inline Date parse_date(std::string_view text) {
  Date d;
  if (!try_parse_date(text, d)) {
    throw DataError("invalid date '" + std::string(text) + "' (expected YYYY-MM-DD)");
  }
  return d;
}

inline std::string format_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

inline long days_between(const Date& a, const Date& b) {
  return (std::chrono::sys_days{b} - std::chrono::sys_days{a}).count();
}

/// Trimmed, lowercased class name.
inline std::string normalize_label(std::string_view label) {
  std::string out(detail::trim(label));
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

/// Sorted, duplicate-free set of public holidays.
class HolidayCalendar {
 public:
  HolidayCalendar() = default;

  /// Accepts dates in any order; duplicates are rejected.
  explicit HolidayCalendar(std::vector<Date> holidays) : holidays_(std::move(holidays)) {
    std::sort(holidays_.begin(), holidays_.end());
    auto dup = std::adjacent_find(holidays_.begin(), holidays_.end());
    if (dup != holidays_.end()) {
      throw ConfigError("duplicate holiday " + format_date(*dup));
    }
  }

  const std::vector<Date>& holidays() const noexcept { return holidays_; }
  bool empty() const noexcept { return holidays_.empty(); }
  bool contains(const Date& d) const {
    return std::binary_search(holidays_.begin(), holidays_.end(), d);
  }

 private:
  std::vector<Date> holidays_;
};

/// One ISO date per line; blank lines and `#` comments are skipped.
inline HolidayCalendar read_holiday_calendar(std::istream& in) {
  std::vector<Date> dates;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    auto body = detail::trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    Date d;
    if (!try_parse_date(body, d)) {
      throw DataError("invalid holiday date '" + std::string(body) + "'", lineno);
    }
    dates.push_back(d);
  }
  if (dates.empty()) throw ConfigError("holiday calendar is empty");
  return HolidayCalendar(std::move(dates));
}

inline HolidayCalendar load_holiday_calendar(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open holiday calendar " + path.string());
  return read_holiday_calendar(in);
}

/// Absolute distance in days from `date` to the nearest holiday.
inline long holiday_difference(const Date& date, const HolidayCalendar& calendar) {
  if (calendar.empty()) throw ConfigError("holiday calendar is empty");
  const auto& hs = calendar.holidays();
  auto it = std::lower_bound(hs.begin(), hs.end(), date);
  long best = -1;
  if (it != hs.end()) best = days_between(date, *it);
  if (it != hs.begin()) {
    long before = days_between(*std::prev(it), date);
    if (best < 0 || before < best) best = before;
  }
  return best;
}

struct RawRecord {
  std::string label;
  double latitude = 0;
  double longitude = 0;
  Date occurrence_date;
};

struct ProcessedRecord {
  std::string label;
  double latitude = 0;
  double longitude = 0;
  int day = 1;
  long holiday_diff = 0;

  bool operator==(const ProcessedRecord&) const = default;
};

/// Model input in fixed dimension order.
struct InputVector {
  static constexpr std::size_t kDims = 4;

  double latitude = 0;
  double longitude = 0;
  double day = 1;
  double holiday_diff = 0;

  std::array<double, kDims> values() const { return {latitude, longitude, day, holiday_diff}; }
};

inline const std::array<std::string, InputVector::kDims>& dimension_names() {
  static const std::array<std::string, InputVector::kDims> names{"latitude", "longitude", "day",
                                                                 "holiday_diff"};
  return names;
}

inline InputVector to_input(const ProcessedRecord& r) {
  return {r.latitude, r.longitude, static_cast<double>(r.day), static_cast<double>(r.holiday_diff)};
}

inline InputVector make_query(double latitude, double longitude, const Date& date,
                              const HolidayCalendar& calendar) {
  return {latitude, longitude, static_cast<double>(static_cast<unsigned>(date.day())),
          static_cast<double>(holiday_difference(date, calendar))};
}

namespace detail {

inline void check_coordinates(double lat, double lon, std::size_t line) {
  if (!std::isfinite(lat) || lat < -90 || lat > 90) {
    throw DataError("latitude out of range [-90, 90]", line);
  }
  if (!std::isfinite(lon) || lon < -180 || lon > 180) {
    throw DataError("longitude out of range [-180, 180]", line);
  }
}

}  // namespace detail

inline void validate(const RawRecord& raw, std::size_t line = 0) {
  if (normalize_label(raw.label).empty()) throw DataError("empty label", line);
  detail::check_coordinates(raw.latitude, raw.longitude, line);
  if (!raw.occurrence_date.ok()) throw DataError("invalid occurrence date", line);
}

inline ProcessedRecord process_record(const RawRecord& raw, const HolidayCalendar& calendar,
                                      std::size_t line = 0) {
  validate(raw, line);
  return {normalize_label(raw.label), raw.latitude, raw.longitude,
          static_cast<int>(static_cast<unsigned>(raw.occurrence_date.day())),
          holiday_difference(raw.occurrence_date, calendar)};
}

enum class CsvSchema { Raw, Processed };

namespace detail {

struct Header {
  CsvSchema schema;
  std::map<std::string, std::size_t> column;
};

inline Header parse_header(std::string_view line) {
  static const std::set<std::string> raw{"label", "latitude", "longitude", "date"};
  static const std::set<std::string> processed{"label", "latitude", "longitude", "day",
                                               "holiday_diff"};
  Header h{};
  std::set<std::string> seen;
  auto cells = split(line, ',');
  for (std::size_t i = 0; i < cells.size(); ++i) {
    std::string name = normalize_label(cells[i]);
    if (!raw.count(name) && !processed.count(name)) {
      throw DataError("unknown column '" + name + "'", 1);
    }
    if (!seen.insert(name).second) throw DataError("duplicate column '" + name + "'", 1);
    h.column[name] = i;
  }
  if (seen == raw) {
    h.schema = CsvSchema::Raw;
  } else if (seen == processed) {
    h.schema = CsvSchema::Processed;
  } else {
    throw DataError(
        "header must be 'label,latitude,longitude,date' or "
        "'label,latitude,longitude,day,holiday_diff'",
        1);
  }
  return h;
}

}  // namespace detail

/// Reads either CSV schema. A raw file needs `calendar`; a processed file
/// ignores it. Records keep file order.
inline std::vector<ProcessedRecord> read_dataset(std::istream& in, const HolidayCalendar* calendar) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<ProcessedRecord> out;
  std::optional<detail::Header> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    if (!header) {
      header = detail::parse_header(line);
      if (header->schema == CsvSchema::Raw && (calendar == nullptr || calendar->empty())) {
        throw ConfigError("raw records need a holiday calendar");
      }
      continue;
    }
    auto cells = detail::split(line, ',');
    if (cells.size() != header->column.size()) {
      throw DataError("expected " + std::to_string(header->column.size()) + " fields, got " +
                          std::to_string(cells.size()),
                      lineno);
    }
    auto cell = [&](const char* name) { return cells[header->column.at(name)]; };
    double lat = 0, lon = 0;
    if (!detail::parse_number(cell("latitude"), lat)) throw DataError("bad latitude", lineno);
    if (!detail::parse_number(cell("longitude"), lon)) throw DataError("bad longitude", lineno);

    if (header->schema == CsvSchema::Raw) {
      Date date;
      if (!try_parse_date(cell("date"), date)) {
        throw DataError("invalid date '" + std::string(detail::trim(cell("date"))) + "'", lineno);
      }
      out.push_back(process_record({std::string(cell("label")), lat, lon, date}, *calendar, lineno));
    } else {
      ProcessedRecord r;
      r.label = normalize_label(cell("label"));
      if (r.label.empty()) throw DataError("empty label", lineno);
      detail::check_coordinates(lat, lon, lineno);
      r.latitude = lat;
      r.longitude = lon;
      if (!detail::parse_number(cell("day"), r.day) || r.day < 1 || r.day > 31) {
        throw DataError("day must be an integer in [1, 31]", lineno);
      }
      if (!detail::parse_number(cell("holiday_diff"), r.holiday_diff) || r.holiday_diff < 0) {
        throw DataError("holiday_diff must be a non-negative integer", lineno);
      }
      out.push_back(std::move(r));
    }
  }
  if (!header) throw DataError("missing header line");
  return out;
}

inline std::vector<ProcessedRecord> load_dataset(const std::filesystem::path& path,
                                                 const HolidayCalendar* calendar) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open data file " + path.string());
  try {
    return read_dataset(in, calendar);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

inline void write_processed_csv(std::ostream& out, const std::vector<ProcessedRecord>& records) {
  out << "label,latitude,longitude,day,holiday_diff\n";
  for (const auto& r : records) {
    out << r.label << ',' << detail::format_shortest(r.latitude) << ','
        << detail::format_shortest(r.longitude) << ',' << r.day << ',' << r.holiday_diff << '\n';
  }
}

/// Groups records by label, preserving relative order inside each group.
inline std::map<std::string, std::vector<ProcessedRecord>> split_by_label(
    const std::vector<ProcessedRecord>& records) {
  std::map<std::string, std::vector<ProcessedRecord>> out;
  for (const auto& r : records) out[r.label].push_back(r);
  return out;
}

/// Labels in order of first appearance.
inline std::vector<std::string> labels_in_order(const std::vector<ProcessedRecord>& records) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& r : records) {
    if (seen.insert(r.label).second) out.push_back(r.label);
  }
  return out;
}

}  // namespace crimefis
