#pragma once

#include <array>
#include <chrono>
#include <compare>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace smokebench {

// Error taxonomy, mapped to process exit codes by the CLI:
// ConfigError -> 1 (usage/config), DataError -> 2 (data/validation).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ReportError : DataError {
  using DataError::DataError;
};

using UtcInstant = std::chrono::sys_seconds;
using Date = std::chrono::sys_days;

std::optional<Date> parse_date(std::string_view text);  // strict YYYY-MM-DD
std::string format_date(Date d);

// Strict ISO-8601 instant with Z suffix: YYYY-MM-DDTHH:MM:SSZ.
std::optional<UtcInstant> parse_instant(std::string_view text);
std::string format_instant(UtcInstant t);
bool hour_aligned(UtcInstant t);

// Smallest value admitted on ingest; admitted negatives are flagged, never clamped.
inline constexpr double kMinIngestConcentration = -5.0;

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;
};
bool valid_geopoint(const GeoPoint& p);

struct UrbanArea {
  std::string id;
  std::string name;
  GeoPoint center;
};

// Open set of forecast system ids; the baseline id below is reserved and is
// never listed as a forecast model.
using ModelId = std::string;
inline const std::string kPersistenceModel = "persistence";
inline const std::string kMeasuredSource = "measured";

// The 24-hour decision window labeled by a calendar date: slot k (0-based
// storage) is the UTC instant 13:00 of label_date plus k hours, so the window
// runs 13:00Z through 12:00Z of the next day. Formulas and user-facing
// messages index hours 1..24 == slot+1.
struct DayWindow {
  Date label_date{};
  static constexpr int kSlots = 24;
  static constexpr int kStartHourUtc = 13;

  UtcInstant hour(int slot) const;
  bool operator==(const DayWindow&) const = default;
};

struct DaySeries {
  DayWindow window{};
  std::array<double, DayWindow::kSlots> values{};
  std::array<bool, DayWindow::kSlots> present{};
  std::string source;  // a ModelId or kMeasuredSource

  bool complete() const;

  // The four accessors below require a complete series and throw
  // std::logic_error otherwise; metric code never sees partial series.
  double min_value() const;
  double max_value() const;
  double mean_value() const;
  int argmin_slot() const;  // earliest slot attaining the minimum
};

struct ValidationResult {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// Checks the series invariants: every slot present, every value finite and
// >= kMinIngestConcentration. Messages use 1-based hour indices.
ValidationResult validate_series(const DaySeries& series);

struct DayKey {
  std::string city_id;
  Date date{};
  auto operator<=>(const DayKey&) const = default;
};

}  // namespace smokebench
