#include "smokebench/core.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace smokebench {

namespace {

bool parse_int_field(std::string_view text, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > text.size()) return false;
  const char* first = text.data() + pos;
  const char* last = first + len;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

}  // namespace

std::optional<Date> parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0, m = 0, d = 0;
  if (!parse_int_field(text, 0, 4, y) || !parse_int_field(text, 5, 2, m) ||
      !parse_int_field(text, 8, 2, d)) {
    return std::nullopt;
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{unsigned(m)},
                                        std::chrono::day{unsigned(d)}};
  if (!ymd.ok()) return std::nullopt;
  return Date{ymd};
}

std::string format_date(Date d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()),
                unsigned(ymd.day()));
  return buf;
}

std::optional<UtcInstant> parse_instant(std::string_view text) {
  if (text.size() != 20 || text[10] != 'T' || text[13] != ':' || text[16] != ':' ||
      text[19] != 'Z') {
    return std::nullopt;
  }
  const auto date = parse_date(text.substr(0, 10));
  if (!date) return std::nullopt;
  int hh = 0, mm = 0, ss = 0;
  if (!parse_int_field(text, 11, 2, hh) || !parse_int_field(text, 14, 2, mm) ||
      !parse_int_field(text, 17, 2, ss)) {
    return std::nullopt;
  }
  if (hh > 23 || mm > 59 || ss > 59) return std::nullopt;
  return UtcInstant{*date} + std::chrono::hours{hh} + std::chrono::minutes{mm} +
         std::chrono::seconds{ss};
}

std::string format_instant(UtcInstant t) {
  const Date day = std::chrono::floor<std::chrono::days>(t);
  const auto tod = std::chrono::hh_mm_ss{t - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%sT%02ld:%02ld:%02ldZ", format_date(day).c_str(),
                long(tod.hours().count()), long(tod.minutes().count()),
                long(tod.seconds().count()));
  return buf;
}

bool hour_aligned(UtcInstant t) {
  return t.time_since_epoch().count() % 3600 == 0;
}

bool valid_geopoint(const GeoPoint& p) {
  return std::isfinite(p.lat) && std::isfinite(p.lon) && p.lat >= -90.0 && p.lat <= 90.0 &&
         p.lon >= -180.0 && p.lon <= 180.0;
}

UtcInstant DayWindow::hour(int slot) const {
  if (slot < 0 || slot >= kSlots) throw std::logic_error("DayWindow slot out of range");
  return UtcInstant{label_date} + std::chrono::hours{kStartHourUtc + slot};
}

bool DaySeries::complete() const {
  for (bool p : present) {
    if (!p) return false;
  }
  return true;
}

namespace {

void require_complete(const DaySeries& s, const char* op) {
  if (!s.complete()) throw std::logic_error(std::string(op) + " requires a complete series");
}

}  // namespace

double DaySeries::min_value() const {
  require_complete(*this, "min_value");
  double m = values[0];
  for (int k = 1; k < DayWindow::kSlots; ++k) {
    if (values[k] < m) m = values[k];
  }
  return m;
}

double DaySeries::max_value() const {
  require_complete(*this, "max_value");
  double m = values[0];
  for (int k = 1; k < DayWindow::kSlots; ++k) {
    if (values[k] > m) m = values[k];
  }
  return m;
}

double DaySeries::mean_value() const {
  require_complete(*this, "mean_value");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / DayWindow::kSlots;
}

int DaySeries::argmin_slot() const {
  require_complete(*this, "argmin_slot");
  int best = 0;
  for (int k = 1; k < DayWindow::kSlots; ++k) {
    if (values[k] < values[best]) best = k;  // strict: ties keep the earliest slot
  }
  return best;
}

ValidationResult validate_series(const DaySeries& series) {
  ValidationResult result;
  for (int k = 0; k < DayWindow::kSlots; ++k) {
    const int hour = k + 1;
    if (!series.present[k]) {
      result.violations.push_back("incomplete: slot " + std::to_string(hour) + " missing");
      continue;
    }
    const double v = series.values[k];
    if (!std::isfinite(v)) {
      result.violations.push_back("non-finite at slot " + std::to_string(hour));
    } else if (v < kMinIngestConcentration) {
      result.violations.push_back("below admissible minimum at slot " + std::to_string(hour));
    }
  }
  return result;
}

}  // namespace smokebench
