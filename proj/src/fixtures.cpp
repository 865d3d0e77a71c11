#include "smokebench/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "smokebench/csv.hpp"
#include "smokebench/ingest.hpp"

namespace smokebench {

double GaussianStream::next() {
  const double u1 = double(eng_() >> 11) * 0x1.0p-53;
  const double u2 = double(eng_() >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * M_PI * u2);
}

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!known.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

Date require_date(const json& j, const std::string& name) {
  if (!j.is_string()) throw ConfigError("scenario: '" + name + "' must be a date string");
  const auto d = parse_date(j.get<std::string>());
  if (!d) throw ConfigError("scenario: bad date in '" + name + "'");
  return *d;
}

ForecastKind::Type kind_from_string(const std::string& s) {
  if (s == "perfect") return ForecastKind::Type::Perfect;
  if (s == "lagged") return ForecastKind::Type::Lagged;
  if (s == "scaled") return ForecastKind::Type::Scaled;
  if (s == "biased") return ForecastKind::Type::Biased;
  if (s == "noisy") return ForecastKind::Type::Noisy;
  if (s == "constant") return ForecastKind::Type::Constant;
  throw ConfigError("scenario: unknown forecast kind '" + s + "'");
}

void validate_spec(const ScenarioSpec& spec) {
  if (spec.n_cities < 1 || spec.n_cities > 25) {
    throw ConfigError("scenario: n_cities must be in 1..25");
  }
  if (spec.monitors_per_city < 1 || spec.monitors_per_city > 20) {
    throw ConfigError("scenario: monitors_per_city must be in 1..20");
  }
  if (spec.end < spec.start) throw ConfigError("scenario: date_range end before start");
  if (spec.noise_sd < 0.0) throw ConfigError("scenario: noise_sd must be >= 0");
  if (spec.diurnal_amplitude < 0.0) throw ConfigError("scenario: diurnal_amplitude must be >= 0");
  if (spec.baseline_level < 0.0) throw ConfigError("scenario: baseline_level must be >= 0");
  for (const auto& e : spec.events) {
    if (e.city_index < 0 || e.city_index >= spec.n_cities) {
      throw ConfigError("scenario: event city index out of range");
    }
    if (e.duration_days < 1) throw ConfigError("scenario: event duration_days must be >= 1");
    if (!(e.peak > spec.baseline_level)) {
      throw ConfigError("scenario: event peak must exceed baseline_level");
    }
    if (e.ramp_hours < 1) throw ConfigError("scenario: event ramp_hours must be >= 1");
  }
  for (const auto& o : spec.outages) {
    if (o.city_index < 0 || o.city_index >= spec.n_cities) {
      throw ConfigError("scenario: outage city index out of range");
    }
    if (o.hour < 1 || o.hour > 24) throw ConfigError("scenario: outage hour must be in 1..24");
  }
  std::set<std::string> models;
  for (const auto& f : spec.forecasts) {
    if (f.model.empty() || f.model == kPersistenceModel || f.model == kMeasuredSource) {
      throw ConfigError("scenario: bad forecast model id '" + f.model + "'");
    }
    if (!models.insert(f.model).second) {
      throw ConfigError("scenario: duplicate forecast model '" + f.model + "'");
    }
    switch (f.kind.type) {
      case ForecastKind::Type::Scaled:
        if (!(f.kind.param > 0.0)) throw ConfigError("scenario: scaled factor must be > 0");
        break;
      case ForecastKind::Type::Lagged:
        if (f.kind.param != std::floor(f.kind.param) || std::abs(f.kind.param) >= 24) {
          throw ConfigError("scenario: lag must be an integer in (-24, 24)");
        }
        break;
      case ForecastKind::Type::Noisy:
        if (f.kind.param < 0.0) throw ConfigError("scenario: noise sd must be >= 0");
        break;
      case ForecastKind::Type::Constant:
        if (f.kind.param < 0.0) throw ConfigError("scenario: constant level must be >= 0");
        break;
      default:
        break;
    }
  }
}

}  // namespace

ScenarioSpec load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("scenario: top level must be an object");
  reject_unknown(doc,
                 {"seed", "n_cities", "monitors_per_city", "date_range", "baseline_level",
                  "diurnal_amplitude", "noise_sd", "events", "outages", "forecasts"},
                 "scenario");
  for (const char* k : {"seed", "n_cities", "monitors_per_city", "date_range", "forecasts"}) {
    if (!doc.contains(k)) throw ConfigError(std::string("scenario: '") + k + "' is required");
  }

  ScenarioSpec spec;
  spec.seed = doc["seed"].get<std::uint64_t>();
  spec.n_cities = doc["n_cities"].get<int>();
  spec.monitors_per_city = doc["monitors_per_city"].get<int>();
  if (!doc["date_range"].is_array() || doc["date_range"].size() != 2) {
    throw ConfigError("scenario: 'date_range' must be [start, end]");
  }
  spec.start = require_date(doc["date_range"][0], "date_range");
  spec.end = require_date(doc["date_range"][1], "date_range");
  if (doc.contains("baseline_level")) spec.baseline_level = doc["baseline_level"].get<double>();
  if (doc.contains("diurnal_amplitude")) {
    spec.diurnal_amplitude = doc["diurnal_amplitude"].get<double>();
  }
  if (doc.contains("noise_sd")) spec.noise_sd = doc["noise_sd"].get<double>();
  if (doc.contains("events")) {
    for (const auto& e : doc["events"]) {
      reject_unknown(e, {"city", "start", "duration_days", "peak", "ramp_hours"},
                     "scenario event");
      EventSpec ev;
      ev.city_index = e.at("city").get<int>();
      ev.start = require_date(e.at("start"), "event start");
      ev.duration_days = e.at("duration_days").get<int>();
      ev.peak = e.at("peak").get<double>();
      if (e.contains("ramp_hours")) ev.ramp_hours = e["ramp_hours"].get<int>();
      spec.events.push_back(ev);
    }
  }
  if (doc.contains("outages")) {
    for (const auto& o : doc["outages"]) {
      reject_unknown(o, {"city", "date", "hour"}, "scenario outage");
      OutageSpec ou;
      ou.city_index = o.at("city").get<int>();
      ou.date = require_date(o.at("date"), "outage date");
      ou.hour = o.at("hour").get<int>();
      spec.outages.push_back(ou);
    }
  }
  for (const auto& f : doc["forecasts"]) {
    reject_unknown(f, {"model", "kind", "param"}, "scenario forecast");
    SyntheticForecastSpec fc;
    fc.model = f.at("model").get<std::string>();
    fc.kind.type = kind_from_string(f.at("kind").get<std::string>());
    if (f.contains("param")) fc.kind.param = f["param"].get<double>();
    spec.forecasts.push_back(fc);
  }
  validate_spec(spec);
  return spec;
}

namespace {

std::string city_id_of(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "city%02d", i + 1);
  return buf;
}

std::string monitor_id_of(int city, int m) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%s-m%02d", city_id_of(city).c_str(), m + 1);
  return buf;
}

GeoPoint city_center(int i) {
  return {39.0 + 1.7 * i, -105.0 + 2.3 * i};
}

GeoPoint monitor_location(int city, int m) {
  const GeoPoint c = city_center(city);
  // Strictly increasing ring radii keep the distance order unambiguous.
  const double r = 0.02 + 0.015 * m;
  const double ang = 2.39996 * m;
  return {c.lat + r * std::cos(ang), c.lon + r * std::sin(ang)};
}

// Diurnal minimum pinned at 22:00 UTC.
double diurnal_term(const ScenarioSpec& spec, std::int64_t epoch_hour) {
  const double h = double(epoch_hour % 24);
  return -spec.diurnal_amplitude * std::cos(2.0 * M_PI * (h - 22.0) / 24.0);
}

double event_term(const ScenarioSpec& spec, int city, UtcInstant t) {
  double sum = 0.0;
  for (const auto& e : spec.events) {
    if (e.city_index != city) continue;
    const UtcInstant s0 = UtcInstant{e.start} + std::chrono::hours{DayWindow::kStartHourUtc};
    const auto j = std::chrono::duration_cast<std::chrono::hours>(t - s0).count();
    const long total = long(e.duration_days) * DayWindow::kSlots;
    if (j < 0 || j >= total) continue;
    const double up = double(j + 1) / e.ramp_hours;
    const double down = double(total - j) / e.ramp_hours;
    sum += e.peak * std::clamp(std::min(up, down), 0.0, 1.0);
  }
  return sum;
}

}  // namespace

GeneratedScenario generate(const ScenarioSpec& spec, const std::filesystem::path& out_dir) {
  validate_spec(spec);
  std::filesystem::create_directories(out_dir);
  GeneratedScenario out;
  out.dir = out_dir;
  out.config = out_dir / "config.json";
  out.cities = out_dir / "cities.csv";
  out.monitors = out_dir / "monitors.csv";
  out.readings = out_dir / "readings.csv";
  out.forecast = out_dir / "forecast.csv";

  const UtcInstant gen_start = UtcInstant{spec.start - std::chrono::days{1}};
  const UtcInstant gen_end =
      UtcInstant{spec.end + std::chrono::days{1}} + std::chrono::hours{23};
  const long n_hours =
      std::chrono::duration_cast<std::chrono::hours>(gen_end - gen_start).count() + 1;

  GaussianStream gauss(spec.seed);

  // Truth per (city, hour), then monitor samples per (city, monitor, hour):
  // draw order is fixed so the stream is independent of outages and forecasts.
  std::vector<std::vector<double>> truth(spec.n_cities, std::vector<double>(n_hours));
  for (int c = 0; c < spec.n_cities; ++c) {
    for (long h = 0; h < n_hours; ++h) {
      const UtcInstant t = gen_start + std::chrono::hours{h};
      const std::int64_t epoch_hour = t.time_since_epoch().count() / 3600;
      const double level =
          spec.baseline_level + diurnal_term(spec, epoch_hour) + event_term(spec, c, t);
      truth[c][h] = std::max(0.0, level + spec.noise_sd * gauss.next());
    }
  }
  std::vector<std::vector<std::vector<double>>> samples(spec.n_cities);
  for (int c = 0; c < spec.n_cities; ++c) {
    samples[c].assign(spec.monitors_per_city, std::vector<double>(n_hours));
    for (int m = 0; m < spec.monitors_per_city; ++m) {
      for (long h = 0; h < n_hours; ++h) {
        samples[c][m][h] = std::max(0.0, truth[c][h] + spec.noise_sd * gauss.next());
      }
    }
  }

  // City-level hourly mean, summed in monitor order (= the alignment order,
  // since ring radii increase with the monitor index).
  std::vector<std::vector<double>> city_mean(spec.n_cities, std::vector<double>(n_hours));
  for (int c = 0; c < spec.n_cities; ++c) {
    for (long h = 0; h < n_hours; ++h) {
      double sum = 0.0;
      for (int m = 0; m < spec.monitors_per_city; ++m) sum += samples[c][m][h];
      city_mean[c][h] = sum / spec.monitors_per_city;
    }
  }

  {
    std::ofstream f(out.cities, std::ios::binary);
    f << "city_id,name,lat,lon\n";
    for (int c = 0; c < spec.n_cities; ++c) {
      const GeoPoint p = city_center(c);
      char buf[16];
      std::snprintf(buf, sizeof buf, "%02d", c + 1);
      const std::string fields[] = {city_id_of(c), "Synthetic City " + std::string(buf),
                                    format_double(p.lat), format_double(p.lon)};
      write_csv_row(f, fields);
    }
  }
  {
    std::ofstream f(out.monitors, std::ios::binary);
    f << "monitor_id,lat,lon\n";
    for (int c = 0; c < spec.n_cities; ++c) {
      for (int m = 0; m < spec.monitors_per_city; ++m) {
        const GeoPoint p = monitor_location(c, m);
        const std::string fields[] = {monitor_id_of(c, m), format_double(p.lat),
                                      format_double(p.lon)};
        write_csv_row(f, fields);
      }
    }
  }
  {
    std::set<std::pair<int, std::int64_t>> outage_keys;  // (city, epoch seconds)
    for (const auto& o : spec.outages) {
      const UtcInstant t = DayWindow{o.date}.hour(o.hour - 1);
      outage_keys.emplace(o.city_index, t.time_since_epoch().count());
    }
    std::ofstream f(out.readings, std::ios::binary);
    f << "monitor_id,timestamp,pm25\n";
    for (int c = 0; c < spec.n_cities; ++c) {
      for (int m = 0; m < spec.monitors_per_city; ++m) {
        for (long h = 0; h < n_hours; ++h) {
          const UtcInstant t = gen_start + std::chrono::hours{h};
          if (outage_keys.count({c, t.time_since_epoch().count()})) continue;
          const std::string fields[] = {monitor_id_of(c, m), format_instant(t),
                                        format_double(samples[c][m][h])};
          write_csv_row(f, fields);
        }
      }
    }
  }
  {
    std::ofstream f(out.forecast, std::ios::binary);
    f << "model,run_time,valid_time,lat,lon,pm25\n";
    for (const auto& fc : spec.forecasts) {
      for (int c = 0; c < spec.n_cities; ++c) {
        const GeoPoint p = city_center(c);
        for (Date d = spec.start; d <= spec.end; d += std::chrono::days{1}) {
          const DayWindow window{d};
          const UtcInstant run = UtcInstant{d} + std::chrono::hours{12};
          // Window slice of the city mean for the shift transform.
          const long base = std::chrono::duration_cast<std::chrono::hours>(
                                window.hour(0) - gen_start)
                                .count();
          for (int k = 0; k < DayWindow::kSlots; ++k) {
            const double m = city_mean[c][base + k];
            double v = m;
            switch (fc.kind.type) {
              case ForecastKind::Type::Perfect:
                break;
              case ForecastKind::Type::Lagged: {
                const int from = std::clamp(k - int(fc.kind.param), 0, DayWindow::kSlots - 1);
                v = city_mean[c][base + from];
                break;
              }
              case ForecastKind::Type::Scaled:
                v = fc.kind.param * m;
                break;
              case ForecastKind::Type::Biased:
                v = std::max(0.0, m + fc.kind.param);
                break;
              case ForecastKind::Type::Noisy:
                v = std::max(0.0, m + fc.kind.param * gauss.next());
                break;
              case ForecastKind::Type::Constant:
                v = fc.kind.param;
                break;
            }
            const std::string fields[] = {fc.model,
                                          format_instant(run),
                                          format_instant(window.hour(k)),
                                          format_double(p.lat),
                                          format_double(p.lon),
                                          format_double(v)};
            write_csv_row(f, fields);
          }
        }
      }
    }
  }
  {
    json cfg;
    cfg["cities"] = "cities.csv";
    json models = json::array();
    for (const auto& fc : spec.forecasts) models.push_back(fc.model);
    cfg["models"] = models;
    cfg["date_range"] = {format_date(spec.start), format_date(spec.end)};
    cfg["monitors"] = "monitors.csv";
    cfg["readings"] = "readings.csv";
    cfg["forecasts"] = "forecast.csv";
    cfg["output_dir"] = "results";
    std::ofstream f(out.config, std::ios::binary);
    f << cfg.dump(2) << "\n";
  }
  return out;
}

namespace {

bool same_bytes(const std::filesystem::path& a, const std::filesystem::path& b) {
  std::ifstream fa(a, std::ios::binary);
  std::ifstream fb(b, std::ios::binary);
  if (!fa || !fb) return false;
  std::string da((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  std::string db((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  return da == db;
}

}  // namespace

RegenerateResult regenerate_check(const ScenarioSpec& spec,
                                  const std::filesystem::path& previous_dir) {
  const std::filesystem::path scratch = previous_dir.string() + ".recheck";
  std::filesystem::remove_all(scratch);
  generate(spec, scratch);
  RegenerateResult result;
  for (const char* name :
       {"cities.csv", "monitors.csv", "readings.csv", "forecast.csv", "config.json"}) {
    if (!same_bytes(previous_dir / name, scratch / name)) {
      result.ok = false;
      result.first_difference = name;
      break;
    }
  }
  std::filesystem::remove_all(scratch);
  return result;
}

}  // namespace smokebench
