#include "smokebench/ingest.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

#include "smokebench/csv.hpp"
#include "smokebench/spatial.hpp"

namespace smokebench {

namespace {

double parse_double_field(const std::string& text, const std::string& context, const char* name) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || !std::isfinite(v)) {
    throw DataError(context + ": bad " + name + " '" + text + "'");
  }
  return v;
}

double parse_concentration(const std::string& text, const std::string& context, const char* name) {
  const double v = parse_double_field(text, context, name);
  if (v < kMinIngestConcentration) {
    throw DataError(context + ": " + name + " below admissible minimum");
  }
  return v;
}

}  // namespace

std::vector<MonitorStation> load_monitors(const std::filesystem::path& path) {
  CsvReader reader(path, {"monitor_id", "lat", "lon"});
  std::vector<MonitorStation> stations;
  std::set<std::string> seen;
  std::vector<std::string> f;
  while (reader.next(f)) {
    const std::string ctx = reader.context();
    if (f[0].empty()) throw DataError(ctx + ": empty monitor_id");
    if (!seen.insert(f[0]).second) throw DataError(ctx + ": duplicate monitor_id '" + f[0] + "'");
    const double lat = parse_double_field(f[1], ctx, "lat");
    const double lon = parse_double_field(f[2], ctx, "lon");
    if (lat < -90.0 || lat > 90.0) throw DataError(ctx + ": lat out of range");
    if (lon < -180.0 || lon > 180.0) throw DataError(ctx + ": lon out of range");
    stations.push_back({f[0], GeoPoint{lat, lon}, std::nullopt});
  }
  return stations;
}

std::vector<UrbanArea> load_cities(const std::filesystem::path& path) {
  CsvReader reader(path, {"city_id", "name", "lat", "lon"});
  std::vector<UrbanArea> cities;
  std::set<std::string> seen;
  std::vector<std::string> f;
  while (reader.next(f)) {
    const std::string ctx = reader.context();
    if (f[0].empty()) throw DataError(ctx + ": empty city_id");
    if (f[1].empty()) throw DataError(ctx + ": empty name");
    if (!seen.insert(f[0]).second) throw DataError(ctx + ": duplicate city_id '" + f[0] + "'");
    const double lat = parse_double_field(f[2], ctx, "lat");
    const double lon = parse_double_field(f[3], ctx, "lon");
    if (lat < -90.0 || lat > 90.0) throw DataError(ctx + ": lat out of range");
    if (lon < -180.0 || lon > 180.0) throw DataError(ctx + ": lon out of range");
    cities.push_back({f[0], f[1], GeoPoint{lat, lon}});
  }
  return cities;
}

void ReadingStore::insert(const std::string& monitor_id, UtcInstant t, double value) {
  auto& per_monitor = by_monitor_[monitor_id];
  const auto [it, inserted] = per_monitor.insert_or_assign(t.time_since_epoch().count(), value);
  (void)it;
  if (inserted) {
    ++size_;
  } else {
    ++duplicates_;
  }
}

std::optional<double> ReadingStore::at(const std::string& monitor_id, UtcInstant t) const {
  const auto m = by_monitor_.find(monitor_id);
  if (m == by_monitor_.end()) return std::nullopt;
  const auto v = m->second.find(t.time_since_epoch().count());
  if (v == m->second.end()) return std::nullopt;
  return v->second;
}

void ReadingStore::erase(const std::string& monitor_id, UtcInstant t) {
  const auto m = by_monitor_.find(monitor_id);
  if (m == by_monitor_.end()) return;
  size_ -= m->second.erase(t.time_since_epoch().count());
}

std::vector<std::tuple<std::string, UtcInstant, double>> ReadingStore::sorted_rows() const {
  std::vector<std::tuple<std::string, UtcInstant, double>> rows;
  rows.reserve(size_);
  for (const auto& [id, per_monitor] : by_monitor_) {
    for (const auto& [sec, v] : per_monitor) {
      rows.emplace_back(id, UtcInstant{std::chrono::seconds{sec}}, v);
    }
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) < std::get<0>(b);
    return std::get<1>(a) < std::get<1>(b);
  });
  return rows;
}

void ReadingStore::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError(path.string() + ": cannot write");
  out << "monitor_id,timestamp,pm25\n";
  for (const auto& [id, t, v] : sorted_rows()) {
    const std::string fields[] = {id, format_instant(t), format_double(v)};
    write_csv_row(out, fields);
  }
}

bool ReadingStore::same_contents(const ReadingStore& other) const {
  return sorted_rows() == other.sorted_rows();
}

ReadingStore load_readings(const std::filesystem::path& path,
                           const std::vector<MonitorStation>& stations) {
  std::set<std::string> known;
  for (const auto& s : stations) known.insert(s.monitor_id);
  CsvReader reader(path, {"monitor_id", "timestamp", "pm25"});
  ReadingStore store;
  std::vector<std::string> f;
  while (reader.next(f)) {
    const std::string ctx = reader.context();
    if (!known.count(f[0])) throw DataError(ctx + ": unknown monitor_id '" + f[0] + "'");
    const auto t = parse_instant(f[1]);
    if (!t) throw DataError(ctx + ": bad timestamp '" + f[1] + "'");
    if (!hour_aligned(*t)) throw DataError(ctx + ": timestamp not hour-aligned");
    const double v = parse_concentration(f[2], ctx, "pm25");
    if (v < 0.0) store.note_negative();
    store.insert(f[0], *t, v);
  }
  return store;
}

std::size_t ForecastStore::PointKeyHash::operator()(const PointKey& k) const {
  const std::size_t h1 = std::hash<std::uint64_t>{}(k.lat_bits);
  const std::size_t h2 = std::hash<std::uint64_t>{}(k.lon_bits);
  return h1 ^ (h2 + 0x9e3779b97f4a7c15ULL + (h1 << 6) + (h1 >> 2));
}

ForecastStore::PointKey ForecastStore::key_of(const GeoPoint& p) {
  return {std::bit_cast<std::uint64_t>(p.lat), std::bit_cast<std::uint64_t>(p.lon)};
}

void ForecastStore::insert(const ForecastSample& s) {
  auto& grid = by_model_[s.model][s.run_time.time_since_epoch().count()]
                        [s.valid_time.time_since_epoch().count()];
  const auto [it, inserted] = grid.insert_or_assign(key_of(s.location), s.value);
  (void)it;
  if (inserted) ++size_;
}

bool ForecastStore::has_run(const ModelId& model, UtcInstant run_time) const {
  const auto m = by_model_.find(model);
  if (m == by_model_.end()) return false;
  return m->second.count(run_time.time_since_epoch().count()) > 0;
}

std::optional<double> ForecastStore::value_at(const ModelId& model, UtcInstant run_time,
                                              UtcInstant valid_time, const GeoPoint& p) const {
  const auto m = by_model_.find(model);
  if (m == by_model_.end()) return std::nullopt;
  const auto r = m->second.find(run_time.time_since_epoch().count());
  if (r == m->second.end()) return std::nullopt;
  const auto v = r->second.find(valid_time.time_since_epoch().count());
  if (v == r->second.end()) return std::nullopt;
  const auto cell = v->second.find(key_of(p));
  if (cell == v->second.end()) return std::nullopt;
  return cell->second;
}

std::vector<ForecastSample> ForecastStore::query(const ModelId& model, UtcInstant run_time,
                                                 UtcInstant t0, UtcInstant t1,
                                                 const GeoPoint& center, double radius_km) const {
  std::vector<ForecastSample> out;
  const auto m = by_model_.find(model);
  if (m == by_model_.end()) return out;
  const auto r = m->second.find(run_time.time_since_epoch().count());
  if (r == m->second.end()) return out;
  const auto lo = r->second.lower_bound(t0.time_since_epoch().count());
  const auto hi = r->second.upper_bound(t1.time_since_epoch().count());
  for (auto it = lo; it != hi; ++it) {
    std::vector<ForecastSample> hour_hits;
    for (const auto& [key, value] : it->second) {
      const GeoPoint p{std::bit_cast<double>(key.lat_bits), std::bit_cast<double>(key.lon_bits)};
      if (haversine_km(center, p) <= radius_km) {
        hour_hits.push_back({model, run_time, UtcInstant{std::chrono::seconds{it->first}}, p, value});
      }
    }
    std::sort(hour_hits.begin(), hour_hits.end(), [](const auto& a, const auto& b) {
      if (a.location.lat != b.location.lat) return a.location.lat < b.location.lat;
      return a.location.lon < b.location.lon;
    });
    out.insert(out.end(), hour_hits.begin(), hour_hits.end());
  }
  return out;
}

std::vector<GeoPoint> ForecastStore::locations(const ModelId& model) const {
  std::set<std::pair<double, double>> unique;
  const auto m = by_model_.find(model);
  if (m != by_model_.end()) {
    for (const auto& [run, per_valid] : m->second) {
      for (const auto& [valid, grid] : per_valid) {
        for (const auto& [key, value] : grid) {
          unique.emplace(std::bit_cast<double>(key.lat_bits), std::bit_cast<double>(key.lon_bits));
        }
      }
    }
  }
  std::vector<GeoPoint> out;
  out.reserve(unique.size());
  for (const auto& [lat, lon] : unique) out.push_back({lat, lon});
  return out;
}

ForecastStore load_forecast_samples(const std::filesystem::path& path,
                                    const std::vector<ModelId>& declared_models) {
  const std::set<std::string> declared(declared_models.begin(), declared_models.end());
  CsvReader reader(path, {"model", "run_time", "valid_time", "lat", "lon", "pm25"});
  ForecastStore store;
  std::vector<std::string> f;
  while (reader.next(f)) {
    const std::string ctx = reader.context();
    if (!declared.count(f[0])) {
      throw ConfigError(ctx + ": model '" + f[0] + "' not declared in configuration");
    }
    const auto run = parse_instant(f[1]);
    if (!run) throw DataError(ctx + ": bad run_time '" + f[1] + "'");
    const auto valid = parse_instant(f[2]);
    if (!valid) throw DataError(ctx + ": bad valid_time '" + f[2] + "'");
    if (!hour_aligned(*valid)) throw DataError(ctx + ": valid_time not hour-aligned");
    if (*valid < *run) throw DataError(ctx + ": valid_time before run_time");
    const double lat = parse_double_field(f[3], ctx, "lat");
    const double lon = parse_double_field(f[4], ctx, "lon");
    if (lat < -90.0 || lat > 90.0) throw DataError(ctx + ": lat out of range");
    if (lon < -180.0 || lon > 180.0) throw DataError(ctx + ": lon out of range");
    const double v = parse_concentration(f[5], ctx, "pm25");
    store.insert({f[0], *run, *valid, GeoPoint{lat, lon}, v});
  }
  return store;
}

double RunConfig::model_radius_km(const ModelId& model) const {
  const auto it = forecast_radius_overrides.find(model);
  if (it != forecast_radius_overrides.end()) return it->second;
  if (model == "cams") return 60.0;
  if (default_forecast_radius) return *default_forecast_radius;
  return 50.0;
}

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& known,
                         const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!known.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

double positive_number(const json& j, const std::string& name) {
  if (!j.is_number()) throw ConfigError("config: '" + name + "' must be a number");
  const double v = j.get<double>();
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("config: '" + name + "' must be > 0");
  return v;
}

std::filesystem::path resolve_path(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path q{p};
  return q.is_absolute() ? q : base / q;
}

}  // namespace

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError(path.string() + ": top level must be an object");

  const std::set<std::string> known = {
      "cities",        "models",           "date_range",
      "exceedance_threshold", "monitor_radius_km", "monitor_fallback_radius_km",
      "monitor_max_neighbors", "forecast_radius_km", "high_day_rule",
      "forecast_exceedance_rule", "rmse_pooling",   "output_dir",
      "monitors",      "readings",         "forecasts",
      "fetch"};
  reject_unknown_keys(doc, known, "config");

  const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  RunConfig cfg;

  if (!doc.contains("cities")) throw ConfigError("config: 'cities' is required");
  if (doc["cities"].is_string()) {
    cfg.cities = load_cities(resolve_path(base, doc["cities"].get<std::string>()));
  } else if (doc["cities"].is_array()) {
    std::set<std::string> seen;
    for (const auto& c : doc["cities"]) {
      if (!c.is_object()) throw ConfigError("config: city entries must be objects");
      reject_unknown_keys(c, {"id", "name", "lat", "lon"}, "config city");
      for (const char* k : {"id", "name", "lat", "lon"}) {
        if (!c.contains(k)) throw ConfigError(std::string("config city: '") + k + "' is required");
      }
      UrbanArea city{c["id"].get<std::string>(), c["name"].get<std::string>(),
                     GeoPoint{c["lat"].get<double>(), c["lon"].get<double>()}};
      if (city.id.empty() || city.name.empty()) {
        throw ConfigError("config city: id and name must be non-empty");
      }
      if (!valid_geopoint(city.center)) throw ConfigError("config city: invalid coordinates");
      if (!seen.insert(city.id).second) {
        throw ConfigError("config city: duplicate id '" + city.id + "'");
      }
      cfg.cities.push_back(std::move(city));
    }
  } else {
    throw ConfigError("config: 'cities' must be a path or an array");
  }
  if (cfg.cities.empty()) throw ConfigError("config: at least one city is required");

  if (!doc.contains("models") || !doc["models"].is_array()) {
    throw ConfigError("config: 'models' must be an array");
  }
  std::set<std::string> model_seen;
  for (const auto& m : doc["models"]) {
    if (!m.is_string()) throw ConfigError("config: model ids must be strings");
    const auto id = m.get<std::string>();
    if (id.empty()) throw ConfigError("config: empty model id");
    if (id == kPersistenceModel) {
      throw ConfigError("config: '" + kPersistenceModel + "' is the implicit baseline, not a model");
    }
    if (!model_seen.insert(id).second) throw ConfigError("config: duplicate model '" + id + "'");
    cfg.models.push_back(id);
  }

  if (!doc.contains("date_range") || !doc["date_range"].is_array() ||
      doc["date_range"].size() != 2) {
    throw ConfigError("config: 'date_range' must be [start, end]");
  }
  const auto start = parse_date(doc["date_range"][0].get<std::string>());
  const auto end = parse_date(doc["date_range"][1].get<std::string>());
  if (!start || !end) throw ConfigError("config: bad date in date_range");
  if (*end < *start) throw ConfigError("config: date_range end before start");
  cfg.start = *start;
  cfg.end = *end;

  if (doc.contains("exceedance_threshold")) {
    cfg.exceedance_threshold = positive_number(doc["exceedance_threshold"], "exceedance_threshold");
  }
  if (doc.contains("monitor_radius_km")) {
    cfg.monitor_radius_km = positive_number(doc["monitor_radius_km"], "monitor_radius_km");
  }
  if (doc.contains("monitor_fallback_radius_km")) {
    cfg.monitor_fallback_radius_km =
        positive_number(doc["monitor_fallback_radius_km"], "monitor_fallback_radius_km");
  }
  if (cfg.monitor_fallback_radius_km < cfg.monitor_radius_km) {
    throw ConfigError("config: fallback radius must be >= monitor_radius_km");
  }
  if (doc.contains("monitor_max_neighbors")) {
    const auto& j = doc["monitor_max_neighbors"];
    if (!j.is_number_integer() || j.get<int>() <= 0) {
      throw ConfigError("config: 'monitor_max_neighbors' must be a positive integer");
    }
    cfg.monitor_max_neighbors = j.get<int>();
  }
  if (doc.contains("forecast_radius_km")) {
    const auto& j = doc["forecast_radius_km"];
    if (!j.is_object()) throw ConfigError("config: 'forecast_radius_km' must be an object");
    for (const auto& [key, value] : j.items()) {
      const double r = positive_number(value, "forecast_radius_km." + key);
      if (key == "default") {
        cfg.default_forecast_radius = r;
      } else {
        cfg.forecast_radius_overrides[key] = r;
      }
    }
  }
  if (doc.contains("high_day_rule")) {
    cfg.high_day_rule = doc["high_day_rule"].get<std::string>();
    if (cfg.high_day_rule != "daily-max") {
      throw ConfigError("config: unsupported high_day_rule '" + cfg.high_day_rule + "'");
    }
  }
  if (doc.contains("forecast_exceedance_rule")) {
    cfg.forecast_exceedance_rule = doc["forecast_exceedance_rule"].get<std::string>();
    if (cfg.forecast_exceedance_rule != "daily-max" && cfg.forecast_exceedance_rule != "daily-mean") {
      throw ConfigError("config: unsupported forecast_exceedance_rule '" +
                        cfg.forecast_exceedance_rule + "'");
    }
  }
  if (doc.contains("rmse_pooling")) {
    cfg.rmse_pooling = doc["rmse_pooling"].get<std::string>();
    if (cfg.rmse_pooling != "pooled-hours" && cfg.rmse_pooling != "per-day") {
      throw ConfigError("config: unsupported rmse_pooling '" + cfg.rmse_pooling + "'");
    }
  }
  if (doc.contains("output_dir")) {
    cfg.output_dir = resolve_path(base, doc["output_dir"].get<std::string>());
  }
  if (doc.contains("monitors")) {
    cfg.monitors_path = resolve_path(base, doc["monitors"].get<std::string>());
  }
  if (doc.contains("readings")) {
    cfg.readings_path = resolve_path(base, doc["readings"].get<std::string>());
  }
  if (doc.contains("forecasts")) {
    cfg.forecasts_path = resolve_path(base, doc["forecasts"].get<std::string>());
  }
  if (doc.contains("fetch")) {
    const auto& j = doc["fetch"];
    if (!j.is_object()) throw ConfigError("config: 'fetch' must be an object");
    reject_unknown_keys(j, {"url_template", "dest_dir", "timeout_secs"}, "config fetch");
    if (!j.contains("url_template")) throw ConfigError("config fetch: 'url_template' is required");
    FetchConfig fetch;
    fetch.url_template = j["url_template"].get<std::string>();
    if (j.contains("dest_dir")) fetch.dest_dir = resolve_path(base, j["dest_dir"].get<std::string>());
    if (j.contains("timeout_secs")) {
      const auto& t = j["timeout_secs"];
      if (!t.is_number_integer() || t.get<int>() <= 0) {
        throw ConfigError("config fetch: 'timeout_secs' must be a positive integer");
      }
      fetch.timeout_secs = t.get<int>();
    }
    cfg.fetch = std::move(fetch);
  }
  return cfg;
}

}  // namespace smokebench
