#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "smokebench/core.hpp"

namespace smokebench {

struct MonitorStation {
  std::string monitor_id;
  GeoPoint location;
  std::optional<std::pair<Date, Date>> active_range;  // inclusive; unset = always active
};

// monitors.csv: monitor_id,lat,lon. Duplicate ids and out-of-range coordinates
// fail the whole load with a row-numbered message.
std::vector<MonitorStation> load_monitors(const std::filesystem::path& path);

// cities.csv: city_id,name,lat,lon (names may contain commas, hence quoting).
std::vector<UrbanArea> load_cities(const std::filesystem::path& path);

// Hourly monitor readings keyed by (monitor_id, instant). Duplicate keys are
// counted and the last write wins; admitted negative values (>= -5) are
// counted as flagged, never altered.
class ReadingStore {
 public:
  void insert(const std::string& monitor_id, UtcInstant t, double value);
  std::optional<double> at(const std::string& monitor_id, UtcInstant t) const;
  void erase(const std::string& monitor_id, UtcInstant t);

  std::size_t size() const { return size_; }
  long duplicate_count() const { return duplicates_; }
  long negative_flagged() const { return negative_flagged_; }
  void note_negative() { ++negative_flagged_; }

  // Canonical form: sorted by (monitor_id, timestamp), round-trip floats.
  std::vector<std::tuple<std::string, UtcInstant, double>> sorted_rows() const;
  void write_csv(const std::filesystem::path& path) const;

  bool same_contents(const ReadingStore& other) const;

 private:
  std::unordered_map<std::string, std::unordered_map<std::int64_t, double>> by_monitor_;
  long duplicates_ = 0;
  long negative_flagged_ = 0;
  std::size_t size_ = 0;
};

// readings.csv: monitor_id,timestamp,pm25 with hour-aligned ISO-8601 Z
// timestamps. Every monitor_id must be a loaded station.
ReadingStore load_readings(const std::filesystem::path& path,
                           const std::vector<MonitorStation>& stations);

struct ForecastSample {
  ModelId model;
  UtcInstant run_time{};
  UtcInstant valid_time{};
  GeoPoint location;
  double value = 0.0;
};

// Samples keyed by (model, run_time, valid_time, location); point lookup is
// exact on the stored coordinates. Last write wins on duplicate keys.
class ForecastStore {
 public:
  void insert(const ForecastSample& s);

  bool has_run(const ModelId& model, UtcInstant run_time) const;
  std::optional<double> value_at(const ModelId& model, UtcInstant run_time, UtcInstant valid_time,
                                 const GeoPoint& p) const;

  // All samples of one run with valid_time in [t0, t1] within radius_km of
  // center, ordered by (valid_time, lat, lon).
  std::vector<ForecastSample> query(const ModelId& model, UtcInstant run_time, UtcInstant t0,
                                    UtcInstant t1, const GeoPoint& center, double radius_km) const;

  // Distinct sample locations for a model across all runs, sorted (lat, lon).
  std::vector<GeoPoint> locations(const ModelId& model) const;

  std::size_t size() const { return size_; }

 private:
  struct PointKey {
    std::uint64_t lat_bits = 0;
    std::uint64_t lon_bits = 0;
    bool operator==(const PointKey&) const = default;
  };
  struct PointKeyHash {
    std::size_t operator()(const PointKey& k) const;
  };
  static PointKey key_of(const GeoPoint& p);

  using HourGrid = std::unordered_map<PointKey, double, PointKeyHash>;
  using RunMap = std::map<std::int64_t, HourGrid>;  // valid_time -> grid
  std::map<ModelId, std::map<std::int64_t, RunMap>> by_model_;
  std::size_t size_ = 0;
};

// forecast.csv: model,run_time,valid_time,lat,lon,pm25. Every model column
// value must be declared; valid_time must be hour-aligned and not precede
// run_time.
ForecastStore load_forecast_samples(const std::filesystem::path& path,
                                    const std::vector<ModelId>& declared_models);

struct FetchConfig {
  std::string url_template;  // must contain {model} and {date}
  std::filesystem::path dest_dir = "archives";
  int timeout_secs = 60;
};

struct RunConfig {
  std::vector<UrbanArea> cities;
  std::vector<ModelId> models;  // forecast ids; the baseline id is implicit
  Date start{};
  Date end{};  // inclusive
  double exceedance_threshold = 35.0;
  double monitor_radius_km = 10.0;
  double monitor_fallback_radius_km = 50.0;
  int monitor_max_neighbors = 10;
  std::map<ModelId, double> forecast_radius_overrides;
  std::optional<double> default_forecast_radius;
  std::string high_day_rule = "daily-max";
  std::string forecast_exceedance_rule = "daily-max";  // or "daily-mean"
  std::string rmse_pooling = "pooled-hours";           // or "per-day"
  std::filesystem::path output_dir = "out";
  std::filesystem::path monitors_path;
  std::filesystem::path readings_path;
  std::filesystem::path forecasts_path;
  std::optional<FetchConfig> fetch;

  // Resolution order: explicit override, built-in cams=60, "default" key, 50.
  double model_radius_km(const ModelId& model) const;
};

// Strict JSON config: unknown keys anywhere are rejected; relative paths are
// resolved against the config file's directory.
RunConfig load_config(const std::filesystem::path& path);

}  // namespace smokebench
