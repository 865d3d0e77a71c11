#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smokebench/ingest.hpp"
#include "smokebench/spatial.hpp"

namespace smokebench {

// Either a complete series or an exclusion reason; never a partial series.
struct AlignedSeries {
  std::optional<DaySeries> series;
  std::string reason;  // non-empty iff excluded
  bool excluded() const { return !series.has_value(); }
};

// Per-slot unweighted mean over the selected monitors that report that hour.
// Excluded with "missing hour h" (1-based) when no selected monitor reports.
AlignedSeries measured_series(const MonitorSelection& selection, const ReadingStore& readings,
                              const DayWindow& window);

// Per-slot unweighted mean over the selected cells of the 12:00Z run of
// label_date. Slot k consumes the sample with valid_time == window hour k;
// time-averaged products must therefore be labeled by interval start (the
// value covering (h, h+1] carries label h). Excluded with "missing run" when
// the run has no samples at all, or "missing hour h" when every cell lacks
// that hour; a partial cell subset at an hour averages over the reporters.
AlignedSeries forecast_series(const ModelId& model, const CellSelection& cells,
                              const ForecastStore& forecasts, const DayWindow& window);

// Constant series from the mean of the selected monitors' readings at 10:00Z
// of the previous day. Excluded with "missing 10UTC reading" when none report.
AlignedSeries persistence_series(const MonitorSelection& selection, const ReadingStore& readings,
                                 const DayWindow& window);

struct CityDayBundle {
  std::string city_id;
  DayWindow window{};
  DaySeries measured;
  std::map<ModelId, DaySeries> forecasts;  // only models aligned for this day
  std::optional<DaySeries> persistence;
  bool high_day = false;
};

struct Exclusion {
  std::string city_id;
  std::string date;  // YYYY-MM-DD, empty for city-level diagnostics
  std::string model;
  std::string reason;
  auto operator<=>(const Exclusion&) const = default;
};

struct CitySelection {
  UrbanArea city;
  MonitorSelection monitors;
  std::map<ModelId, CellSelection> cells;  // only non-empty selections
};

struct BundleBuild {
  std::vector<CityDayBundle> bundles;      // ordered by (city_id, date)
  std::vector<Exclusion> exclusions;       // same order they were discovered
};

// One (city, day): measured first (its exclusion suppresses the whole day and
// logs a single model="measured" row), then baseline and each selectable model.
struct CityDayResult {
  std::optional<CityDayBundle> bundle;
  std::vector<Exclusion> exclusions;
};
CityDayResult build_city_day(const RunConfig& config, const CitySelection& selection,
                             const ReadingStore& readings, const ForecastStore& forecasts, Date d);

// Reference implementation: plain loops over (city, date).
BundleBuild build_bundles_serial(const RunConfig& config, std::span<const CitySelection> selections,
                                 const ReadingStore& readings, const ForecastStore& forecasts);

// OpenMP implementation; results are assembled by grid index, so the output is
// identical to the serial build for any width.
BundleBuild build_bundles_parallel(const RunConfig& config,
                                   std::span<const CitySelection> selections,
                                   const ReadingStore& readings, const ForecastStore& forecasts,
                                   int width);

}  // namespace smokebench
