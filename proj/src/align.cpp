#include "smokebench/align.hpp"

#include <omp.h>

#include <chrono>

namespace smokebench {

AlignedSeries measured_series(const MonitorSelection& selection, const ReadingStore& readings,
                              const DayWindow& window) {
  DaySeries s;
  s.window = window;
  s.source = kMeasuredSource;
  for (int k = 0; k < DayWindow::kSlots; ++k) {
    const UtcInstant t = window.hour(k);
    double sum = 0.0;
    int count = 0;
    for (const auto& id : selection.monitor_ids) {
      if (const auto v = readings.at(id, t)) {
        sum += *v;
        ++count;
      }
    }
    if (count == 0) {
      return {std::nullopt, "missing hour " + std::to_string(k + 1)};
    }
    s.values[k] = sum / count;
    s.present[k] = true;
  }
  return {std::move(s), {}};
}

AlignedSeries forecast_series(const ModelId& model, const CellSelection& cells,
                              const ForecastStore& forecasts, const DayWindow& window) {
  const UtcInstant run = UtcInstant{window.label_date} + std::chrono::hours{12};
  if (!forecasts.has_run(model, run)) {
    return {std::nullopt, "missing run"};
  }
  DaySeries s;
  s.window = window;
  s.source = model;
  for (int k = 0; k < DayWindow::kSlots; ++k) {
    const UtcInstant t = window.hour(k);
    double sum = 0.0;
    int count = 0;
    for (const auto& p : cells.locations) {
      if (const auto v = forecasts.value_at(model, run, t, p)) {
        sum += *v;
        ++count;
      }
    }
    if (count == 0) {
      return {std::nullopt, "missing hour " + std::to_string(k + 1)};
    }
    s.values[k] = sum / count;
    s.present[k] = true;
  }
  return {std::move(s), {}};
}

AlignedSeries persistence_series(const MonitorSelection& selection, const ReadingStore& readings,
                                 const DayWindow& window) {
  const UtcInstant anchor =
      UtcInstant{window.label_date - std::chrono::days{1}} + std::chrono::hours{10};
  double sum = 0.0;
  int count = 0;
  for (const auto& id : selection.monitor_ids) {
    if (const auto v = readings.at(id, anchor)) {
      sum += *v;
      ++count;
    }
  }
  if (count == 0) {
    return {std::nullopt, "missing 10UTC reading"};
  }
  DaySeries s;
  s.window = window;
  s.source = kPersistenceModel;
  const double level = sum / count;
  for (int k = 0; k < DayWindow::kSlots; ++k) {
    s.values[k] = level;
    s.present[k] = true;
  }
  return {std::move(s), {}};
}

CityDayResult build_city_day(const RunConfig& config, const CitySelection& selection,
                             const ReadingStore& readings, const ForecastStore& forecasts, Date d) {
  CityDayResult result;
  const DayWindow window{d};
  const std::string date_text = format_date(d);
  auto measured = measured_series(selection.monitors, readings, window);
  if (measured.excluded()) {
    result.exclusions.push_back({selection.city.id, date_text, kMeasuredSource, measured.reason});
    return result;
  }
  CityDayBundle bundle;
  bundle.city_id = selection.city.id;
  bundle.window = window;
  bundle.measured = std::move(*measured.series);
  bundle.high_day = bundle.measured.max_value() > config.exceedance_threshold;

  auto baseline = persistence_series(selection.monitors, readings, window);
  if (baseline.excluded()) {
    result.exclusions.push_back({selection.city.id, date_text, kPersistenceModel, baseline.reason});
  } else {
    bundle.persistence = std::move(*baseline.series);
  }

  for (const auto& model : config.models) {
    const auto cells = selection.cells.find(model);
    if (cells == selection.cells.end()) continue;  // pair skipped at selection time
    auto forecast = forecast_series(model, cells->second, forecasts, window);
    if (forecast.excluded()) {
      result.exclusions.push_back({selection.city.id, date_text, model, forecast.reason});
    } else {
      bundle.forecasts.emplace(model, std::move(*forecast.series));
    }
  }
  result.bundle = std::move(bundle);
  return result;
}

namespace {

std::vector<Date> dates_in_range(const RunConfig& config) {
  std::vector<Date> dates;
  for (Date d = config.start; d <= config.end; d += std::chrono::days{1}) {
    dates.push_back(d);
  }
  return dates;
}

BundleBuild merge_results(std::vector<CityDayResult>&& slots) {
  BundleBuild out;
  for (auto& slot : slots) {
    if (slot.bundle) out.bundles.push_back(std::move(*slot.bundle));
    for (auto& e : slot.exclusions) out.exclusions.push_back(std::move(e));
  }
  return out;
}

}  // namespace

BundleBuild build_bundles_serial(const RunConfig& config, std::span<const CitySelection> selections,
                                 const ReadingStore& readings, const ForecastStore& forecasts) {
  const auto dates = dates_in_range(config);
  std::vector<CityDayResult> slots;
  slots.reserve(selections.size() * dates.size());
  for (const auto& selection : selections) {
    for (const Date d : dates) {
      slots.push_back(build_city_day(config, selection, readings, forecasts, d));
    }
  }
  return merge_results(std::move(slots));
}

BundleBuild build_bundles_parallel(const RunConfig& config,
                                   std::span<const CitySelection> selections,
                                   const ReadingStore& readings, const ForecastStore& forecasts,
                                   int width) {
  const auto dates = dates_in_range(config);
  const std::size_t n = selections.size() * dates.size();
  std::vector<CityDayResult> slots(n);
#pragma omp parallel for schedule(dynamic) num_threads(width)
  for (long i = 0; i < long(n); ++i) {
    const auto& selection = selections[std::size_t(i) / dates.size()];
    const Date d = dates[std::size_t(i) % dates.size()];
    slots[std::size_t(i)] = build_city_day(config, selection, readings, forecasts, d);
  }
  return merge_results(std::move(slots));
}

}  // namespace smokebench
