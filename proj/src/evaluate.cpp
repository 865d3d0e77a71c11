#include "smokebench/evaluate.hpp"

#include <omp.h>

#include <algorithm>
#include <fstream>
#include <map>

#include "smokebench/csv.hpp"

namespace smokebench {

LoadedData load_all(const RunConfig& config) {
  for (const auto& [path, key] :
       {std::pair{&config.monitors_path, "monitors"}, {&config.readings_path, "readings"},
        {&config.forecasts_path, "forecasts"}}) {
    if (path->empty()) throw ConfigError(std::string("config: '") + key + "' path required");
  }
  LoadedData data;
  data.stations = load_monitors(config.monitors_path);
  data.readings = load_readings(config.readings_path, data.stations);
  data.forecasts = load_forecast_samples(config.forecasts_path, config.models);
  return data;
}

namespace {

struct Prologue {
  std::vector<CitySelection> selections;  // cities with monitors, sorted by id
  std::vector<Exclusion> exclusions;      // city-level diagnostics
  long skipped_cities = 0;
};

Prologue prepare(const RunConfig& config, const LoadedData& data) {
  Prologue pro;
  std::vector<const UrbanArea*> cities;
  for (const auto& c : config.cities) cities.push_back(&c);
  std::sort(cities.begin(), cities.end(),
            [](const UrbanArea* a, const UrbanArea* b) { return a->id < b->id; });

  const std::optional<std::pair<Date, Date>> range{{config.start, config.end}};
  for (const UrbanArea* city : cities) {
    MonitorSelection monitors =
        select_monitors(*city, data.stations, range, config.monitor_radius_km,
                        config.monitor_fallback_radius_km, config.monitor_max_neighbors);
    if (monitors.empty()) {
      pro.exclusions.push_back(
          {city->id, "", kMeasuredSource, "no monitors within fallback radius"});
      ++pro.skipped_cities;
      continue;
    }
    CitySelection sel;
    sel.city = *city;
    sel.monitors = std::move(monitors);
    for (const auto& model : config.models) {
      CellSelection cells = select_forecast_cells(*city, model, data.forecasts.locations(model),
                                                  config.model_radius_km(model));
      if (cells.empty()) {
        pro.exclusions.push_back({city->id, "", model, "no forecast points within radius"});
        continue;  // the (city, model) pair is skipped
      }
      sel.cells.emplace(model, std::move(cells));
    }
    pro.selections.push_back(std::move(sel));
  }
  return pro;
}

std::vector<DayOutcome> bundle_outcomes(const RunConfig& config, const CityDayBundle& b) {
  std::vector<DayOutcome> out;
  const bool mean_rule = config.forecast_exceedance_rule == "daily-mean";
  const auto make = [&](const ModelId& model, const DaySeries& series, bool is_baseline) {
    DayOutcome o;
    o.city_id = b.city_id;
    o.date = b.window.label_date;
    o.model = model;
    o.truth_positive = b.high_day;
    o.predicted_positive = mean_rule
                               ? exceeds_threshold_mean(series, config.exceedance_threshold)
                               : exceeds_threshold_max(series, config.exceedance_threshold);
    if (is_baseline) {
      // Baseline convention: expected excess of a uniformly random hour.
      o.excess = uniform_hour_excess(b.measured);
      o.chosen_hour = 1;
    } else {
      const ExcessExposure ee = excess_exposure(b.measured, series);
      o.excess = ee.value;
      o.chosen_hour = ee.chosen_hour;
    }
    for (int k = 0; k < DayWindow::kSlots; ++k) {
      const double e = series.values[k] - b.measured.values[k];
      o.squared_errors[k] = e * e;
    }
    out.push_back(std::move(o));
  };
  for (const auto& [model, series] : b.forecasts) make(model, series, false);
  if (b.persistence) make(kPersistenceModel, *b.persistence, true);
  return out;
}

void sort_outcomes(std::vector<DayOutcome>& outcomes) {
  std::sort(outcomes.begin(), outcomes.end(), [](const DayOutcome& a, const DayOutcome& b) {
    if (a.city_id != b.city_id) return a.city_id < b.city_id;
    if (a.date != b.date) return a.date < b.date;
    return a.model < b.model;
  });
}

std::vector<CityModelSummary> summarize(const RunConfig& config,
                                        std::span<const CitySelection> selections,
                                        std::span<const DayOutcome> outcomes) {
  std::map<std::string, std::map<ModelId, std::vector<DayOutcome>>> grouped;
  for (const auto& o : outcomes) grouped[o.city_id][o.model].push_back(o);

  std::vector<ModelId> order(config.models.begin(), config.models.end());
  order.push_back(kPersistenceModel);

  std::vector<CityModelSummary> summaries;
  for (const auto& sel : selections) {
    for (const auto& model : order) {
      CityModelSummary s;
      s.city_id = sel.city.id;
      s.model = model;
      const auto& subset = grouped[sel.city.id][model];
      s.counts = confusion(subset);
      std::vector<DayOutcome> smoke;
      std::vector<double> ex_all, ex_smoke;
      for (const auto& o : subset) {
        ex_all.push_back(o.excess);
        if (o.truth_positive) {
          smoke.push_back(o);
          ex_smoke.push_back(o.excess);
        }
      }
      const bool per_day = config.rmse_pooling == "per-day";
      s.mee_all = {mean_excess_exposure(ex_all), long(ex_all.size())};
      s.mee_smoke = {mean_excess_exposure(ex_smoke), long(ex_smoke.size())};
      s.rmse_all = {per_day ? rmse_per_day(subset) : rmse_pooled(subset), long(subset.size())};
      s.rmse_smoke = {per_day ? rmse_per_day(smoke) : rmse_pooled(smoke), long(smoke.size())};
      summaries.push_back(std::move(s));
    }
  }
  return summaries;
}

EvaluationResult epilogue(const RunConfig& config, Prologue&& pro, BundleBuild&& build,
                          std::vector<DayOutcome>&& outcomes) {
  EvaluationResult result;
  result.selections = std::move(pro.selections);
  result.bundles = std::move(build.bundles);
  result.exclusions = std::move(pro.exclusions);
  for (auto& e : build.exclusions) result.exclusions.push_back(std::move(e));
  std::sort(result.exclusions.begin(), result.exclusions.end());
  sort_outcomes(outcomes);
  result.outcomes = std::move(outcomes);
  result.summaries = summarize(config, result.selections, result.outcomes);

  const long pairs_per_city = long(config.models.size()) + 1;
  const long total_units = (long(result.selections.size()) + pro.skipped_cities) * pairs_per_city;
  for (const auto& s : result.summaries) {
    if (s.counts.total() > 0) ++result.evaluated_units;
  }
  result.skipped_units = total_units - result.evaluated_units;
  return result;
}

}  // namespace

EvaluationResult evaluate_serial(const RunConfig& config, const LoadedData& data) {
  Prologue pro = prepare(config, data);
  BundleBuild build =
      build_bundles_serial(config, pro.selections, data.readings, data.forecasts);
  std::vector<DayOutcome> outcomes;
  for (const auto& b : build.bundles) {
    auto day = bundle_outcomes(config, b);
    outcomes.insert(outcomes.end(), day.begin(), day.end());
  }
  return epilogue(config, std::move(pro), std::move(build), std::move(outcomes));
}

EvaluationResult evaluate_parallel(const RunConfig& config, const LoadedData& data, int width) {
  if (width < 1) width = 1;
  Prologue pro = prepare(config, data);
  BundleBuild build =
      build_bundles_parallel(config, pro.selections, data.readings, data.forecasts, width);
  std::vector<std::vector<DayOutcome>> slots(build.bundles.size());
#pragma omp parallel for schedule(dynamic) num_threads(width)
  for (long i = 0; i < long(build.bundles.size()); ++i) {
    slots[std::size_t(i)] = bundle_outcomes(config, build.bundles[std::size_t(i)]);
  }
  std::vector<DayOutcome> outcomes;
  for (auto& day : slots) {
    outcomes.insert(outcomes.end(), day.begin(), day.end());
  }
  return epilogue(config, std::move(pro), std::move(build), std::move(outcomes));
}

namespace {

std::string metric_value_text(const MetricValue& v) {
  return v.value ? format_double(*v.value) : "--";
}

}  // namespace

void write_outputs(const EvaluationResult& result, const RunConfig& config,
                   const std::filesystem::path& out_dir, bool write_smoke, bool write_all) {
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream f(out_dir / "exclusions.csv", std::ios::binary);
    if (!f) throw DataError((out_dir / "exclusions.csv").string() + ": cannot write");
    f << "city_id,date,model,reason\n";
    for (const auto& e : result.exclusions) {
      const std::string fields[] = {e.city_id, e.date, e.model, e.reason};
      write_csv_row(f, fields);
    }
  }
  {
    std::ofstream f(out_dir / "confusion.csv", std::ios::binary);
    f << "city_id,model,tp,fp,fn,tn\n";
    for (const auto& s : result.summaries) {
      const std::string fields[] = {s.city_id,
                                    s.model,
                                    std::to_string(s.counts.tp),
                                    std::to_string(s.counts.fp),
                                    std::to_string(s.counts.fn),
                                    std::to_string(s.counts.tn)};
      write_csv_row(f, fields);
    }
  }
  {
    std::ofstream f(out_dir / "metrics.csv", std::ios::binary);
    f << "city_id,model,metric,dayset,value,days\n";
    const auto row = [&](const CityModelSummary& s, const char* metric, const char* dayset,
                         const MetricValue& v) {
      const std::string fields[] = {s.city_id,  s.model,
                                    metric,     dayset,
                                    metric_value_text(v), std::to_string(v.days)};
      write_csv_row(f, fields);
    };
    for (const auto& s : result.summaries) {
      if (write_smoke) row(s, "mee", "smoke", s.mee_smoke);
      if (write_all) row(s, "mee", "all", s.mee_all);
      if (write_smoke) row(s, "rmse", "smoke", s.rmse_smoke);
      if (write_all) row(s, "rmse", "all", s.rmse_all);
    }
  }
  {
    std::ofstream f(out_dir / "outcomes.csv", std::ios::binary);
    f << "city_id,date,model,truth_positive,predicted_positive,excess_exposure,chosen_hour\n";
    for (const auto& o : result.outcomes) {
      const std::string fields[] = {o.city_id,
                                    format_date(o.date),
                                    o.model,
                                    o.truth_positive ? "1" : "0",
                                    o.predicted_positive ? "1" : "0",
                                    format_double(o.excess),
                                    std::to_string(o.chosen_hour)};
      write_csv_row(f, fields);
    }
  }
}

}  // namespace smokebench
