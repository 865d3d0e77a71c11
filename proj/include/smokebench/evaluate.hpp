#pragma once

#include <filesystem>
#include <vector>

#include "smokebench/align.hpp"
#include "smokebench/metrics.hpp"

namespace smokebench {

struct LoadedData {
  std::vector<MonitorStation> stations;
  ReadingStore readings;
  ForecastStore forecasts;
};

// Loads the three data files named by the config (all required here).
LoadedData load_all(const RunConfig& config);

struct EvaluationResult {
  std::vector<CitySelection> selections;     // cities with a non-empty monitor set
  std::vector<CityDayBundle> bundles;        // ordered (city, date)
  std::vector<Exclusion> exclusions;         // sorted (city, date, model)
  std::vector<DayOutcome> outcomes;          // sorted (city, date, model)
  std::vector<CityModelSummary> summaries;   // city-sorted, model order + baseline
  long evaluated_units = 0;                  // (city, model-or-baseline) pairs with >= 1 day
  long skipped_units = 0;
};

// Reference pipeline: selection, alignment, outcomes, summaries, serially.
EvaluationResult evaluate_serial(const RunConfig& config, const LoadedData& data);

// Same pipeline with the OpenMP kernels; output is identical for any width.
EvaluationResult evaluate_parallel(const RunConfig& config, const LoadedData& data, int width);

// metrics.csv, confusion.csv, exclusions.csv, outcomes.csv under out_dir.
// The day-set switches select which MEE/RMSE rows are written; confusion
// always covers every evaluated day.
void write_outputs(const EvaluationResult& result, const RunConfig& config,
                   const std::filesystem::path& out_dir, bool write_smoke, bool write_all);

}  // namespace smokebench
