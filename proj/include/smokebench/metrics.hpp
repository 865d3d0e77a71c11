#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smokebench/core.hpp"

namespace smokebench {

struct ExcessExposure {
  double value = 0.0;
  int chosen_hour = 1;  // 1..24
};

// measured[argmin forecast] - min(measured); the argmin keeps the earliest
// hour on ties. Both series must be complete (std::invalid_argument otherwise).
// Always >= 0.
ExcessExposure excess_exposure(const DaySeries& measured, const DaySeries& forecast);

// Expected excess of a uniformly random hour: mean(measured) - min(measured).
// This is the baseline's per-day convention.
double uniform_hour_excess(const DaySeries& measured);

std::optional<double> mean_excess_exposure(std::span<const double> excesses);

// Mean of uniform_hour_excess over the given days; the baseline's MEE.
std::optional<double> persistence_mee(std::span<const DaySeries> measured_days);

bool exceeds_threshold_max(const DaySeries& series, double threshold);   // strict >
bool exceeds_threshold_mean(const DaySeries& series, double threshold);  // strict >

struct ConfusionCounts {
  long tp = 0;
  long fp = 0;
  long fn = 0;
  long tn = 0;
  long total() const { return tp + fp + fn + tn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o);
  friend ConfusionCounts operator+(ConfusionCounts a, const ConfusionCounts& b) { return a += b; }
  bool operator==(const ConfusionCounts&) const = default;
};

struct DayOutcome {
  std::string city_id;
  Date date{};
  ModelId model;
  bool predicted_positive = false;
  bool truth_positive = false;
  double excess = 0.0;
  int chosen_hour = 1;
  std::array<double, DayWindow::kSlots> squared_errors{};
};

ConfusionCounts confusion(std::span<const DayOutcome> outcomes);

struct SkillScores {
  std::optional<double> precision;  // TP/(TP+FP), undefined when TP+FP == 0
  std::optional<double> recall;     // TP/(TP+FN), undefined when TP+FN == 0
};
SkillScores skill(const ConfusionCounts& counts);

// Pooled over all 24*n hours of the outcome set.
std::optional<double> rmse_pooled(std::span<const DayOutcome> outcomes);
// Alternative: mean over days of the per-day RMSE.
std::optional<double> rmse_per_day(std::span<const DayOutcome> outcomes);

struct MetricValue {
  std::optional<double> value;
  long days = 0;
};

struct CityModelSummary {
  std::string city_id;
  ModelId model;
  ConfusionCounts counts;
  MetricValue mee_smoke, mee_all, rmse_smoke, rmse_all;
};

struct AggregateSummary {
  ModelId model;
  ConfusionCounts counts;
  MetricValue mee_smoke, mee_all, rmse_smoke, rmse_all;
};

// Day-weighted pooled mean: sum(value_i * days_i) / sum(days_i) over defined
// entries. Undefined entries contribute nothing.
MetricValue pool_day_weighted(std::span<const MetricValue> values);
// RMSE pooling: sqrt of the day-weighted mean of squares (equals pooling all
// hours, every day contributing 24).
MetricValue pool_rmse(std::span<const MetricValue> values);

// Component-wise count sum plus pooled metrics over one model's city rows.
AggregateSummary aggregate(std::span<const CityModelSummary> rows);

}  // namespace smokebench
