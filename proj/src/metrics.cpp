#include "smokebench/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace smokebench {

ExcessExposure excess_exposure(const DaySeries& measured, const DaySeries& forecast) {
  if (!measured.complete() || !forecast.complete()) {
    throw std::invalid_argument("excess_exposure requires complete series");
  }
  const int slot = forecast.argmin_slot();
  return {measured.values[slot] - measured.min_value(), slot + 1};
}

double uniform_hour_excess(const DaySeries& measured) {
  if (!measured.complete()) {
    throw std::invalid_argument("uniform_hour_excess requires a complete series");
  }
  return measured.mean_value() - measured.min_value();
}

std::optional<double> mean_excess_exposure(std::span<const double> excesses) {
  if (excesses.empty()) return std::nullopt;
  double sum = 0.0;
  for (double v : excesses) sum += v;
  return sum / double(excesses.size());
}

std::optional<double> persistence_mee(std::span<const DaySeries> measured_days) {
  if (measured_days.empty()) return std::nullopt;
  double sum = 0.0;
  for (const auto& day : measured_days) sum += uniform_hour_excess(day);
  return sum / double(measured_days.size());
}

bool exceeds_threshold_max(const DaySeries& series, double threshold) {
  return series.max_value() > threshold;
}

bool exceeds_threshold_mean(const DaySeries& series, double threshold) {
  return series.mean_value() > threshold;
}

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  tn += o.tn;
  return *this;
}

ConfusionCounts confusion(std::span<const DayOutcome> outcomes) {
  ConfusionCounts c;
  for (const auto& o : outcomes) {
    if (o.truth_positive) {
      (o.predicted_positive ? c.tp : c.fn) += 1;
    } else {
      (o.predicted_positive ? c.fp : c.tn) += 1;
    }
  }
  return c;
}

SkillScores skill(const ConfusionCounts& c) {
  SkillScores s;
  if (c.tp + c.fp > 0) s.precision = double(c.tp) / double(c.tp + c.fp);
  if (c.tp + c.fn > 0) s.recall = double(c.tp) / double(c.tp + c.fn);
  return s;
}

std::optional<double> rmse_pooled(std::span<const DayOutcome> outcomes) {
  if (outcomes.empty()) return std::nullopt;
  double sum = 0.0;
  for (const auto& o : outcomes) {
    for (double e : o.squared_errors) sum += e;
  }
  return std::sqrt(sum / double(outcomes.size() * DayWindow::kSlots));
}

std::optional<double> rmse_per_day(std::span<const DayOutcome> outcomes) {
  if (outcomes.empty()) return std::nullopt;
  double sum = 0.0;
  for (const auto& o : outcomes) {
    double day_sum = 0.0;
    for (double e : o.squared_errors) day_sum += e;
    sum += std::sqrt(day_sum / DayWindow::kSlots);
  }
  return sum / double(outcomes.size());
}

MetricValue pool_day_weighted(std::span<const MetricValue> values) {
  double weighted = 0.0;
  long days = 0;
  for (const auto& v : values) {
    if (!v.value) continue;
    weighted += *v.value * double(v.days);
    days += v.days;
  }
  if (days == 0) return {};
  return {weighted / double(days), days};
}

MetricValue pool_rmse(std::span<const MetricValue> values) {
  double weighted_sq = 0.0;
  long days = 0;
  for (const auto& v : values) {
    if (!v.value) continue;
    weighted_sq += *v.value * *v.value * double(v.days);
    days += v.days;
  }
  if (days == 0) return {};
  return {std::sqrt(weighted_sq / double(days)), days};
}

AggregateSummary aggregate(std::span<const CityModelSummary> rows) {
  AggregateSummary agg;
  std::vector<MetricValue> mee_smoke, mee_all, rmse_smoke, rmse_all;
  for (const auto& row : rows) {
    if (!agg.model.empty() && row.model != agg.model) {
      throw std::invalid_argument("aggregate expects rows of a single model");
    }
    agg.model = row.model;
    agg.counts += row.counts;
    mee_smoke.push_back(row.mee_smoke);
    mee_all.push_back(row.mee_all);
    rmse_smoke.push_back(row.rmse_smoke);
    rmse_all.push_back(row.rmse_all);
  }
  agg.mee_smoke = pool_day_weighted(mee_smoke);
  agg.mee_all = pool_day_weighted(mee_all);
  agg.rmse_smoke = pool_rmse(rmse_smoke);
  agg.rmse_all = pool_rmse(rmse_all);
  return agg;
}

}  // namespace smokebench
