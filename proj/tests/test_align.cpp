#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <random>

#include "smokebench/align.hpp"

using namespace smokebench;
using std::chrono::hours;

namespace {

DayWindow window_of(const char* date) { return DayWindow{*parse_date(date)}; }

MonitorSelection two_monitor_selection() {
  MonitorSelection sel;
  sel.city_id = "c1";
  sel.monitor_ids = {"a", "b"};
  sel.distances_km = {1.0, 2.0};
  sel.radius_used_km = 10.0;
  return sel;
}

template <typename F>
void fill_monitor(ReadingStore& rs, const std::string& id, const DayWindow& w, F value) {
  for (int k = 0; k < DayWindow::kSlots; ++k) rs.insert(id, w.hour(k), value(k));
}

template <typename F>
void fill_cell(ForecastStore& fs, const ModelId& model, const DayWindow& w, const GeoPoint& p,
               F value) {
  const UtcInstant run = UtcInstant{w.label_date} + hours{12};
  for (int k = 0; k < DayWindow::kSlots; ++k) {
    fs.insert({model, run, w.hour(k), p, value(k)});
  }
}

bool same_series(const DaySeries& a, const DaySeries& b) {
  return a.window == b.window && a.values == b.values && a.present == b.present &&
         a.source == b.source;
}

bool same_bundle(const CityDayBundle& a, const CityDayBundle& b) {
  if (a.city_id != b.city_id || !(a.window == b.window) || a.high_day != b.high_day) return false;
  if (!same_series(a.measured, b.measured)) return false;
  if (a.persistence.has_value() != b.persistence.has_value()) return false;
  if (a.persistence && !same_series(*a.persistence, *b.persistence)) return false;
  if (a.forecasts.size() != b.forecasts.size()) return false;
  for (const auto& [model, series] : a.forecasts) {
    const auto it = b.forecasts.find(model);
    if (it == b.forecasts.end() || !same_series(series, it->second)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("measured series averages whichever selected monitors report") {
  const auto w = window_of("2023-07-04");
  const auto sel = two_monitor_selection();
  ReadingStore rs;
  fill_monitor(rs, "a", w, [](int k) { return 2.0 * k; });
  fill_monitor(rs, "b", w, [](int k) { return 2.0 * k + 4.0; });
  // a third monitor outside the selection must not contribute
  fill_monitor(rs, "z", w, [](int) { return 500.0; });
  rs.erase("b", w.hour(5));

  const auto out = measured_series(sel, rs, w);
  REQUIRE_FALSE(out.excluded());
  CHECK(out.series->source == kMeasuredSource);
  CHECK(out.series->window == w);
  CHECK(out.series->complete());
  for (int k = 0; k < 24; ++k) {
    const double want = (k == 5) ? 10.0 : 2.0 * k + 2.0;
    CHECK(out.series->values[std::size_t(k)] == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("a silent hour excludes the measured day with a 1-based index") {
  const auto w = window_of("2023-07-04");
  const auto sel = two_monitor_selection();
  ReadingStore rs;
  fill_monitor(rs, "a", w, [](int k) { return 1.0 * k; });
  fill_monitor(rs, "b", w, [](int k) { return 1.0 * k; });
  rs.erase("a", w.hour(3));
  rs.erase("b", w.hour(3));

  const auto out = measured_series(sel, rs, w);
  CHECK(out.excluded());
  CHECK(out.reason == "missing hour 4");
}

TEST_CASE("forecast series reads the noon run and averages reporting cells") {
  const auto w = window_of("2023-07-04");
  const GeoPoint p1{41.0, -87.0}, p2{41.1, -87.1};
  CellSelection cells{"c1", "m", {p1, p2}, 50.0};
  ForecastStore fs;
  fill_cell(fs, "m", w, p1, [](int k) { return 1.0 * k; });
  fill_cell(fs, "m", w, p2, [](int k) { return 1.0 * k + 4.0; });
  // a different run the same day must never be consulted
  fs.insert({"m", UtcInstant{w.label_date} + hours{13}, w.hour(0), p1, 999.0});

  SUBCASE("full grid") {
    const auto out = forecast_series("m", cells, fs, w);
    REQUIRE_FALSE(out.excluded());
    CHECK(out.series->source == "m");
    for (int k = 0; k < 24; ++k) {
      CHECK(out.series->values[std::size_t(k)] == doctest::Approx(k + 2.0).epsilon(1e-12));
    }
  }

  SUBCASE("one cell silent at an hour leaves the mean to the reporters") {
    ForecastStore partial;
    fill_cell(partial, "m", w, p1, [](int k) { return 1.0 * k; });
    for (int k = 0; k < 24; ++k) {
      if (k == 7) continue;
      partial.insert({"m", UtcInstant{w.label_date} + hours{12}, w.hour(k), p2, 1.0 * k + 4.0});
    }
    const auto out = forecast_series("m", cells, partial, w);
    REQUIRE_FALSE(out.excluded());
    CHECK(out.series->values[7] == 7.0);
    CHECK(out.series->values[8] == doctest::Approx(10.0));
  }

  SUBCASE("an hour with no cells excludes the day") {
    ForecastStore gappy;
    for (int k = 0; k < 24; ++k) {
      if (k == 9) continue;
      gappy.insert({"m", UtcInstant{w.label_date} + hours{12}, w.hour(k), p1, 1.0});
    }
    const auto out = forecast_series("m", cells, gappy, w);
    CHECK(out.excluded());
    CHECK(out.reason == "missing hour 10");
  }

  SUBCASE("an absent run is its own reason") {
    ForecastStore empty;
    const auto out = forecast_series("m", cells, empty, w);
    CHECK(out.excluded());
    CHECK(out.reason == "missing run");
  }
}

TEST_CASE("persistence holds the previous morning's mean flat across the window") {
  const auto w = window_of("2023-07-04");
  const auto sel = two_monitor_selection();
  const UtcInstant anchor = UtcInstant{*parse_date("2023-07-03")} + hours{10};
  ReadingStore rs;
  rs.insert("a", anchor, 10.0);
  rs.insert("b", anchor, 14.0);
  // neighboring hours must not leak into the anchor
  rs.insert("a", anchor - hours{1}, 900.0);
  rs.insert("b", anchor + hours{1}, 900.0);

  auto out = persistence_series(sel, rs, w);
  REQUIRE_FALSE(out.excluded());
  CHECK(out.series->source == kPersistenceModel);
  for (int k = 0; k < 24; ++k) CHECK(out.series->values[std::size_t(k)] == 12.0);

  rs.erase("b", anchor);
  out = persistence_series(sel, rs, w);
  REQUIRE_FALSE(out.excluded());
  CHECK(out.series->values[0] == 10.0);

  rs.erase("a", anchor);
  out = persistence_series(sel, rs, w);
  CHECK(out.excluded());
  CHECK(out.reason == "missing 10UTC reading");
}

namespace {

struct DayFixture {
  RunConfig config;
  CitySelection selection;
  ReadingStore readings;
  ForecastStore forecasts;
  Date date = *parse_date("2023-07-04");

  DayFixture() {
    config.models = {"m"};
    config.start = config.end = date;
    config.exceedance_threshold = 35.0;
    selection.city = {"c1", "Cityville", {41.0, -87.0}};
    selection.monitors = two_monitor_selection();
    selection.cells.emplace("m", CellSelection{"c1", "m", {{41.0, -87.0}}, 50.0});

    const DayWindow w{date};
    fill_monitor(readings, "a", w, [](int k) { return 2.0 * k; });
    fill_monitor(readings, "b", w, [](int k) { return 2.0 * k; });
    readings.insert("a", UtcInstant{date - std::chrono::days{1}} + hours{10}, 9.0);
    fill_cell(forecasts, "m", w, {41.0, -87.0}, [](int k) { return 2.0 * k + 1.0; });
  }
};

}  // namespace

TEST_CASE("a full day binds measured, baseline, and every aligned model") {
  DayFixture f;
  const auto result = build_city_day(f.config, f.selection, f.readings, f.forecasts, f.date);
  REQUIRE(result.bundle.has_value());
  CHECK(result.exclusions.empty());
  CHECK(result.bundle->city_id == "c1");
  CHECK(result.bundle->high_day);  // measured max 46 > 35
  CHECK(result.bundle->forecasts.count("m") == 1);
  REQUIRE(result.bundle->persistence.has_value());
  CHECK(result.bundle->persistence->values[0] == 9.0);
}

TEST_CASE("the high-day comparison is strictly greater") {
  DayFixture f;
  f.config.exceedance_threshold = 46.0;  // equals the measured max
  const auto result = build_city_day(f.config, f.selection, f.readings, f.forecasts, f.date);
  REQUIRE(result.bundle.has_value());
  CHECK_FALSE(result.bundle->high_day);
}

TEST_CASE("losing the measured side drops the whole day with one exclusion row") {
  DayFixture f;
  const DayWindow w{f.date};
  f.readings.erase("a", w.hour(0));
  f.readings.erase("b", w.hour(0));
  const auto result = build_city_day(f.config, f.selection, f.readings, f.forecasts, f.date);
  CHECK_FALSE(result.bundle.has_value());
  REQUIRE(result.exclusions.size() == 1);
  const auto& e = result.exclusions[0];
  CHECK(e.city_id == "c1");
  CHECK(e.date == "2023-07-04");
  CHECK(e.model == kMeasuredSource);
  CHECK(e.reason == "missing hour 1");
}

TEST_CASE("model and baseline gaps exclude only themselves") {
  DayFixture f;
  f.readings.erase("a", UtcInstant{f.date - std::chrono::days{1}} + hours{10});
  ForecastStore no_runs;
  const auto result = build_city_day(f.config, f.selection, f.readings, no_runs, f.date);
  REQUIRE(result.bundle.has_value());
  CHECK(result.bundle->forecasts.empty());
  CHECK_FALSE(result.bundle->persistence.has_value());
  REQUIRE(result.exclusions.size() == 2);
  CHECK(result.exclusions[0] == Exclusion{"c1", "2023-07-04", kPersistenceModel,
                                          "missing 10UTC reading"});
  CHECK(result.exclusions[1] == Exclusion{"c1", "2023-07-04", "m", "missing run"});
}

TEST_CASE("a model with no selected cells is silently absent from the day") {
  DayFixture f;
  f.config.models = {"ghost", "m"};  // ghost has no cell selection entry
  const auto result = build_city_day(f.config, f.selection, f.readings, f.forecasts, f.date);
  REQUIRE(result.bundle.has_value());
  CHECK(result.bundle->forecasts.size() == 1);
  CHECK(result.exclusions.empty());
}

namespace {

// Randomized multi-city dataset with deliberate gaps of every kind.
struct CorpusFixture {
  RunConfig config;
  std::vector<CitySelection> selections;
  ReadingStore readings;
  ForecastStore forecasts;

  CorpusFixture() {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> level(1.0, 60.0);
    std::bernoulli_distribution drop_reading(0.04);
    std::bernoulli_distribution drop_run(0.10);
    std::bernoulli_distribution drop_anchor(0.15);

    config.models = {"m1", "m2"};
    config.start = *parse_date("2023-06-01");
    config.end = *parse_date("2023-06-12");

    for (int c = 0; c < 3; ++c) {
      CitySelection sel;
      const std::string id = "c" + std::to_string(c);
      sel.city = {id, id, {30.0 + c, -90.0}};
      sel.monitors.city_id = id;
      for (int m = 0; m < 2; ++m) {
        sel.monitors.monitor_ids.push_back(id + "_m" + std::to_string(m));
        sel.monitors.distances_km.push_back(1.0 + m);
      }
      sel.monitors.radius_used_km = 10.0;
      for (const auto& model : config.models) {
        sel.cells.emplace(model, CellSelection{id, model, {{30.0 + c, -90.0}}, 50.0});
      }
      selections.push_back(std::move(sel));
    }

    for (Date d = config.start - std::chrono::days{1}; d <= config.end;
         d += std::chrono::days{1}) {
      const DayWindow w{d};
      for (const auto& sel : selections) {
        for (const auto& mon : sel.monitors.monitor_ids) {
          for (int k = 0; k < 24; ++k) {
            if (!drop_reading(rng)) readings.insert(mon, w.hour(k), level(rng));
          }
          if (!drop_anchor(rng)) {
            readings.insert(mon, UtcInstant{d} + hours{10}, level(rng));
          }
        }
        for (const auto& model : config.models) {
          if (drop_run(rng)) continue;
          for (int k = 0; k < 24; ++k) {
            if (drop_reading(rng)) continue;
            forecasts.insert({model, UtcInstant{d} + hours{12}, w.hour(k),
                              sel.cells.at(model).locations[0], level(rng)});
          }
        }
      }
    }
  }
};

}  // namespace

TEST_CASE("the serial build walks cities then dates in order") {
  CorpusFixture f;
  const auto build = build_bundles_serial(f.config, f.selections, f.readings, f.forecasts);
  CHECK_FALSE(build.bundles.empty());
  CHECK_FALSE(build.exclusions.empty());
  for (std::size_t i = 1; i < build.bundles.size(); ++i) {
    const auto& prev = build.bundles[i - 1];
    const auto& cur = build.bundles[i];
    const bool ordered =
        prev.city_id < cur.city_id ||
        (prev.city_id == cur.city_id && prev.window.label_date < cur.window.label_date);
    CHECK(ordered);
  }
}

TEST_CASE("parallel builds reproduce the serial build at any width") {
  CorpusFixture f;
  const auto serial = build_bundles_serial(f.config, f.selections, f.readings, f.forecasts);
  for (const int width : {1, 3, 8}) {
    CAPTURE(width);
    const auto parallel =
        build_bundles_parallel(f.config, f.selections, f.readings, f.forecasts, width);
    REQUIRE(parallel.bundles.size() == serial.bundles.size());
    for (std::size_t i = 0; i < serial.bundles.size(); ++i) {
      CHECK(same_bundle(serial.bundles[i], parallel.bundles[i]));
    }
    CHECK(parallel.exclusions == serial.exclusions);
  }
}
