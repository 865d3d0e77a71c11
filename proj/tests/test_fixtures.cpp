#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <fstream>
#include <random>

#include "smokebench/evaluate.hpp"
#include "smokebench/fixtures.hpp"

using namespace smokebench;

namespace {

const std::filesystem::path kScratch =
    std::filesystem::temp_directory_path() / "smokebench_test_fixtures";

struct ScratchDir {
  ScratchDir() {
    std::filesystem::remove_all(kScratch);
    std::filesystem::create_directories(kScratch);
  }
};

std::filesystem::path write_json(const std::string& name, const std::string& body) {
  static ScratchDir once;
  const auto p = kScratch / name;
  std::ofstream out(p, std::ios::binary);
  out << body;
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("the deviate stream is the documented function of raw engine output") {
  for (const std::uint64_t seed : {1ULL, 42ULL, 987654321ULL}) {
    GaussianStream stream(seed);
    std::mt19937_64 raw(seed);
    for (int i = 0; i < 200; ++i) {
      const double u1 = double(raw() >> 11) * 0x1.0p-53;
      const double u2 = double(raw() >> 11) * 0x1.0p-53;
      const double want = std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * M_PI * u2);
      CHECK(stream.next() == want);
    }
  }
}

TEST_CASE("scenario documents parse with defaults and strict key checking") {
  const auto p = write_json("ok.json", R"({
    "seed": 11,
    "n_cities": 2,
    "monitors_per_city": 3,
    "date_range": ["2023-06-01", "2023-06-05"],
    "events": [{"city": 1, "start": "2023-06-02", "duration_days": 2, "peak": 50.0,
                "ramp_hours": 6}],
    "outages": [{"city": 0, "date": "2023-06-03", "hour": 24}],
    "forecasts": [{"model": "good", "kind": "perfect"},
                  {"model": "late", "kind": "lagged", "param": 3}]
  })");
  const auto spec = load_scenario(p);
  CHECK(spec.seed == 11);
  CHECK(spec.n_cities == 2);
  CHECK(spec.monitors_per_city == 3);
  CHECK(format_date(spec.start) == "2023-06-01");
  CHECK(format_date(spec.end) == "2023-06-05");
  CHECK(spec.baseline_level == 8.0);
  CHECK(spec.diurnal_amplitude == 4.0);
  CHECK(spec.noise_sd == 0.5);
  REQUIRE(spec.events.size() == 1);
  CHECK(spec.events[0].city_index == 1);
  CHECK(spec.events[0].duration_days == 2);
  CHECK(spec.events[0].peak == 50.0);
  CHECK(spec.events[0].ramp_hours == 6);
  REQUIRE(spec.outages.size() == 1);
  CHECK(spec.outages[0].hour == 24);
  REQUIRE(spec.forecasts.size() == 2);
  CHECK(spec.forecasts[1].kind.type == ForecastKind::Type::Lagged);
  CHECK(spec.forecasts[1].kind.param == 3.0);
}

TEST_CASE("scenario rejections name the offending construct") {
  const auto base = [](const std::string& patch) {
    return R"({"seed": 1, "n_cities": 1, "monitors_per_city": 1,
               "date_range": ["2023-06-01", "2023-06-02"],
               "forecasts": [{"model": "m", "kind": "perfect"}])" +
           patch + "}";
  };

  CHECK_THROWS_WITH_AS(load_scenario(write_json("unk.json", base(R"(, "extra": 1)"))),
                       doctest::Contains("unknown key 'extra'"), ConfigError);
  CHECK_THROWS_WITH_AS(
      load_scenario(write_json("range.json",
                               R"({"seed": 1, "n_cities": 1, "monitors_per_city": 1,
                                   "date_range": {"start": "2023-06-01", "end": "2023-06-02"},
                                   "forecasts": []})")),
      doctest::Contains("'date_range' must be [start, end]"), ConfigError);
  CHECK_THROWS_WITH_AS(
      load_scenario(write_json("noseed.json",
                               R"({"n_cities": 1, "monitors_per_city": 1,
                                   "date_range": ["2023-06-01", "2023-06-02"],
                                   "forecasts": []})")),
      doctest::Contains("'seed' is required"), ConfigError);
  CHECK_THROWS_WITH_AS(
      load_scenario(write_json("kind.json",
                               R"({"seed": 1, "n_cities": 1, "monitors_per_city": 1,
                                   "date_range": ["2023-06-01", "2023-06-02"],
                                   "forecasts": [{"model": "m", "kind": "sidewys"}]})")),
      doctest::Contains("unknown forecast kind 'sidewys'"), ConfigError);
}

TEST_CASE("scenario validation bounds every numeric knob") {
  const auto with_forecasts = [](const std::string& forecasts) {
    return R"({"seed": 1, "n_cities": 2, "monitors_per_city": 1,
               "date_range": ["2023-06-01", "2023-06-02"],
               "forecasts": )" +
           forecasts + "}";
  };
  CHECK_THROWS_WITH_AS(
      load_scenario(write_json("lag1.json",
                               with_forecasts(R"([{"model":"m","kind":"lagged","param":24}])"))),
      doctest::Contains("lag must be an integer"), ConfigError);
  CHECK_THROWS_WITH_AS(
      load_scenario(write_json("lag2.json",
                               with_forecasts(R"([{"model":"m","kind":"lagged","param":2.5}])"))),
      doctest::Contains("lag must be an integer"), ConfigError);
  CHECK_THROWS_WITH_AS(
      load_scenario(write_json("scale.json",
                               with_forecasts(R"([{"model":"m","kind":"scaled","param":0}])"))),
      doctest::Contains("scaled factor must be > 0"), ConfigError);
  CHECK_THROWS_WITH_AS(
      load_scenario(write_json("dup.json", with_forecasts(R"([{"model":"m","kind":"perfect"},
                                                              {"model":"m","kind":"biased"}])"))),
      doctest::Contains("duplicate forecast model"), ConfigError);
  CHECK_THROWS_WITH_AS(
      load_scenario(
          write_json("resv.json", with_forecasts(R"([{"model":"persistence","kind":"perfect"}])"))),
      doctest::Contains("bad forecast model id"), ConfigError);

  const std::string peak = R"({"seed": 1, "n_cities": 1, "monitors_per_city": 1,
      "date_range": ["2023-06-01", "2023-06-02"], "baseline_level": 20,
      "events": [{"city": 0, "start": "2023-06-01", "duration_days": 1, "peak": 20.0}],
      "forecasts": [{"model": "m", "kind": "perfect"}]})";
  CHECK_THROWS_WITH_AS(load_scenario(write_json("peak.json", peak)),
                       doctest::Contains("peak must exceed baseline_level"), ConfigError);

  const std::string hour = R"({"seed": 1, "n_cities": 1, "monitors_per_city": 1,
      "date_range": ["2023-06-01", "2023-06-02"],
      "outages": [{"city": 0, "date": "2023-06-01", "hour": 25}],
      "forecasts": [{"model": "m", "kind": "perfect"}]})";
  CHECK_THROWS_WITH_AS(load_scenario(write_json("hour.json", hour)),
                       doctest::Contains("outage hour must be in 1..24"), ConfigError);
}

namespace {

ScenarioSpec small_spec() {
  ScenarioSpec spec;
  spec.seed = 7;
  spec.n_cities = 2;
  spec.monitors_per_city = 2;
  spec.start = *parse_date("2023-06-01");
  spec.end = *parse_date("2023-06-03");
  spec.events.push_back({0, *parse_date("2023-06-02"), 1, 60.0, 4});
  spec.forecasts.push_back({"exact", {ForecastKind::Type::Perfect, 0.0}});
  spec.forecasts.push_back({"late", {ForecastKind::Type::Lagged, 3.0}});
  spec.forecasts.push_back({"fuzzy", {ForecastKind::Type::Noisy, 1.0}});
  return spec;
}

constexpr const char* kGeneratedFiles[] = {"cities.csv", "monitors.csv", "readings.csv",
                                           "forecast.csv", "config.json"};

}  // namespace

TEST_CASE("generation is byte-stable run to run") {
  const auto spec = small_spec();
  const auto a = kScratch / "gen_a";
  const auto b = kScratch / "gen_b";
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
  generate(spec, a);
  generate(spec, b);
  for (const char* name : kGeneratedFiles) {
    CAPTURE(name);
    CHECK(slurp(a / name) == slurp(b / name));
  }
  CHECK(regenerate_check(spec, a).ok);
}

TEST_CASE("regeneration checks name the first drifted file") {
  auto spec = small_spec();
  const auto dir = kScratch / "gen_drift";
  std::filesystem::remove_all(dir);
  generate(spec, dir);

  auto noisier = spec;
  noisier.noise_sd = 0.75;
  const auto r1 = regenerate_check(noisier, dir);
  CHECK_FALSE(r1.ok);
  CHECK(r1.first_difference == "readings.csv");

  // the forecast transform draws nothing extra, so only forecast.csv moves
  auto later = spec;
  later.forecasts[1].kind.param = 5.0;
  const auto r2 = regenerate_check(later, dir);
  CHECK_FALSE(r2.ok);
  CHECK(r2.first_difference == "forecast.csv");
}

TEST_CASE("outages delete exactly the configured hour of the configured city") {
  auto spec = small_spec();
  spec.outages.push_back({0, *parse_date("2023-06-02"), 5});
  const auto dir = kScratch / "gen_outage";
  std::filesystem::remove_all(dir);
  const auto gen = generate(spec, dir);

  const auto stations = load_monitors(gen.monitors);
  const auto readings = load_readings(gen.readings, stations);
  const UtcInstant cut = DayWindow{*parse_date("2023-06-02")}.hour(4);
  CHECK_FALSE(readings.at("city01-m01", cut).has_value());
  CHECK_FALSE(readings.at("city01-m02", cut).has_value());
  CHECK(readings.at("city02-m01", cut).has_value());
  CHECK(readings.at("city01-m01", cut - std::chrono::hours{1}).has_value());
  CHECK(readings.at("city01-m01", cut + std::chrono::hours{1}).has_value());
}

TEST_CASE("the lag transform shifts within the window and holds the edge") {
  const auto spec = small_spec();
  const auto dir = kScratch / "gen_lag";
  std::filesystem::remove_all(dir);
  const auto gen = generate(spec, dir);
  const auto forecasts = load_forecast_samples(gen.forecast, {"exact", "late", "fuzzy"});

  const DayWindow w{*parse_date("2023-06-02")};
  const UtcInstant run = UtcInstant{w.label_date} + std::chrono::hours{12};
  const GeoPoint center{39.0, -105.0};  // first synthetic city
  for (int k = 0; k < DayWindow::kSlots; ++k) {
    const int from = std::clamp(k - 3, 0, DayWindow::kSlots - 1);
    const auto late = forecasts.value_at("late", run, w.hour(k), center);
    const auto exact = forecasts.value_at("exact", run, w.hour(from), center);
    REQUIRE(late.has_value());
    REQUIRE(exact.has_value());
    CHECK(*late == *exact);
  }
}

TEST_CASE("a perfect forecast reproduces the monitor mean bit for bit") {
  const auto spec = small_spec();
  const auto dir = kScratch / "gen_perfect";
  std::filesystem::remove_all(dir);
  const auto gen = generate(spec, dir);

  const auto config = load_config(gen.config);
  const auto data = load_all(config);
  const auto result = evaluate_serial(config, data);
  long perfect_days = 0;
  for (const auto& o : result.outcomes) {
    if (o.model != "exact") continue;
    ++perfect_days;
    CHECK(o.excess == 0.0);
    for (double e : o.squared_errors) CHECK(e == 0.0);
    CHECK(o.predicted_positive == o.truth_positive);
  }
  CHECK(perfect_days == 2 * 3);  // every city, every day
}
