// Times the serial evaluation pipeline against the OpenMP one on a synthetic
// dataset and checks that every width reproduces the serial result exactly.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <string>

#include "smokebench/evaluate.hpp"
#include "smokebench/fixtures.hpp"

using namespace smokebench;

namespace {

ScenarioSpec bench_spec() {
  ScenarioSpec spec;
  spec.seed = 424242;
  spec.n_cities = 10;
  spec.monitors_per_city = 6;
  spec.start = *parse_date("2023-06-01");
  spec.end = *parse_date("2023-07-30");
  spec.baseline_level = 9.0;
  spec.diurnal_amplitude = 5.0;
  spec.noise_sd = 1.5;
  for (int c = 0; c < spec.n_cities; c += 2) {
    EventSpec ev;
    ev.city_index = c;
    ev.start = *parse_date("2023-06-20");
    ev.duration_days = 6;
    ev.peak = 80.0;
    ev.ramp_hours = 18;
    spec.events.push_back(ev);
  }
  spec.forecasts = {
      {"alpha", {ForecastKind::Type::Perfect, 0.0}},
      {"bravo", {ForecastKind::Type::Lagged, 3.0}},
      {"charlie", {ForecastKind::Type::Noisy, 4.0}},
      {"delta", {ForecastKind::Type::Biased, -2.0}},
  };
  return spec;
}

bool same_result(const EvaluationResult& a, const EvaluationResult& b) {
  if (a.outcomes.size() != b.outcomes.size()) return false;
  for (std::size_t i = 0; i < a.outcomes.size(); ++i) {
    const DayOutcome& x = a.outcomes[i];
    const DayOutcome& y = b.outcomes[i];
    if (x.city_id != y.city_id || x.date != y.date || x.model != y.model) return false;
    if (x.predicted_positive != y.predicted_positive || x.truth_positive != y.truth_positive) {
      return false;
    }
    if (x.excess != y.excess || x.chosen_hour != y.chosen_hour) return false;
    if (x.squared_errors != y.squared_errors) return false;
  }
  if (a.summaries.size() != b.summaries.size()) return false;
  for (std::size_t i = 0; i < a.summaries.size(); ++i) {
    if (!(a.summaries[i].counts == b.summaries[i].counts)) return false;
    if (a.summaries[i].mee_smoke.value != b.summaries[i].mee_smoke.value) return false;
    if (a.summaries[i].rmse_all.value != b.summaries[i].rmse_all.value) return false;
  }
  return a.exclusions == b.exclusions;
}

double seconds_of(std::chrono::steady_clock::duration d) {
  return std::chrono::duration<double>(d).count();
}

}  // namespace

int main(int argc, char** argv) {
  int repeats = 3;
  if (argc > 1) repeats = std::max(1, std::atoi(argv[1]));

  const auto dir = std::filesystem::temp_directory_path() / "smokebench_bench";
  std::filesystem::remove_all(dir);
  const GeneratedScenario scenario = generate(bench_spec(), dir);
  const RunConfig config = load_config(scenario.config);
  const LoadedData data = load_all(config);

  using clock = std::chrono::steady_clock;
  EvaluationResult reference;
  double serial_best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = clock::now();
    reference = evaluate_serial(config, data);
    serial_best = std::min(serial_best, seconds_of(clock::now() - t0));
  }
  std::printf("%-10s %10.4fs   (%ld outcomes)\n", "serial", serial_best,
              long(reference.outcomes.size()));

  for (const int width : {1, 2, 4, 8}) {
    EvaluationResult result;
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
      const auto t0 = clock::now();
      result = evaluate_parallel(config, data, width);
      best = std::min(best, seconds_of(clock::now() - t0));
    }
    const bool match = same_result(reference, result);
    std::printf("width %-4d %10.4fs   x%.2f   %s\n", width, best, serial_best / best,
                match ? "identical" : "MISMATCH");
    if (!match) return 1;
  }
  std::filesystem::remove_all(dir);
  return 0;
}
