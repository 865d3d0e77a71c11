#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "smokebench/core.hpp"

namespace smokebench {

// Portable normal deviates: mt19937_64 (bit-exact stream per the standard)
// with explicit Box-Muller, z = sqrt(-2 ln(1-u1)) * cos(2 pi u2), where each
// u = (x >> 11) * 2^-53 from one engine output. Two outputs per deviate.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : eng_(seed) {}
  double next();

 private:
  std::mt19937_64 eng_;
};

struct EventSpec {
  int city_index = 0;
  Date start{};
  int duration_days = 1;
  double peak = 0.0;  // must exceed baseline_level
  int ramp_hours = 1;
};

struct OutageSpec {
  int city_index = 0;
  Date date{};
  int hour = 1;  // window hour 1..24; removes every monitor's reading
};

struct ForecastKind {
  enum class Type { Perfect, Lagged, Scaled, Biased, Noisy, Constant };
  Type type = Type::Perfect;
  double param = 0.0;
};

struct SyntheticForecastSpec {
  ModelId model;
  ForecastKind kind;
};

struct ScenarioSpec {
  std::uint64_t seed = 0;
  int n_cities = 1;
  int monitors_per_city = 1;
  Date start{};
  Date end{};
  double baseline_level = 8.0;
  double diurnal_amplitude = 4.0;  // sinusoid with its minimum at 22:00 UTC
  double noise_sd = 0.5;           // used for both truth and monitor sampling noise
  std::vector<EventSpec> events;
  std::vector<OutageSpec> outages;
  std::vector<SyntheticForecastSpec> forecasts;
};

// Strict JSON scenario document; unknown keys rejected.
ScenarioSpec load_scenario(const std::filesystem::path& path);

struct GeneratedScenario {
  std::filesystem::path dir;
  std::filesystem::path config;
  std::filesystem::path cities;
  std::filesystem::path monitors;
  std::filesystem::path readings;
  std::filesystem::path forecast;
};

// Deterministic byte-stable generation: truth = baseline + diurnal + linear
// ramp plumes + Gaussian noise, clipped at 0; monitors add independent noise;
// forecast values are per-kind transforms of the city-level hourly mean (the
// per-kind transforms: identical, shifted within the window with held edges,
// scaled by a > 0, offset, noisy, constant). Also writes a ready-to-run
// config.json next to the data.
GeneratedScenario generate(const ScenarioSpec& spec, const std::filesystem::path& out_dir);

struct RegenerateResult {
  bool ok = true;
  std::string first_difference;  // file name when !ok
};

// Regenerates into a scratch dir and byte-compares against previous_dir.
RegenerateResult regenerate_check(const ScenarioSpec& spec,
                                  const std::filesystem::path& previous_dir);

}  // namespace smokebench
