#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

namespace fs = std::filesystem;

namespace {

const fs::path kScratch = fs::temp_directory_path() / "smokebench_test_cli";
const std::string kBin = SMOKEBENCH_CLI;

int shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  if (status == -1 || !WIFEXITED(status)) return -1;
  return WEXITSTATUS(status);
}

int run(const std::string& args) { return shell("\"" + kBin + "\" " + args); }

int run_capture(const std::string& args, std::string& err) {
  const fs::path err_path = kScratch / "stderr.txt";
  const int code = run(args + " 2>\"" + err_path.string() + "\"");
  std::ifstream in(err_path, std::ios::binary);
  err.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  return code;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& body) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << body;
}

// One generated scenario shared by the tests below; synth and the first
// evaluate run happen once.
struct Env {
  fs::path spec = kScratch / "scenario.json";
  fs::path data = kScratch / "data";
  fs::path config = data / "config.json";
  fs::path results = data / "results";
  int synth_code = -1;
  int evaluate_code = -1;
  std::string evaluate_err;

  Env() {
    fs::remove_all(kScratch);
    fs::create_directories(kScratch);
    spit(spec, R"({
      "seed": 5,
      "n_cities": 2,
      "monitors_per_city": 2,
      "date_range": ["2023-06-01", "2023-06-05"],
      "events": [{"city": 0, "start": "2023-06-03", "duration_days": 1,
                  "peak": 60.0, "ramp_hours": 4}],
      "forecasts": [{"model": "exact", "kind": "perfect"},
                    {"model": "low", "kind": "biased", "param": -5}]
    })");
    synth_code = run("synth --spec \"" + spec.string() + "\" --out \"" + data.string() + "\"");
    evaluate_code =
        run_capture("evaluate --config \"" + config.string() + "\"", evaluate_err);
  }
};

const Env& env() {
  static Env e;
  return e;
}

}  // namespace

TEST_CASE("the generate, validate, evaluate, report pipeline exits clean") {
  const Env& e = env();
  CHECK(e.synth_code == 0);
  CHECK(fs::exists(e.config));

  std::string err;
  CHECK(run_capture("validate --config \"" + e.config.string() + "\"", err) == 0);
  CHECK(err.find("ok\n") != std::string::npos);
  CHECK(err.find("2 cities") != std::string::npos);

  CHECK(e.evaluate_code == 0);
  CHECK(e.evaluate_err.find("evaluated 6 of 6 units") != std::string::npos);
  for (const char* name : {"metrics.csv", "confusion.csv", "outcomes.csv", "exclusions.csv"}) {
    CAPTURE(name);
    CHECK(fs::exists(e.results / name));
  }

  CHECK(run_capture("report --config \"" + e.config.string() + "\" --plots", err) == 0);
  for (const char* name : {"city_city01.csv", "city_city01.html", "city_city02.csv",
                           "aggregate.csv", "aggregate.html"}) {
    CAPTURE(name);
    CHECK(fs::exists(e.results / name));
  }
  // the one plume, padded two days back to the range start
  CHECK(fs::exists(e.results / "event_city01_2023-06-01.csv"));
  CHECK(fs::exists(e.results / "event_city01_2023-06-01.svg"));
}

TEST_CASE("the day-set switch narrows the metrics file") {
  const Env& e = env();
  const fs::path out = kScratch / "smoke_only";
  CHECK(run("evaluate --config \"" + e.config.string() + "\" --out \"" + out.string() +
            "\" --dayset smoke") == 0);
  const std::string metrics = slurp(out / "metrics.csv");
  CHECK(metrics.find(",smoke,") != std::string::npos);
  CHECK(metrics.find(",all,") == std::string::npos);

  const fs::path out_all = kScratch / "all_only";
  CHECK(run("evaluate --config \"" + e.config.string() + "\" --out \"" + out_all.string() +
            "\" --dayset all") == 0);
  const std::string metrics_all = slurp(out_all / "metrics.csv");
  CHECK(metrics_all.find(",all,") != std::string::npos);
  CHECK(metrics_all.find(",smoke,") == std::string::npos);
}

TEST_CASE("worker width never changes a byte of output") {
  const Env& e = env();
  const fs::path j1 = kScratch / "j1";
  const fs::path j4 = kScratch / "j4";
  REQUIRE(run("evaluate --config \"" + e.config.string() + "\" --out \"" + j1.string() +
              "\" --jobs 1") == 0);
  REQUIRE(run("evaluate --config \"" + e.config.string() + "\" --out \"" + j4.string() +
              "\" --jobs 4") == 0);
  for (const char* name : {"metrics.csv", "confusion.csv", "outcomes.csv", "exclusions.csv"}) {
    CAPTURE(name);
    CHECK(slurp(j1 / name) == slurp(j4 / name));
  }
}

TEST_CASE("usage problems exit 1 before any work happens") {
  CHECK(run("--help >/dev/null") == 0);
  CHECK(run("2>/dev/null") == 1);                       // a subcommand is required
  CHECK(run("evaluate 2>/dev/null") == 1);              // --config is required
  CHECK(run("evaluate --config x --frobnicate 2>/dev/null") == 1);
  CHECK(run("evaluate --config x --dayset weekends 2>/dev/null") == 1);
  CHECK(run("report --config x --pad-days -3 2>/dev/null") == 1);
}

TEST_CASE("a config the loader rejects exits 1 with its message") {
  const fs::path bad = kScratch / "bad_key.json";
  spit(bad, R"({"cities": [], "models": ["m"], "date_range": ["2023-06-01", "2023-06-02"],
                "radius": 10})");
  std::string err;
  CHECK(run_capture("evaluate --config \"" + bad.string() + "\"", err) == 1);
  CHECK(err.find("error:") != std::string::npos);
  CHECK(err.find("unknown key 'radius'") != std::string::npos);
}

TEST_CASE("unreadable data exits 2") {
  const Env& e = env();
  const fs::path cfg = e.data / "missing_readings.json";
  spit(cfg, R"({"cities": "cities.csv", "models": ["exact", "low"],
                "date_range": ["2023-06-01", "2023-06-05"],
                "monitors": "monitors.csv", "readings": "nope.csv",
                "forecasts": "forecast.csv"})");
  std::string err;
  CHECK(run_capture("evaluate --config \"" + cfg.string() + "\"", err) == 2);
  CHECK(err.find("error:") != std::string::npos);

  const fs::path bad = kScratch / "bad";
  spit(bad / "cities.csv", "city_id,name,lat,lon\nc1,Town,40,-100\n");
  spit(bad / "monitors.csv", "monitor_id,lat,lon\nm1,40,-100\n");
  spit(bad / "readings.csv", "monitor_id,timestamp,pm25\nm2,2023-06-01T00:00:00Z,5\n");
  spit(bad / "forecast.csv", "model,run_time,valid_time,lat,lon,pm25\n");
  spit(bad / "config.json", R"({"cities": "cities.csv", "models": ["m"],
       "date_range": ["2023-06-01", "2023-06-02"], "monitors": "monitors.csv",
       "readings": "readings.csv", "forecasts": "forecast.csv"})");
  CHECK(run_capture("validate --config \"" + (bad / "config.json").string() + "\"", err) == 2);
  CHECK(err.find("unknown monitor_id 'm2'") != std::string::npos);
}

TEST_CASE("reporting an empty directory exits 2") {
  const Env& e = env();
  const fs::path empty = kScratch / "nothing_here";
  fs::create_directories(empty);
  std::string err;
  CHECK(run_capture("report --config \"" + e.config.string() + "\" --out \"" + empty.string() +
                    "\"",
                    err) == 2);
  CHECK(err.find("no evaluation results found") != std::string::npos);
}

TEST_CASE("a city no monitor can serve is skipped and flagged as partial") {
  const Env& e = env();
  spit(e.data / "cities_far.csv",
       slurp(e.data / "cities.csv") + "city99,Out Of Range,0,0\n");
  const fs::path cfg = e.data / "partial.json";
  spit(cfg, R"({"cities": "cities_far.csv", "models": ["exact", "low"],
                "date_range": ["2023-06-01", "2023-06-05"],
                "monitors": "monitors.csv", "readings": "readings.csv",
                "forecasts": "forecast.csv", "output_dir": "partial_out"})");
  std::string err;
  CHECK(run_capture("evaluate --config \"" + cfg.string() + "\"", err) == 3);
  CHECK(err.find("evaluated 6 of 9 units") != std::string::npos);
  const std::string exclusions = slurp(e.data / "partial_out" / "exclusions.csv");
  CHECK(exclusions.find("city99,,measured,no monitors within fallback radius") !=
        std::string::npos);
}

TEST_CASE("scenario problems exit 1") {
  std::string err;
  CHECK(run_capture("synth --spec \"" + (kScratch / "absent.json").string() + "\" --out \"" +
                        (kScratch / "x").string() + "\"",
                    err) == 1);
  const fs::path bad = kScratch / "bad_scenario.json";
  spit(bad, R"({"seed": 1, "n_cities": 1, "monitors_per_city": 1,
                "date_range": ["2023-06-01", "2023-06-02"], "forecasts": [],
                "surprise": true})");
  CHECK(run_capture("synth --spec \"" + bad.string() + "\" --out \"" +
                        (kScratch / "x").string() + "\"",
                    err) == 1);
  CHECK(err.find("unknown key 'surprise'") != std::string::npos);
}

TEST_CASE("fetch refuses to run without its configuration") {
  const Env& e = env();
  std::string err;
  CHECK(run_capture("fetch --config \"" + e.config.string() + "\"", err) == 1);
  CHECK(err.find("no 'fetch' section") != std::string::npos);

  const fs::path cfg = kScratch / "fetch.json";
  spit(cfg, R"({"cities": [{"id": "c1", "name": "Town", "lat": 40, "lon": -100}],
                "models": ["m"],
                "date_range": ["2023-06-01", "2023-06-01"],
                "fetch": {"url_template": "http://127.0.0.1:1/{model}_{date}",
                          "dest_dir": "archives"}})");
  // a bad timeout override is a usage error, checked before any request
  CHECK(shell("SMOKEBENCH_HTTP_TIMEOUT_SECS=abc \"" + kBin + "\" fetch --config \"" +
              cfg.string() + "\" 2>/dev/null") == 1);
  // nothing listens on port 1, so every date fails
  std::string fetch_err;
  CHECK(run_capture("fetch --config \"" + cfg.string() + "\"", fetch_err) == 2);
  CHECK(fetch_err.find("failed m 2023-06-01") != std::string::npos);
}
