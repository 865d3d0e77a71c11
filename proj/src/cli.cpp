#include "smokebench/cli.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>

#include "smokebench/csv.hpp"
#include "smokebench/evaluate.hpp"
#include "smokebench/fetch.hpp"
#include "smokebench/fixtures.hpp"
#include "smokebench/report.hpp"

namespace smokebench {
namespace {

long parse_count_field(const std::string& text, const std::string& context) {
  long v = 0;
  const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || p != text.data() + text.size() || v < 0) {
    throw DataError(context + ": bad count '" + text + "'");
  }
  return v;
}

double parse_metric_field(const std::string& text, const std::string& context) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw DataError(context + ": bad value '" + text + "'");
}

int effective_timeout(const FetchConfig& fetch) {
  const char* env = std::getenv("SMOKEBENCH_HTTP_TIMEOUT_SECS");
  if (!env || !*env) return fetch.timeout_secs;
  int v = 0;
  const std::string text(env);
  const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || p != text.data() + text.size() || v <= 0) {
    throw ConfigError("SMOKEBENCH_HTTP_TIMEOUT_SECS: expected a positive integer, got '" + text +
                      "'");
  }
  return v;
}

int fetch_cmd(const std::filesystem::path& config_path, bool force) {
  const RunConfig config = load_config(config_path);
  if (!config.fetch) {
    throw ConfigError(config_path.string() + ": no 'fetch' section in configuration");
  }
  const int timeout = effective_timeout(*config.fetch);
  long succeeded = 0, failed = 0;
  for (const auto& model : config.models) {
    const auto outcomes = fetch_archives(config.fetch->url_template, model, config.start,
                                         config.end, config.fetch->dest_dir, force, timeout);
    for (const auto& o : outcomes) {
      if (o.ok) {
        ++succeeded;
        std::cerr << (o.skipped ? "kept " : "fetched ") << o.path.string() << "\n";
      } else {
        ++failed;
        std::cerr << "failed " << model << " " << format_date(o.date) << ": " << o.error << "\n";
      }
    }
  }
  std::cerr << succeeded << " archives in place, " << failed << " failed\n";
  if (failed == 0) return 0;
  return succeeded > 0 ? 3 : 2;
}

int validate_cmd(const std::filesystem::path& config_path) {
  const RunConfig config = load_config(config_path);
  const LoadedData data = load_all(config);
  std::cerr << "config: " << config.cities.size() << " cities, " << config.models.size()
            << " models, " << format_date(config.start) << ".." << format_date(config.end) << "\n";
  std::cerr << "monitors: " << data.stations.size() << " stations\n";
  std::cerr << "readings: " << data.readings.size() << " rows";
  if (data.readings.duplicate_count() > 0) {
    std::cerr << " (" << data.readings.duplicate_count() << " duplicate keys overwritten)";
  }
  if (data.readings.negative_flagged() > 0) {
    std::cerr << ", " << data.readings.negative_flagged() << " admitted negatives";
  }
  std::cerr << "\nforecast samples: " << data.forecasts.size() << " rows\n";
  std::cerr << "ok\n";
  return 0;
}

int evaluate_cmd(const std::filesystem::path& config_path, const std::filesystem::path& out_opt,
                 const std::string& dayset, int jobs) {
  const RunConfig config = load_config(config_path);
  const LoadedData data = load_all(config);
  const EvaluationResult result =
      jobs <= 1 ? evaluate_serial(config, data) : evaluate_parallel(config, data, jobs);
  const std::filesystem::path out = out_opt.empty() ? config.output_dir : out_opt;
  write_outputs(result, config, out, dayset != "all", dayset != "smoke");
  std::cerr << "evaluated " << result.evaluated_units << " of "
            << result.evaluated_units + result.skipped_units << " units into " << out.string()
            << "\n";
  if (result.evaluated_units == 0) {
    std::cerr << "error: nothing could be evaluated\n";
    return 2;
  }
  return result.skipped_units > 0 ? 3 : 0;
}

struct ReportInputs {
  std::vector<std::string> city_order;
  std::map<std::string, std::map<ModelId, TableRowInput>> by_city;
};

ReportInputs read_evaluation(const std::filesystem::path& out) {
  const auto confusion_path = out / "confusion.csv";
  const auto metrics_path = out / "metrics.csv";
  if (!std::filesystem::exists(confusion_path) || !std::filesystem::exists(metrics_path)) {
    throw DataError(out.string() + ": no evaluation results found");
  }
  ReportInputs in;
  {
    CsvReader reader(confusion_path, {"city_id", "model", "tp", "fp", "fn", "tn"});
    std::vector<std::string> row;
    while (reader.next(row)) {
      if (!in.by_city.count(row[0])) in.city_order.push_back(row[0]);
      ConfusionCounts c;
      c.tp = parse_count_field(row[2], reader.context());
      c.fp = parse_count_field(row[3], reader.context());
      c.fn = parse_count_field(row[4], reader.context());
      c.tn = parse_count_field(row[5], reader.context());
      in.by_city[row[0]][row[1]].counts = c;
    }
  }
  {
    CsvReader reader(metrics_path, {"city_id", "model", "metric", "dayset", "value", "days"});
    std::vector<std::string> row;
    while (reader.next(row)) {
      if (row[2] != "mee" || row[3] != "smoke") continue;
      auto& cell = in.by_city[row[0]][row[1]];
      if (row[4] != "--") cell.mee = parse_metric_field(row[4], reader.context());
      cell.days = parse_count_field(row[5], reader.context());
    }
  }
  return in;
}

void write_rendered(const std::filesystem::path& base, const RenderedTable& table) {
  {
    std::ofstream f(base.string() + ".csv", std::ios::binary);
    if (!f) throw DataError(base.string() + ".csv: cannot write");
    write_table_csv(f, table);
  }
  {
    std::ofstream f(base.string() + ".html", std::ios::binary);
    if (!f) throw DataError(base.string() + ".html: cannot write");
    write_table_html(f, table);
  }
}

void write_event_plots(const RunConfig& config, const std::filesystem::path& out, int pad_days) {
  const LoadedData data = load_all(config);
  const EvaluationResult result = evaluate_serial(config, data);
  std::size_t i = 0;
  while (i < result.bundles.size()) {
    std::size_t j = i;
    while (j < result.bundles.size() && result.bundles[j].city_id == result.bundles[i].city_id) {
      ++j;
    }
    const std::span<const CityDayBundle> city_bundles(result.bundles.data() + i, j - i);
    for (const auto& window : detect_event_windows(city_bundles, pad_days)) {
      const std::string base =
          "event_" + window.city_id + "_" + format_date(window.start);
      {
        std::ofstream f(out / (base + ".csv"), std::ios::binary);
        write_event_plot_csv(f, window, city_bundles, config.models);
      }
      {
        std::ofstream f(out / (base + ".svg"), std::ios::binary);
        write_event_plot_svg(f, window, city_bundles, config.models,
                             config.exceedance_threshold);
      }
      std::cerr << "wrote " << (out / base).string() << ".{csv,svg}\n";
    }
    i = j;
  }
}

int report_cmd(const std::filesystem::path& config_path, const std::filesystem::path& out_opt,
               bool plots, int pad_days) {
  const RunConfig config = load_config(config_path);
  const std::filesystem::path out = out_opt.empty() ? config.output_dir : out_opt;
  const ReportInputs in = read_evaluation(out);

  std::vector<MetricValue> mee_by_model_city;  // reused per model
  std::map<ModelId, TableRowInput> aggregate_inputs;
  std::vector<ModelId> order(config.models.begin(), config.models.end());
  order.push_back(kPersistenceModel);

  for (const auto& city : in.city_order) {
    const RenderedTable table = render_city_table(city, config.models, in.by_city.at(city));
    write_rendered(out / ("city_" + city), table);
  }

  for (const auto& model : order) {
    ConfusionCounts counts;
    std::vector<MetricValue> mee_rows;
    for (const auto& city : in.city_order) {
      const auto& rows = in.by_city.at(city);
      const auto it = rows.find(model);
      if (it == rows.end()) continue;
      if (it->second.counts) counts += *it->second.counts;
      mee_rows.push_back({it->second.mee, it->second.days});
    }
    TableRowInput agg;
    agg.counts = counts;
    const MetricValue pooled = pool_day_weighted(mee_rows);
    agg.mee = pooled.value;
    agg.days = pooled.days;
    aggregate_inputs.emplace(model, std::move(agg));
  }
  write_rendered(out / "aggregate", render_aggregate_table(config.models, aggregate_inputs));
  std::cerr << "wrote " << in.city_order.size() << " city tables and the aggregate into "
            << out.string() << "\n";

  if (plots) write_event_plots(config, out, pad_days);
  return 0;
}

int synth_cmd(const std::filesystem::path& spec_path, const std::filesystem::path& out_dir) {
  const ScenarioSpec spec = load_scenario(spec_path);
  const GeneratedScenario g = generate(spec, out_dir);
  std::cerr << "wrote scenario under " << g.dir.string() << " (config " << g.config.string()
            << ")\n";
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"PM2.5 forecast verification toolkit"};
  app.require_subcommand(1);

  std::filesystem::path config_path, out_dir, spec_path;
  std::string dayset = "both";
  int jobs = omp_get_max_threads();
  int pad_days = 2;
  bool force = false, plots = false;

  auto* fetch = app.add_subcommand("fetch", "Download model archives over the configured range");
  fetch->add_option("--config", config_path, "configuration file")->required();
  fetch->add_flag("--force", force, "re-download files that already exist");

  auto* validate = app.add_subcommand("validate", "Load and check all inputs, writing nothing");
  validate->add_option("--config", config_path, "configuration file")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Run the verification and write result tables");
  evaluate->add_option("--config", config_path, "configuration file")->required();
  evaluate->add_option("--out", out_dir, "output directory (default: from configuration)");
  evaluate->add_option("--dayset", dayset, "metric day sets to write")
      ->check(CLI::IsMember({"smoke", "all", "both"}));
  evaluate->add_option("-j,--jobs", jobs, "worker threads (1 selects the serial path)");

  auto* report = app.add_subcommand("report", "Render tables and plots from evaluation output");
  report->add_option("--config", config_path, "configuration file")->required();
  report->add_option("--out", out_dir, "evaluation output directory (default: from configuration)");
  report->add_flag("--plots", plots, "also write event-window series plots");
  report->add_option("--pad-days", pad_days, "days of context around an event window")
      ->check(CLI::NonNegativeNumber);

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset from a scenario file");
  synth->add_option("--spec", spec_path, "scenario description file")->required();
  synth->add_option("--out", out_dir, "directory to generate into")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(fetch)) return fetch_cmd(config_path, force);
    if (app.got_subcommand(validate)) return validate_cmd(config_path);
    if (app.got_subcommand(evaluate)) return evaluate_cmd(config_path, out_dir, dayset, jobs);
    if (app.got_subcommand(report)) return report_cmd(config_path, out_dir, plots, pad_days);
    if (app.got_subcommand(synth)) return synth_cmd(spec_path, out_dir);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace smokebench
