#include "smokebench/report.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "smokebench/csv.hpp"

namespace smokebench {

std::string_view shade_name(Shade s) {
  switch (s) {
    case Shade::Better: return "better";
    case Shade::Worse: return "worse";
    case Shade::Equal: return "equal";
  }
  return "equal";
}

ShadedCell shade_cell(std::optional<double> value, std::optional<double> baseline, Orientation o,
                      int decimals) {
  ShadedCell cell;
  cell.display = value ? format_fixed(*value, decimals) : "--";
  if (!value || !baseline) return cell;  // dashes shade equal
  if (cell.display == format_fixed(*baseline, decimals)) return cell;
  const bool higher = *value > *baseline;
  const bool better = (o == Orientation::HigherBetter) ? higher : !higher;
  cell.shade = better ? Shade::Better : Shade::Worse;
  return cell;
}

std::string format_score(std::optional<double> score) {
  return score ? format_fixed(*score, 2) : "--";
}

std::string format_count_percent(long count, long total) {
  const double p = 100.0 * double(count) / double(total);
  std::string s = format_fixed(p, 2);
  while (s.size() > 1 && s.back() == '0' && s[s.size() - 2] != '.') s.pop_back();
  return std::to_string(count) + " (" + s + "%)";
}

namespace {

RenderedTable render_table(const std::string& title, std::span<const ModelId> model_order,
                           const std::map<ModelId, TableRowInput>& inputs, int mee_decimals,
                           bool with_days) {
  const auto base_it = inputs.find(kPersistenceModel);
  if (base_it == inputs.end() || !base_it->second.counts) {
    throw ReportError(title + ": baseline '" + kPersistenceModel + "' row missing");
  }
  const TableRowInput& base = base_it->second;

  std::vector<ModelId> order(model_order.begin(), model_order.end());
  order.push_back(kPersistenceModel);

  RenderedTable table;
  table.title = title;
  table.with_days = with_days;
  table.mee_decimals = mee_decimals;
  for (const auto& model : order) {
    RenderedRow row;
    row.model = model;
    const auto it = inputs.find(model);
    TableRowInput input;
    if (it != inputs.end()) input = it->second;
    // A zero day universe means every day was excluded: render dashes.
    if (input.counts && input.counts->total() == 0) input.counts.reset();
    const auto count_val = [&](long ConfusionCounts::* member) -> std::optional<double> {
      if (!input.counts) return std::nullopt;
      return double((*input.counts).*member);
    };
    const auto bv = [&](long n) { return std::optional<double>(double(n)); };
    row.tp = shade_cell(count_val(&ConfusionCounts::tp), bv(base.counts->tp),
                        Orientation::HigherBetter, 0);
    row.fp = shade_cell(count_val(&ConfusionCounts::fp), bv(base.counts->fp),
                        Orientation::LowerBetter, 0);
    row.fn = shade_cell(count_val(&ConfusionCounts::fn), bv(base.counts->fn),
                        Orientation::LowerBetter, 0);
    row.tn = shade_cell(count_val(&ConfusionCounts::tn), bv(base.counts->tn),
                        Orientation::HigherBetter, 0);
    row.mee = shade_cell(input.mee, base.mee, Orientation::LowerBetter, mee_decimals);
    row.counts = input.counts;
    row.days = input.days;
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace

RenderedTable render_city_table(const std::string& city_id, std::span<const ModelId> model_order,
                                const std::map<ModelId, TableRowInput>& inputs) {
  return render_table(city_id, model_order, inputs, 1, false);
}

RenderedTable render_aggregate_table(std::span<const ModelId> model_order,
                                     const std::map<ModelId, TableRowInput>& inputs) {
  return render_table("aggregate", model_order, inputs, 2, true);
}

void write_table_csv(std::ostream& out, const RenderedTable& table) {
  out << "model,tp,fp,fn,tn,mee,tp_shade,fp_shade,fn_shade,tn_shade,mee_shade";
  if (table.with_days) out << ",days";
  out << "\n";
  for (const auto& row : table.rows) {
    std::vector<std::string> fields = {row.model,
                                       row.tp.display,
                                       row.fp.display,
                                       row.fn.display,
                                       row.tn.display,
                                       row.mee.display,
                                       std::string(shade_name(row.tp.shade)),
                                       std::string(shade_name(row.fp.shade)),
                                       std::string(shade_name(row.fn.shade)),
                                       std::string(shade_name(row.tn.shade)),
                                       std::string(shade_name(row.mee.shade))};
    if (table.with_days) fields.push_back(std::to_string(row.days));
    write_csv_row(out, fields);
  }
}

namespace {

void html_count_cell(std::ostream& out, const ShadedCell& cell,
                     const std::optional<ConfusionCounts>& counts, long raw) {
  out << "<td class=\"" << shade_name(cell.shade) << "\">";
  if (!counts) {
    out << "--";
  } else if (counts->total() > 0) {
    out << format_count_percent(raw, counts->total());
  } else {
    out << raw;
  }
  out << "</td>";
}

}  // namespace

void write_table_html(std::ostream& out, const RenderedTable& table) {
  out << "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>" << table.title
      << "</title>\n<style>\n"
         "body { font-family: sans-serif; }\n"
         "table { border-collapse: collapse; }\n"
         "th, td { border: 1px solid #999; padding: 4px 10px; text-align: right; }\n"
         "td.model { text-align: left; }\n"
         "td.better { background: #c9e7c9; }\n"
         "td.worse { background: #f2c4c4; }\n"
         "</style></head><body>\n<h1>"
      << table.title << "</h1>\n<table>\n<tr><th>model</th><th>TP</th><th>FP</th><th>FN</th>"
         "<th>TN</th><th>Precision</th><th>Recall</th><th>MEE</th>";
  if (table.with_days) out << "<th>Days</th>";
  out << "</tr>\n";
  for (const auto& row : table.rows) {
    out << "<tr><td class=\"model\">" << row.model << "</td>";
    html_count_cell(out, row.tp, row.counts, row.counts ? row.counts->tp : 0);
    html_count_cell(out, row.fp, row.counts, row.counts ? row.counts->fp : 0);
    html_count_cell(out, row.fn, row.counts, row.counts ? row.counts->fn : 0);
    html_count_cell(out, row.tn, row.counts, row.counts ? row.counts->tn : 0);
    SkillScores scores;
    if (row.counts) scores = skill(*row.counts);
    out << "<td>" << (row.counts ? format_score(scores.precision) : "--") << "</td>";
    out << "<td>" << (row.counts ? format_score(scores.recall) : "--") << "</td>";
    out << "<td class=\"" << shade_name(row.mee.shade) << "\">" << row.mee.display << "</td>";
    if (table.with_days) out << "<td>" << row.days << "</td>";
    out << "</tr>\n";
  }
  out << "</table>\n</body></html>\n";
}

std::vector<EventWindow> detect_event_windows(std::span<const CityDayBundle> bundles,
                                              int pad_days) {
  std::vector<EventWindow> windows;
  if (bundles.empty()) return windows;
  const std::string city_id = bundles.front().city_id;
  std::vector<Date> evaluated;
  std::vector<Date> high;
  for (const auto& b : bundles) {
    evaluated.push_back(b.window.label_date);
    if (b.high_day) high.push_back(b.window.label_date);
  }
  if (high.empty()) return windows;

  const auto day_number = [](Date d) { return d.time_since_epoch().count(); };
  struct Run {
    Date start, end;
  };
  std::vector<Run> runs;
  for (const Date d : high) {
    if (!runs.empty() && day_number(d) - day_number(runs.back().end) == 1) {
      runs.back().end = d;  // consecutive calendar days extend the run
    } else {
      runs.push_back({d, d});
    }
  }
  std::vector<Run> merged;
  for (const Run& r : runs) {
    if (!merged.empty() &&
        day_number(r.start) - day_number(merged.back().end) - 1 <= pad_days) {
      merged.back().end = r.end;
    } else {
      merged.push_back(r);
    }
  }
  const Date range_first = evaluated.front();
  const Date range_last = evaluated.back();
  for (const Run& r : merged) {
    EventWindow w;
    w.city_id = city_id;
    w.start = std::max(range_first, r.start - std::chrono::days{pad_days});
    w.end = std::min(range_last, r.end + std::chrono::days{pad_days});
    for (const Date d : evaluated) {
      if (w.start <= d && d <= w.end) w.included.push_back(d);
    }
    windows.push_back(std::move(w));
  }
  return windows;
}

namespace {

struct PlotSource {
  std::string name;
  const DaySeries* (*pick)(const CityDayBundle&, const std::string&);
  std::string key;  // model id for forecast sources
};

const DaySeries* pick_measured(const CityDayBundle& b, const std::string&) { return &b.measured; }
const DaySeries* pick_persistence(const CityDayBundle& b, const std::string&) {
  return b.persistence ? &*b.persistence : nullptr;
}
const DaySeries* pick_model(const CityDayBundle& b, const std::string& model) {
  const auto it = b.forecasts.find(model);
  return it != b.forecasts.end() ? &it->second : nullptr;
}

std::vector<PlotSource> plot_sources(std::span<const ModelId> model_order) {
  std::vector<PlotSource> sources;
  sources.push_back({kMeasuredSource, pick_measured, {}});
  sources.push_back({kPersistenceModel, pick_persistence, {}});
  for (const auto& m : model_order) sources.push_back({m, pick_model, m});
  return sources;
}

std::map<std::int64_t, const CityDayBundle*> bundles_by_day(const EventWindow& window,
                                                            std::span<const CityDayBundle> bundles) {
  std::map<std::int64_t, const CityDayBundle*> by_day;
  for (const auto& b : bundles) {
    if (b.city_id != window.city_id) continue;
    const Date d = b.window.label_date;
    if (window.start <= d && d <= window.end) by_day[d.time_since_epoch().count()] = &b;
  }
  return by_day;
}

}  // namespace

void write_event_plot_csv(std::ostream& out, const EventWindow& window,
                          std::span<const CityDayBundle> bundles,
                          std::span<const ModelId> model_order) {
  const auto by_day = bundles_by_day(window, bundles);
  const auto sources = plot_sources(model_order);
  out << "timestamp,source,pm25\n";
  for (const auto& [day, bundle] : by_day) {
    (void)day;
    for (int k = 0; k < DayWindow::kSlots; ++k) {
      for (const auto& src : sources) {
        const DaySeries* s = src.pick(*bundle, src.key);
        if (!s) continue;
        const std::string fields[] = {format_instant(bundle->window.hour(k)), src.name,
                                      format_double(s->values[k])};
        write_csv_row(out, fields);
      }
    }
  }
}

void write_event_plot_svg(std::ostream& out, const EventWindow& window,
                          std::span<const CityDayBundle> bundles,
                          std::span<const ModelId> model_order, double threshold) {
  const auto by_day = bundles_by_day(window, bundles);
  const auto sources = plot_sources(model_order);

  const double kLeft = 60.0, kRight = 800.0, kTop = 24.0, kBottom = 436.0;
  const long n_days = (window.end - window.start).count() + 1;
  const long total_slots = n_days * DayWindow::kSlots;

  double ymax = threshold;
  for (const auto& [day, bundle] : by_day) {
    (void)day;
    for (const auto& src : sources) {
      const DaySeries* s = src.pick(*bundle, src.key);
      if (!s) continue;
      for (double v : s->values) ymax = std::max(ymax, v);
    }
  }
  ymax *= 1.05;
  if (ymax <= 0.0) ymax = 1.0;

  const auto x_of = [&](long day_index, int slot) {
    const double u = double(day_index * DayWindow::kSlots + slot);
    return kLeft + u / double(total_slots - 1) * (kRight - kLeft);
  };
  const auto y_of = [&](double v) { return kBottom - v / ymax * (kBottom - kTop); };
  const auto num = [](double v) { return format_fixed(v, 3); };

  struct Style {
    const char* color;
    const char* dash;  // empty = solid
    double width;
  };
  const Style measured_style{"#d9641e", "", 2.0};
  const Style baseline_style{"#222222", "7 4", 1.5};
  const Style model_styles[] = {{"#1f77b4", "2 3", 1.5},
                                {"#9638c9", "8 3 2 3", 1.5},
                                {"#2a9d3a", "10 4", 1.5},
                                {"#b5a41e", "4 2", 1.5}};

  const auto style_of = [&](std::size_t source_index) -> Style {
    if (source_index == 0) return measured_style;
    if (source_index == 1) return baseline_style;
    return model_styles[(source_index - 2) % std::size(model_styles)];
  };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 960 480\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"960\" height=\"480\" fill=\"white\"/>\n";

  // axes
  out << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kBottom) << "\" x2=\"" << num(kRight)
      << "\" y2=\"" << num(kBottom) << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  out << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(kLeft)
      << "\" y2=\"" << num(kBottom) << "\" stroke=\"black\" stroke-width=\"1\"/>\n";

  for (int i = 0; i <= 5; ++i) {
    const double v = ymax * i / 5.0;
    const double y = y_of(v);
    out << "<line x1=\"" << num(kLeft - 4) << "\" y1=\"" << num(y) << "\" x2=\"" << num(kLeft)
        << "\" y2=\"" << num(y) << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(y + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << format_fixed(v, 0) << "</text>\n";
  }
  out << "<text x=\"" << num(14.0) << "\" y=\"" << num((kTop + kBottom) / 2)
      << "\" transform=\"rotate(-90 " << num(14.0) << " " << num((kTop + kBottom) / 2)
      << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">PM2.5 "
         "(ug/m3)</text>\n";

  const long label_step = std::max(1L, (n_days + 7) / 8);
  for (long di = 0; di < n_days; ++di) {
    const double x = x_of(di, 0);
    out << "<line x1=\"" << num(x) << "\" y1=\"" << num(kBottom) << "\" x2=\"" << num(x)
        << "\" y2=\"" << num(kBottom + 4) << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    if (di % label_step == 0) {
      out << "<text x=\"" << num(x) << "\" y=\"" << num(kBottom + 18)
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
          << format_date(window.start + std::chrono::days{di}) << "</text>\n";
    }
  }

  // threshold rule
  const double ty = y_of(threshold);
  out << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(ty) << "\" x2=\"" << num(kRight)
      << "\" y2=\"" << num(ty) << "\" stroke=\"#888888\" stroke-width=\"1\" "
         "stroke-dasharray=\"4 4\"/>\n";
  out << "<text x=\"" << num(kRight - 4) << "\" y=\"" << num(ty - 5)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" "
         "fill=\"#888888\">threshold "
      << format_double(threshold) << "</text>\n";

  // one polyline per contiguous run of days present per source
  for (std::size_t si = 0; si < sources.size(); ++si) {
    const auto& src = sources[si];
    const Style st = style_of(si);
    std::string points;
    long prev_day_index = -2;
    const auto flush = [&]() {
      if (points.empty()) return;
      out << "<polyline fill=\"none\" stroke=\"" << st.color << "\" stroke-width=\""
          << format_double(st.width) << "\"";
      if (st.dash[0]) out << " stroke-dasharray=\"" << st.dash << "\"";
      out << " points=\"" << points << "\"/>\n";
      points.clear();
    };
    for (const auto& [day, bundle] : by_day) {
      const long day_index = day - window.start.time_since_epoch().count();
      const DaySeries* s = src.pick(*bundle, src.key);
      if (!s) {
        flush();
        prev_day_index = -2;
        continue;
      }
      if (day_index != prev_day_index + 1) flush();
      for (int k = 0; k < DayWindow::kSlots; ++k) {
        if (!points.empty()) points.push_back(' ');
        points += num(x_of(day_index, k));
        points.push_back(',');
        points += num(y_of(s->values[k]));
      }
      prev_day_index = day_index;
    }
    flush();
  }

  // legend
  double ly = kTop + 10.0;
  for (std::size_t si = 0; si < sources.size(); ++si) {
    bool has_data = false;
    for (const auto& [day, bundle] : by_day) {
      (void)day;
      if (sources[si].pick(*bundle, sources[si].key)) {
        has_data = true;
        break;
      }
    }
    if (!has_data) continue;
    const Style st = style_of(si);
    out << "<line x1=\"" << num(818.0) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(850.0)
        << "\" y2=\"" << num(ly) << "\" stroke=\"" << st.color << "\" stroke-width=\""
        << format_double(st.width) << "\"";
    if (st.dash[0]) out << " stroke-dasharray=\"" << st.dash << "\"";
    out << "/>\n";
    out << "<text x=\"" << num(856.0) << "\" y=\"" << num(ly + 4)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << sources[si].name << "</text>\n";
    ly += 18.0;
  }

  out << "</svg>\n";
}

}  // namespace smokebench
