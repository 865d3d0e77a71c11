#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smokebench/align.hpp"
#include "smokebench/metrics.hpp"

namespace smokebench {

enum class Shade { Better, Worse, Equal };
enum class Orientation { HigherBetter, LowerBetter };

std::string_view shade_name(Shade s);

struct ShadedCell {
  std::string display;  // rounded value or "--"
  Shade shade = Shade::Equal;
};

// Direction from full-precision comparison; "equal" decided after rounding
// both sides to the display precision. A dash on either side shades equal.
ShadedCell shade_cell(std::optional<double> value, std::optional<double> baseline, Orientation o,
                      int decimals);

// Two-decimal score display, "--" when undefined.
std::string format_score(std::optional<double> score);

// "2 (1.31%)" annotation body; percent rounded to 2 decimals, trailing zeros
// trimmed but at least one decimal kept ("0.0", "3.9", "96.08").
std::string format_count_percent(long count, long total);

struct TableRowInput {
  std::optional<ConfusionCounts> counts;  // absent or zero-universe renders dashes
  std::optional<double> mee;
  long days = 0;
};

struct RenderedRow {
  ModelId model;
  ShadedCell tp, fp, fn, tn, mee;
  std::optional<ConfusionCounts> counts;  // raw, for HTML annotations
  long days = 0;
};

struct RenderedTable {
  std::string title;
  std::vector<RenderedRow> rows;  // baseline last
  bool with_days = false;
  int mee_decimals = 1;
};

// Rows in model order with the baseline appended. The baseline input row is
// mandatory (ReportError otherwise); a model missing from inputs renders as a
// dash row. MEE is the smoke-day value at 1 decimal.
RenderedTable render_city_table(const std::string& city_id, std::span<const ModelId> model_order,
                                const std::map<ModelId, TableRowInput>& inputs);

// Same layout at 2 MEE decimals with a pooled-days column.
RenderedTable render_aggregate_table(std::span<const ModelId> model_order,
                                     const std::map<ModelId, TableRowInput>& inputs);

void write_table_csv(std::ostream& out, const RenderedTable& table);
void write_table_html(std::ostream& out, const RenderedTable& table);

struct EventWindow {
  std::string city_id;
  Date start{};
  Date end{};
  std::vector<Date> included;  // evaluated days inside [start, end]
};

// Maximal runs of high days, runs separated by <= pad_days merged, then padded
// by pad_days on each side and clipped to the evaluated range. Input bundles
// must belong to one city, ordered by date.
std::vector<EventWindow> detect_event_windows(std::span<const CityDayBundle> bundles,
                                              int pad_days);

// Long-form series CSV: timestamp,source,pm25, one row per present (hour,
// source) pair, values in round-trip form.
void write_event_plot_csv(std::ostream& out, const EventWindow& window,
                          std::span<const CityDayBundle> bundles,
                          std::span<const ModelId> model_order);

// 960x480 viewBox; measured solid, baseline dashed, one pattern per model,
// horizontal threshold rule, legend, coordinates at 3 decimals. Days missing
// for a source leave a gap (separate polyline segments).
void write_event_plot_svg(std::ostream& out, const EventWindow& window,
                          std::span<const CityDayBundle> bundles,
                          std::span<const ModelId> model_order, double threshold);

}  // namespace smokebench
