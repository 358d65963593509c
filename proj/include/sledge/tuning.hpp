#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sledge/metrics.hpp"
#include "sledge/pipeline.hpp"

namespace sledge {

// One swept parameter: min, min + step, ... up to max (inclusive).
struct GridAxis {
  std::string name;
  double min = 0.0;
  double max = 0.0;
  double step = 1.0;

  // "min:max:step" or a single value.
  static GridAxis parse(std::string name, std::string_view range);
  std::vector<double> values() const;
};

// Axis names: k1, b (all models); fb_terms, fb_docs, orig_weight (rm3);
// w_term, w_ordered, w_unordered, window, mu (sdm). For sdm without a
// w_term axis, w_term = 1 - w_ordered - w_unordered.
struct GridSpec {
  Stage1Config base;  // model, query field, date filter and fixed parameters
  std::vector<GridAxis> axes;
  MetricSpec metric = MetricSpec::parse("recall@100");

  void validate() const;
  std::size_t cell_count() const;
};

struct GridCell {
  std::vector<double> params;  // one per axis, in axis order
  double value = 0.0;          // mean metric over evaluated topics
  bool valid = true;           // false when the parameter combination is not admissible
};

// rows follow the first axis, columns the second.
struct HeatmapMatrix {
  std::string row_axis;
  std::string col_axis;
  std::vector<double> rows;
  std::vector<double> cols;
  std::vector<double> cells;  // row-major

  double at(std::size_t r, std::size_t c) const { return cells[r * cols.size() + c]; }
};

struct GridResult {
  std::vector<GridCell> cells;  // row-major over the axes
  std::size_t best = 0;
  std::optional<HeatmapMatrix> heatmap;  // two-axis grids only

  const GridCell& best_cell() const { return cells[best]; }
};

// Applies one cell's parameter values on top of the base configuration.
// Throws ArgumentError when the combination is not admissible.
Stage1Config configure_cell(const GridSpec& spec, std::span<const double> params);

// Evaluates every cell; best = highest mean, ties to the lexicographically
// smallest parameter vector. Topics without judgments are ignored.
GridResult grid_search(const InvertedIndex& index, const Analyzer& analyzer, std::span<const Topic> topics,
                       const JudgmentSet& qrels, const GridSpec& spec, unsigned threads = 0);

// Comma-separated grid: header row "k1\b,<col values>", one row per k1
// value, values to 4 decimals.
std::string format_heatmap(const HeatmapMatrix& matrix);
void emit_heatmap(const HeatmapMatrix& matrix, const std::filesystem::path& path);

// Long format for any number of axes: one line per admissible cell.
std::string format_grid_table(const GridSpec& spec, const GridResult& result);

}  // namespace sledge
