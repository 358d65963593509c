#include "sledge/tuning.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "sledge/error.hpp"
#include "sledge/file_io.hpp"
#include "sledge/parallel.hpp"

namespace sledge {
namespace {

double parse_number(std::string_view text, const std::string& axis) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ArgumentError("axis " + axis + ": '" + std::string(text) + "' is not a number");
  }
  return v;
}

// Grid values are snapped to 1e-9 so 0.1 * 3 prints and compares as 0.3.
double snap(double v) { return std::round(v * 1e9) / 1e9; }

bool has_axis(const GridSpec& spec, std::string_view name) {
  return std::any_of(spec.axes.begin(), spec.axes.end(), [&](const GridAxis& a) { return a.name == name; });
}

}  // namespace

GridAxis GridAxis::parse(std::string name, std::string_view range) {
  GridAxis axis;
  axis.name = std::move(name);
  auto c1 = range.find(':');
  if (c1 == std::string_view::npos) {
    axis.min = axis.max = parse_number(range, axis.name);
    axis.step = 1.0;
    return axis;
  }
  auto c2 = range.find(':', c1 + 1);
  if (c2 == std::string_view::npos) throw ArgumentError("axis " + axis.name + ": expected min:max:step");
  axis.min = parse_number(range.substr(0, c1), axis.name);
  axis.max = parse_number(range.substr(c1 + 1, c2 - c1 - 1), axis.name);
  axis.step = parse_number(range.substr(c2 + 1), axis.name);
  return axis;
}

std::vector<double> GridAxis::values() const {
  if (!(step > 0.0)) throw ArgumentError("axis " + name + ": step must be > 0");
  if (min > max) throw ArgumentError("axis " + name + ": min must not exceed max");
  const auto count = static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(snap(min + static_cast<double>(i) * step));
  return out;
}

void GridSpec::validate() const {
  if (axes.empty()) throw ArgumentError("grid needs at least one axis");
  for (std::size_t i = 0; i < axes.size(); ++i) {
    axes[i].values();
    for (std::size_t j = 0; j < i; ++j) {
      if (axes[i].name == axes[j].name) throw ArgumentError("axis " + axes[i].name + " given twice");
    }
    static const char* known[] = {"k1", "b", "fb_terms", "fb_docs", "orig_weight", "w_term", "w_ordered",
                                  "w_unordered", "window", "mu"};
    if (std::none_of(std::begin(known), std::end(known), [&](const char* k) { return axes[i].name == k; })) {
      throw ArgumentError("unknown grid axis '" + axes[i].name + "'");
    }
  }
}

std::size_t GridSpec::cell_count() const {
  std::size_t n = 1;
  for (const auto& a : axes) n *= a.values().size();
  return n;
}

Stage1Config configure_cell(const GridSpec& spec, std::span<const double> params) {
  Stage1Config cfg = spec.base;
  for (std::size_t i = 0; i < spec.axes.size(); ++i) {
    const auto& name = spec.axes[i].name;
    const double v = params[i];
    if (name == "k1") cfg.bm25.k1 = v;
    else if (name == "b") cfg.bm25.b = v;
    else if (name == "fb_terms") cfg.rm3.fb_terms = static_cast<int>(std::lround(v));
    else if (name == "fb_docs") cfg.rm3.fb_docs = static_cast<int>(std::lround(v));
    else if (name == "orig_weight") cfg.rm3.orig_weight = v;
    else if (name == "w_term") cfg.sdm.w_term = v;
    else if (name == "w_ordered") cfg.sdm.w_ordered = v;
    else if (name == "w_unordered") cfg.sdm.w_unordered = v;
    else if (name == "window") cfg.sdm.window = static_cast<int>(std::lround(v));
    else if (name == "mu") cfg.sdm.mu = v;
  }
  if (cfg.model == RetrievalModel::sdm && !has_axis(spec, "w_term") &&
      (has_axis(spec, "w_ordered") || has_axis(spec, "w_unordered"))) {
    cfg.sdm.w_term = snap(1.0 - cfg.sdm.w_ordered - cfg.sdm.w_unordered);
  }
  cfg.bm25.validate();
  if (cfg.model == RetrievalModel::rm3) cfg.rm3.validate();
  if (cfg.model == RetrievalModel::sdm) cfg.sdm.validate();
  return cfg;
}

GridResult grid_search(const InvertedIndex& index, const Analyzer& analyzer, std::span<const Topic> topics,
                       const JudgmentSet& qrels, const GridSpec& spec, unsigned threads) {
  spec.validate();

  std::vector<Topic> judged;
  for (const auto& t : topics) {
    const auto* grades = qrels.topic(t.id);
    if (grades == nullptr) continue;
    if (std::any_of(grades->begin(), grades->end(), [](const auto& g) { return g.second >= 1; })) judged.push_back(t);
  }
  if (judged.empty()) throw ArgumentError("grid search needs at least one topic with a relevant judgment");

  std::vector<std::vector<double>> axis_values;
  for (const auto& a : spec.axes) axis_values.push_back(a.values());
  const std::size_t n_cells = spec.cell_count();

  GridResult result;
  result.cells.resize(n_cells);
  parallel_for(
      n_cells,
      [&](std::size_t cell) {
        GridCell& out = result.cells[cell];
        out.params.resize(spec.axes.size());
        std::size_t rest = cell;
        for (std::size_t a = spec.axes.size(); a-- > 0;) {
          out.params[a] = axis_values[a][rest % axis_values[a].size()];
          rest /= axis_values[a].size();
        }
        Stage1Config cfg;
        try {
          cfg = configure_cell(spec, out.params);
        } catch (const ArgumentError&) {
          out.valid = false;
          return;
        }
        cfg.k = spec.metric.k;
        auto run = make_run("tune", run_first_stage(index, analyzer, judged, cfg, nullptr, 1));
        out.value = evaluate(run, qrels, spec.metric).mean;
      },
      threads == 0 ? default_thread_count() : threads);

  bool found = false;
  for (std::size_t i = 0; i < n_cells; ++i) {
    const auto& c = result.cells[i];
    if (!c.valid) continue;
    if (!found || c.value > result.cells[result.best].value ||
        (c.value == result.cells[result.best].value && c.params < result.cells[result.best].params)) {
      result.best = i;
      found = true;
    }
  }
  if (!found) throw ArgumentError("no admissible parameter combination in the grid");

  if (spec.axes.size() == 2) {
    HeatmapMatrix m;
    m.row_axis = spec.axes[0].name;
    m.col_axis = spec.axes[1].name;
    m.rows = axis_values[0];
    m.cols = axis_values[1];
    for (const auto& c : result.cells) m.cells.push_back(c.valid ? c.value : std::nan(""));
    result.heatmap = std::move(m);
  }
  return result;
}

std::string format_heatmap(const HeatmapMatrix& matrix) {
  std::string out = matrix.row_axis + "\\" + matrix.col_axis;
  for (double c : matrix.cols) out += fmt::format(",{}", c);
  out += '\n';
  for (std::size_t r = 0; r < matrix.rows.size(); ++r) {
    out += fmt::format("{}", matrix.rows[r]);
    for (std::size_t c = 0; c < matrix.cols.size(); ++c) {
      const double v = matrix.at(r, c);
      out += std::isnan(v) ? std::string(",") : fmt::format(",{:.4f}", v);
    }
    out += '\n';
  }
  return out;
}

void emit_heatmap(const HeatmapMatrix& matrix, const std::filesystem::path& path) {
  write_file_atomic(path, format_heatmap(matrix));
}

std::string format_grid_table(const GridSpec& spec, const GridResult& result) {
  std::string out;
  for (const auto& a : spec.axes) out += a.name + ",";
  out += spec.metric.name() + "\n";
  for (const auto& c : result.cells) {
    if (!c.valid) continue;
    for (double p : c.params) out += fmt::format("{},", p);
    out += fmt::format("{:.4f}\n", c.value);
  }
  return out;
}

}  // namespace sledge
