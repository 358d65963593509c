#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "sledge/config.hpp"
#include "sledge/corpus.hpp"
#include "sledge/error.hpp"
#include "sledge/file_io.hpp"
#include "sledge/index.hpp"
#include "sledge/metrics.hpp"
#include "sledge/pipeline.hpp"
#include "sledge/query_filter.hpp"
#include "sledge/scorer.hpp"
#include "sledge/trec.hpp"
#include "sledge/tuning.hpp"

namespace fs = std::filesystem;
using namespace sledge;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kScorer = 3 };

void warn(const std::string& message) { std::cerr << "warning: " << message << '\n'; }

void warn_all(const std::vector<std::string>& messages) {
  for (const auto& m : messages) warn(m);
}

void emit(const fs::path& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
  } else {
    write_file_atomic(path, text);
  }
}

// Pipeline settings gathered from --config, --preset, --set and the named
// flags, applied in that order.
struct PipelineFlags {
  std::string config_file;
  std::string preset_name;
  std::vector<std::string> sets;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;

  void add(CLI::App* cmd, const std::string& flag, const std::string& key, const std::string& help) {
    options[key] = cmd->add_option(flag, values[key], help + " (" + key + ")");
  }

  void attach(CLI::App* cmd, bool with_rerank, bool with_model_params = true) {
    cmd->add_option("--config", config_file, "key = value settings file")->check(CLI::ExistingFile);
    cmd->add_option("--preset", preset_name, "named pipeline: run1 or run2")->check(CLI::IsMember({"run1", "run2"}));
    cmd->add_option("--set", sets, "override any setting, key=value");
    add(cmd, "--index", "paths.index", "index file");
    add(cmd, "--topics", "paths.topics", "topics XML");
    add(cmd, "--out", "paths.output", "output run file");
    add(cmd, "--stopwords", "analysis.stopwords_path", "stopword list used at indexing time");
    add(cmd, "--model", "stage1.model", "bm25, rm3 or sdm");
    add(cmd, "--k", "stage1.k", "first-stage depth");
    if (with_model_params) {
      add(cmd, "--k1", "bm25.k1", "BM25 k1");
      add(cmd, "--b", "bm25.b", "BM25 b");
      add(cmd, "--fb-terms", "rm3.fb_terms", "RM3 feedback terms");
      add(cmd, "--fb-docs", "rm3.fb_docs", "RM3 feedback documents");
      add(cmd, "--orig-weight", "rm3.orig_weight", "RM3 original query weight");
    }
    add(cmd, "--date-min", "stage1.date_min", "drop documents published before YYYY-MM-DD, or none");
    add(cmd, "--query-field", "stage1.query_field", "topic field for the first stage");
    add(cmd, "--doc-fields", "stage1.doc_fields", "fields the index was built over");
    add(cmd, "--tag", "run.tag", "run tag");
    add(cmd, "--threads", "threads", "worker threads, 0 = all cores");
    if (with_rerank) {
      add(cmd, "--corpus", "paths.corpus", "corpus directory with metadata.csv");
      add(cmd, "--endpoint", "rerank.endpoint", "scorer: echo, exec:<cmd> or unix:<path>");
      add(cmd, "--batch-size", "rerank.batch_size", "passages per scorer batch");
      add(cmd, "--max-passage-tokens", "rerank.max_passage_tokens", "passage length limit");
      add(cmd, "--aggregation", "rerank.aggregation", "max or mean");
      add(cmd, "--rerank-query-field", "rerank.query_field", "topic field for re-ranking");
      add(cmd, "--rerank-doc-fields", "rerank.doc_fields", "document fields for re-ranking");
      add(cmd, "--timeout-ms", "rerank.timeout_ms", "scorer response timeout");
    }
  }

  ConfigMap merged() const {
    ConfigMap m;
    if (!config_file.empty()) overlay(m, read_config(config_file));
    if (!preset_name.empty()) overlay(m, preset(preset_name));
    for (const auto& s : sets) {
      auto eq = s.find('=');
      if (eq == std::string::npos || eq == 0) throw ArgumentError("--set expects key=value, got '" + s + "'");
      m[s.substr(0, eq)] = s.substr(eq + 1);
    }
    for (const auto& [key, opt] : options) {
      if (opt->count() > 0) m[key] = values.at(key);
    }
    return m;
  }
};

Analyzer make_analyzer(const fs::path& stopwords) {
  if (stopwords.empty()) return Analyzer();
  return Analyzer(StopwordList::load(stopwords));
}

void require(const fs::path& path, const char* what) {
  if (path.empty()) throw ArgumentError(std::string("missing ") + what);
}

InvertedIndex load_index(const PipelineConfig& c) {
  require(c.index, "--index");
  auto index = InvertedIndex::load(c.index);
  if (index.fields() != c.stage1.doc_fields) {
    throw ArgumentError("index was built over " + index.fields().to_string() + " but stage1.doc_fields is " +
                        c.stage1.doc_fields.to_string());
  }
  return index;
}

// ---------------------------------------------------------------------------

struct IndexArgs {
  std::string corpus, fields = "all", out, stopwords;
  unsigned threads = 0;
};

int cmd_index(const IndexArgs& a) {
  auto fields = FieldSelector::parse(a.fields);
  auto analyzer = make_analyzer(a.stopwords);
  auto corpus = load_corpus(a.corpus, a.threads);
  warn_all(corpus.warnings);
  InvertedIndex::BuildOptions options;
  options.threads = a.threads;
  auto index = InvertedIndex::build(corpus.documents, fields, analyzer, options);
  index.save(a.out);
  std::cerr << fmt::format("indexed {} documents, {} terms, fields {}\n", index.doc_count(), index.term_count(),
                           fields.to_string());
  return kOk;
}

int cmd_search(const PipelineFlags& flags, const std::string& adhoc_query, bool print_config) {
  auto c = resolve_config(flags.merged());
  if (print_config) {
    std::cout << dump_config(c);
    return kOk;
  }
  auto analyzer = make_analyzer(c.stopwords);
  auto index = load_index(c);
  if (!adhoc_query.empty()) {
    auto hits = first_stage_search(index, analyzer, adhoc_query, c.stage1);
    for (const auto& h : hits) std::cout << fmt::format("{}\t{}\t{:.6f}\n", h.rank, h.doc_id, h.score);
    return kOk;
  }
  require(c.topics, "--topics");
  auto topics = read_topics(c.topics);
  std::vector<std::string> warnings;
  auto results = run_first_stage(index, analyzer, topics, c.stage1, &warnings, c.threads);
  warn_all(warnings);
  emit(c.output, format_run(make_run(c.run_tag, results)));
  return kOk;
}

int cmd_rerank(const PipelineFlags& flags, bool print_config) {
  auto c = resolve_config(flags.merged());
  if (print_config) {
    std::cout << dump_config(c);
    return kOk;
  }
  if (c.endpoint.empty()) throw ArgumentError("missing --endpoint");
  require(c.topics, "--topics");
  require(c.corpus, "--corpus");
  auto analyzer = make_analyzer(c.stopwords);
  auto index = load_index(c);
  auto topics = read_topics(c.topics);
  auto corpus = load_corpus(c.corpus, c.threads);
  warn_all(corpus.warnings);
  DocumentStore store(std::move(corpus.documents));

  std::vector<std::string> warnings;
  auto first = run_first_stage(index, analyzer, topics, c.stage1, &warnings, c.threads);
  warn_all(warnings);
  auto scorer = connect_scorer(c.endpoint, c.scorer_timeout);
  auto results = run_rerank(first, topics, store, c.rerank, *scorer);
  emit(c.output, format_run(make_run(c.run_tag, results)));
  return kOk;
}

// Sweepable parameters in heatmap order: the first two given form rows and columns.
const std::pair<const char*, const char*> kAxisFlags[] = {
    {"k1", "bm25.k1"},           {"b", "bm25.b"},
    {"fb_terms", "rm3.fb_terms"}, {"fb_docs", "rm3.fb_docs"},
    {"orig_weight", "rm3.orig_weight"}, {"w_term", "sdm.w_term"},
    {"w_ordered", "sdm.w_ordered"}, {"w_unordered", "sdm.w_unordered"},
    {"window", "sdm.window"},     {"mu", "sdm.mu"}};

struct TuneArgs {
  std::string qrels, heatmap, table, metric = "recall@100";
  std::vector<std::string> axes;
  std::map<std::string, std::string> ranges;
  std::map<std::string, CLI::Option*> range_options;

  void attach(CLI::App* cmd) {
    for (const auto& [name, key] : kAxisFlags) {
      std::string flag = "--" + std::string(name);
      for (auto& c : flag) c = c == '_' ? '-' : c;
      range_options[name] = cmd->add_option(flag, ranges[name], std::string("min:max:step sweep, or a fixed value for ") + key);
    }
  }
};

int cmd_tune(const PipelineFlags& flags, const TuneArgs& a) {
  auto values = flags.merged();
  std::vector<GridAxis> axes;
  for (const auto& [name, key] : kAxisFlags) {
    if (a.range_options.at(name)->count() == 0) continue;
    const auto& range = a.ranges.at(name);
    if (range.find(':') == std::string::npos) {
      values[key] = range;
    } else {
      axes.push_back(GridAxis::parse(name, range));
    }
  }
  auto c = resolve_config(values);
  auto analyzer = make_analyzer(c.stopwords);
  auto index = load_index(c);
  require(c.topics, "--topics");
  auto topics = read_topics(c.topics);
  std::vector<std::string> warnings;
  auto qrels = read_qrels(a.qrels, &warnings);
  warn_all(warnings);

  GridSpec spec;
  spec.base = c.stage1;
  spec.metric = MetricSpec::parse(a.metric);
  spec.axes = std::move(axes);
  for (const auto& axis : a.axes) {
    auto eq = axis.find('=');
    if (eq == std::string::npos || eq == 0) throw ArgumentError("--axis expects name=min:max:step, got '" + axis + "'");
    spec.axes.push_back(GridAxis::parse(axis.substr(0, eq), std::string_view(axis).substr(eq + 1)));
  }
  auto result = grid_search(index, analyzer, topics, qrels, spec, c.threads);

  if (!a.heatmap.empty()) {
    if (!result.heatmap) throw ArgumentError("--heatmap needs exactly two axes");
    emit_heatmap(*result.heatmap, a.heatmap);
  }
  if (!a.table.empty()) write_file_atomic(a.table, format_grid_table(spec, result));

  const auto& best = result.best_cell();
  std::string line = "best";
  for (std::size_t i = 0; i < spec.axes.size(); ++i) line += fmt::format(" {}={}", spec.axes[i].name, best.params[i]);
  line += fmt::format(" {}={:.4f}\n", spec.metric.name(), best.value);
  std::cout << line;
  return kOk;
}

struct EvalArgs {
  std::string qrels, baseline, deltas, out;
  std::vector<std::string> runs;
  std::vector<std::string> metrics{"ndcg@10", "p@5", "p_rel@5", "judged@5"};
};

std::string run_label(const Run& run, const std::string& path) {
  return run.tag.empty() ? fs::path(path).filename().string() : run.tag;
}

int cmd_eval(const EvalArgs& a) {
  std::vector<std::string> warnings;
  auto qrels = read_qrels(a.qrels, &warnings);
  warn_all(warnings);
  std::vector<MetricSpec> metrics;
  for (const auto& m : a.metrics) metrics.push_back(MetricSpec::parse(m));
  if (!a.deltas.empty() && (a.baseline.empty() || a.runs.size() != 1)) {
    throw ArgumentError("--deltas needs --baseline and exactly one --run");
  }

  std::vector<Run> runs;
  for (const auto& r : a.runs) runs.push_back(read_run(r));

  std::string out = "run";
  for (const auto& m : metrics) out += "\t" + m.name();
  out += '\n';
  for (std::size_t i = 0; i < runs.size(); ++i) {
    out += run_label(runs[i], a.runs[i]);
    for (const auto& m : metrics) {
      auto result = evaluate(runs[i], qrels, m);
      for (const auto& f : result.flagged) warn(fmt::format("{} {}: {}", run_label(runs[i], a.runs[i]), m.name(), f));
      out += fmt::format("\t{:.4f}", result.mean);
    }
    out += '\n';
  }

  if (!a.baseline.empty()) {
    auto base = read_run(a.baseline);
    out += "\nrun\tbaseline\tmetric\tn\tmean_diff\tt\tp\n";
    for (std::size_t i = 0; i < runs.size(); ++i) {
      for (const auto& m : metrics) {
        auto rows = per_query_deltas(runs[i], base, qrels, m);
        std::vector<double> va, vb;
        for (const auto& r : rows) {
          va.push_back(r.a);
          vb.push_back(r.b);
        }
        std::string stats;
        if (rows.size() < 2) {
          stats = "\tn/a\tn/a\tn/a";
        } else {
          auto t = paired_t_test(va, vb);
          stats = t.degenerate ? fmt::format("\t{:.4f}\tdegenerate\tn/a", t.mean_diff)
                               : fmt::format("\t{:.4f}\t{:.4f}\t{:.4f}", t.mean_diff, t.t, t.p);
        }
        out += fmt::format("{}\t{}\t{}\t{}{}\n", run_label(runs[i], a.runs[i]), run_label(base, a.baseline), m.name(),
                           rows.size(), stats);
      }
    }
    if (!a.deltas.empty()) {
      auto rows = per_query_deltas(runs[0], base, qrels, metrics.front());
      write_file_atomic(a.deltas, format_deltas(rows, metrics.front().name()));
    }
  }
  emit(a.out, out);
  return kOk;
}

int cmd_agree(const std::string& a_path, const std::string& b_path, const std::string& out) {
  std::vector<std::string> warnings;
  auto a = read_qrels(a_path, &warnings);
  auto b = read_qrels(b_path, &warnings);
  warn_all(warnings);
  auto report = confusion_and_agreement(a, b);
  emit(out, format_agreement(report));
  if (report.empty) {
    std::cerr << "error: the two label sets share no judged (topic, doc) pairs\n";
    return kData;
  }
  return kOk;
}

int cmd_filter_queries(const std::string& queries, const std::string& lexicon, const std::string& exclusions,
                       const std::string& out, const std::string& stopwords, unsigned threads) {
  auto lex = exclusions.empty() ? Lexicon::make(read_term_list(lexicon), default_exclusions())
                                : load_lexicon(lexicon, exclusions);
  auto qs = read_queries(queries);
  auto kept = filter_queries(qs, lex, make_analyzer(stopwords), threads);
  std::string text;
  for (const auto& id : kept) text += id + '\n';
  emit(out, text);
  std::cerr << fmt::format("kept {} of {} queries\n", kept.size(), qs.size());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage literature search: lexical retrieval, neural re-ranking, evaluation"};
  app.require_subcommand(1);

  IndexArgs index_args;
  auto* index_cmd = app.add_subcommand("index", "build an inverted index from a corpus directory");
  index_cmd->add_option("--corpus", index_args.corpus, "directory holding metadata.csv")->required()->check(CLI::ExistingDirectory);
  index_cmd->add_option("--fields", index_args.fields, "title, abstract, fulltext joined with '+', or all");
  index_cmd->add_option("--out", index_args.out, "index file")->required();
  index_cmd->add_option("--stopwords", index_args.stopwords, "stopword list, default built-in SMART list");
  index_cmd->add_option("--threads", index_args.threads, "worker threads, 0 = all cores");

  PipelineFlags search_flags;
  std::string adhoc_query;
  bool print_config = false;
  auto* search_cmd = app.add_subcommand("search", "first-stage retrieval into a run file");
  search_flags.attach(search_cmd, false);
  search_cmd->add_option("--query", adhoc_query, "search one ad-hoc query and print the ranking");
  search_cmd->add_flag("--print-config", print_config, "print the resolved settings and exit");

  PipelineFlags rerank_flags;
  auto* rerank_cmd = app.add_subcommand("rerank", "first-stage retrieval followed by neural re-ranking");
  rerank_flags.attach(rerank_cmd, true);
  rerank_cmd->add_flag("--print-config", print_config, "print the resolved settings and exit");

  PipelineFlags tune_flags;
  TuneArgs tune_args;
  auto* tune_cmd = app.add_subcommand("tune", "grid search over first-stage parameters");
  tune_flags.attach(tune_cmd, false, false);
  tune_args.attach(tune_cmd);
  tune_cmd->add_option("--qrels", tune_args.qrels, "relevance judgments")->required()->check(CLI::ExistingFile);
  tune_cmd->add_option("--axis", tune_args.axes, "extra axis as name=min:max:step");
  tune_cmd->add_option("--metric", tune_args.metric, "metric to maximize");
  tune_cmd->add_option("--heatmap-out,--heatmap", tune_args.heatmap, "write the two-axis surface as CSV");
  tune_cmd->add_option("--table", tune_args.table, "write every cell as CSV");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "score run files against judgments");
  eval_cmd->add_option("--qrels", eval_args.qrels, "relevance judgments")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--run", eval_args.runs, "run file (repeatable)")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--metric", eval_args.metrics, "ndcg@K, p@K, p_rel@K, judged@K, recall@K (repeatable)");
  eval_cmd->add_option("--baseline", eval_args.baseline, "paired t-tests against this run")->check(CLI::ExistingFile);
  eval_cmd->add_option("--deltas", eval_args.deltas, "per-topic differences for the first metric");
  eval_cmd->add_option("--out", eval_args.out, "write the table here instead of stdout");

  std::string agree_a, agree_b, agree_out;
  auto* agree_cmd = app.add_subcommand("agree", "confusion matrix between two judgment sets");
  agree_cmd->add_option("--a", agree_a, "first qrels")->required()->check(CLI::ExistingFile);
  agree_cmd->add_option("--b", agree_b, "second qrels")->required()->check(CLI::ExistingFile);
  agree_cmd->add_option("--out", agree_out, "write the report here instead of stdout");

  std::string fq_queries, fq_lexicon, fq_exclusions, fq_out, fq_stopwords;
  unsigned fq_threads = 0;
  auto* fq_cmd = app.add_subcommand("filter-queries", "keep queries mentioning a lexicon term");
  fq_cmd->add_option("--queries", fq_queries, "id<TAB>text per line")->required()->check(CLI::ExistingFile);
  fq_cmd->add_option("--lexicon", fq_lexicon, "one term per line")->required()->check(CLI::ExistingFile);
  fq_cmd->add_option("--exclusions", fq_exclusions, "terms to ignore, default gas card bing died map fall")
      ->check(CLI::ExistingFile);
  fq_cmd->add_option("--out", fq_out, "retained ids, one per line");
  fq_cmd->add_option("--stopwords", fq_stopwords, "stopword list, default built-in SMART list");
  fq_cmd->add_option("--threads", fq_threads, "worker threads, 0 = all cores");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (*index_cmd) return cmd_index(index_args);
    if (*search_cmd) return cmd_search(search_flags, adhoc_query, print_config);
    if (*rerank_cmd) return cmd_rerank(rerank_flags, print_config);
    if (*tune_cmd) return cmd_tune(tune_flags, tune_args);
    if (*eval_cmd) return cmd_eval(eval_args);
    if (*agree_cmd) return cmd_agree(agree_a, agree_b, agree_out);
    if (*fq_cmd) return cmd_filter_queries(fq_queries, fq_lexicon, fq_exclusions, fq_out, fq_stopwords, fq_threads);
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ScorerError& e) {
    std::cerr << "error: scorer: " << e.what() << '\n';
    return kScorer;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}
