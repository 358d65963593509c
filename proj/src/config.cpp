#include "sledge/config.hpp"

#include <charconv>

#include <fmt/format.h>

#include "sledge/error.hpp"
#include "sledge/file_io.hpp"

namespace sledge {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double to_double(const std::string& key, std::string_view v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ArgumentError(key + ": '" + std::string(v) + "' is not a number");
  }
  return out;
}

long long to_int(const std::string& key, std::string_view v) {
  long long out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ArgumentError(key + ": '" + std::string(v) + "' is not an integer");
  }
  return out;
}

template <typename T>
T wrap(const std::string& key, T (*parse)(std::string_view), std::string_view v) {
  try {
    return parse(v);
  } catch (const Error& e) {
    throw ArgumentError(key + ": " + e.what());
  }
}

FieldSelector parse_fields(std::string_view v) { return FieldSelector::parse(v); }

}  // namespace

ConfigMap parse_config(std::string_view text) {
  ConfigMap out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ArgumentError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ArgumentError("config line " + std::to_string(line_no) + ": empty key");
    out[std::string(key)] = std::string(trim(line.substr(eq + 1)));
  }
  return out;
}

ConfigMap read_config(const std::filesystem::path& path) {
  try {
    return parse_config(read_file(path));
  } catch (const FormatError& e) {
    throw ArgumentError(e.what());
  }
}

ConfigMap preset(std::string_view name) {
  if (name == "run1") {
    return {{"stage1.model", "bm25"},
            {"bm25.k1", "3.9"},
            {"bm25.b", "0.55"},
            {"stage1.query_field", "query"},
            {"stage1.doc_fields", "title+abstract+fulltext"},
            {"stage1.date_min", "2020-01-01"},
            {"rerank.query_field", "question"},
            {"rerank.doc_fields", "title+abstract"},
            {"run.tag", "run1"}};
  }
  if (name == "run2") {
    return {{"stage1.model", "bm25"},
            {"bm25.k1", "0.9"},
            {"bm25.b", "0.4"},
            {"stage1.query_field", "question"},
            {"stage1.doc_fields", "title+abstract"},
            {"stage1.date_min", "none"},
            {"rerank.query_field", "question"},
            {"rerank.doc_fields", "title+abstract"},
            {"run.tag", "run2"}};
  }
  throw ArgumentError("unknown preset '" + std::string(name) + "' (expected run1 or run2)");
}

void overlay(ConfigMap& base, const ConfigMap& top) {
  for (const auto& [k, v] : top) base[k] = v;
}

PipelineConfig resolve_config(const ConfigMap& values) {
  PipelineConfig c;
  for (const auto& [key, v] : values) {
    if (key == "stage1.model") c.stage1.model = wrap(key, parse_model, v);
    else if (key == "stage1.k") c.stage1.k = static_cast<int>(to_int(key, v));
    else if (key == "stage1.query_field") c.stage1.query_field = wrap(key, parse_topic_field, v);
    else if (key == "stage1.doc_fields") c.stage1.doc_fields = wrap(key, parse_fields, v);
    else if (key == "stage1.date_min") {
      if (v.empty() || v == "none") {
        c.stage1.date_filter.min_date.reset();
      } else {
        auto d = parse_iso_date(v);
        if (!d) throw ArgumentError(key + ": '" + v + "' is not a YYYY-MM-DD date");
        c.stage1.date_filter.min_date = *d;
      }
    }
    else if (key == "bm25.k1") c.stage1.bm25.k1 = to_double(key, v);
    else if (key == "bm25.b") c.stage1.bm25.b = to_double(key, v);
    else if (key == "rm3.fb_terms") c.stage1.rm3.fb_terms = static_cast<int>(to_int(key, v));
    else if (key == "rm3.fb_docs") c.stage1.rm3.fb_docs = static_cast<int>(to_int(key, v));
    else if (key == "rm3.orig_weight") c.stage1.rm3.orig_weight = to_double(key, v);
    else if (key == "sdm.w_term") c.stage1.sdm.w_term = to_double(key, v);
    else if (key == "sdm.w_ordered") c.stage1.sdm.w_ordered = to_double(key, v);
    else if (key == "sdm.w_unordered") c.stage1.sdm.w_unordered = to_double(key, v);
    else if (key == "sdm.window") c.stage1.sdm.window = static_cast<int>(to_int(key, v));
    else if (key == "sdm.mu") c.stage1.sdm.mu = to_double(key, v);
    else if (key == "rerank.endpoint") c.endpoint = v;
    else if (key == "rerank.timeout_ms") c.scorer_timeout = std::chrono::milliseconds(to_int(key, v));
    else if (key == "rerank.query_field") c.rerank.query_field = wrap(key, parse_topic_field, v);
    else if (key == "rerank.doc_fields") c.rerank.doc_fields = wrap(key, parse_fields, v);
    else if (key == "rerank.max_passage_tokens") c.rerank.max_passage_tokens = static_cast<int>(to_int(key, v));
    else if (key == "rerank.aggregation") c.rerank.aggregation = wrap(key, parse_aggregation, v);
    else if (key == "rerank.batch_size") {
      auto n = to_int(key, v);
      if (n < 1) throw ArgumentError("rerank.batch_size must be >= 1");
      c.rerank.batch_size = static_cast<std::size_t>(n);
    }
    else if (key == "rerank.retries") c.rerank.retries = static_cast<int>(to_int(key, v));
    else if (key == "analysis.stopwords_path") c.stopwords = v;
    else if (key == "run.tag") c.run_tag = v;
    else if (key == "paths.index") c.index = v;
    else if (key == "paths.topics") c.topics = v;
    else if (key == "paths.corpus") c.corpus = v;
    else if (key == "paths.output") c.output = v;
    else if (key == "threads") c.threads = static_cast<unsigned>(to_int(key, v));
    else throw ArgumentError("unknown config key '" + key + "'");
  }
  if (c.run_tag.empty()) throw ArgumentError("run.tag must not be empty");
  if (c.run_tag.find_first_of(" \t\n") != std::string::npos) throw ArgumentError("run.tag must not contain whitespace");
  if (c.stage1.k < 1) throw ArgumentError("stage1.k must be >= 1");
  if (c.scorer_timeout.count() <= 0) throw ArgumentError("rerank.timeout_ms must be > 0");
  try {
    c.stage1.bm25.validate();
    if (c.stage1.model == RetrievalModel::rm3) c.stage1.rm3.validate();
    if (c.stage1.model == RetrievalModel::sdm) c.stage1.sdm.validate();
    c.rerank.validate();
  } catch (const Error& e) {
    throw ArgumentError(e.what());
  }
  return c;
}

std::string dump_config(const PipelineConfig& c) {
  ConfigMap m;
  m["stage1.model"] = std::string(to_string(c.stage1.model));
  m["stage1.k"] = std::to_string(c.stage1.k);
  m["stage1.query_field"] = std::string(to_string(c.stage1.query_field));
  m["stage1.doc_fields"] = c.stage1.doc_fields.to_string();
  m["stage1.date_min"] = c.stage1.date_filter.min_date ? format_date(*c.stage1.date_filter.min_date) : "none";
  m["bm25.k1"] = fmt::format("{}", c.stage1.bm25.k1);
  m["bm25.b"] = fmt::format("{}", c.stage1.bm25.b);
  m["rm3.fb_terms"] = std::to_string(c.stage1.rm3.fb_terms);
  m["rm3.fb_docs"] = std::to_string(c.stage1.rm3.fb_docs);
  m["rm3.orig_weight"] = fmt::format("{}", c.stage1.rm3.orig_weight);
  m["sdm.w_term"] = fmt::format("{}", c.stage1.sdm.w_term);
  m["sdm.w_ordered"] = fmt::format("{}", c.stage1.sdm.w_ordered);
  m["sdm.w_unordered"] = fmt::format("{}", c.stage1.sdm.w_unordered);
  m["sdm.window"] = std::to_string(c.stage1.sdm.window);
  m["sdm.mu"] = fmt::format("{}", c.stage1.sdm.mu);
  m["rerank.endpoint"] = c.endpoint;
  m["rerank.timeout_ms"] = std::to_string(c.scorer_timeout.count());
  m["rerank.query_field"] = std::string(to_string(c.rerank.query_field));
  m["rerank.doc_fields"] = c.rerank.doc_fields.to_string();
  m["rerank.max_passage_tokens"] = std::to_string(c.rerank.max_passage_tokens);
  m["rerank.aggregation"] = std::string(to_string(c.rerank.aggregation));
  m["rerank.batch_size"] = std::to_string(c.rerank.batch_size);
  m["rerank.retries"] = std::to_string(c.rerank.retries);
  m["analysis.stopwords_path"] = c.stopwords.string();
  m["run.tag"] = c.run_tag;
  m["paths.index"] = c.index.string();
  m["paths.topics"] = c.topics.string();
  m["paths.corpus"] = c.corpus.string();
  m["paths.output"] = c.output.string();
  m["threads"] = std::to_string(c.threads);
  std::string out;
  for (const auto& [k, v] : m) out += k + " = " + v + "\n";
  return out;
}

}  // namespace sledge
