#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>

#include "sledge/pipeline.hpp"
#include "sledge/rerank.hpp"

namespace sledge {

// Flat key -> value settings, e.g. "bm25.k1" -> "3.9".
using ConfigMap = std::map<std::string, std::string, std::less<>>;

// "key = value" lines; '#' starts a comment line; blank lines ignored.
ConfigMap parse_config(std::string_view text);
ConfigMap read_config(const std::filesystem::path& path);

// Named pipelines: "run1" (tuned BM25 over full text, date cutoff) and
// "run2" (default BM25 over title+abstract with the question field).
ConfigMap preset(std::string_view name);

// Entries of `top` replace those of `base`.
void overlay(ConfigMap& base, const ConfigMap& top);

struct PipelineConfig {
  Stage1Config stage1;
  RerankConfig rerank;
  std::string endpoint;
  std::chrono::milliseconds scorer_timeout{60000};
  std::string run_tag = "sledge";
  std::filesystem::path index;
  std::filesystem::path topics;
  std::filesystem::path corpus;
  std::filesystem::path output;
  std::filesystem::path stopwords;  // empty: built-in list
  unsigned threads = 0;
};

// Built-in defaults overlaid with `values`. Unknown keys and malformed
// values throw ArgumentError.
PipelineConfig resolve_config(const ConfigMap& values);

// Canonical "key = value" dump of every setting, sorted by key.
std::string dump_config(const PipelineConfig& config);

}  // namespace sledge
