#pragma once

#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sledge/analysis.hpp"

namespace sledge {

struct Lexicon {
  std::set<std::string> terms;       // effective terms, exclusions already removed
  std::set<std::string> exclusions;

  // Lowercases, collapses inner whitespace, drops blanks and excluded entries.
  static Lexicon make(std::span<const std::string> terms, std::span<const std::string> exclusions = {});
};

// gas, card, bing, died, map, fall: common words that collide with lexicon entries.
std::span<const std::string> default_exclusions();

// One term per line, raw.
std::vector<std::string> read_term_list(const std::filesystem::path& path);

// One term per line. An empty exclusions path means no exclusions.
Lexicon load_lexicon(const std::filesystem::path& path, const std::filesystem::path& exclusions_path = {});

struct Query {
  std::string id;
  std::string text;
};

// "id<TAB>text" per line (MS MARCO queries layout).
std::vector<Query> parse_queries(std::string_view text);
std::vector<Query> read_queries(const std::filesystem::path& path);

// Single-word terms match on stems of the analyzed query; phrases match as
// contiguous runs of raw lowercase tokens. Returns retained ids in input order.
std::vector<std::string> filter_queries(std::span<const Query> queries, const Lexicon& lexicon,
                                        const Analyzer& analyzer, unsigned threads = 0);

}  // namespace sledge
