#include "sledge/query_filter.hpp"

#include <algorithm>
#include <unordered_set>

#include "sledge/error.hpp"
#include "sledge/file_io.hpp"
#include "sledge/parallel.hpp"

namespace sledge {
namespace {

std::string normalize(std::string_view raw) {
  std::string out;
  bool pending_space = false;
  for (char c : raw) {
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
  }
  return out;
}

}  // namespace

std::span<const std::string> default_exclusions() {
  static const std::vector<std::string> words{"gas", "card", "bing", "died", "map", "fall"};
  return words;
}

std::vector<std::string> read_term_list(const std::filesystem::path& path) {
  std::vector<std::string> lines;
  std::string text = read_file(path);
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    lines.emplace_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return lines;
}

namespace {

bool contains_run(const std::vector<std::string>& haystack, const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > haystack.size()) return false;
  return std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end()) != haystack.end();
}

}  // namespace

Lexicon Lexicon::make(std::span<const std::string> terms, std::span<const std::string> exclusions) {
  Lexicon lex;
  for (const auto& e : exclusions) {
    auto n = normalize(e);
    if (!n.empty()) lex.exclusions.insert(std::move(n));
  }
  for (const auto& t : terms) {
    auto n = normalize(t);
    if (!n.empty() && !lex.exclusions.contains(n)) lex.terms.insert(std::move(n));
  }
  return lex;
}

Lexicon load_lexicon(const std::filesystem::path& path, const std::filesystem::path& exclusions_path) {
  auto terms = read_term_list(path);
  std::vector<std::string> exclusions;
  if (!exclusions_path.empty()) exclusions = read_term_list(exclusions_path);
  return Lexicon::make(terms, exclusions);
}

std::vector<Query> parse_queries(std::string_view text) {
  std::vector<Query> out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0) {
      throw FormatError("queries line " + std::to_string(line_no) + ": expected 'id<TAB>text'");
    }
    out.push_back({std::string(line.substr(0, tab)), std::string(line.substr(tab + 1))});
  }
  return out;
}

std::vector<Query> read_queries(const std::filesystem::path& path) { return parse_queries(read_file(path)); }

std::vector<std::string> filter_queries(std::span<const Query> queries, const Lexicon& lexicon,
                                        const Analyzer& analyzer, unsigned threads) {
  if (lexicon.terms.empty()) throw ArgumentError("lexicon has no terms");

  std::unordered_set<std::string> word_stems;
  std::vector<std::vector<std::string>> phrases;
  for (const auto& term : lexicon.terms) {
    auto tokens = tokenize(term);
    if (tokens.size() == 1) {
      for (auto& s : analyzer.stems(term)) word_stems.insert(std::move(s));
    } else if (tokens.size() > 1) {
      phrases.push_back(std::move(tokens));
    }
  }

  std::vector<char> keep(queries.size(), 0);
  parallel_for(
      queries.size(),
      [&](std::size_t i) {
        for (const auto& s : analyzer.stems(queries[i].text)) {
          if (word_stems.contains(s)) {
            keep[i] = 1;
            return;
          }
        }
        if (phrases.empty()) return;
        auto raw = tokenize(queries[i].text);
        for (const auto& p : phrases) {
          if (contains_run(raw, p)) {
            keep[i] = 1;
            return;
          }
        }
      },
      threads == 0 ? default_thread_count() : threads);

  std::vector<std::string> out;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    if (keep[i]) out.push_back(queries[i].id);
  }
  return out;
}

}  // namespace sledge
