#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sledge {

// A token and the byte range it came from in the source text.
struct Token {
  std::string text;
  std::size_t begin = 0;
  std::size_t end = 0;
};

// Maximal runs of ASCII letters/digits, lowercased. Bytes >= 0x80 (UTF-8
// sequences) are kept inside tokens unchanged; every other byte separates.
std::vector<Token> tokenize_spans(std::string_view text);
std::vector<std::string> tokenize(std::string_view text);

class StopwordList {
 public:
  StopwordList() = default;
  explicit StopwordList(std::span<const std::string> words);

  // One word per line; blank lines and surrounding whitespace ignored.
  static StopwordList parse(std::string_view text);
  static StopwordList load(const std::filesystem::path& path);
  // The SMART list shipped in data/stopwords_smart.txt, compiled in.
  static const StopwordList& builtin();

  bool contains(std::string_view word) const { return words_.find(word) != words_.end(); }
  std::size_t size() const noexcept { return words_.size(); }

 private:
  std::set<std::string, std::less<>> words_;
};

std::vector<std::string> remove_stopwords(std::span<const std::string> tokens, const StopwordList& stopwords);

// Porter (1980) stemmer, matching the author's reference C implementation.
// Tokens containing anything other than a-z are returned unchanged.
std::string porter_stem(std::string_view word);

struct AnalyzedTerm {
  std::string stem;
  std::string source_token;
  std::uint32_t position = 0;  // token ordinal in the source, stopwords included

  bool operator==(const AnalyzedTerm&) const = default;
};

// tokenize -> drop stopwords -> stem. Immutable and thread-safe.
class Analyzer {
 public:
  Analyzer() : Analyzer(StopwordList::builtin()) {}
  explicit Analyzer(StopwordList stopwords) : stopwords_(std::move(stopwords)) {}

  std::vector<AnalyzedTerm> analyze(std::string_view text) const;
  std::vector<std::string> stems(std::string_view text) const;

  const StopwordList& stopwords() const noexcept { return stopwords_; }

 private:
  StopwordList stopwords_;
};

}  // namespace sledge
