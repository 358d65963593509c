#include "sledge/analysis.hpp"

#include <fstream>
#include <sstream>

#include "sledge/error.hpp"

namespace sledge {
namespace detail {
extern const std::string_view kBuiltinStopwords;
}

namespace {

bool is_token_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

}  // namespace

std::vector<Token> tokenize_spans(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_token_byte(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    Token tok;
    tok.begin = i;
    while (i < text.size() && is_token_byte(static_cast<unsigned char>(text[i]))) {
      tok.text.push_back(ascii_lower(text[i]));
      ++i;
    }
    tok.end = i;
    tokens.push_back(std::move(tok));
  }
  return tokens;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  for (auto& tok : tokenize_spans(text)) out.push_back(std::move(tok.text));
  return out;
}

StopwordList::StopwordList(std::span<const std::string> words) : words_(words.begin(), words.end()) {}

StopwordList StopwordList::parse(std::string_view text) {
  std::vector<std::string> words;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto last = line.find_last_not_of(" \t\r");
    std::string word = line.substr(first, last - first + 1);
    for (auto& c : word) c = ascii_lower(c);
    words.push_back(std::move(word));
  }
  return StopwordList(words);
}

StopwordList StopwordList::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read stopword list " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

const StopwordList& StopwordList::builtin() {
  static const StopwordList list = parse(detail::kBuiltinStopwords);
  return list;
}

std::vector<std::string> remove_stopwords(std::span<const std::string> tokens, const StopwordList& stopwords) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (!stopwords.contains(t)) out.push_back(t);
  }
  return out;
}

std::vector<AnalyzedTerm> Analyzer::analyze(std::string_view text) const {
  std::vector<AnalyzedTerm> out;
  auto tokens = tokenize_spans(text);
  for (std::size_t pos = 0; pos < tokens.size(); ++pos) {
    auto& tok = tokens[pos];
    if (stopwords_.contains(tok.text)) continue;
    std::string stem = porter_stem(tok.text);
    out.push_back({std::move(stem), std::move(tok.text), static_cast<std::uint32_t>(pos)});
  }
  return out;
}

std::vector<std::string> Analyzer::stems(std::string_view text) const {
  std::vector<std::string> out;
  for (auto& term : analyze(text)) out.push_back(std::move(term.stem));
  return out;
}

}  // namespace sledge
