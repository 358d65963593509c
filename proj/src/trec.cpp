#include "sledge/trec.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <fmt/format.h>

#include "sledge/error.hpp"
#include "sledge/file_io.hpp"

namespace sledge {
namespace {

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::string trim_copy(std::string_view s) {
  auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    fn(text.substr(start, end - start), ++line_no);
    start = end + 1;
  }
}

}  // namespace

bool TopicIdLess::operator()(std::string_view a, std::string_view b) const {
  if (all_digits(a) && all_digits(b)) {
    auto strip = [](std::string_view s) {
      auto nz = s.find_first_not_of('0');
      return nz == std::string_view::npos ? std::string_view("0") : s.substr(nz);
    };
    auto sa = strip(a);
    auto sb = strip(b);
    if (sa.size() != sb.size()) return sa.size() < sb.size();
    if (sa != sb) return sa < sb;
  }
  return a < b;
}

// ---------------------------------------------------------------------------
// Topics

TopicField parse_topic_field(std::string_view name) {
  if (name == "query") return TopicField::query;
  if (name == "question") return TopicField::question;
  if (name == "narrative") return TopicField::narrative;
  throw ArgumentError("unknown topic field '" + std::string(name) + "' (expected query, question or narrative)");
}

std::string_view to_string(TopicField field) {
  switch (field) {
    case TopicField::query: return "query";
    case TopicField::question: return "question";
    case TopicField::narrative: return "narrative";
  }
  return "query";
}

const std::string& Topic::field(TopicField f) const {
  switch (f) {
    case TopicField::query: return query;
    case TopicField::question: return question;
    case TopicField::narrative: return narrative;
  }
  return query;
}

std::vector<Topic> parse_topics(std::string_view xml) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in{std::string(xml)};
    pt::read_xml(in, tree, pt::xml_parser::trim_whitespace);
  } catch (const pt::xml_parser_error& e) {
    throw FormatError(std::string("topics file is not well-formed XML: ") + e.what());
  }
  auto root = tree.get_child_optional("topics");
  if (!root) throw FormatError("topics file has no <topics> root element");

  std::vector<Topic> topics;
  std::set<std::string> seen;
  for (const auto& [name, node] : *root) {
    if (name != "topic") continue;
    Topic t;
    t.id = trim_copy(node.get<std::string>("<xmlattr>.number", ""));
    if (t.id.empty()) throw FormatError("topic element without a number attribute");
    if (!seen.insert(t.id).second) throw FormatError("duplicate topic number " + t.id);
    t.query = trim_copy(node.get<std::string>("query", ""));
    t.question = trim_copy(node.get<std::string>("question", ""));
    t.narrative = trim_copy(node.get<std::string>("narrative", ""));
    topics.push_back(std::move(t));
  }
  std::sort(topics.begin(), topics.end(), [](const Topic& a, const Topic& b) { return TopicIdLess{}(a.id, b.id); });
  return topics;
}

std::vector<Topic> read_topics(const std::filesystem::path& path) { return parse_topics(read_file(path)); }

// ---------------------------------------------------------------------------
// Judgments

bool JudgmentSet::set(const std::string& topic, const std::string& doc, int grade) {
  if (grade < 0 || grade > 2) throw ArgumentError("relevance grade must be 0, 1 or 2");
  auto& docs = by_topic_[topic];
  auto [it, inserted] = docs.insert_or_assign(doc, grade);
  if (inserted) ++size_;
  return !inserted;
}

std::optional<int> JudgmentSet::grade(std::string_view topic, std::string_view doc) const {
  auto t = by_topic_.find(topic);
  if (t == by_topic_.end()) return std::nullopt;
  auto d = t->second.find(doc);
  if (d == t->second.end()) return std::nullopt;
  return d->second;
}

const JudgmentSet::DocGrades* JudgmentSet::topic(std::string_view topic) const {
  auto t = by_topic_.find(topic);
  return t == by_topic_.end() ? nullptr : &t->second;
}

std::vector<std::string> JudgmentSet::topic_ids() const {
  std::vector<std::string> ids;
  for (const auto& [id, _] : by_topic_) ids.push_back(id);
  return ids;
}

JudgmentSet JudgmentSet::restricted_to(std::span<const std::string> topics) const {
  JudgmentSet out;
  for (const auto& id : topics) {
    auto t = by_topic_.find(id);
    if (t == by_topic_.end()) continue;
    out.by_topic_.emplace(t->first, t->second);
    out.size_ += t->second.size();
  }
  return out;
}

JudgmentSet parse_qrels(std::string_view text, std::vector<std::string>* warnings) {
  JudgmentSet qrels;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    auto fields = split_ws(line);
    if (fields.empty()) return;
    if (fields.size() != 4) {
      throw FormatError(fmt::format("qrels line {}: expected 4 fields, found {}", line_no, fields.size()));
    }
    int grade = 0;
    auto g = fields[3];
    auto [ptr, ec] = std::from_chars(g.data(), g.data() + g.size(), grade);
    if (ec != std::errc{} || ptr != g.data() + g.size() || grade < 0 || grade > 2) {
      throw FormatError(fmt::format("qrels line {}: grade '{}' is not 0, 1 or 2", line_no, g));
    }
    std::string topic(fields[0]);
    std::string doc(fields[2]);
    if (qrels.set(topic, doc, grade) && warnings != nullptr) {
      warnings->push_back(fmt::format("qrels line {}: duplicate judgment for ({}, {}), keeping last", line_no, topic, doc));
    }
  });
  return qrels;
}

JudgmentSet read_qrels(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  return parse_qrels(read_file(path), warnings);
}

// ---------------------------------------------------------------------------
// Runs

Run make_run(std::string tag, const std::map<std::string, std::vector<Candidate>, TopicIdLess>& results) {
  Run run;
  run.tag = std::move(tag);
  for (const auto& [topic, list] : results) {
    auto& entries = run.topics[topic];
    for (const auto& c : list) entries.push_back({c.doc_id, c.score, c.rank});
  }
  return run;
}

std::string format_run(const Run& run) {
  if (run.tag.empty() || run.tag.find_first_of(" \t\n") != std::string::npos) {
    throw ArgumentError("run tag must be non-empty and contain no whitespace");
  }
  std::string out;
  for (const auto& [topic, entries] : run.topics) {
    int rank = 0;
    for (const auto& e : entries) {
      out += fmt::format("{} Q0 {} {} {:.6f} {}\n", topic, e.doc_id, ++rank, e.score, run.tag);
    }
  }
  return out;
}

void write_run(const Run& run, const std::filesystem::path& path) { write_file_atomic(path, format_run(run)); }

Run parse_run(std::string_view text) {
  Run run;
  std::map<std::string, std::set<std::string, std::less<>>, TopicIdLess> seen;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    auto fields = split_ws(line);
    if (fields.empty()) return;
    if (fields.size() != 6) {
      throw FormatError(fmt::format("run line {}: expected 6 fields, found {}", line_no, fields.size()));
    }
    RunEntry e;
    e.doc_id = std::string(fields[2]);
    auto r = fields[3];
    auto [rp, rec] = std::from_chars(r.data(), r.data() + r.size(), e.rank);
    if (rec != std::errc{} || rp != r.data() + r.size()) {
      throw FormatError(fmt::format("run line {}: rank '{}' is not an integer", line_no, r));
    }
    auto s = fields[4];
    auto [sp, sec] = std::from_chars(s.data(), s.data() + s.size(), e.score);
    if (sec != std::errc{} || sp != s.data() + s.size()) {
      throw FormatError(fmt::format("run line {}: score '{}' is not a number", line_no, s));
    }
    std::string topic(fields[0]);
    if (!seen[topic].insert(e.doc_id).second) {
      throw FormatError(fmt::format("run line {}: document {} listed twice for topic {}", line_no, e.doc_id, topic));
    }
    if (run.tag.empty()) run.tag = std::string(fields[5]);
    run.topics[topic].push_back(std::move(e));
  });
  return run;
}

Run read_run(const std::filesystem::path& path) { return parse_run(read_file(path)); }

}  // namespace sledge
