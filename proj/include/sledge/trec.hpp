#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sledge/first_stage.hpp"

namespace sledge {

// Orders all-digit ids numerically ("2" < "10"), everything else lexically.
struct TopicIdLess {
  using is_transparent = void;
  bool operator()(std::string_view a, std::string_view b) const;
};

// ---------------------------------------------------------------------------
// Topics

enum class TopicField { query, question, narrative };

TopicField parse_topic_field(std::string_view name);
std::string_view to_string(TopicField field);

struct Topic {
  std::string id;
  std::string query;
  std::string question;
  std::string narrative;

  const std::string& field(TopicField f) const;
  bool operator==(const Topic&) const = default;
};

// <topics><topic number="1"><query/><question/><narrative/></topic>...</topics>
std::vector<Topic> parse_topics(std::string_view xml);
std::vector<Topic> read_topics(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Relevance judgments

class JudgmentSet {
 public:
  using DocGrades = std::map<std::string, int, std::less<>>;

  // Returns true when an existing grade was replaced.
  bool set(const std::string& topic, const std::string& doc, int grade);
  std::optional<int> grade(std::string_view topic, std::string_view doc) const;
  const DocGrades* topic(std::string_view topic) const;
  std::vector<std::string> topic_ids() const;
  std::size_t size() const noexcept { return size_; }

  JudgmentSet restricted_to(std::span<const std::string> topics) const;

  const std::map<std::string, DocGrades, TopicIdLess>& by_topic() const noexcept { return by_topic_; }

 private:
  std::map<std::string, DocGrades, TopicIdLess> by_topic_;
  std::size_t size_ = 0;
};

// "topic_id iteration doc_id grade" per line, grade in {0,1,2}. A repeated
// (topic, doc) pair keeps the last grade and adds a warning.
JudgmentSet parse_qrels(std::string_view text, std::vector<std::string>* warnings = nullptr);
JudgmentSet read_qrels(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);

// ---------------------------------------------------------------------------
// Runs

struct RunEntry {
  std::string doc_id;
  double score = 0.0;
  int rank = 0;

  bool operator==(const RunEntry&) const = default;
};

struct Run {
  std::string tag;
  std::map<std::string, std::vector<RunEntry>, TopicIdLess> topics;

  bool operator==(const Run&) const = default;
};

Run make_run(std::string tag, const std::map<std::string, std::vector<Candidate>, TopicIdLess>& results);

// "topic_id Q0 doc_id rank score run_tag", ranks renumbered 1..n in stored
// order, scores printed with 6 decimals.
std::string format_run(const Run& run);
void write_run(const Run& run, const std::filesystem::path& path);

Run parse_run(std::string_view text);
Run read_run(const std::filesystem::path& path);

}  // namespace sledge
