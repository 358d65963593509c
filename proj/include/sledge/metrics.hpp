#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sledge/trec.hpp"

namespace sledge {

// Per-topic values plus their arithmetic mean. A topic is evaluated when it
// appears in both the run and the judgments; `flagged` lists topics that
// were skipped or need attention, with the reason.
struct MetricResult {
  std::map<std::string, double, TopicIdLess> per_topic;
  double mean = 0.0;
  std::vector<std::string> flagged;
};

enum class Gain { linear, exponential };

// Documents are ranked the way trec_eval does it: score descending, ties by
// doc_id descending. Unjudged documents count as grade 0.
MetricResult ndcg_at_k(const Run& run, const JudgmentSet& qrels, int k = 10, Gain gain = Gain::linear);
MetricResult precision_at_k(const Run& run, const JudgmentSet& qrels, int k = 5, int min_grade = 1);
MetricResult judged_at_k(const Run& run, const JudgmentSet& qrels, int k = 5);
MetricResult recall_at_k(const Run& run, const JudgmentSet& qrels, int k, int min_grade = 1);

// Textual metric names: ndcg@K, p@K, p_rel@K (grade 2 only), judged@K, recall@K.
struct MetricSpec {
  enum class Kind { ndcg, precision, judged, recall };
  Kind kind = Kind::ndcg;
  int k = 10;
  int min_grade = 1;

  static MetricSpec parse(std::string_view name);
  std::string name() const;
};

MetricResult evaluate(const Run& run, const JudgmentSet& qrels, const MetricSpec& metric);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;  // two-sided
  int df = 0;
  double mean_diff = 0.0;
  bool degenerate = false;  // every difference is zero
};

// Classic paired t-test on a[i] - b[i].
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

struct DeltaRow {
  std::string topic;
  double a = 0.0;
  double b = 0.0;
  double delta = 0.0;
};

// One row per topic evaluated in both runs, delta = a - b.
std::vector<DeltaRow> per_query_deltas(const Run& run_a, const Run& run_b, const JudgmentSet& qrels,
                                       const MetricSpec& metric);
std::string format_deltas(std::span<const DeltaRow> rows, std::string_view metric_name);

struct AgreementReport {
  std::array<std::array<long, 3>, 3> matrix{};  // [grade in A][grade in B]
  long total = 0;
  double agreement = 0.0;
  double a_higher = 0.0;
  double a_lower = 0.0;
  bool empty = true;  // no (topic, doc) pair judged by both
};

AgreementReport confusion_and_agreement(const JudgmentSet& a, const JudgmentSet& b);
std::string format_agreement(const AgreementReport& report);

}  // namespace sledge
