#include "sledge/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include "sledge/error.hpp"

namespace sledge {
namespace {

std::vector<const RunEntry*> evaluation_order(const std::vector<RunEntry>& entries) {
  std::vector<const RunEntry*> order;
  order.reserve(entries.size());
  for (const auto& e : entries) order.push_back(&e);
  std::sort(order.begin(), order.end(), [](const RunEntry* a, const RunEntry* b) {
    if (a->score != b->score) return a->score > b->score;
    return a->doc_id > b->doc_id;
  });
  return order;
}

int grade_of(const JudgmentSet::DocGrades& grades, const std::string& doc) {
  auto it = grades.find(doc);
  return it == grades.end() ? 0 : it->second;
}

void check_k(int k) {
  if (k < 1) throw ArgumentError("metric cutoff must be >= 1");
}

// Calls per_topic(ranked entries, grades) for every topic evaluated; the
// callback returns nullopt to exclude a topic (with a reason flagged).
template <typename Fn>
MetricResult evaluate_topics(const Run& run, const JudgmentSet& qrels, Fn&& per_topic) {
  MetricResult result;
  double sum = 0.0;
  for (const auto& [topic, entries] : run.topics) {
    const auto* grades = qrels.topic(topic);
    if (grades == nullptr) {
      result.flagged.push_back(topic + ": no judgments, excluded");
      continue;
    }
    auto value = per_topic(topic, evaluation_order(entries), *grades, result.flagged);
    if (!value) continue;
    result.per_topic[topic] = *value;
    sum += *value;
  }
  if (!result.per_topic.empty()) result.mean = sum / static_cast<double>(result.per_topic.size());
  return result;
}

}  // namespace

MetricResult ndcg_at_k(const Run& run, const JudgmentSet& qrels, int k, Gain gain) {
  check_k(k);
  auto gain_of = [gain](int grade) {
    return gain == Gain::linear ? static_cast<double>(grade) : std::exp2(static_cast<double>(grade)) - 1.0;
  };
  return evaluate_topics(run, qrels, [&](const std::string& topic, const auto& ranked, const auto& grades,
                                         auto& flagged) -> std::optional<double> {
    double dcg = 0.0;
    for (std::size_t i = 0; i < ranked.size() && i < static_cast<std::size_t>(k); ++i) {
      dcg += gain_of(grade_of(grades, ranked[i]->doc_id)) / std::log2(static_cast<double>(i) + 2.0);
    }
    std::vector<int> ideal;
    for (const auto& [doc, g] : grades) {
      if (g > 0) ideal.push_back(g);
    }
    std::sort(ideal.rbegin(), ideal.rend());
    double idcg = 0.0;
    for (std::size_t i = 0; i < ideal.size() && i < static_cast<std::size_t>(k); ++i) {
      idcg += gain_of(ideal[i]) / std::log2(static_cast<double>(i) + 2.0);
    }
    if (idcg == 0.0) {
      flagged.push_back(topic + ": no relevant judgments, nDCG = 0");
      return 0.0;
    }
    return dcg / idcg;
  });
}

MetricResult precision_at_k(const Run& run, const JudgmentSet& qrels, int k, int min_grade) {
  check_k(k);
  if (min_grade != 1 && min_grade != 2) throw ArgumentError("precision min_grade must be 1 or 2");
  return evaluate_topics(run, qrels, [&](const std::string&, const auto& ranked, const auto& grades,
                                         auto&) -> std::optional<double> {
    int hits = 0;
    for (std::size_t i = 0; i < ranked.size() && i < static_cast<std::size_t>(k); ++i) {
      if (grade_of(grades, ranked[i]->doc_id) >= min_grade) ++hits;
    }
    return static_cast<double>(hits) / k;
  });
}

MetricResult judged_at_k(const Run& run, const JudgmentSet& qrels, int k) {
  check_k(k);
  return evaluate_topics(run, qrels, [&](const std::string&, const auto& ranked, const auto& grades,
                                         auto&) -> std::optional<double> {
    int judged = 0;
    for (std::size_t i = 0; i < ranked.size() && i < static_cast<std::size_t>(k); ++i) {
      if (grades.find(ranked[i]->doc_id) != grades.end()) ++judged;
    }
    return static_cast<double>(judged) / k;
  });
}

MetricResult recall_at_k(const Run& run, const JudgmentSet& qrels, int k, int min_grade) {
  check_k(k);
  return evaluate_topics(run, qrels, [&](const std::string& topic, const auto& ranked, const auto& grades,
                                         auto& flagged) -> std::optional<double> {
    long relevant = 0;
    for (const auto& [doc, g] : grades) {
      if (g >= min_grade) ++relevant;
    }
    if (relevant == 0) {
      flagged.push_back(topic + ": no relevant judgments, excluded from recall");
      return std::nullopt;
    }
    long found = 0;
    for (std::size_t i = 0; i < ranked.size() && i < static_cast<std::size_t>(k); ++i) {
      if (grade_of(grades, ranked[i]->doc_id) >= min_grade) ++found;
    }
    return static_cast<double>(found) / static_cast<double>(relevant);
  });
}

MetricSpec MetricSpec::parse(std::string_view name) {
  auto at = name.find('@');
  if (at == std::string_view::npos) throw ArgumentError("metric '" + std::string(name) + "' needs a cutoff, e.g. ndcg@10");
  auto base = name.substr(0, at);
  auto cutoff = name.substr(at + 1);
  MetricSpec spec;
  auto [ptr, ec] = std::from_chars(cutoff.data(), cutoff.data() + cutoff.size(), spec.k);
  if (ec != std::errc{} || ptr != cutoff.data() + cutoff.size() || spec.k < 1) {
    throw ArgumentError("metric '" + std::string(name) + "' has an invalid cutoff");
  }
  if (base == "ndcg") {
    spec.kind = Kind::ndcg;
  } else if (base == "p" || base == "P") {
    spec.kind = Kind::precision;
  } else if (base == "p_rel" || base == "P_rel") {
    spec.kind = Kind::precision;
    spec.min_grade = 2;
  } else if (base == "judged") {
    spec.kind = Kind::judged;
  } else if (base == "recall") {
    spec.kind = Kind::recall;
  } else {
    throw ArgumentError("unknown metric '" + std::string(name) + "'");
  }
  return spec;
}

std::string MetricSpec::name() const {
  switch (kind) {
    case Kind::ndcg: return fmt::format("ndcg@{}", k);
    case Kind::precision: return (min_grade == 2 ? "p_rel@" : "p@") + std::to_string(k);
    case Kind::judged: return fmt::format("judged@{}", k);
    case Kind::recall: return fmt::format("recall@{}", k);
  }
  return {};
}

MetricResult evaluate(const Run& run, const JudgmentSet& qrels, const MetricSpec& metric) {
  switch (metric.kind) {
    case MetricSpec::Kind::ndcg: return ndcg_at_k(run, qrels, metric.k);
    case MetricSpec::Kind::precision: return precision_at_k(run, qrels, metric.k, metric.min_grade);
    case MetricSpec::Kind::judged: return judged_at_k(run, qrels, metric.k);
    case MetricSpec::Kind::recall: return recall_at_k(run, qrels, metric.k, metric.min_grade);
  }
  throw ArgumentError("unknown metric kind");
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ArgumentError("paired t-test needs equal-length samples");
  if (a.size() < 2) throw ArgumentError("paired t-test needs at least two pairs");
  const auto n = static_cast<double>(a.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) mean += a[i] - b[i];
  mean /= n;
  double ss = 0.0;
  bool all_zero = true;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (d != 0.0) all_zero = false;
    ss += (d - mean) * (d - mean);
  }
  TTestResult r;
  r.df = static_cast<int>(a.size()) - 1;
  r.mean_diff = mean;
  if (all_zero) {
    r.degenerate = true;
    return r;
  }
  const double sd = std::sqrt(ss / (n - 1.0));
  if (sd == 0.0) {
    // Constant non-zero difference.
    r.t = mean > 0 ? HUGE_VAL : -HUGE_VAL;
    r.p = 0.0;
    return r;
  }
  r.t = mean / (sd / std::sqrt(n));
  boost::math::students_t dist(static_cast<double>(r.df));
  r.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
  return r;
}

std::vector<DeltaRow> per_query_deltas(const Run& run_a, const Run& run_b, const JudgmentSet& qrels,
                                       const MetricSpec& metric) {
  auto ra = evaluate(run_a, qrels, metric);
  auto rb = evaluate(run_b, qrels, metric);
  std::vector<DeltaRow> rows;
  for (const auto& [topic, va] : ra.per_topic) {
    auto it = rb.per_topic.find(topic);
    if (it == rb.per_topic.end()) continue;
    rows.push_back({topic, va, it->second, va - it->second});
  }
  return rows;
}

std::string format_deltas(std::span<const DeltaRow> rows, std::string_view metric_name) {
  std::string out = fmt::format("topic\t{0}_a\t{0}_b\tdelta\n", metric_name);
  for (const auto& r : rows) out += fmt::format("{}\t{:.4f}\t{:.4f}\t{:.4f}\n", r.topic, r.a, r.b, r.delta);
  return out;
}

AgreementReport confusion_and_agreement(const JudgmentSet& a, const JudgmentSet& b) {
  AgreementReport report;
  long higher = 0;
  long lower = 0;
  for (const auto& [topic, grades_a] : a.by_topic()) {
    const auto* grades_b = b.topic(topic);
    if (grades_b == nullptr) continue;
    for (const auto& [doc, ga] : grades_a) {
      auto it = grades_b->find(doc);
      if (it == grades_b->end()) continue;
      ++report.matrix[static_cast<std::size_t>(ga)][static_cast<std::size_t>(it->second)];
      ++report.total;
      if (ga > it->second) ++higher;
      if (ga < it->second) ++lower;
    }
  }
  report.empty = report.total == 0;
  if (!report.empty) {
    const auto total = static_cast<double>(report.total);
    report.agreement = static_cast<double>(report.matrix[0][0] + report.matrix[1][1] + report.matrix[2][2]) / total;
    report.a_higher = static_cast<double>(higher) / total;
    report.a_lower = static_cast<double>(lower) / total;
  }
  return report;
}

std::string format_agreement(const AgreementReport& report) {
  std::string out = "a\\b\t0\t1\t2\n";
  for (int i = 0; i < 3; ++i) {
    out += fmt::format("{}\t{}\t{}\t{}\n", i, report.matrix[i][0], report.matrix[i][1], report.matrix[i][2]);
  }
  out += fmt::format("pairs\t{}\nagreement\t{:.4f}\na_higher\t{:.4f}\na_lower\t{:.4f}\n", report.total,
                     report.agreement, report.a_higher, report.a_lower);
  return out;
}

}  // namespace sledge
