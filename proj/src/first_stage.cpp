#include "sledge/first_stage.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "sledge/error.hpp"

namespace sledge {

void Bm25Params::validate() const {
  if (!(k1 >= 0.0) || !std::isfinite(k1)) throw ArgumentError("bm25.k1 must be >= 0");
  if (!(b >= 0.0 && b <= 1.0)) throw ArgumentError("bm25.b must lie in [0, 1]");
}

void Rm3Params::validate() const {
  if (fb_terms < 1 || fb_terms > 20) throw ArgumentError("rm3.fb_terms must lie in [1, 20]");
  if (fb_docs < 1 || fb_docs > 20) throw ArgumentError("rm3.fb_docs must lie in [1, 20]");
  if (!(orig_weight >= 0.0 && orig_weight <= 1.0)) throw ArgumentError("rm3.orig_weight must lie in [0, 1]");
}

void SdmParams::validate() const {
  if (!(w_term >= 0.0) || !(w_ordered >= 0.0) || !(w_unordered >= 0.0)) {
    throw ArgumentError("sdm weights must be non-negative");
  }
  if (std::abs(w_term + w_ordered + w_unordered - 1.0) > 1e-9) throw ArgumentError("sdm weights must sum to 1");
  if (window < 2) throw ArgumentError("sdm.window must be >= 2");
  if (!(mu > 0.0)) throw ArgumentError("sdm.mu must be > 0");
}

namespace {

void check_depth(int k) {
  if (k <= 0) throw ArgumentError("retrieval depth k must be >= 1, got " + std::to_string(k));
}

// Dense accumulator over document ordinals; only touched documents are
// candidates.
class Accumulator {
 public:
  explicit Accumulator(std::size_t n) : scores_(n, 0.0), touched_(n, 0) {}

  void add(DocOrd ord, double value) {
    if (!touched_[ord]) {
      touched_[ord] = 1;
      order_.push_back(ord);
    }
    scores_[ord] += value;
  }

  void touch(DocOrd ord) { add(ord, 0.0); }

  double score(DocOrd ord) const { return scores_[ord]; }
  std::vector<DocOrd>& touched() { return order_; }

 private:
  std::vector<double> scores_;
  std::vector<char> touched_;
  std::vector<DocOrd> order_;
};

// Top k by score, ties by doc ordinal (= doc_id order).
template <typename ScoreFn>
std::vector<Candidate> top_k(const InvertedIndex& index, std::vector<DocOrd> ords, ScoreFn&& score_of, int k,
                             const DateFilter& filter) {
  std::vector<std::pair<double, DocOrd>> scored;
  scored.reserve(ords.size());
  for (DocOrd ord : ords) {
    if (!filter.admits(index.doc(ord).publish_date)) continue;
    scored.emplace_back(score_of(ord), ord);
  }
  auto better = [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  };
  const std::size_t keep = std::min<std::size_t>(scored.size(), static_cast<std::size_t>(k));
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end(), better);
  std::vector<Candidate> out;
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) {
    out.push_back({index.doc(scored[i].second).doc_id, scored[i].first, static_cast<int>(i + 1)});
  }
  return out;
}

QueryModel counts_model(const Analyzer& analyzer, std::string_view query) {
  std::map<std::string, double> counts;
  for (auto& stem : analyzer.stems(query)) counts[stem] += 1.0;
  if (counts.empty()) throw EmptyQueryError("query has no terms after analysis: '" + std::string(query) + "'");
  QueryModel model;
  for (auto& [term, n] : counts) model.push_back({term, n});
  return model;
}

}  // namespace

QueryModel query_model(const Analyzer& analyzer, std::string_view query) {
  auto model = counts_model(analyzer, query);
  double total = 0.0;
  for (const auto& t : model) total += t.weight;
  for (auto& t : model) t.weight /= total;
  return model;
}

std::vector<Candidate> bm25_search(const InvertedIndex& index, const QueryModel& query, const Bm25Params& params,
                                   int k, const DateFilter& filter) {
  check_depth(k);
  params.validate();
  if (query.empty()) throw EmptyQueryError("query has no terms");

  const double n_docs = index.doc_count();
  const double avgdl = index.avg_doc_len();
  Accumulator acc(index.doc_count());
  for (const auto& [term, weight] : query) {
    auto list = index.lookup(term);
    if (list.empty() || weight == 0.0) continue;
    const double df = static_cast<double>(list.size());
    const double idf = std::log(1.0 + (n_docs - df + 0.5) / (df + 0.5));
    for (auto p : list) {
      const double tf = p.tf;
      // avgdl is 0 only when every document is empty, in which case no postings exist.
      const double norm = params.k1 * (1.0 - params.b + params.b * index.doc_len(p.doc_ord) / avgdl);
      acc.add(p.doc_ord, weight * idf * tf * (params.k1 + 1.0) / (tf + norm));
    }
  }
  return top_k(index, std::move(acc.touched()), [&](DocOrd d) { return acc.score(d); }, k, filter);
}

std::vector<Candidate> bm25_search(const InvertedIndex& index, const Analyzer& analyzer, std::string_view query,
                                   const Bm25Params& params, int k, const DateFilter& filter) {
  check_depth(k);
  return bm25_search(index, counts_model(analyzer, query), params, k, filter);
}

Rm3Expansion rm3_expand(const InvertedIndex& index, const Analyzer& analyzer, std::string_view query,
                        const Bm25Params& base, const Rm3Params& rm3, const DateFilter& filter) {
  rm3.validate();
  Rm3Expansion out;
  out.model = query_model(analyzer, query);

  auto feedback = bm25_search(index, counts_model(analyzer, query), base, rm3.fb_docs, filter);
  double total_score = 0.0;
  for (const auto& c : feedback) total_score += c.score;
  if (feedback.empty() || !(total_score > 0.0)) {
    out.fallback = true;
    return out;
  }
  if (rm3.orig_weight == 1.0) return out;

  // p(w|R) = sum_d p(w|d) * score(d) / sum score
  std::map<TermId, double> relevance;
  for (const auto& c : feedback) {
    const DocOrd ord = *index.ord_of(c.doc_id);
    const double len = index.doc_len(ord);
    const double doc_weight = c.score / total_score;
    for (const auto& tc : index.doc_terms(ord)) relevance[tc.term] += tc.tf / len * doc_weight;
  }
  std::vector<std::pair<TermId, double>> ranked(relevance.begin(), relevance.end());
  std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return index.term(a.first) < index.term(b.first);
  });
  ranked.resize(std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(rm3.fb_terms)));
  double kept_mass = 0.0;
  for (const auto& r : ranked) kept_mass += r.second;

  std::map<std::string, double> mixed;
  for (const auto& t : out.model) mixed[t.term] += rm3.orig_weight * t.weight;
  for (const auto& [term, p] : ranked) mixed[index.term(term)] += (1.0 - rm3.orig_weight) * p / kept_mass;

  out.model.clear();
  for (auto& [term, w] : mixed) {
    if (w > 0.0) out.model.push_back({term, w});
  }
  return out;
}

std::vector<Candidate> rm3_search(const InvertedIndex& index, const Analyzer& analyzer, std::string_view query,
                                  const Bm25Params& base, const Rm3Params& rm3, int k, const DateFilter& filter) {
  check_depth(k);
  auto expansion = rm3_expand(index, analyzer, query, base, rm3, filter);
  return bm25_search(index, expansion.model, base, k, filter);
}

namespace {

struct QueryTerm {
  std::string stem;
  std::optional<TermId> id;
};

std::vector<QueryTerm> analyze_query_sequence(const InvertedIndex& index, const Analyzer& analyzer,
                                              std::string_view query) {
  std::vector<QueryTerm> seq;
  for (auto& stem : analyzer.stems(query)) {
    auto id = index.term_id(stem);
    seq.push_back({std::move(stem), id});
  }
  if (seq.empty()) throw EmptyQueryError("query has no terms after analysis: '" + std::string(query) + "'");
  return seq;
}

// Per-document occurrence counts of a two-term proximity feature.
struct WindowCounts {
  std::vector<std::pair<DocOrd, double>> per_doc;  // sorted by ord, count > 0
  double collection = 0.0;

  double count(DocOrd ord) const {
    auto it = std::lower_bound(per_doc.begin(), per_doc.end(), ord,
                               [](const auto& e, DocOrd o) { return e.first < o; });
    return (it != per_doc.end() && it->first == ord) ? it->second : 0.0;
  }
};

// ordered: b immediately follows a. unordered: a and b at distinct positions
// spanning at most `window` positions, either order.
WindowCounts count_pair(const InvertedIndex& index, TermId a, TermId b, bool ordered, int window) {
  WindowCounts out;
  auto la = index.postings(a);
  auto lb = index.postings(b);
  std::size_t i = 0, j = 0;
  while (i < la.size() && j < lb.size()) {
    auto pa = la[i];
    auto pb = lb[j];
    if (pa.doc_ord < pb.doc_ord) {
      ++i;
    } else if (pb.doc_ord < pa.doc_ord) {
      ++j;
    } else {
      double n = 0;
      for (auto x : pa.positions) {
        for (auto y : pb.positions) {
          if (ordered) {
            if (y == x + 1) ++n;
          } else if (x != y) {
            const auto span = (x > y ? x - y : y - x) + 1;
            if (span <= static_cast<std::uint32_t>(window)) ++n;
          }
        }
      }
      if (n > 0) {
        out.per_doc.emplace_back(pa.doc_ord, n);
        out.collection += n;
      }
      ++i;
      ++j;
    }
  }
  return out;
}

double dirichlet(double tf, double collection_prob, double doc_len, double mu) {
  return std::log((tf + mu * collection_prob) / (doc_len + mu));
}

}  // namespace

std::vector<Candidate> ql_search(const InvertedIndex& index, const Analyzer& analyzer, std::string_view query,
                                 double mu, int k, const DateFilter& filter) {
  SdmParams params;
  params.w_term = 1.0;
  params.w_ordered = 0.0;
  params.w_unordered = 0.0;
  params.mu = mu;
  return sdm_search(index, analyzer, query, params, k, filter);
}

std::vector<Candidate> sdm_search(const InvertedIndex& index, const Analyzer& analyzer, std::string_view query,
                                  const SdmParams& params, int k, const DateFilter& filter) {
  check_depth(k);
  params.validate();
  auto seq = analyze_query_sequence(index, analyzer, query);
  const bool needs_pairs = seq.size() > 1 && (params.w_ordered > 0.0 || params.w_unordered > 0.0);
  if (needs_pairs && !index.has_positions()) {
    throw ArgumentError("sequential dependence scoring needs an index built with positions");
  }

  const double collection_len = static_cast<double>(index.total_terms());
  Accumulator candidates(index.doc_count());
  for (const auto& qt : seq) {
    if (!qt.id) continue;
    for (auto p : index.postings(*qt.id)) candidates.touch(p.doc_ord);
  }

  struct Feature {
    double weight;
    double collection_prob;
    WindowCounts counts;
  };
  std::vector<Feature> features;
  for (const auto& qt : seq) {
    // Terms absent from the collection contribute nothing to any document.
    if (!qt.id || params.w_term == 0.0) continue;
    WindowCounts wc;
    for (auto p : index.postings(*qt.id)) wc.per_doc.emplace_back(p.doc_ord, p.tf);
    wc.collection = static_cast<double>(index.collection_frequency(*qt.id));
    features.push_back({params.w_term, wc.collection / collection_len, std::move(wc)});
  }
  for (std::size_t i = 0; needs_pairs && i + 1 < seq.size(); ++i) {
    if (!seq[i].id || !seq[i + 1].id) continue;
    if (params.w_ordered > 0.0) {
      auto wc = count_pair(index, *seq[i].id, *seq[i + 1].id, true, params.window);
      if (wc.collection > 0) features.push_back({params.w_ordered, wc.collection / collection_len, std::move(wc)});
    }
    if (params.w_unordered > 0.0) {
      auto wc = count_pair(index, *seq[i].id, *seq[i + 1].id, false, params.window);
      if (wc.collection > 0) features.push_back({params.w_unordered, wc.collection / collection_len, std::move(wc)});
    }
  }

  auto score_of = [&](DocOrd ord) {
    const double len = index.doc_len(ord);
    double s = 0.0;
    for (const auto& f : features) s += f.weight * dirichlet(f.counts.count(ord), f.collection_prob, len, params.mu);
    return s;
  };
  return top_k(index, std::move(candidates.touched()), score_of, k, filter);
}

std::vector<Candidate> apply_date_filter(std::span<const Candidate> candidates, const InvertedIndex& index,
                                         const DateFilter& filter) {
  std::vector<Candidate> out;
  for (const auto& c : candidates) {
    auto ord = index.ord_of(c.doc_id);
    if (filter.active() && (!ord || !filter.admits(index.doc(*ord).publish_date))) continue;
    out.push_back(c);
    out.back().rank = static_cast<int>(out.size());
  }
  return out;
}

}  // namespace sledge
