#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sledge/analysis.hpp"
#include "sledge/date.hpp"
#include "sledge/index.hpp"

namespace sledge {

inline constexpr int kDefaultDepth = 500;

struct Bm25Params {
  double k1 = 0.9;
  double b = 0.4;

  void validate() const;
  bool operator==(const Bm25Params&) const = default;
};

struct Rm3Params {
  int fb_terms = 10;
  int fb_docs = 10;
  double orig_weight = 0.5;

  void validate() const;
  bool operator==(const Rm3Params&) const = default;
};

// Ordered pairs use exact adjacency; unordered pairs co-occur within
// `window` analyzed positions.
struct SdmParams {
  double w_term = 0.85;
  double w_ordered = 0.1;
  double w_unordered = 0.05;
  int window = 8;
  double mu = 1000.0;

  void validate() const;
  bool operator==(const SdmParams&) const = default;
};

struct Candidate {
  std::string doc_id;
  double score = 0.0;
  int rank = 0;

  bool operator==(const Candidate&) const = default;
};

// Publication-date cutoff. Documents dated before min_date, and documents
// with no date at all, are rejected while the filter is active.
struct DateFilter {
  std::optional<Date> min_date;

  bool active() const noexcept { return min_date.has_value(); }
  bool admits(const std::optional<Date>& date) const {
    if (!min_date) return true;
    return date && *date >= *min_date;
  }
};

struct WeightedTerm {
  std::string term;
  double weight = 0.0;

  bool operator==(const WeightedTerm&) const = default;
};

// Terms sorted by stem.
using QueryModel = std::vector<WeightedTerm>;

// Maximum-likelihood query model: weight = count / query length.
QueryModel query_model(const Analyzer& analyzer, std::string_view query);

// score(d) = sum over query terms t of weight(t) * idf(t) * tf(k1+1) / (tf + k1(1 - b + b|d|/avgdl))
// with idf(t) = ln(1 + (N - df + 0.5)/(df + 0.5)). The text overload weighs
// each term by its count in the query.
std::vector<Candidate> bm25_search(const InvertedIndex& index, const Analyzer& analyzer, std::string_view query,
                                   const Bm25Params& params, int k = kDefaultDepth, const DateFilter& filter = {});
std::vector<Candidate> bm25_search(const InvertedIndex& index, const QueryModel& query, const Bm25Params& params,
                                   int k = kDefaultDepth, const DateFilter& filter = {});

struct Rm3Expansion {
  QueryModel model;
  bool fallback = false;  // no feedback documents; model is the original query
};

Rm3Expansion rm3_expand(const InvertedIndex& index, const Analyzer& analyzer, std::string_view query,
                        const Bm25Params& base, const Rm3Params& rm3, const DateFilter& filter = {});

std::vector<Candidate> rm3_search(const InvertedIndex& index, const Analyzer& analyzer, std::string_view query,
                                  const Bm25Params& base, const Rm3Params& rm3, int k = kDefaultDepth,
                                  const DateFilter& filter = {});

// Dirichlet-smoothed query likelihood over unigrams.
std::vector<Candidate> ql_search(const InvertedIndex& index, const Analyzer& analyzer, std::string_view query,
                                 double mu, int k = kDefaultDepth, const DateFilter& filter = {});

std::vector<Candidate> sdm_search(const InvertedIndex& index, const Analyzer& analyzer, std::string_view query,
                                  const SdmParams& params, int k = kDefaultDepth, const DateFilter& filter = {});

// Drops filtered documents from an existing ranking and renumbers ranks.
std::vector<Candidate> apply_date_filter(std::span<const Candidate> candidates, const InvertedIndex& index,
                                         const DateFilter& filter);

}  // namespace sledge
