#pragma once

#include <chrono>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sledge/corpus.hpp"
#include "sledge/first_stage.hpp"
#include "sledge/scorer.hpp"
#include "sledge/trec.hpp"

namespace sledge {

enum class Aggregation { max, mean };

Aggregation parse_aggregation(std::string_view name);
std::string_view to_string(Aggregation aggregation);

struct RerankConfig {
  TopicField query_field = TopicField::question;
  FieldSelector doc_fields = FieldSelector::title_abstract();
  int max_passage_tokens = 400;  // counted with tokenize(), not scorer subwords
  Aggregation aggregation = Aggregation::max;
  std::size_t batch_size = 32;
  int retries = 3;
  std::chrono::milliseconds backoff{100};  // doubled after each failed attempt

  void validate() const;
};

// One passage when the text has at most max_tokens tokens; otherwise
// ceil(n / max_tokens) contiguous chunks whose token counts differ by at
// most one (longer chunks first). Each passage is the source substring from
// its first token to its last. Empty text yields one empty passage.
std::vector<std::string> split_passages(std::string_view text, int max_tokens);

// Scores every (topic field, passage) pair, aggregates per document, and
// orders by aggregated score, then first-stage score, then doc_id. Transient
// scorer failures are retried `retries` times before PartialResultsError.
std::vector<Candidate> rerank(std::span<const Candidate> candidates, const Topic& topic, const DocumentStore& docs,
                              const RerankConfig& config, ScorerClient& scorer);

}  // namespace sledge
