#include "sledge/rerank.hpp"

#include <algorithm>
#include <thread>
#include <unordered_set>

#include "sledge/analysis.hpp"
#include "sledge/error.hpp"

namespace sledge {

Aggregation parse_aggregation(std::string_view name) {
  if (name == "max") return Aggregation::max;
  if (name == "mean") return Aggregation::mean;
  throw ArgumentError("unknown aggregation '" + std::string(name) + "' (expected max or mean)");
}

std::string_view to_string(Aggregation aggregation) { return aggregation == Aggregation::max ? "max" : "mean"; }

void RerankConfig::validate() const {
  if (max_passage_tokens < 16) throw ArgumentError("rerank.max_passage_tokens must be >= 16");
  if (!doc_fields.valid()) throw ArgumentError("rerank.doc_fields selects no fields");
  if (batch_size == 0) throw ArgumentError("rerank.batch_size must be >= 1");
  if (retries < 0) throw ArgumentError("rerank.retries must be >= 0");
}

std::vector<std::string> split_passages(std::string_view text, int max_tokens) {
  if (max_tokens < 1) throw ArgumentError("max_tokens must be >= 1");
  auto tokens = tokenize_spans(text);
  const std::size_t n = tokens.size();
  const auto max = static_cast<std::size_t>(max_tokens);
  if (n <= max) return {std::string(text)};

  const std::size_t parts = (n + max - 1) / max;
  const std::size_t base = n / parts;
  const std::size_t extra = n % parts;
  std::vector<std::string> out;
  out.reserve(parts);
  std::size_t first = 0;
  for (std::size_t p = 0; p < parts; ++p) {
    const std::size_t size = base + (p < extra ? 1 : 0);
    const std::size_t last = first + size - 1;
    out.emplace_back(text.substr(tokens[first].begin, tokens[last].end - tokens[first].begin));
    first += size;
  }
  return out;
}

std::vector<Candidate> rerank(std::span<const Candidate> candidates, const Topic& topic, const DocumentStore& docs,
                              const RerankConfig& config, ScorerClient& scorer) {
  config.validate();
  const std::string& query = topic.field(config.query_field);

  // Flatten every passage into one request list; owner[i] is the candidate
  // index of request i.
  std::vector<ScoreRequest> requests;
  std::vector<std::size_t> owner;
  std::unordered_set<std::string_view> seen;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    if (!seen.insert(candidates[c].doc_id).second) {
      throw ArgumentError("candidate list repeats document " + candidates[c].doc_id);
    }
    const Document* doc = docs.find(candidates[c].doc_id);
    if (doc == nullptr) throw FormatError("candidate " + candidates[c].doc_id + " is not in the corpus");
    for (auto& passage : split_passages(concat_fields(*doc, config.doc_fields), config.max_passage_tokens)) {
      requests.push_back({static_cast<std::int64_t>(requests.size()), query, std::move(passage)});
      owner.push_back(c);
    }
  }

  std::vector<double> scores;
  scores.reserve(requests.size());
  for (std::size_t start = 0; start < requests.size(); start += config.batch_size) {
    const std::size_t count = std::min(config.batch_size, requests.size() - start);
    std::span<const ScoreRequest> batch(requests.data() + start, count);
    for (int attempt = 0;; ++attempt) {
      try {
        auto batch_scores = score_batch(scorer, batch);
        scores.insert(scores.end(), batch_scores.begin(), batch_scores.end());
        break;
      } catch (const ScorerTimeout& e) {
        if (attempt >= config.retries) {
          throw PartialResultsError(std::string("scorer unavailable after retries: ") + e.what(), start,
                                    requests.size());
        }
      } catch (const ScorerTransportError& e) {
        if (attempt >= config.retries) {
          throw PartialResultsError(std::string("scorer unavailable after retries: ") + e.what(), start,
                                    requests.size());
        }
      }
      std::this_thread::sleep_for(config.backoff * (1 << attempt));
      try {
        scorer.reconnect();
      } catch (const ScorerTimeout&) {
      } catch (const ScorerTransportError&) {
      }
    }
  }

  std::vector<double> aggregated(candidates.size(), 0.0);
  std::vector<std::size_t> passages(candidates.size(), 0);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const std::size_t c = owner[i];
    if (config.aggregation == Aggregation::max) {
      aggregated[c] = passages[c] == 0 ? scores[i] : std::max(aggregated[c], scores[i]);
    } else {
      aggregated[c] += scores[i];
    }
    ++passages[c];
  }
  if (config.aggregation == Aggregation::mean) {
    for (std::size_t c = 0; c < candidates.size(); ++c) aggregated[c] /= static_cast<double>(passages[c]);
  }

  std::vector<std::size_t> order(candidates.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (aggregated[a] != aggregated[b]) return aggregated[a] > aggregated[b];
    if (candidates[a].score != candidates[b].score) return candidates[a].score > candidates[b].score;
    return candidates[a].doc_id < candidates[b].doc_id;
  });
  std::vector<Candidate> out;
  out.reserve(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    out.push_back({candidates[order[i]].doc_id, aggregated[order[i]], static_cast<int>(i + 1)});
  }
  return out;
}

}  // namespace sledge
