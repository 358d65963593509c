#include "sledge/pipeline.hpp"

#include "sledge/error.hpp"
#include "sledge/parallel.hpp"

namespace sledge {

RetrievalModel parse_model(std::string_view name) {
  if (name == "bm25") return RetrievalModel::bm25;
  if (name == "rm3") return RetrievalModel::rm3;
  if (name == "sdm") return RetrievalModel::sdm;
  throw ArgumentError("unknown retrieval model '" + std::string(name) + "' (expected bm25, rm3 or sdm)");
}

std::string_view to_string(RetrievalModel model) {
  switch (model) {
    case RetrievalModel::bm25: return "bm25";
    case RetrievalModel::rm3: return "rm3";
    case RetrievalModel::sdm: return "sdm";
  }
  return "bm25";
}

std::vector<Candidate> first_stage_search(const InvertedIndex& index, const Analyzer& analyzer, std::string_view query,
                                          const Stage1Config& config) {
  switch (config.model) {
    case RetrievalModel::bm25:
      return bm25_search(index, analyzer, query, config.bm25, config.k, config.date_filter);
    case RetrievalModel::rm3:
      return rm3_search(index, analyzer, query, config.bm25, config.rm3, config.k, config.date_filter);
    case RetrievalModel::sdm:
      return sdm_search(index, analyzer, query, config.sdm, config.k, config.date_filter);
  }
  throw ArgumentError("unknown retrieval model");
}

TopicResults run_first_stage(const InvertedIndex& index, const Analyzer& analyzer, std::span<const Topic> topics,
                             const Stage1Config& config, std::vector<std::string>* warnings, unsigned threads) {
  std::vector<std::vector<Candidate>> lists(topics.size());
  std::vector<char> empty_query(topics.size(), 0);
  parallel_for(
      topics.size(),
      [&](std::size_t i) {
        try {
          lists[i] = first_stage_search(index, analyzer, topics[i].field(config.query_field), config);
        } catch (const EmptyQueryError&) {
          empty_query[i] = 1;
        }
      },
      threads == 0 ? default_thread_count() : threads);

  TopicResults results;
  for (std::size_t i = 0; i < topics.size(); ++i) {
    if (empty_query[i] && warnings != nullptr) {
      warnings->push_back("topic " + topics[i].id + ": " + std::string(to_string(config.query_field)) +
                          " field has no terms after analysis, no results");
    }
    results[topics[i].id] = std::move(lists[i]);
  }
  return results;
}

TopicResults run_rerank(const TopicResults& first_stage, std::span<const Topic> topics, const DocumentStore& docs,
                        const RerankConfig& config, ScorerClient& scorer) {
  TopicResults results;
  for (const auto& topic : topics) {
    auto it = first_stage.find(topic.id);
    if (it == first_stage.end()) continue;
    results[topic.id] = rerank(it->second, topic, docs, config, scorer);
  }
  return results;
}

}  // namespace sledge
