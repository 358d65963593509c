#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sledge/analysis.hpp"
#include "sledge/first_stage.hpp"
#include "sledge/index.hpp"
#include "sledge/rerank.hpp"
#include "sledge/trec.hpp"

namespace sledge {

enum class RetrievalModel { bm25, rm3, sdm };

RetrievalModel parse_model(std::string_view name);
std::string_view to_string(RetrievalModel model);

struct Stage1Config {
  RetrievalModel model = RetrievalModel::bm25;
  Bm25Params bm25;
  Rm3Params rm3;
  SdmParams sdm;
  TopicField query_field = TopicField::query;
  FieldSelector doc_fields = FieldSelector::all();
  int k = kDefaultDepth;
  DateFilter date_filter;
};

using TopicResults = std::map<std::string, std::vector<Candidate>, TopicIdLess>;

std::vector<Candidate> first_stage_search(const InvertedIndex& index, const Analyzer& analyzer, std::string_view query,
                                          const Stage1Config& config);

// Every topic gets an entry. Topics whose selected field analyzes to no
// terms get an empty list and a warning.
TopicResults run_first_stage(const InvertedIndex& index, const Analyzer& analyzer, std::span<const Topic> topics,
                             const Stage1Config& config, std::vector<std::string>* warnings = nullptr,
                             unsigned threads = 0);

TopicResults run_rerank(const TopicResults& first_stage, std::span<const Topic> topics, const DocumentStore& docs,
                        const RerankConfig& config, ScorerClient& scorer);

}  // namespace sledge
