#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sledge/analysis.hpp"
#include "sledge/corpus.hpp"
#include "sledge/date.hpp"

namespace sledge {

using DocOrd = std::uint32_t;
using TermId = std::uint32_t;

struct Posting {
  DocOrd doc_ord = 0;
  std::uint32_t tf = 0;
  std::span<const std::uint32_t> positions;  // empty when the index has no positions
};

// View over one term's postings, sorted by doc_ord.
class PostingList {
 public:
  PostingList() = default;
  PostingList(std::span<const DocOrd> docs, std::span<const std::uint32_t> tfs,
              std::span<const std::uint64_t> pos_offsets, const std::uint32_t* positions)
      : docs_(docs), tfs_(tfs), pos_offsets_(pos_offsets), positions_(positions) {}

  std::size_t size() const noexcept { return docs_.size(); }
  bool empty() const noexcept { return docs_.empty(); }

  Posting operator[](std::size_t i) const {
    Posting p{docs_[i], tfs_[i], {}};
    if (positions_ != nullptr) p.positions = {positions_ + pos_offsets_[i], tfs_[i]};
    return p;
  }

  class iterator {
   public:
    using value_type = Posting;
    using difference_type = std::ptrdiff_t;
    iterator() = default;
    iterator(const PostingList* list, std::size_t i) : list_(list), i_(i) {}
    Posting operator*() const { return (*list_)[i_]; }
    iterator& operator++() {
      ++i_;
      return *this;
    }
    iterator operator++(int) {
      auto tmp = *this;
      ++i_;
      return tmp;
    }
    bool operator==(const iterator& o) const { return i_ == o.i_; }

   private:
    const PostingList* list_ = nullptr;
    std::size_t i_ = 0;
  };

  iterator begin() const { return {this, 0}; }
  iterator end() const { return {this, size()}; }

 private:
  std::span<const DocOrd> docs_;
  std::span<const std::uint32_t> tfs_;
  std::span<const std::uint64_t> pos_offsets_;
  const std::uint32_t* positions_ = nullptr;
};

struct IndexedDoc {
  std::string doc_id;
  std::optional<Date> publish_date;
  DatePrecision date_precision = DatePrecision::day;
  std::uint32_t length = 0;  // analyzed term count

  bool operator==(const IndexedDoc&) const = default;
};

struct TermCount {
  TermId term = 0;
  std::uint32_t tf = 0;
};

// Immutable inverted index with the collection statistics BM25, RM3 and
// SDM need. Document ordinals follow doc_id order, terms are sorted.
class InvertedIndex {
 public:
  struct BuildOptions {
    bool store_positions = true;
    unsigned threads = 0;  // 0 = hardware concurrency
  };

  static constexpr std::uint32_t kFormatVersion = 1;

  InvertedIndex() = default;

  static InvertedIndex build(std::span<const Document> docs, FieldSelector fields, const Analyzer& analyzer,
                             BuildOptions options);
  static InvertedIndex build(std::span<const Document> docs, FieldSelector fields, const Analyzer& analyzer) {
    return build(docs, fields, analyzer, BuildOptions{});
  }

  PostingList lookup(std::string_view stem) const;
  PostingList postings(TermId term) const;
  std::optional<TermId> term_id(std::string_view stem) const;
  const std::string& term(TermId id) const { return terms_[id]; }
  std::size_t term_count() const noexcept { return terms_.size(); }

  std::uint32_t df(std::string_view stem) const { return static_cast<std::uint32_t>(lookup(stem).size()); }
  std::uint64_t collection_frequency(TermId term) const { return collection_freq_[term]; }

  std::uint32_t doc_count() const noexcept { return static_cast<std::uint32_t>(docs_.size()); }
  std::uint32_t doc_len(DocOrd ord) const { return docs_[ord].length; }
  const IndexedDoc& doc(DocOrd ord) const { return docs_[ord]; }
  std::optional<DocOrd> ord_of(std::string_view doc_id) const;
  double avg_doc_len() const noexcept { return avg_doc_len_; }
  std::uint64_t total_terms() const noexcept { return total_terms_; }

  // Forward view: the distinct terms of one document with their tf.
  std::span<const TermCount> doc_terms(DocOrd ord) const;

  FieldSelector fields() const noexcept { return fields_; }
  bool has_positions() const noexcept { return has_positions_; }

  // Versioned little-endian container, see docs/index_format.md.
  std::string serialize() const;
  static InvertedIndex deserialize(std::string_view bytes);
  void save(const std::filesystem::path& path) const;
  static InvertedIndex load(const std::filesystem::path& path);

 private:
  void finalize();

  FieldSelector fields_;
  bool has_positions_ = true;
  std::vector<IndexedDoc> docs_;
  double avg_doc_len_ = 0.0;
  std::uint64_t total_terms_ = 0;

  std::vector<std::string> terms_;
  std::vector<std::uint64_t> term_offsets_;  // terms_.size() + 1 entries into the posting arrays
  std::vector<DocOrd> post_docs_;
  std::vector<std::uint32_t> post_tfs_;
  std::vector<std::uint64_t> post_pos_offsets_;
  std::vector<std::uint32_t> positions_;

  // derived on build/load
  std::vector<std::uint64_t> collection_freq_;
  std::vector<std::uint64_t> doc_term_offsets_;
  std::vector<TermCount> doc_terms_;
};

}  // namespace sledge
