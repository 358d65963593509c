#include "sledge/index.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <unordered_map>

#include "sledge/error.hpp"
#include "sledge/file_io.hpp"
#include "sledge/parallel.hpp"

namespace sledge {

InvertedIndex InvertedIndex::build(std::span<const Document> docs, FieldSelector fields, const Analyzer& analyzer,
                                   BuildOptions options) {
  if (docs.empty()) throw ArgumentError("cannot build an index over an empty corpus");
  if (!fields.valid()) throw ArgumentError("field selector selects no fields");

  std::vector<const Document*> ordered;
  ordered.reserve(docs.size());
  for (const auto& d : docs) ordered.push_back(&d);
  std::sort(ordered.begin(), ordered.end(), [](const Document* a, const Document* b) { return a->doc_id < b->doc_id; });
  for (std::size_t i = 1; i < ordered.size(); ++i) {
    if (ordered[i]->doc_id == ordered[i - 1]->doc_id) {
      throw FormatError("duplicate document id '" + ordered[i]->doc_id + "' in corpus");
    }
  }
  for (const auto* d : ordered) {
    if (d->doc_id.empty()) throw FormatError("document with empty id in corpus");
  }

  std::vector<std::vector<AnalyzedTerm>> analyzed(ordered.size());
  parallel_for(
      ordered.size(), [&](std::size_t i) { analyzed[i] = analyzer.analyze(concat_fields(*ordered[i], fields)); },
      options.threads == 0 ? default_thread_count() : options.threads);

  InvertedIndex index;
  index.fields_ = fields;
  index.has_positions_ = options.store_positions;

  // Vocabulary, sorted.
  std::unordered_map<std::string, TermId> vocab;
  for (const auto& terms : analyzed) {
    for (const auto& t : terms) vocab.emplace(t.stem, 0);
  }
  index.terms_.reserve(vocab.size());
  for (const auto& [stem, _] : vocab) index.terms_.push_back(stem);
  std::sort(index.terms_.begin(), index.terms_.end());
  for (TermId id = 0; id < index.terms_.size(); ++id) vocab[index.terms_[id]] = id;

  // Per document (term, position) pairs sorted by term then position.
  std::vector<std::vector<std::pair<TermId, std::uint32_t>>> doc_pairs(ordered.size());
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    auto& pairs = doc_pairs[i];
    pairs.reserve(analyzed[i].size());
    // Positions count analyzed terms only, so stopwords leave no gaps.
    for (std::uint32_t pos = 0; pos < analyzed[i].size(); ++pos) pairs.emplace_back(vocab[analyzed[i][pos].stem], pos);
    std::sort(pairs.begin(), pairs.end());
  }

  const std::size_t term_total = index.terms_.size();
  std::vector<std::uint64_t> df(term_total, 0);
  std::vector<std::uint64_t> cf(term_total, 0);
  index.docs_.reserve(ordered.size());
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    const auto* d = ordered[i];
    const auto& pairs = doc_pairs[i];
    index.docs_.push_back({d->doc_id, d->publish_date, d->date_precision, static_cast<std::uint32_t>(pairs.size())});
    index.total_terms_ += pairs.size();
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      if (p == 0 || pairs[p].first != pairs[p - 1].first) ++df[pairs[p].first];
      ++cf[pairs[p].first];
    }
  }

  index.term_offsets_.assign(term_total + 1, 0);
  for (std::size_t t = 0; t < term_total; ++t) index.term_offsets_[t + 1] = index.term_offsets_[t] + df[t];
  const std::uint64_t posting_total = index.term_offsets_.back();
  index.post_docs_.resize(posting_total);
  index.post_tfs_.resize(posting_total);
  index.post_pos_offsets_.resize(posting_total);

  // Positions of a term are laid out contiguously, term by term.
  std::vector<std::uint64_t> pos_cursor(term_total, 0);
  if (options.store_positions) {
    std::uint64_t running = 0;
    for (std::size_t t = 0; t < term_total; ++t) {
      pos_cursor[t] = running;
      running += cf[t];
    }
    index.positions_.resize(running);
  }

  std::vector<std::uint64_t> cursor(index.term_offsets_.begin(), index.term_offsets_.end() - 1);
  for (DocOrd ord = 0; ord < ordered.size(); ++ord) {
    const auto& pairs = doc_pairs[ord];
    std::size_t p = 0;
    while (p < pairs.size()) {
      const TermId term = pairs[p].first;
      const std::uint64_t slot = cursor[term]++;
      index.post_docs_[slot] = ord;
      index.post_pos_offsets_[slot] = pos_cursor[term];
      std::uint32_t tf = 0;
      for (; p < pairs.size() && pairs[p].first == term; ++p, ++tf) {
        if (options.store_positions) index.positions_[pos_cursor[term]++] = pairs[p].second;
      }
      index.post_tfs_[slot] = tf;
    }
  }
  if (!options.store_positions) std::fill(index.post_pos_offsets_.begin(), index.post_pos_offsets_.end(), 0);

  index.finalize();
  return index;
}

void InvertedIndex::finalize() {
  avg_doc_len_ = docs_.empty() ? 0.0 : static_cast<double>(total_terms_) / static_cast<double>(docs_.size());

  const std::size_t term_total = terms_.size();
  collection_freq_.assign(term_total, 0);
  std::vector<std::uint64_t> distinct_per_doc(docs_.size() + 1, 0);
  for (std::size_t t = 0; t < term_total; ++t) {
    for (auto i = term_offsets_[t]; i < term_offsets_[t + 1]; ++i) {
      collection_freq_[t] += post_tfs_[i];
      ++distinct_per_doc[post_docs_[i] + 1];
    }
  }
  doc_term_offsets_.assign(docs_.size() + 1, 0);
  for (std::size_t d = 0; d < docs_.size(); ++d) doc_term_offsets_[d + 1] = doc_term_offsets_[d] + distinct_per_doc[d + 1];
  doc_terms_.resize(doc_term_offsets_.back());
  std::vector<std::uint64_t> cursor(doc_term_offsets_.begin(), doc_term_offsets_.end() - 1);
  for (TermId t = 0; t < term_total; ++t) {
    for (auto i = term_offsets_[t]; i < term_offsets_[t + 1]; ++i) {
      doc_terms_[cursor[post_docs_[i]]++] = {t, post_tfs_[i]};
    }
  }
}

std::optional<TermId> InvertedIndex::term_id(std::string_view stem) const {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), stem);
  if (it == terms_.end() || *it != stem) return std::nullopt;
  return static_cast<TermId>(it - terms_.begin());
}

PostingList InvertedIndex::postings(TermId term) const {
  const auto first = term_offsets_[term];
  const auto count = term_offsets_[term + 1] - first;
  return PostingList({post_docs_.data() + first, count}, {post_tfs_.data() + first, count},
                     {post_pos_offsets_.data() + first, count}, has_positions_ ? positions_.data() : nullptr);
}

PostingList InvertedIndex::lookup(std::string_view stem) const {
  auto id = term_id(stem);
  if (!id) return {};
  return postings(*id);
}

std::optional<DocOrd> InvertedIndex::ord_of(std::string_view doc_id) const {
  auto it = std::lower_bound(docs_.begin(), docs_.end(), doc_id,
                             [](const IndexedDoc& d, std::string_view id) { return d.doc_id < id; });
  if (it == docs_.end() || it->doc_id != doc_id) return std::nullopt;
  return static_cast<DocOrd>(it - docs_.begin());
}

std::span<const TermCount> InvertedIndex::doc_terms(DocOrd ord) const {
  return {doc_terms_.data() + doc_term_offsets_[ord], doc_term_offsets_[ord + 1] - doc_term_offsets_[ord]};
}

// ---------------------------------------------------------------------------
// Binary container

namespace {

constexpr char kMagic[8] = {'S', 'L', 'E', 'D', 'G', 'E', 'I', 'X'};

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

class ByteWriter {
 public:
  void bytes(const void* data, std::size_t n) { out_.append(static_cast<const char*>(data), n); }

  template <typename T>
  void uint(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }

  void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }

  void str(std::string_view s) {
    uint(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }

  std::string take() { return std::move(out_); }
  std::string_view view() const { return out_; }

 private:
  std::string out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  std::string_view bytes(std::size_t n, const char* what) {
    if (data_.size() - pos_ < n) {
      throw IndexFormatError("index file is truncated (reading " + std::string(what) + " at byte " +
                             std::to_string(pos_) + ")");
    }
    auto out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  template <typename T>
  T uint(const char* what) {
    auto b = bytes(sizeof(T), what);
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<unsigned char>(b[i])) << (8 * i);
    return v;
  }

  double f64(const char* what) { return std::bit_cast<double>(uint<std::uint64_t>(what)); }

  std::string str(const char* what) {
    auto n = uint<std::uint32_t>(what);
    return std::string(bytes(n, what));
  }

  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string InvertedIndex::serialize() const {
  ByteWriter w;
  w.bytes(kMagic, sizeof kMagic);
  w.uint<std::uint32_t>(kFormatVersion);
  w.uint<std::uint8_t>(fields_.bits());
  w.uint<std::uint8_t>(has_positions_ ? 1 : 0);
  w.uint<std::uint16_t>(0);
  w.uint<std::uint32_t>(doc_count());
  w.uint<std::uint64_t>(total_terms_);
  w.f64(avg_doc_len_);
  for (const auto& d : docs_) {
    w.str(d.doc_id);
    w.uint<std::uint32_t>(static_cast<std::uint32_t>(d.publish_date ? date_key(*d.publish_date) : 0));
    w.uint<std::uint8_t>(static_cast<std::uint8_t>(d.date_precision));
    w.uint<std::uint32_t>(d.length);
  }
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(terms_.size()));
  for (TermId t = 0; t < terms_.size(); ++t) {
    w.str(terms_[t]);
    auto list = postings(t);
    w.uint<std::uint32_t>(static_cast<std::uint32_t>(list.size()));
    for (auto p : list) {
      w.uint<std::uint32_t>(p.doc_ord);
      w.uint<std::uint32_t>(p.tf);
      for (auto pos : p.positions) w.uint<std::uint32_t>(pos);
    }
  }
  w.uint<std::uint64_t>(fnv1a(w.view()));
  return w.take();
}

InvertedIndex InvertedIndex::deserialize(std::string_view bytes) {
  ByteReader r(bytes);
  auto magic = r.bytes(sizeof kMagic, "magic");
  if (magic != std::string_view(kMagic, sizeof kMagic)) {
    throw IndexFormatError("not a sledge index: expected magic 'SLEDGEIX' at offset 0");
  }
  auto version = r.uint<std::uint32_t>("version");
  if (version != kFormatVersion) {
    throw IndexFormatError("unsupported index format version " + std::to_string(version) + " (expected " +
                           std::to_string(kFormatVersion) + ")");
  }
  if (bytes.size() < sizeof kMagic + 8) throw IndexFormatError("index file is truncated (no checksum)");
  const auto body = bytes.substr(0, bytes.size() - 8);
  ByteReader tail(bytes.substr(bytes.size() - 8));

  InvertedIndex index;
  index.fields_ = FieldSelector::from_bits(r.uint<std::uint8_t>("fields"));
  index.has_positions_ = (r.uint<std::uint8_t>("flags") & 1) != 0;
  r.uint<std::uint16_t>("reserved");
  const auto n_docs = r.uint<std::uint32_t>("document count");
  index.total_terms_ = r.uint<std::uint64_t>("total terms");
  const double stored_avg = r.f64("average length");
  index.docs_.reserve(n_docs);
  for (std::uint32_t i = 0; i < n_docs; ++i) {
    IndexedDoc d;
    d.doc_id = r.str("document id");
    d.publish_date = date_from_key(static_cast<std::int32_t>(r.uint<std::uint32_t>("document date")));
    d.date_precision = static_cast<DatePrecision>(r.uint<std::uint8_t>("date precision"));
    d.length = r.uint<std::uint32_t>("document length");
    index.docs_.push_back(std::move(d));
  }
  const auto n_terms = r.uint<std::uint32_t>("term count");
  index.terms_.reserve(n_terms);
  index.term_offsets_.push_back(0);
  for (std::uint32_t t = 0; t < n_terms; ++t) {
    index.terms_.push_back(r.str("term"));
    const auto df = r.uint<std::uint32_t>("document frequency");
    for (std::uint32_t i = 0; i < df; ++i) {
      const auto ord = r.uint<std::uint32_t>("posting document");
      const auto tf = r.uint<std::uint32_t>("posting tf");
      if (ord >= n_docs) throw IndexFormatError("posting refers to document ordinal out of range");
      index.post_docs_.push_back(ord);
      index.post_tfs_.push_back(tf);
      index.post_pos_offsets_.push_back(index.has_positions_ ? index.positions_.size() : 0);
      if (index.has_positions_) {
        for (std::uint32_t k = 0; k < tf; ++k) index.positions_.push_back(r.uint<std::uint32_t>("position"));
      }
    }
    index.term_offsets_.push_back(index.post_docs_.size());
  }
  if (r.position() != body.size()) {
    throw IndexFormatError(r.position() > body.size() ? "index file is truncated"
                                                      : "index file has trailing bytes before checksum");
  }
  if (tail.uint<std::uint64_t>("checksum") != fnv1a(body)) throw IndexFormatError("index checksum mismatch");

  index.finalize();
  if (index.avg_doc_len_ != stored_avg) throw IndexFormatError("index statistics are inconsistent");
  return index;
}

void InvertedIndex::save(const std::filesystem::path& path) const { write_file_atomic(path, serialize()); }

InvertedIndex InvertedIndex::load(const std::filesystem::path& path) {
  std::string bytes;
  try {
    bytes = read_file(path);
  } catch (const FormatError&) {
    throw IndexFormatError("cannot open index file " + path.string());
  }
  return deserialize(bytes);
}

}  // namespace sledge
