#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sledge/date.hpp"

namespace sledge {

enum class SourceKind : std::uint8_t { pubmed_xml, pdf, metadata_only };

std::string_view to_string(SourceKind kind);

struct Document {
  std::string doc_id;
  std::string title;
  std::string abstract;
  std::vector<std::string> body_paragraphs;
  std::vector<std::string> section_headings;
  std::optional<Date> publish_date;
  DatePrecision date_precision = DatePrecision::day;
  SourceKind source_kind = SourceKind::metadata_only;

  bool operator==(const Document&) const = default;
};

// Which parts of a document feed an index or a re-ranking passage.
struct FieldSelector {
  bool title = false;
  bool abstract = false;
  bool fulltext = false;  // section headings + body paragraphs

  static constexpr FieldSelector all() { return {true, true, true}; }
  static constexpr FieldSelector title_abstract() { return {true, true, false}; }

  bool valid() const noexcept { return title || abstract || fulltext; }
  std::uint8_t bits() const noexcept;
  static FieldSelector from_bits(std::uint8_t bits);

  // "title+abstract", "title+abstract+fulltext", "all", ...
  static FieldSelector parse(std::string_view text);
  std::string to_string() const;

  bool operator==(const FieldSelector&) const = default;
};

// Fields joined in the order title, abstract, headings, paragraphs with a
// single '\n' between non-empty pieces.
std::string concat_fields(const Document& doc, FieldSelector selector);

struct MetadataRow {
  Document doc;  // stub without fulltext
  std::string pubmed_ref;
  std::string pdf_ref;
};

struct MetadataTable {
  std::vector<MetadataRow> rows;
  std::vector<std::string> warnings;
};

// Column names of the metadata table.
namespace columns {
inline constexpr std::string_view id = "cord_uid";
inline constexpr std::string_view title = "title";
inline constexpr std::string_view abstract = "abstract";
inline constexpr std::string_view publish_time = "publish_time";
inline constexpr std::string_view pubmed = "pmc_json_files";
inline constexpr std::string_view pdf = "pdf_json_files";
}  // namespace columns

// Rows keep table order; duplicate ids keep the first row and add a warning.
MetadataTable parse_metadata(std::string_view csv_text);

struct ArticleParagraph {
  std::string section;
  std::string text;
};

// Fulltext file: JSON object with a "body_text" array of
// {"section": string, "text": string}. Other keys are ignored.
std::vector<ArticleParagraph> parse_fulltext(std::string_view json_text);

// Fills body and headings from the PubMed-derived article when it parses,
// otherwise from the PDF-derived one, otherwise leaves the body empty.
// Unparseable files add a warning and fall through to the next source.
Document attach_fulltext(Document doc, const std::optional<std::string>& pubmed_json,
                         const std::optional<std::string>& pdf_json, std::vector<std::string>& warnings);

struct Corpus {
  std::vector<Document> documents;  // sorted by doc_id
  std::vector<std::string> warnings;
};

// Reads <dir>/metadata.csv and the fulltext files it references (paths are
// relative to dir). Output order is canonical regardless of thread count.
Corpus load_corpus(const std::filesystem::path& dir, unsigned threads = 0);

// Read-only lookup by id over a doc_id-sorted document vector.
class DocumentStore {
 public:
  DocumentStore() = default;
  explicit DocumentStore(std::vector<Document> docs);

  const Document* find(std::string_view doc_id) const;
  std::size_t size() const noexcept { return docs_.size(); }
  const std::vector<Document>& documents() const noexcept { return docs_; }

 private:
  std::vector<Document> docs_;
};

}  // namespace sledge
