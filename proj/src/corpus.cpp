#include "sledge/corpus.hpp"

#include <algorithm>
#include <map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "sledge/csv.hpp"
#include "sledge/error.hpp"
#include "sledge/file_io.hpp"
#include "sledge/parallel.hpp"

namespace sledge {

std::string_view to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::pubmed_xml: return "pubmed_xml";
    case SourceKind::pdf: return "pdf";
    case SourceKind::metadata_only: return "metadata_only";
  }
  return "unknown";
}

std::uint8_t FieldSelector::bits() const noexcept {
  return static_cast<std::uint8_t>((title ? 1 : 0) | (abstract ? 2 : 0) | (fulltext ? 4 : 0));
}

FieldSelector FieldSelector::from_bits(std::uint8_t bits) {
  return {(bits & 1) != 0, (bits & 2) != 0, (bits & 4) != 0};
}

FieldSelector FieldSelector::parse(std::string_view text) {
  FieldSelector sel;
  if (text == "all") return all();
  std::size_t start = 0;
  while (start <= text.size()) {
    auto stop = text.find_first_of("+,", start);
    if (stop == std::string_view::npos) stop = text.size();
    auto part = text.substr(start, stop - start);
    if (part == "title") {
      sel.title = true;
    } else if (part == "abstract") {
      sel.abstract = true;
    } else if (part == "fulltext" || part == "body") {
      sel.fulltext = true;
    } else {
      throw ArgumentError("unknown document field '" + std::string(part) +
                          "' (expected title, abstract, fulltext or all)");
    }
    start = stop + 1;
  }
  return sel;
}

std::string FieldSelector::to_string() const {
  std::string out;
  auto add = [&](bool on, std::string_view name) {
    if (!on) return;
    if (!out.empty()) out += '+';
    out += name;
  };
  add(title, "title");
  add(abstract, "abstract");
  add(fulltext, "fulltext");
  return out;
}

std::string concat_fields(const Document& doc, FieldSelector selector) {
  std::string out;
  auto append = [&](const std::string& piece) {
    if (piece.empty()) return;
    if (!out.empty()) out += '\n';
    out += piece;
  };
  if (selector.title) append(doc.title);
  if (selector.abstract) append(doc.abstract);
  if (selector.fulltext) {
    for (const auto& h : doc.section_headings) append(h);
    for (const auto& p : doc.body_paragraphs) append(p);
  }
  return out;
}

namespace {

std::string first_ref(const std::string& field) {
  auto semi = field.find(';');
  std::string ref = field.substr(0, semi);
  auto first = ref.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  auto last = ref.find_last_not_of(" \t");
  return ref.substr(first, last - first + 1);
}

}  // namespace

MetadataTable parse_metadata(std::string_view csv_text) {
  auto rows = parse_csv(csv_text);
  if (rows.empty()) throw FormatError("metadata table is empty (no header row)");

  std::map<std::string, std::size_t, std::less<>> header;
  for (std::size_t i = 0; i < rows[0].size(); ++i) header.emplace(rows[0][i], i);
  auto column = [&](std::string_view name) {
    auto it = header.find(name);
    if (it == header.end()) throw FormatError("metadata table is missing required column '" + std::string(name) + "'");
    return it->second;
  };
  const std::size_t id_col = column(columns::id);
  const std::size_t title_col = column(columns::title);
  const std::size_t abstract_col = column(columns::abstract);
  const std::size_t date_col = column(columns::publish_time);
  const std::size_t pubmed_col = column(columns::pubmed);
  const std::size_t pdf_col = column(columns::pdf);

  MetadataTable table;
  std::unordered_set<std::string> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    auto& row = rows[r];
    row.resize(std::max(row.size(), rows[0].size()));
    const std::string& id = row[id_col];
    if (id.empty()) {
      table.warnings.push_back("metadata row " + std::to_string(r + 1) + ": empty id, row skipped");
      continue;
    }
    if (!seen.insert(id).second) {
      table.warnings.push_back("metadata row " + std::to_string(r + 1) + ": duplicate id '" + id +
                               "', keeping first occurrence");
      continue;
    }
    MetadataRow out;
    out.doc.doc_id = id;
    out.doc.title = std::move(row[title_col]);
    out.doc.abstract = std::move(row[abstract_col]);
    if (auto parsed = parse_date(row[date_col])) {
      out.doc.publish_date = parsed->date;
      out.doc.date_precision = parsed->precision;
    }
    out.pubmed_ref = first_ref(row[pubmed_col]);
    out.pdf_ref = first_ref(row[pdf_col]);
    table.rows.push_back(std::move(out));
  }
  return table;
}

std::vector<ArticleParagraph> parse_fulltext(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("fulltext is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("body_text") || !j["body_text"].is_array()) {
    throw FormatError("fulltext has no \"body_text\" array");
  }
  std::vector<ArticleParagraph> out;
  for (const auto& entry : j["body_text"]) {
    if (!entry.is_object() || !entry.contains("text") || !entry["text"].is_string()) {
      throw FormatError("fulltext body_text entry without a string \"text\"");
    }
    ArticleParagraph p;
    p.text = entry["text"].get<std::string>();
    if (entry.contains("section") && entry["section"].is_string()) p.section = entry["section"].get<std::string>();
    out.push_back(std::move(p));
  }
  return out;
}

Document attach_fulltext(Document doc, const std::optional<std::string>& pubmed_json,
                         const std::optional<std::string>& pdf_json, std::vector<std::string>& warnings) {
  doc.body_paragraphs.clear();
  doc.section_headings.clear();
  doc.source_kind = SourceKind::metadata_only;

  auto try_source = [&](const std::optional<std::string>& json, SourceKind kind) {
    if (!json) return false;
    try {
      auto paragraphs = parse_fulltext(*json);
      for (auto& p : paragraphs) {
        if (!p.section.empty() &&
            std::find(doc.section_headings.begin(), doc.section_headings.end(), p.section) ==
                doc.section_headings.end()) {
          doc.section_headings.push_back(p.section);
        }
        doc.body_paragraphs.push_back(std::move(p.text));
      }
      doc.source_kind = kind;
      return true;
    } catch (const FormatError& e) {
      warnings.push_back(doc.doc_id + ": skipping " + std::string(to_string(kind)) + " fulltext: " + e.what());
      return false;
    }
  };
  if (!try_source(pubmed_json, SourceKind::pubmed_xml)) try_source(pdf_json, SourceKind::pdf);
  return doc;
}

Corpus load_corpus(const std::filesystem::path& dir, unsigned threads) {
  auto table = parse_metadata(read_file(dir / "metadata.csv"));

  std::vector<Document> docs(table.rows.size());
  std::vector<std::vector<std::string>> row_warnings(table.rows.size());
  auto read_ref = [&](const std::string& ref, std::size_t i) -> std::optional<std::string> {
    if (ref.empty()) return std::nullopt;
    try {
      return read_file(dir / ref);
    } catch (const FormatError&) {
      row_warnings[i].push_back(table.rows[i].doc.doc_id + ": fulltext file not readable: " + ref);
      return std::nullopt;
    }
  };
  parallel_for(
      table.rows.size(),
      [&](std::size_t i) {
        auto& row = table.rows[i];
        auto pubmed = read_ref(row.pubmed_ref, i);
        auto pdf = read_ref(row.pdf_ref, i);
        docs[i] = attach_fulltext(std::move(row.doc), pubmed, pdf, row_warnings[i]);
      },
      threads == 0 ? default_thread_count() : threads);

  Corpus corpus;
  corpus.warnings = std::move(table.warnings);
  for (auto& w : row_warnings) corpus.warnings.insert(corpus.warnings.end(), w.begin(), w.end());
  std::sort(docs.begin(), docs.end(), [](const Document& a, const Document& b) { return a.doc_id < b.doc_id; });
  corpus.documents = std::move(docs);
  return corpus;
}

DocumentStore::DocumentStore(std::vector<Document> docs) : docs_(std::move(docs)) {
  std::sort(docs_.begin(), docs_.end(), [](const Document& a, const Document& b) { return a.doc_id < b.doc_id; });
}

const Document* DocumentStore::find(std::string_view doc_id) const {
  auto it = std::lower_bound(docs_.begin(), docs_.end(), doc_id,
                             [](const Document& d, std::string_view id) { return d.doc_id < id; });
  if (it == docs_.end() || it->doc_id != doc_id) return nullptr;
  return &*it;
}

}  // namespace sledge
