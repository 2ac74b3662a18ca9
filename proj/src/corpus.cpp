#include "crftag/corpus.hpp"

#include <fstream>
#include <sstream>

#include "crftag/error.hpp"
#include "crftag/text.hpp"

namespace crftag {

std::string_view role_name(ColumnRole role) {
  switch (role) {
    case ColumnRole::Form: return "form";
    case ColumnRole::Lemma: return "lemma";
    case ColumnRole::Label: return "label";
    case ColumnRole::Feature: return "feature";
    case ColumnRole::Prediction: return "prediction";
  }
  return "feature";
}

ColumnSchema::ColumnSchema(std::vector<Column> columns) : columns_(std::move(columns)) {}

ColumnSchema ColumnSchema::infer(std::size_t column_count) {
  std::vector<Column> cols;
  if (column_count == 0) return ColumnSchema{};
  cols.push_back({"mot", ColumnRole::Form});
  if (column_count == 2) {
    cols.push_back({"tag", ColumnRole::Label});
  } else if (column_count >= 3) {
    cols.push_back({"lemme", ColumnRole::Lemma});
    for (std::size_t i = 2; i + 1 < column_count; ++i)
      cols.push_back({"col" + std::to_string(i), ColumnRole::Feature});
    cols.push_back({"tag", ColumnRole::Label});
  }
  return ColumnSchema(std::move(cols));
}

std::optional<std::size_t> ColumnSchema::find(ColumnRole role) const {
  for (std::size_t i = 0; i < columns_.size(); ++i)
    if (columns_[i].role == role) return i;
  return std::nullopt;
}

std::optional<std::size_t> ColumnSchema::find(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i)
    if (columns_[i].name == name) return i;
  return std::nullopt;
}

ColumnSchema ColumnSchema::with_appended(Column column) const {
  auto cols = columns_;
  cols.push_back(std::move(column));
  return ColumnSchema(std::move(cols));
}

ColumnSchema ColumnSchema::without(std::size_t index) const {
  auto cols = columns_;
  cols.erase(cols.begin() + static_cast<std::ptrdiff_t>(index));
  return ColumnSchema(std::move(cols));
}

Corpus::Corpus(ColumnSchema schema, std::vector<Sentence> sentences,
               std::vector<std::string> provenance)
    : schema_(std::move(schema)),
      sentences_(std::move(sentences)),
      provenance_(std::move(provenance)) {
  if (sentences_.empty()) fail(ErrorCode::EmptyCorpus, "corpus has no sentences");
  if (schema_.size() == 0) fail(ErrorCode::RaggedRow, "schema has no columns");
  for (std::size_t s = 0; s < sentences_.size(); ++s) {
    const auto& sent = sentences_[s];
    if (sent.tokens.empty())
      fail(ErrorCode::EmptyCorpus, "sentence " + std::to_string(s) + " is empty");
    for (std::size_t t = 0; t < sent.tokens.size(); ++t) {
      const auto& tok = sent.tokens[t];
      if (tok.columns.size() != schema_.size())
        fail(ErrorCode::RaggedRow, "sentence " + std::to_string(s) + " token " +
                                       std::to_string(t) + " has " +
                                       std::to_string(tok.columns.size()) +
                                       " columns, expected " +
                                       std::to_string(schema_.size()));
      if (tok.columns.front().empty())
        fail(ErrorCode::RaggedRow, "sentence " + std::to_string(s) + " token " +
                                       std::to_string(t) + " has an empty surface form");
    }
  }
}

std::size_t Corpus::token_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences_) n += s.size();
  return n;
}

std::vector<std::string> Corpus::column(std::size_t index) const {
  if (index >= schema_.size())
    fail(ErrorCode::MissingColumn, "column " + std::to_string(index) + " out of range");
  std::vector<std::string> out;
  out.reserve(token_count());
  for (const auto& s : sentences_)
    for (const auto& t : s.tokens) out.push_back(t.columns[index]);
  return out;
}

namespace {

struct RawLine {
  std::size_t number;
  std::string_view content;
};

Corpus parse_impl(std::string_view raw, const ColumnSchema* schema_hint) {
  const std::string text = text::to_nfc(raw);
  std::string_view rest(text);

  std::vector<std::string> provenance;
  std::vector<Sentence> sentences;
  Sentence current;
  ColumnSchema schema = schema_hint ? *schema_hint : ColumnSchema{};
  bool in_header = true;
  std::size_t line_no = 0;

  while (!rest.empty()) {
    auto nl = rest.find('\n');
    std::string_view line = rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (in_header && !line.empty() && line.front() == '#') {
      provenance.emplace_back(line);
      continue;
    }
    if (text::trim(line).empty()) {
      if (!current.tokens.empty()) {
        sentences.push_back(std::move(current));
        current = Sentence{};
      }
      continue;
    }
    in_header = false;
    Token tok{text::split(line, '\t')};
    if (schema.size() == 0) schema = ColumnSchema::infer(tok.columns.size());
    if (tok.columns.size() != schema.size())
      fail(ErrorCode::RaggedRow, "line " + std::to_string(line_no) + ": " +
                                     std::to_string(tok.columns.size()) +
                                     " fields, schema expects " +
                                     std::to_string(schema.size()));
    if (tok.columns.front().empty())
      fail(ErrorCode::RaggedRow, "line " + std::to_string(line_no) + ": empty surface form");
    current.tokens.push_back(std::move(tok));
  }
  if (!current.tokens.empty()) sentences.push_back(std::move(current));
  if (sentences.empty()) fail(ErrorCode::EmptyCorpus, "no token lines in input");
  return Corpus(std::move(schema), std::move(sentences), std::move(provenance));
}

}  // namespace

Corpus parse_corpus(std::string_view text, const ColumnSchema& schema) {
  return parse_impl(text, &schema);
}

Corpus parse_corpus(std::string_view text) { return parse_impl(text, nullptr); }

std::string write_corpus(const Corpus& corpus) {
  std::string out;
  for (const auto& line : corpus.provenance()) {
    out += line;
    out += '\n';
  }
  for (const auto& s : corpus.sentences()) {
    for (const auto& t : s.tokens) {
      for (std::size_t c = 0; c < t.columns.size(); ++c) {
        if (c) out += '\t';
        out += t.columns[c];
      }
      out += '\n';
    }
    out += '\n';
  }
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) fail(ErrorCode::Io, "write failed for " + path);
}

Corpus read_corpus_file(const std::string& path, const std::optional<ColumnSchema>& schema) {
  const std::string contents = read_text_file(path);
  try {
    return schema ? parse_corpus(contents, *schema) : parse_corpus(contents);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

void write_corpus_file(const Corpus& corpus, const std::string& path) {
  write_text_file(path, write_corpus(corpus));
}

Corpus append_column(const Corpus& corpus, Column column,
                     std::span<const std::string> values) {
  if (values.size() != corpus.token_count())
    fail(ErrorCode::LengthMismatch, "append_column '" + column.name + "': " +
                                        std::to_string(values.size()) + " values for " +
                                        std::to_string(corpus.token_count()) + " tokens");
  auto sentences = corpus.sentences();
  std::size_t k = 0;
  for (auto& s : sentences)
    for (auto& t : s.tokens) t.columns.push_back(values[k++]);
  return Corpus(corpus.schema().with_appended(std::move(column)), std::move(sentences),
                corpus.provenance());
}

Corpus append_column(const Corpus& corpus, std::string name,
                     std::span<const std::string> values) {
  return append_column(corpus, Column{std::move(name), ColumnRole::Prediction}, values);
}

Corpus drop_column(const Corpus& corpus, std::size_t index) {
  if (index >= corpus.column_count())
    fail(ErrorCode::MissingColumn, "column " + std::to_string(index) + " out of range");
  auto sentences = corpus.sentences();
  for (auto& s : sentences)
    for (auto& t : s.tokens) t.columns.erase(t.columns.begin() + static_cast<std::ptrdiff_t>(index));
  return Corpus(corpus.schema().without(index), std::move(sentences), corpus.provenance());
}

Corpus select_columns(const Corpus& corpus, std::span<const std::size_t> indices) {
  std::vector<Column> cols;
  for (auto i : indices) {
    if (i >= corpus.column_count())
      fail(ErrorCode::MissingColumn, "column " + std::to_string(i) + " out of range");
    cols.push_back(corpus.schema()[i]);
  }
  std::vector<Sentence> sentences;
  sentences.reserve(corpus.size());
  for (const auto& s : corpus.sentences()) {
    Sentence out;
    out.tokens.reserve(s.size());
    for (const auto& t : s.tokens) {
      Token tok;
      tok.columns.reserve(indices.size());
      for (auto i : indices) tok.columns.push_back(t.columns[i]);
      out.tokens.push_back(std::move(tok));
    }
    sentences.push_back(std::move(out));
  }
  return Corpus(ColumnSchema(std::move(cols)), std::move(sentences), corpus.provenance());
}

Corpus subset(const Corpus& corpus, std::span<const std::size_t> sentence_indices) {
  std::vector<Sentence> sentences;
  sentences.reserve(sentence_indices.size());
  for (auto i : sentence_indices) {
    if (i >= corpus.size())
      fail(ErrorCode::Internal, "sentence index " + std::to_string(i) + " out of range");
    sentences.push_back(corpus.sentences()[i]);
  }
  return Corpus(corpus.schema(), std::move(sentences), corpus.provenance());
}

std::vector<std::vector<std::string>> split_by_sentence(const Corpus& corpus,
                                                        std::span<const std::string> flat) {
  if (flat.size() != corpus.token_count())
    fail(ErrorCode::LengthMismatch, std::to_string(flat.size()) + " values for " +
                                        std::to_string(corpus.token_count()) + " tokens");
  std::vector<std::vector<std::string>> out;
  out.reserve(corpus.size());
  std::size_t k = 0;
  for (const auto& s : corpus.sentences()) {
    out.emplace_back(flat.begin() + static_cast<std::ptrdiff_t>(k),
                     flat.begin() + static_cast<std::ptrdiff_t>(k + s.size()));
    k += s.size();
  }
  return out;
}

}  // namespace crftag
