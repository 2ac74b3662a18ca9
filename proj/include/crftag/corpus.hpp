#ifndef CRFTAG_CORPUS_HPP_
#define CRFTAG_CORPUS_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace crftag {

enum class ColumnRole { Form, Lemma, Label, Feature, Prediction };

std::string_view role_name(ColumnRole role);

struct Column {
  std::string name;
  ColumnRole role = ColumnRole::Feature;

  bool operator==(const Column&) const = default;
};

/// Names and roles of the TAB-separated columns of a corpus file.
class ColumnSchema {
 public:
  ColumnSchema() = default;
  explicit ColumnSchema(std::vector<Column> columns);

  /// Conventional layout for an n-column file: 1 = form, 2 = form + label,
  /// 3 = form + lemma + label, more = form + lemma + features + label.
  static ColumnSchema infer(std::size_t column_count);

  std::size_t size() const { return columns_.size(); }
  const Column& operator[](std::size_t i) const { return columns_[i]; }
  const std::vector<Column>& columns() const { return columns_; }

  std::optional<std::size_t> find(ColumnRole role) const;
  std::optional<std::size_t> find(std::string_view name) const;

  ColumnSchema with_appended(Column column) const;
  ColumnSchema without(std::size_t index) const;

  bool operator==(const ColumnSchema&) const = default;

 private:
  std::vector<Column> columns_;
};

struct Token {
  std::vector<std::string> columns;

  const std::string& form() const { return columns.front(); }
  bool operator==(const Token&) const = default;
};

struct Sentence {
  std::vector<Token> tokens;

  std::size_t size() const { return tokens.size(); }
  const std::string& cell(std::size_t position, std::size_t column) const {
    return tokens[position].columns[column];
  }
  bool operator==(const Sentence&) const = default;
};

/// Immutable, validated sequence of sentences sharing one column schema.
class Corpus {
 public:
  /// Throws EmptyCorpus for an empty sentence list, RaggedRow when a token
  /// does not match the schema width or has an empty surface form.
  Corpus(ColumnSchema schema, std::vector<Sentence> sentences,
         std::vector<std::string> provenance = {});

  const ColumnSchema& schema() const { return schema_; }
  const std::vector<Sentence>& sentences() const { return sentences_; }
  const std::vector<std::string>& provenance() const { return provenance_; }

  std::size_t size() const { return sentences_.size(); }
  std::size_t token_count() const;
  std::size_t column_count() const { return schema_.size(); }

  /// All cells of one column, in corpus order.
  std::vector<std::string> column(std::size_t index) const;

  bool operator==(const Corpus&) const = default;

 private:
  ColumnSchema schema_;
  std::vector<Sentence> sentences_;
  std::vector<std::string> provenance_;
};

/// Parses the TAB-separated, blank-line-delimited format. Leading "#" lines
/// are header metadata kept as provenance. Input is NFC-normalized.
Corpus parse_corpus(std::string_view text, const ColumnSchema& schema);

/// Same, with the schema inferred from the first token line.
Corpus parse_corpus(std::string_view text);

std::string write_corpus(const Corpus& corpus);

Corpus read_corpus_file(const std::string& path,
                        const std::optional<ColumnSchema>& schema = std::nullopt);
void write_corpus_file(const Corpus& corpus, const std::string& path);

/// Returns a copy of `corpus` with one more column. `values` holds one entry
/// per token in corpus order.
Corpus append_column(const Corpus& corpus, Column column,
                     std::span<const std::string> values);
Corpus append_column(const Corpus& corpus, std::string name,
                     std::span<const std::string> values);

Corpus drop_column(const Corpus& corpus, std::size_t index);

/// Keeps the listed columns, in the listed order.
Corpus select_columns(const Corpus& corpus, std::span<const std::size_t> indices);

/// Sentences at the given indices, in the given order.
Corpus subset(const Corpus& corpus, std::span<const std::size_t> sentence_indices);

/// Splits a flat per-token vector back into per-sentence chunks.
std::vector<std::vector<std::string>> split_by_sentence(
    const Corpus& corpus, std::span<const std::string> flat);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view contents);

}  // namespace crftag

#endif  // CRFTAG_CORPUS_HPP_
