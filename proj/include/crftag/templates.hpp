#ifndef CRFTAG_TEMPLATES_HPP_
#define CRFTAG_TEMPLATES_HPP_

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "crftag/corpus.hpp"

namespace crftag {

/// One line of a CRF++-style template file, e.g. "U03:%x[-2,0]/%x[-1,0]".
/// Unigram templates pair their expansion with the current label, bigram
/// templates with the (previous, current) label pair.
struct FeatureTemplate {
  enum class Kind { Unigram, Bigram };
  struct Macro {
    int row = 0;
    std::size_t column = 0;
    bool operator==(const Macro&) const = default;
  };

  std::string id;
  Kind kind = Kind::Unigram;
  std::vector<Macro> macros;
  /// Text around the macros; literals.size() == macros.size() + 1.
  std::vector<std::string> literals;
  std::string text;

  std::size_t max_column() const;
  bool operator==(const FeatureTemplate&) const = default;
};

/// Parses a template file: "#" comments and blank lines are skipped, every
/// other line starts with 'U' or 'B'. Throws SyntaxError / DuplicateId.
std::vector<FeatureTemplate> parse_templates(std::string_view text);

/// Canonical text (one template per line), used for hashing and model files.
std::string format_templates(std::span<const FeatureTemplate> templates);

/// Window +-2 unigrams and the two adjacent-pair conjunctions for every
/// observation column, plus the label bigram "B".
std::string default_template_text(std::size_t observation_columns);

/// Substitutes every %x[row,col] with the cell at (position+row, col);
/// rows outside the sentence become _B-k (left) / _B+k (right).
/// Throws BadColumn when col is outside the sentence's columns.
std::string expand(const FeatureTemplate& tmpl, const Sentence& sentence,
                   std::size_t position);

/// Maps expanded feature strings to blocks of weights: a unigram string owns
/// one weight per label, a bigram string one weight per label pair.
class FeatureDictionary {
 public:
  struct Entry {
    std::string feature;
    FeatureTemplate::Kind kind = FeatureTemplate::Kind::Unigram;
    std::size_t base = 0;
    std::uint64_t frequency = 0;
  };

  FeatureDictionary() = default;
  explicit FeatureDictionary(std::size_t label_count) : label_count_(label_count) {}

  /// Registers a feature string with its frequency. Returns its base index.
  std::size_t add(std::string feature, FeatureTemplate::Kind kind, std::uint64_t frequency);

  std::optional<std::size_t> base(std::string_view feature) const;

  std::size_t label_count() const { return label_count_; }
  /// Number of weights, i.e. (feature, label) and (feature, label pair) entries.
  std::size_t size() const { return weight_count_; }
  /// Number of distinct feature strings.
  std::size_t feature_count() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }

  bool operator==(const FeatureDictionary& o) const;

 private:
  std::size_t label_count_ = 0;
  std::size_t weight_count_ = 0;
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

inline constexpr std::uint64_t kInfiniteCutoff = std::numeric_limits<std::uint64_t>::max();

/// Label alphabet of a column: distinct values in byte order.
std::vector<std::string> label_alphabet(const Corpus& corpus, std::size_t label_column);

/// Expands all templates over `observations` (one label per token in
/// `labels`) and keeps feature strings seen at least `cutoff` times. Indices
/// follow first occurrence in corpus order.
FeatureDictionary build_dictionary(const Corpus& observations,
                                   std::span<const FeatureTemplate> templates,
                                   std::size_t label_count, std::uint64_t cutoff);

/// Convenience overload: observations are all columns except `label_column`.
FeatureDictionary build_dictionary(const Corpus& corpus,
                                   std::span<const FeatureTemplate> templates,
                                   std::size_t label_column, std::uint64_t cutoff,
                                   std::vector<std::string>* labels_out);

}  // namespace crftag

#endif  // CRFTAG_TEMPLATES_HPP_
