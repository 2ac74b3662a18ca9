#ifndef CRFTAG_CRF_HPP_
#define CRFTAG_CRF_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crftag/corpus.hpp"
#include "crftag/lattice.hpp"
#include "crftag/templates.hpp"

namespace crftag {

struct TrainingOptions {
  double sigma = 1.0;
  std::size_t max_iterations = 300;
  double tolerance = 1e-5;
  std::uint64_t cutoff = 1;
  /// Worker threads for gradient evaluation; never changes results.
  std::size_t threads = 1;
  std::size_t history = 7;

  bool operator==(const TrainingOptions&) const = default;
};

/// A trained linear-chain CRF. Observation columns are the first
/// `observation_columns` columns of a sentence; templates index into them.
struct LinearChainModel {
  std::vector<std::string> labels;
  std::vector<FeatureTemplate> templates;
  FeatureDictionary dictionary;
  std::vector<double> weights;
  std::size_t observation_columns = 0;

  double sigma = 1.0;
  std::size_t iterations = 0;
  std::vector<double> objective_trace;
  std::string stop_reason;
  /// Feature recipe applied to raw corpora before tagging ("" = none).
  std::string recipe;

  std::optional<std::size_t> label_index(std::string_view label) const;
  std::string template_hash() const;
};

/// Feature firings of one sentence, as weight-block base indices.
/// Unigram bases at position t fire with label y_t; bigram bases at t >= 1
/// fire with (y_{t-1}, y_t).
struct EncodedSentence {
  std::size_t length = 0;
  std::vector<std::uint32_t> unigram_offsets;
  std::vector<std::uint32_t> unigram;
  std::vector<std::uint32_t> bigram_offsets;
  std::vector<std::uint32_t> bigram;
  std::vector<std::uint32_t> gold;

  std::span<const std::uint32_t> unigrams_at(std::size_t t) const {
    return std::span<const std::uint32_t>(unigram).subspan(unigram_offsets[t],
                                                            unigram_offsets[t + 1] - unigram_offsets[t]);
  }
  std::span<const std::uint32_t> bigrams_at(std::size_t t) const {
    return std::span<const std::uint32_t>(bigram).subspan(bigram_offsets[t],
                                                           bigram_offsets[t + 1] - bigram_offsets[t]);
  }
};

/// Expands the model templates over `sentence`; unknown feature strings are
/// dropped. `gold_column`, when set, is read and mapped to label indices
/// (throws UnknownLabel). Throws ColumnMismatch for too-narrow sentences.
EncodedSentence encode_sentence(const LinearChainModel& model, const Sentence& sentence,
                                std::optional<std::size_t> gold_column = std::nullopt);

Lattice build_lattice(const LinearChainModel& model, const EncodedSentence& sentence,
                      std::span<const double> weights);
Lattice build_lattice(const LinearChainModel& model, const Sentence& sentence);

struct ObjectiveValue {
  double value = 0.0;
  std::vector<double> gradient;
};

/// Penalized conditional log-likelihood of `data` (gold labels in
/// `label_column`) and its gradient: empirical minus expected feature
/// counts minus weights / sigma^2.
ObjectiveValue objective_and_gradient(const LinearChainModel& model, const Corpus& data,
                                      std::size_t label_column, double sigma,
                                      std::size_t threads = 1);

/// Trains on `data`; every column except `label_column` is an observation.
/// Throws EmptyTrainingSet, BadColumn, NonFiniteObjective.
LinearChainModel train(const Corpus& data, std::size_t label_column,
                       std::span<const FeatureTemplate> templates,
                       const TrainingOptions& options);

struct TaggedSentence {
  std::vector<std::string> labels;
  /// Node marginal of the chosen label (filled when requested).
  std::vector<double> confidence;
};

TaggedSentence tag_sentence(const LinearChainModel& model, const Sentence& sentence,
                            bool with_confidence = false);

std::vector<TaggedSentence> tag(const LinearChainModel& model,
                                std::span<const Sentence> sentences,
                                bool with_confidence = false);

/// Node marginals (T x L, label order of the model) for one sentence.
std::vector<double> node_marginals(const LinearChainModel& model, const Sentence& sentence);

/// Versioned text model file; read(write(m)) tags identically to m.
std::string write_model(const LinearChainModel& model);
LinearChainModel read_model(std::string_view text);

void save_model(const LinearChainModel& model, const std::string& path);
LinearChainModel load_model(const std::string& path);

}  // namespace crftag

#endif  // CRFTAG_CRF_HPP_
