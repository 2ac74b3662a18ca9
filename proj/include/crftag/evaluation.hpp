#ifndef CRFTAG_EVALUATION_HPP_
#define CRFTAG_EVALUATION_HPP_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crftag/corpus.hpp"
#include "crftag/folds.hpp"
#include "crftag/pipelines.hpp"
#include "crftag/tagset.hpp"

namespace crftag {

/// Exact-match rate. Throws LengthMismatch, EmptyInput.
double token_accuracy(std::span<const std::string> gold, std::span<const std::string> pred);

/// Mean over tokens of matching components / 4 (epsilon matches epsilon).
/// Throws UndecomposableTag for tags outside the schema's L2 inventory.
double partial_credit(std::span<const std::string> gold, std::span<const std::string> pred,
                      const TagSchema& schema);

struct FoldResult {
  std::size_t fold = 0;
  std::size_t train_sentences = 0;
  std::size_t test_sentences = 0;
  std::size_t test_tokens = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
  /// Accuracy of the final prediction projected to each level, when the
  /// tags belong to the schema.
  std::map<std::string, double> levels;
  /// G0..G3 accuracy: component CRF outputs for decomposed pipelines,
  /// otherwise the decomposed final prediction.
  std::map<std::string, double> components;
  /// Intermediate stage columns (ResL0, ResL01, ResG0...) against their gold.
  std::map<std::string, double> stages;
  std::optional<double> partial;
  std::size_t models_trained = 0;
  std::size_t weight_count = 0;
  PhaseTimings timings;
};

struct ConfusionEntry {
  std::string gold;
  std::string pred;
  std::size_t count = 0;
};

struct EvalReport {
  PipelineSpec spec;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::string schema_hash;
  std::string template_hash;
  std::string corpus_hash;
  std::size_t corpus_sentences = 0;
  std::size_t corpus_tokens = 0;
  bool leakage_audit_passed = false;

  std::vector<FoldResult> folds;
  double mean_accuracy = 0.0;    // arithmetic mean of fold accuracies
  double pooled_accuracy = 0.0;  // all test tokens together
  std::map<std::string, double> levels;
  std::map<std::string, double> components;
  std::map<std::string, double> stages;
  std::optional<double> partial;
  std::vector<ConfusionEntry> confusion;  // most frequent errors first
  PhaseTimings timings;
};

/// k train/tag/score rounds over a seeded sentence partition. Each test
/// fold loses its label column before it reaches the pipeline.
EvalReport cross_validate(const PipelineSpec& spec, const Corpus& corpus, const TagSchema& schema,
                          std::size_t k, std::uint64_t seed, std::size_t confusion_rows = 10);

/// Stable-key-order text report. Timings are left out so that re-running
/// the same configuration reproduces it byte for byte.
std::string format_report(const EvalReport& report);

/// One TAB-separated row per fold, preceded by "#" lines with the run's
/// identity (spec, seed, hashes).
std::string format_fold_table(const EvalReport& report);

/// Wall-clock seconds per fold and phase (features, train, tag).
std::string format_timings(const EvalReport& report);

}  // namespace crftag

#endif  // CRFTAG_EVALUATION_HPP_
