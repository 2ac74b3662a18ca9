#ifndef CRFTAG_PIPELINES_HPP_
#define CRFTAG_PIPELINES_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "crftag/corpus.hpp"
#include "crftag/crf.hpp"
#include "crftag/morphology.hpp"
#include "crftag/tagset.hpp"

namespace crftag {

enum class Strategy { Direct, Cascade, Decomposed };
enum class Recombination { Crf, Rules };
/// Where stage-feature columns of the training data come from.
enum class StageSource { Gold, Predicted, Jackknifed };

std::string_view strategy_name(Strategy s);
std::string_view recombination_name(Recombination r);
std::string_view stage_source_name(StageSource s);

struct PipelineSpec {
  std::string id = "custom";
  Strategy strategy = Strategy::Direct;
  /// Direct: the feature recipe. Cascade: base columns of every stage.
  /// Decomposed: columns of the four component CRFs.
  FeatureRecipe recipe;
  /// Direct only; cascades and decompositions always end at L2.
  Level target = Level::L2;
  /// Cascade levels, strictly increasing, last one L2.
  std::vector<Level> stages{Level::L0, Level::L1, Level::L2};
  Recombination recombination = Recombination::Rules;
  StageSource stage_source = StageSource::Jackknifed;
  std::size_t jackknife_folds = 5;
  std::uint64_t seed = 1;
  /// Template file applied to every stage; empty = default templates sized
  /// to each stage's observation columns.
  std::string templates_path;
  TrainingOptions training;

  bool operator==(const PipelineSpec&) const = default;
};

/// Configurations I..IVbis, V, VI, VII, VIIbis, VIII, VIIIbis.
PipelineSpec named_pipeline(std::string_view id);
std::vector<std::string> pipeline_names();

/// key = value text with [pipeline] and [hyper] sections;
/// parse_pipeline_spec(format_pipeline_spec(s)) == s.
std::string format_pipeline_spec(const PipelineSpec& spec);
PipelineSpec parse_pipeline_spec(std::string_view text);

/// Checks that a PipelineSpec is internally consistent (throws PipelineConfig).
void validate_pipeline_spec(const PipelineSpec& spec);

struct StagePrediction {
  std::string stage;  // column name, e.g. ResL0 or ResG2
  std::vector<std::string> values;  // one per token
  StageSource source = StageSource::Gold;
};

struct PhaseTimings {
  double features = 0.0;
  double train = 0.0;
  double tag = 0.0;

  double total() const { return features + train + tag; }
  PhaseTimings& operator+=(const PhaseTimings& o) {
    features += o.features;
    train += o.train;
    tag += o.tag;
    return *this;
  }
};

struct PipelineResult {
  /// Test corpus with the stage columns and the final prediction appended.
  Corpus tagged;
  std::vector<std::string> predictions;  // final L2 (or Direct target) per token
  std::vector<StagePrediction> test_stages;
  /// Stage-feature columns the later stages were trained on.
  std::vector<StagePrediction> training_stages;
  PhaseTimings timings;
  std::size_t models_trained = 0;
  std::size_t weight_count = 0;
  std::string template_hash;
};

/// `train` carries a Label column with L2 (or Direct-target) tags; `test`
/// must carry none. Lower levels are derived from L2 through `schema`.
PipelineResult run_direct(const PipelineSpec& spec, const Corpus& train, const Corpus& test,
                          const TagSchema& schema);
PipelineResult run_cascade(const PipelineSpec& spec, const Corpus& train, const Corpus& test,
                           const TagSchema& schema);
PipelineResult run_decomposed(const PipelineSpec& spec, const Corpus& train, const Corpus& test,
                              const TagSchema& schema);
PipelineResult run_pipeline(const PipelineSpec& spec, const Corpus& train, const Corpus& test,
                            const TagSchema& schema);

/// Predictions for every training token from models that never saw the
/// token's sentence: `observations` are split into k folds by sentence.
StagePrediction jackknife_stage_features(const Corpus& observations,
                                         std::span<const std::string> gold,
                                         std::span<const FeatureTemplate> templates,
                                         const TrainingOptions& options, std::size_t k,
                                         std::uint64_t seed, std::string stage = "Res");

}  // namespace crftag

#endif  // CRFTAG_PIPELINES_HPP_
