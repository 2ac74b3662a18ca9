#include "crftag/pipelines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>

#include "crftag/error.hpp"
#include "crftag/folds.hpp"
#include "crftag/templates.hpp"
#include "crftag/text.hpp"

namespace crftag {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Recipes printed in the cascade/decomposition test definitions.
constexpr std::string_view kCascadeV = "mot,lemme,D3(lemme)";
constexpr std::string_view kCascadeVI = "mot,Rmot,Rlemme,D3(mot),D3(lemme)";
constexpr std::string_view kComponents = "mot,lemme,D3(mot)";

std::size_t label_column(const Corpus& c, std::string_view what) {
  const auto col = c.schema().find(ColumnRole::Label);
  if (!col) fail(ErrorCode::MissingColumn, std::string(what) + " corpus has no label column");
  return *col;
}

// Tagging never sees a gold column.
void audit_no_labels(const Corpus& test) {
  if (test.schema().find(ColumnRole::Label))
    fail(ErrorCode::Internal, "leakage: test corpus handed to a tagger still has a label column");
}

std::vector<std::string> project_all(const TagSchema& schema, const std::vector<std::string>& l2,
                                     Level level) {
  if (level == Level::L2) return l2;
  std::vector<std::string> out;
  out.reserve(l2.size());
  for (const auto& t : l2) out.push_back(project_tag(schema, t, level));
  return out;
}

std::string level_digits(const std::vector<Level>& levels, std::size_t upto) {
  std::string s;
  for (std::size_t i = 0; i <= upto; ++i) s += level_name(levels[i]).substr(1);
  return s;
}

struct TemplateSource {
  std::optional<std::vector<FeatureTemplate>> fixed;
  std::string formatted;  // every stage's templates, for the hash

  std::vector<FeatureTemplate> for_columns(std::size_t observation_columns) {
    auto ts = fixed ? *fixed : parse_templates(default_template_text(observation_columns));
    formatted += format_templates(ts);
    formatted += "--\n";
    return ts;
  }
  std::string hash() const { return text::fnv1a_hex(formatted); }
};

TemplateSource template_source(const PipelineSpec& spec) {
  TemplateSource src;
  if (!spec.templates_path.empty()) src.fixed = parse_templates(read_text_file(spec.templates_path));
  return src;
}

// One CRF trained on `observations` (no label column) against `gold`.
LinearChainModel train_stage(const Corpus& observations, std::span<const std::string> gold,
                             std::span<const FeatureTemplate> templates,
                             const TrainingOptions& options) {
  const auto data = append_column(observations, Column{"gold", ColumnRole::Label}, gold);
  return train(data, data.column_count() - 1, templates, options);
}

std::vector<std::string> flatten(const std::vector<TaggedSentence>& tagged) {
  std::vector<std::string> out;
  for (const auto& s : tagged) out.insert(out.end(), s.labels.begin(), s.labels.end());
  return out;
}

std::vector<std::string> tag_flat(const LinearChainModel& m, const Corpus& observations) {
  return flatten(tag(m, observations.sentences()));
}

// Stage-feature column for the training data of a later stage.
std::vector<std::string> training_stage_values(const PipelineSpec& spec, const Corpus& observations,
                                               std::span<const std::string> gold,
                                               const LinearChainModel& full_model,
                                               std::span<const FeatureTemplate> templates,
                                               std::size_t& models_trained) {
  switch (spec.stage_source) {
    case StageSource::Gold:
      return {gold.begin(), gold.end()};
    case StageSource::Predicted:
      return tag_flat(full_model, observations);
    case StageSource::Jackknifed: {
      const std::size_t k = std::min(spec.jackknife_folds, observations.size());
      models_trained += k;
      return jackknife_stage_features(observations, gold, templates, spec.training, k, spec.seed)
          .values;
    }
  }
  fail(ErrorCode::Internal, "unhandled stage source");
}

PipelineResult finish(PipelineResult r, const Corpus& test, std::vector<std::string> final_pred,
                      std::string final_name) {
  Corpus tagged = test;
  for (const auto& st : r.test_stages) tagged = append_column(tagged, st.stage, st.values);
  r.tagged = append_column(tagged, std::move(final_name), final_pred);
  r.predictions = std::move(final_pred);
  return r;
}

}  // namespace

std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Direct: return "direct";
    case Strategy::Cascade: return "cascade";
    case Strategy::Decomposed: return "decomposed";
  }
  return "?";
}

std::string_view recombination_name(Recombination r) {
  return r == Recombination::Crf ? "crf" : "rules";
}

std::string_view stage_source_name(StageSource s) {
  switch (s) {
    case StageSource::Gold: return "gold";
    case StageSource::Predicted: return "predicted";
    case StageSource::Jackknifed: return "jackknifed";
  }
  return "?";
}

std::vector<std::string> pipeline_names() {
  return {"I", "II", "III", "IV", "IIIbis", "IVbis", "V", "VI", "VII", "VIIbis", "VIII", "VIIIbis"};
}

PipelineSpec named_pipeline(std::string_view id) {
  PipelineSpec s;
  s.id = std::string(id);
  for (const auto& r : recipe_names())
    if (r == id) {
      s.strategy = Strategy::Direct;
      s.recipe = named_recipe(id);
      return s;
    }
  if (id == "V" || id == "VI") {
    s.strategy = Strategy::Cascade;
    s.recipe = parse_recipe(id == "V" ? kCascadeV : kCascadeVI);
    s.recipe.name = s.id;
    return s;
  }
  if (id == "VII" || id == "VIIbis" || id == "VIII" || id == "VIIIbis") {
    s.strategy = Strategy::Decomposed;
    const bool bis = id.ends_with("bis");
    s.recipe = bis ? named_recipe("IVbis") : parse_recipe(kComponents);
    s.recipe.name = s.id;
    s.recombination = id.starts_with("VIII") ? Recombination::Rules : Recombination::Crf;
    return s;
  }
  fail(ErrorCode::PipelineConfig, "unknown pipeline '" + std::string(id) + "'");
}

void validate_pipeline_spec(const PipelineSpec& s) {
  if (s.recipe.elements.empty()) fail(ErrorCode::PipelineConfig, "pipeline has an empty recipe");
  if (s.recipe.elements.front().kind != RecipeElement::Kind::Form)
    fail(ErrorCode::PipelineConfig, "recipe must start with mot");
  if (s.strategy == Strategy::Cascade) {
    if (s.stages.empty() || s.stages.back() != Level::L2)
      fail(ErrorCode::PipelineConfig, "cascade stages must end at L2");
    for (std::size_t i = 1; i < s.stages.size(); ++i)
      if (s.stages[i] <= s.stages[i - 1])
        fail(ErrorCode::PipelineConfig, "cascade stages must be strictly increasing (L0, L1, L2)");
  }
  if (s.stage_source == StageSource::Jackknifed && s.jackknife_folds < 2)
    fail(ErrorCode::PipelineConfig, "jackknife-folds must be at least 2");
  if (!(s.training.sigma > 0.0)) fail(ErrorCode::PipelineConfig, "sigma must be positive");
  if (!(s.training.tolerance >= 0.0)) fail(ErrorCode::PipelineConfig, "tolerance must be >= 0");
  if (s.training.threads == 0) fail(ErrorCode::PipelineConfig, "threads must be >= 1");
}

std::string format_pipeline_spec(const PipelineSpec& s) {
  std::ostringstream o;
  o << "[pipeline]\n";
  o << "id = " << s.id << "\n";
  o << "strategy = " << strategy_name(s.strategy) << "\n";
  o << "recipe = " << s.recipe.describe() << "\n";
  o << "recipe-name = " << (s.recipe.name.empty() ? "-" : s.recipe.name) << "\n";
  o << "target = " << level_name(s.target) << "\n";
  std::vector<std::string> st;
  for (auto l : s.stages) st.emplace_back(level_name(l));
  o << "stages = " << text::join(st, ",") << "\n";
  o << "recombination = " << recombination_name(s.recombination) << "\n";
  o << "stage-source = " << stage_source_name(s.stage_source) << "\n";
  o << "jackknife-folds = " << s.jackknife_folds << "\n";
  o << "seed = " << s.seed << "\n";
  o << "templates = " << (s.templates_path.empty() ? "default" : s.templates_path) << "\n";
  o << "\n[hyper]\n";
  o << "sigma = " << text::format_double(s.training.sigma) << "\n";
  o << "max-iterations = " << s.training.max_iterations << "\n";
  o << "tolerance = " << text::format_double(s.training.tolerance) << "\n";
  o << "cutoff = " << s.training.cutoff << "\n";
  o << "threads = " << s.training.threads << "\n";
  o << "history = " << s.training.history << "\n";
  return o.str();
}

PipelineSpec parse_pipeline_spec(std::string_view input) {
  std::map<std::string, std::string> kv;
  std::string section;
  std::size_t line_no = 0;
  for (const auto& raw : text::split(input, '\n')) {
    ++line_no;
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto where = "pipeline spec line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      section = std::string(line);
      if (section != "[pipeline]" && section != "[hyper]")
        fail(ErrorCode::PipelineConfig, where + "unknown section " + section);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos || section.empty())
      fail(ErrorCode::PipelineConfig, where + "expected 'key = value' inside a section");
    const std::string key = section + std::string(text::trim(line.substr(0, eq)));
    if (!kv.emplace(key, std::string(text::trim(line.substr(eq + 1)))).second)
      fail(ErrorCode::PipelineConfig, where + "duplicate key");
  }

  const auto take = [&](const std::string& key) -> std::optional<std::string> {
    const auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  const auto as_size = [](const std::string& key, const std::string& v) -> std::uint64_t {
    std::size_t pos = 0;
    std::uint64_t n = 0;
    try {
      n = std::stoull(v, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != v.size() || v.empty() || v[0] == '-')
      fail(ErrorCode::PipelineConfig, key + " must be a non-negative integer, got '" + v + "'");
    return n;
  };
  const auto as_double = [](const std::string& key, const std::string& v) {
    try {
      return text::parse_double(v);
    } catch (const std::exception&) {
      fail(ErrorCode::PipelineConfig, key + " must be a number, got '" + v + "'");
    }
  };

  PipelineSpec s;
  if (auto id = take("[pipeline]id")) {
    const auto names = pipeline_names();
    if (std::find(names.begin(), names.end(), *id) != names.end()) s = named_pipeline(*id);
    else s.id = *id;
  }
  if (auto v = take("[pipeline]strategy")) {
    if (*v == "direct") s.strategy = Strategy::Direct;
    else if (*v == "cascade") s.strategy = Strategy::Cascade;
    else if (*v == "decomposed") s.strategy = Strategy::Decomposed;
    else fail(ErrorCode::PipelineConfig, "unknown strategy '" + *v + "'");
  }
  if (auto v = take("[pipeline]recipe")) {
    try {
      s.recipe = parse_recipe(*v);
    } catch (const Error& e) {
      fail(ErrorCode::PipelineConfig, std::string("recipe: ") + e.what());
    }
  }
  if (auto v = take("[pipeline]recipe-name")) s.recipe.name = *v == "-" ? "" : *v;
  if (auto v = take("[pipeline]target")) s.target = parse_level(*v);
  if (auto v = take("[pipeline]stages")) {
    s.stages.clear();
    for (const auto& p : text::split(*v, ',')) s.stages.push_back(parse_level(text::trim(p)));
  }
  if (auto v = take("[pipeline]recombination")) {
    if (*v == "crf") s.recombination = Recombination::Crf;
    else if (*v == "rules") s.recombination = Recombination::Rules;
    else fail(ErrorCode::PipelineConfig, "unknown recombination '" + *v + "'");
  }
  if (auto v = take("[pipeline]stage-source")) {
    if (*v == "gold") s.stage_source = StageSource::Gold;
    else if (*v == "predicted") s.stage_source = StageSource::Predicted;
    else if (*v == "jackknifed") s.stage_source = StageSource::Jackknifed;
    else fail(ErrorCode::PipelineConfig, "unknown stage-source '" + *v + "'");
  }
  if (auto v = take("[pipeline]jackknife-folds")) s.jackknife_folds = as_size("jackknife-folds", *v);
  if (auto v = take("[pipeline]seed")) s.seed = as_size("seed", *v);
  if (auto v = take("[pipeline]templates")) s.templates_path = *v == "default" ? "" : *v;
  if (auto v = take("[hyper]sigma")) s.training.sigma = as_double("sigma", *v);
  if (auto v = take("[hyper]max-iterations")) s.training.max_iterations = as_size("max-iterations", *v);
  if (auto v = take("[hyper]tolerance")) s.training.tolerance = as_double("tolerance", *v);
  if (auto v = take("[hyper]cutoff")) s.training.cutoff = as_size("cutoff", *v);
  if (auto v = take("[hyper]threads")) s.training.threads = as_size("threads", *v);
  if (auto v = take("[hyper]history")) s.training.history = as_size("history", *v);
  if (!kv.empty()) fail(ErrorCode::PipelineConfig, "unknown key '" + kv.begin()->first + "'");
  validate_pipeline_spec(s);
  return s;
}

StagePrediction jackknife_stage_features(const Corpus& observations,
                                         std::span<const std::string> gold,
                                         std::span<const FeatureTemplate> templates,
                                         const TrainingOptions& options, std::size_t k,
                                         std::uint64_t seed, std::string stage) {
  if (gold.size() != observations.token_count())
    fail(ErrorCode::LengthMismatch, "jackknife: gold has " + std::to_string(gold.size()) +
                                        " labels for " + std::to_string(observations.token_count()) +
                                        " tokens");
  const auto folds = kfold_split(observations, k, seed);

  std::vector<std::size_t> offset(observations.size() + 1, 0);
  for (std::size_t i = 0; i < observations.size(); ++i)
    offset[i + 1] = offset[i] + observations.sentences()[i].size();

  StagePrediction out{std::move(stage), std::vector<std::string>(gold.size()), StageSource::Jackknifed};
  for (std::size_t f = 0; f < k; ++f) {
    const auto train_idx = folds.train_indices(f);
    const auto test_idx = folds.test_indices(f);
    std::vector<std::string> fold_gold;
    for (auto i : train_idx) fold_gold.insert(fold_gold.end(), gold.begin() + offset[i],
                                              gold.begin() + offset[i + 1]);
    const auto model = train_stage(subset(observations, train_idx), fold_gold, templates, options);
    for (auto i : test_idx) {
      const auto tagged = tag_sentence(model, observations.sentences()[i]);
      std::copy(tagged.labels.begin(), tagged.labels.end(), out.values.begin() + offset[i]);
    }
  }
  return out;
}

PipelineResult run_direct(const PipelineSpec& spec, const Corpus& train, const Corpus& test,
                          const TagSchema& schema) {
  if (spec.strategy != Strategy::Direct) fail(ErrorCode::PipelineConfig, "not a direct pipeline");
  validate_pipeline_spec(spec);
  audit_no_labels(test);
  PipelineResult r{test, {}, {}, {}, {}, 0, 0, {}};
  auto templates = template_source(spec);

  auto t0 = Clock::now();
  const auto gold = project_all(schema, train.column(label_column(train, "training")), spec.target);
  const auto train_obs = feature_view(train, spec.recipe);
  const auto test_obs = feature_view(test, spec.recipe);
  r.timings.features += seconds_since(t0);

  t0 = Clock::now();
  const auto ts = templates.for_columns(train_obs.column_count());
  auto model = train_stage(train_obs, gold, ts, spec.training);
  r.timings.train += seconds_since(t0);
  ++r.models_trained;
  r.weight_count += model.weights.size();

  t0 = Clock::now();
  auto pred = tag_flat(model, test_obs);
  r.timings.tag += seconds_since(t0);
  r.template_hash = templates.hash();
  return finish(std::move(r), test, std::move(pred), "Pred" + std::string(level_name(spec.target)));
}

PipelineResult run_cascade(const PipelineSpec& spec, const Corpus& train, const Corpus& test,
                           const TagSchema& schema) {
  if (spec.strategy != Strategy::Cascade) fail(ErrorCode::PipelineConfig, "not a cascade pipeline");
  validate_pipeline_spec(spec);
  audit_no_labels(test);
  PipelineResult r{test, {}, {}, {}, {}, 0, 0, {}};
  auto templates = template_source(spec);

  auto t0 = Clock::now();
  const auto l2 = train.column(label_column(train, "training"));
  Corpus train_obs = feature_view(train, spec.recipe);
  Corpus test_obs = feature_view(test, spec.recipe);
  r.timings.features += seconds_since(t0);

  std::vector<std::string> final_pred;
  for (std::size_t i = 0; i < spec.stages.size(); ++i) {
    const Level level = spec.stages[i];
    const auto gold = project_all(schema, l2, level);
    const bool last = i + 1 == spec.stages.size();

    t0 = Clock::now();
    const auto ts = templates.for_columns(train_obs.column_count());
    const auto model = train_stage(train_obs, gold, ts, spec.training);
    ++r.models_trained;
    r.weight_count += model.weights.size();
    std::vector<std::string> train_feature;
    if (!last)
      train_feature = training_stage_values(spec, train_obs, gold, model, ts, r.models_trained);
    r.timings.train += seconds_since(t0);

    t0 = Clock::now();
    auto pred = tag_flat(model, test_obs);
    r.timings.tag += seconds_since(t0);

    if (last) {
      final_pred = std::move(pred);
      break;
    }
    // ResL0 after the L0 stage, ResL01 after L1, ...
    const std::string name = "ResL" + level_digits(spec.stages, i);
    t0 = Clock::now();
    train_obs = append_column(train_obs, Column{name, ColumnRole::Prediction}, train_feature);
    test_obs = append_column(test_obs, Column{name, ColumnRole::Prediction}, pred);
    r.timings.features += seconds_since(t0);
    r.training_stages.push_back({name, std::move(train_feature), spec.stage_source});
    r.test_stages.push_back({name, std::move(pred), StageSource::Predicted});
  }
  r.template_hash = templates.hash();
  return finish(std::move(r), test, std::move(final_pred), "PredL2");
}

PipelineResult run_decomposed(const PipelineSpec& spec, const Corpus& train, const Corpus& test,
                              const TagSchema& schema) {
  if (spec.strategy != Strategy::Decomposed)
    fail(ErrorCode::PipelineConfig, "not a decomposed pipeline");
  validate_pipeline_spec(spec);
  audit_no_labels(test);
  PipelineResult r{test, {}, {}, {}, {}, 0, 0, {}};
  auto templates = template_source(spec);

  auto t0 = Clock::now();
  const auto l2 = train.column(label_column(train, "training"));
  std::array<std::vector<std::string>, kComponentCount> gold;
  for (const auto& tag : l2) {
    if (!schema.has_tag(Level::L2, tag))
      fail(ErrorCode::UndecomposableTag, "training tag '" + tag + "' is not in the schema's L2 inventory");
    const auto& tuple = schema.tuple_of(tag);
    for (std::size_t c = 0; c < kComponentCount; ++c) gold[c].push_back(component_cell(tuple[c]));
  }
  const auto train_obs = feature_view(train, spec.recipe);
  const auto test_obs = feature_view(test, spec.recipe);
  r.timings.features += seconds_since(t0);

  const auto ts = templates.for_columns(train_obs.column_count());
  std::array<LinearChainModel, kComponentCount> models;
  for (std::size_t c = 0; c < kComponentCount; ++c) {
    t0 = Clock::now();
    models[c] = train_stage(train_obs, gold[c], ts, spec.training);
    r.timings.train += seconds_since(t0);
    ++r.models_trained;
    r.weight_count += models[c].weights.size();

    t0 = Clock::now();
    r.test_stages.push_back({"ResG" + std::to_string(c), tag_flat(models[c], test_obs),
                             StageSource::Predicted});
    r.timings.tag += seconds_since(t0);
  }

  std::vector<std::string> final_pred;
  final_pred.reserve(test.token_count());
  if (spec.recombination == Recombination::Rules) {
    t0 = Clock::now();
    for (const auto& sentence : test_obs.sentences()) {
      std::array<std::vector<double>, kComponentCount> marg;
      for (std::size_t c = 0; c < kComponentCount; ++c) marg[c] = node_marginals(models[c], sentence);
      for (std::size_t t = 0; t < sentence.size(); ++t) {
        std::array<ScoredComponent, kComponentCount> scored;
        for (std::size_t c = 0; c < kComponentCount; ++c) {
          const std::size_t L = models[c].labels.size();
          for (std::size_t y = 0; y < L; ++y) {
            // log(0) would poison the sum; the floor only orders impossible symbols last
            const double p = std::max(marg[c][t * L + y], 1e-300);
            scored[c].emplace_back(component_symbol(models[c].labels[y]), std::log(p));
          }
        }
        final_pred.push_back(repair(schema, scored));
      }
    }
    r.timings.tag += seconds_since(t0);
  } else {
    // Fifth CRF over mot[, lemme] and the four component predictions.
    FeatureRecipe base;
    base.elements.push_back(RecipeElement::parse("mot"));
    if (spec.recipe.needs_lemma()) base.elements.push_back(RecipeElement::parse("lemme"));
    t0 = Clock::now();
    Corpus rec_train = feature_view(train, base);
    Corpus rec_test = feature_view(test, base);
    r.timings.features += seconds_since(t0);
    for (std::size_t c = 0; c < kComponentCount; ++c) {
      const std::string name = "ResG" + std::to_string(c);
      t0 = Clock::now();
      auto values = training_stage_values(spec, train_obs, gold[c], models[c], ts, r.models_trained);
      r.timings.train += seconds_since(t0);
      rec_train = append_column(rec_train, Column{name, ColumnRole::Prediction}, values);
      rec_test = append_column(rec_test, Column{name, ColumnRole::Prediction}, r.test_stages[c].values);
      r.training_stages.push_back({name, std::move(values), spec.stage_source});
    }
    t0 = Clock::now();
    const auto rts = templates.for_columns(rec_train.column_count());
    const auto model = train_stage(rec_train, l2, rts, spec.training);
    r.timings.train += seconds_since(t0);
    ++r.models_trained;
    r.weight_count += model.weights.size();
    t0 = Clock::now();
    final_pred = tag_flat(model, rec_test);
    r.timings.tag += seconds_since(t0);
  }
  r.template_hash = templates.hash();
  return finish(std::move(r), test, std::move(final_pred), "PredL2");
}

PipelineResult run_pipeline(const PipelineSpec& spec, const Corpus& train, const Corpus& test,
                            const TagSchema& schema) {
  switch (spec.strategy) {
    case Strategy::Direct: return run_direct(spec, train, test, schema);
    case Strategy::Cascade: return run_cascade(spec, train, test, schema);
    case Strategy::Decomposed: return run_decomposed(spec, train, test, schema);
  }
  fail(ErrorCode::Internal, "unhandled strategy");
}

}  // namespace crftag
