#include "crftag/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "crftag/error.hpp"
#include "crftag/text.hpp"

namespace crftag {

namespace {

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

bool all_in_l2(const TagSchema& schema, std::span<const std::string> tags) {
  return std::all_of(tags.begin(), tags.end(),
                     [&](const std::string& t) { return schema.has_tag(Level::L2, t); });
}

std::vector<std::string> project_all(const TagSchema& schema, std::span<const std::string> l2,
                                     Level level) {
  std::vector<std::string> out;
  out.reserve(l2.size());
  for (const auto& t : l2) out.push_back(project_tag(schema, t, level));
  return out;
}

std::vector<std::string> component_column(const TagSchema& schema, std::span<const std::string> l2,
                                          std::size_t c) {
  std::vector<std::string> out;
  out.reserve(l2.size());
  for (const auto& t : l2) out.push_back(component_cell(schema.tuple_of(t)[c]));
  return out;
}

bool final_is_l2(const PipelineSpec& spec) {
  return spec.strategy != Strategy::Direct || spec.target == Level::L2;
}

// Mean of a keyed quantity over the folds that all report it.
std::map<std::string, double> mean_over(const std::vector<FoldResult>& folds,
                                        std::map<std::string, double> FoldResult::*field) {
  std::map<std::string, double> out;
  if (folds.empty()) return out;
  for (const auto& [key, v] : folds.front().*field) {
    double sum = 0.0;
    bool everywhere = true;
    for (const auto& f : folds) {
      const auto it = (f.*field).find(key);
      if (it == (f.*field).end()) {
        everywhere = false;
        break;
      }
      sum += it->second;
    }
    if (everywhere) out[key] = sum / double(folds.size());
  }
  return out;
}

void write_map(std::ostringstream& o, const std::string& prefix, const std::map<std::string, double>& m) {
  for (const auto& [k, v] : m) o << prefix << k << " = " << fixed(v) << "\n";
}

}  // namespace

double token_accuracy(std::span<const std::string> gold, std::span<const std::string> pred) {
  if (gold.size() != pred.size())
    fail(ErrorCode::LengthMismatch, std::to_string(gold.size()) + " gold vs " +
                                        std::to_string(pred.size()) + " predicted labels");
  if (gold.empty()) fail(ErrorCode::EmptyInput, "no tokens to score");
  std::size_t ok = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) ok += gold[i] == pred[i];
  return double(ok) / double(gold.size());
}

double partial_credit(std::span<const std::string> gold, std::span<const std::string> pred,
                      const TagSchema& schema) {
  if (gold.size() != pred.size())
    fail(ErrorCode::LengthMismatch, std::to_string(gold.size()) + " gold vs " +
                                        std::to_string(pred.size()) + " predicted labels");
  if (gold.empty()) fail(ErrorCode::EmptyInput, "no tokens to score");
  const auto tuple = [&](const std::string& t) -> const ComponentTag& {
    if (!schema.has_tag(Level::L2, t))
      fail(ErrorCode::UndecomposableTag, "'" + t + "' is not in the schema's L2 inventory");
    return schema.tuple_of(t);
  };
  std::size_t matches = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto& g = tuple(gold[i]);
    const auto& p = tuple(pred[i]);
    for (std::size_t c = 0; c < kComponentCount; ++c) matches += g[c] == p[c];
  }
  return double(matches) / double(kComponentCount * gold.size());
}

EvalReport cross_validate(const PipelineSpec& spec, const Corpus& corpus, const TagSchema& schema,
                          std::size_t k, std::uint64_t seed, std::size_t confusion_rows) {
  validate_pipeline_spec(spec);
  const auto label_col = corpus.schema().find(ColumnRole::Label);
  if (!label_col) fail(ErrorCode::MissingColumn, "cross-validation needs a label column");
  const auto folds = kfold_split(corpus, k, seed);

  EvalReport report;
  report.spec = spec;
  report.k = k;
  report.seed = seed;
  report.schema_hash = schema.hash();
  report.corpus_hash = text::fnv1a_hex(write_corpus(corpus));
  report.corpus_sentences = corpus.size();
  report.corpus_tokens = corpus.token_count();
  report.leakage_audit_passed = true;

  std::map<std::pair<std::string, std::string>, std::size_t> errors;
  std::size_t pooled_ok = 0, pooled_n = 0;

  for (std::size_t f = 0; f < k; ++f) {
    const auto train_idx = folds.train_indices(f);
    const auto test_idx = folds.test_indices(f);
    const Corpus train = subset(corpus, train_idx);
    const Corpus test_full = subset(corpus, test_idx);
    const auto l2_gold = test_full.column(*label_col);
    const Corpus test = drop_column(test_full, *label_col);
    if (test.schema().find(ColumnRole::Label)) {
      report.leakage_audit_passed = false;
      fail(ErrorCode::Internal, "leakage audit: test fold still carries a label column");
    }

    const auto result = run_pipeline(spec, train, test, schema);

    FoldResult fr;
    fr.fold = f;
    fr.train_sentences = train.size();
    fr.test_sentences = test.size();
    fr.test_tokens = test.token_count();
    fr.models_trained = result.models_trained;
    fr.weight_count = result.weight_count;
    fr.timings = result.timings;

    const bool l2_final = final_is_l2(spec);
    const auto gold = l2_final ? l2_gold : project_all(schema, l2_gold, spec.target);
    const auto& pred = result.predictions;
    fr.accuracy = token_accuracy(gold, pred);
    for (std::size_t i = 0; i < gold.size(); ++i) {
      if (gold[i] == pred[i]) ++fr.correct;
      else ++errors[{gold[i], pred[i]}];
    }
    pooled_ok += fr.correct;
    pooled_n += gold.size();

    const bool in_schema = l2_final && all_in_l2(schema, gold) && all_in_l2(schema, pred);
    if (in_schema) {
      for (Level lv : {Level::L0, Level::L1})
        fr.levels[std::string(level_name(lv))] =
            token_accuracy(project_all(schema, gold, lv), project_all(schema, pred, lv));
      fr.levels["L2"] = fr.accuracy;
      fr.partial = partial_credit(gold, pred, schema);
    } else if (!l2_final) {
      fr.levels[std::string(level_name(spec.target))] = fr.accuracy;
    }

    if (spec.strategy == Strategy::Decomposed && all_in_l2(schema, gold)) {
      for (std::size_t c = 0; c < kComponentCount; ++c)
        fr.components["G" + std::to_string(c)] =
            token_accuracy(component_column(schema, gold, c), result.test_stages[c].values);
    } else if (in_schema) {
      for (std::size_t c = 0; c < kComponentCount; ++c)
        fr.components["G" + std::to_string(c)] =
            token_accuracy(component_column(schema, gold, c), component_column(schema, pred, c));
    }
    if (spec.strategy == Strategy::Cascade && all_in_l2(schema, gold)) {
      for (std::size_t i = 0; i < result.test_stages.size(); ++i)
        fr.stages[result.test_stages[i].stage] = token_accuracy(
            project_all(schema, gold, spec.stages[i]), result.test_stages[i].values);
    }

    if (f == 0) report.template_hash = result.template_hash;
    report.timings += fr.timings;
    report.folds.push_back(std::move(fr));
  }

  double sum = 0.0;
  for (const auto& fr : report.folds) sum += fr.accuracy;
  report.mean_accuracy = sum / double(k);
  report.pooled_accuracy = double(pooled_ok) / double(pooled_n);
  report.levels = mean_over(report.folds, &FoldResult::levels);
  report.components = mean_over(report.folds, &FoldResult::components);
  report.stages = mean_over(report.folds, &FoldResult::stages);
  if (std::all_of(report.folds.begin(), report.folds.end(),
                  [](const FoldResult& fr) { return fr.partial.has_value(); })) {
    double p = 0.0;
    for (const auto& fr : report.folds) p += *fr.partial;
    report.partial = p / double(k);
  }

  for (const auto& [key, n] : errors) report.confusion.push_back({key.first, key.second, n});
  std::stable_sort(report.confusion.begin(), report.confusion.end(),
                   [](const ConfusionEntry& a, const ConfusionEntry& b) { return a.count > b.count; });
  if (report.confusion.size() > confusion_rows) report.confusion.resize(confusion_rows);
  return report;
}

std::string format_report(const EvalReport& r) {
  std::ostringstream o;
  o << "crftag-cv-report 1\n\n[run]\n";
  o << "pipeline = " << r.spec.id << "\n";
  o << "strategy = " << strategy_name(r.spec.strategy) << "\n";
  o << "k = " << r.k << "\n";
  o << "seed = " << r.seed << "\n";
  o << "corpus-hash = " << r.corpus_hash << "\n";
  o << "corpus-sentences = " << r.corpus_sentences << "\n";
  o << "corpus-tokens = " << r.corpus_tokens << "\n";
  o << "schema-hash = " << r.schema_hash << "\n";
  o << "template-hash = " << r.template_hash << "\n";
  o << "leakage-audit = " << (r.leakage_audit_passed ? "passed" : "FAILED") << "\n";

  o << "\n[spec]\n";
  // thread count never changes results, so it stays out of the report
  for (const auto& line : text::split(format_pipeline_spec(r.spec), '\n'))
    if (!line.empty() && line.front() != '[' && !line.starts_with("threads ")) o << line << "\n";

  o << "\n[summary]\n";
  o << "mean-accuracy = " << fixed(r.mean_accuracy) << "\n";
  o << "pooled-accuracy = " << fixed(r.pooled_accuracy) << "\n";
  if (r.partial) o << "partial-credit = " << fixed(*r.partial) << "\n";
  write_map(o, "level-", r.levels);
  write_map(o, "component-", r.components);
  write_map(o, "stage-", r.stages);

  o << "\n[folds]\n";
  o << "fold\ttrain-sentences\ttest-sentences\ttest-tokens\tcorrect\taccuracy\tmodels\tweights\n";
  for (const auto& f : r.folds)
    o << f.fold << "\t" << f.train_sentences << "\t" << f.test_sentences << "\t" << f.test_tokens
      << "\t" << f.correct << "\t" << fixed(f.accuracy) << "\t" << f.models_trained << "\t"
      << f.weight_count << "\n";

  o << "\n[confusion]\n";
  o << "gold\tpredicted\tcount\n";
  for (const auto& c : r.confusion) o << c.gold << "\t" << c.pred << "\t" << c.count << "\n";
  return o.str();
}

std::string format_fold_table(const EvalReport& r) {
  std::ostringstream o;
  o << "# pipeline=" << r.spec.id << " k=" << r.k << " seed=" << r.seed
    << " schema=" << r.schema_hash << " templates=" << r.template_hash
    << " corpus=" << r.corpus_hash << "\n";
  o << "# recipe=" << r.spec.recipe.describe()
    << " stage-source=" << stage_source_name(r.spec.stage_source) << "\n";

  std::vector<std::string> extra;
  if (!r.folds.empty()) {
    for (const auto& [k, v] : r.folds.front().levels) extra.push_back("level-" + k);
    for (const auto& [k, v] : r.folds.front().components) extra.push_back("component-" + k);
    for (const auto& [k, v] : r.folds.front().stages) extra.push_back("stage-" + k);
  }
  o << "pipeline\tfold\ttest_tokens\taccuracy";
  for (const auto& e : extra) o << "\t" << e;
  o << "\tpartial_credit\n";
  for (const auto& f : r.folds) {
    o << r.spec.id << "\t" << f.fold << "\t" << f.test_tokens << "\t" << fixed(f.accuracy);
    for (const auto& [k, v] : f.levels) o << "\t" << fixed(v);
    for (const auto& [k, v] : f.components) o << "\t" << fixed(v);
    for (const auto& [k, v] : f.stages) o << "\t" << fixed(v);
    o << "\t" << (f.partial ? fixed(*f.partial) : "-") << "\n";
  }
  return o.str();
}

std::string format_timings(const EvalReport& r) {
  std::ostringstream o;
  o << "pipeline\tfold\tfeatures_s\ttrain_s\ttag_s\ttotal_s\n";
  const auto row = [&](const std::string& fold, const PhaseTimings& t) {
    o << r.spec.id << "\t" << fold << "\t" << fixed(t.features, 3) << "\t" << fixed(t.train, 3)
      << "\t" << fixed(t.tag, 3) << "\t" << fixed(t.total(), 3) << "\n";
  };
  for (const auto& f : r.folds) row(std::to_string(f.fold), f.timings);
  row("total", r.timings);
  return o.str();
}

}  // namespace crftag
