// crftag: train, tag, cross-validate and inspect tagsets from the shell.
// Exit status: 0 ok, 1 bad input or usage, 2 broken internal invariant.
#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "crftag/corpus.hpp"
#include "crftag/crf.hpp"
#include "crftag/error.hpp"
#include "crftag/evaluation.hpp"
#include "crftag/morphology.hpp"
#include "crftag/pipelines.hpp"
#include "crftag/tagset.hpp"
#include "crftag/templates.hpp"
#include "crftag/text.hpp"

namespace {

using namespace crftag;

struct Hyper {
  TrainingOptions options;
  void add_to(CLI::App& cmd) {
    cmd.add_option("--sigma", options.sigma, "Gaussian prior width")->check(CLI::PositiveNumber);
    cmd.add_option("--max-iterations", options.max_iterations)->check(CLI::PositiveNumber);
    cmd.add_option("--tolerance", options.tolerance)->check(CLI::NonNegativeNumber);
    cmd.add_option("--cutoff", options.cutoff, "minimum feature-string count");
    cmd.add_option("--threads", options.threads)->check(CLI::PositiveNumber);
  }
};

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") std::fwrite(text.data(), 1, text.size(), stdout);
  else write_text_file(path, text);
}

TagSchema schema_from(const std::string& path) {
  return path.empty() ? reference_schema() : load_schema_file(path);
}

// 1-based line of the first token row, for diagnostics about the whole file.
std::size_t first_token_line(const std::string& text) {
  std::size_t line = 0, pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view l(text.data() + pos, (nl == std::string::npos ? text.size() : nl) - pos);
    ++line;
    if (!text::trim(l).empty() && l.front() != '#') return line;
    if (nl == std::string::npos) break;
    pos = nl + 1;
  }
  return 1;
}

// ---- train

struct TrainArgs {
  std::string corpus, model, recipe, templates;
  Hyper hyper;
};

int cmd_train(const TrainArgs& a) {
  // cheap artifacts first, so a typo does not cost a corpus read
  std::optional<std::vector<FeatureTemplate>> templates;
  if (!a.templates.empty()) templates = parse_templates(read_text_file(a.templates));
  std::optional<FeatureRecipe> recipe;
  if (!a.recipe.empty()) recipe = parse_recipe(a.recipe);

  const Corpus corpus = read_corpus_file(a.corpus);
  const auto label = corpus.schema().find(ColumnRole::Label);
  if (!label) fail(ErrorCode::MissingColumn, a.corpus + ": no label column (need at least 2 columns)");

  Corpus obs = recipe ? feature_view(corpus, *recipe) : drop_column(corpus, *label);
  const auto gold = corpus.column(*label);
  const Corpus data = append_column(obs, Column{"gold", ColumnRole::Label}, gold);
  if (!templates) templates = parse_templates(default_template_text(obs.column_count()));

  auto model = train(data, data.column_count() - 1, *templates, a.hyper.options);
  if (recipe) model.recipe = recipe->describe();
  save_model(model, a.model);

  const auto& tr = model.objective_trace;
  std::printf("labels %zu, weights %zu, iterations %zu, stop: %s\n", model.labels.size(),
              model.weights.size(), model.iterations, model.stop_reason.c_str());
  if (!tr.empty())
    std::printf("objective %.6f -> %.6f over %zu evaluations\n", tr.front(), tr.back(), tr.size());
  return 0;
}

// ---- tag

struct TagArgs {
  std::string model, corpus, output = "-";
  bool marginals = false;
};

int cmd_tag(const TagArgs& a) {
  const auto model = load_model(a.model);
  const std::string text = read_text_file(a.corpus);
  Corpus corpus = [&] {
    try {
      return parse_corpus(text);
    } catch (const Error& e) {
      throw Error(e.code(), a.corpus + ": " + e.what());
    }
  }();

  const Corpus obs = model.recipe.empty() ? corpus : feature_view(corpus, parse_recipe(model.recipe));
  if (obs.column_count() < model.observation_columns)
    fail(ErrorCode::ColumnMismatch,
         a.corpus + ":" + std::to_string(first_token_line(text)) + ": model reads " +
             std::to_string(model.observation_columns) + " observation columns, file has " +
             std::to_string(obs.column_count()));

  const auto tagged = tag(model, obs.sentences(), a.marginals);
  std::vector<std::string> pred, conf;
  for (const auto& s : tagged) {
    pred.insert(pred.end(), s.labels.begin(), s.labels.end());
    for (double c : s.confidence) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6f", c);
      conf.emplace_back(buf);
    }
  }
  corpus = append_column(corpus, Column{"pred", ColumnRole::Prediction}, pred);
  if (a.marginals) corpus = append_column(corpus, Column{"marginal", ColumnRole::Feature}, conf);
  emit(a.output, write_corpus(corpus));
  return 0;
}

// ---- cv

struct CvArgs {
  std::string corpus, schema, report = "-", table, timings;
  std::vector<std::string> pipelines, pipeline_files;
  std::size_t k = 10;
  std::uint64_t seed = 1;
  std::size_t confusion = 10;
  std::optional<std::size_t> threads;
};

int cmd_cv(const CvArgs& a) {
  const TagSchema schema = schema_from(a.schema);
  std::vector<PipelineSpec> specs;
  for (const auto& id : a.pipelines) specs.push_back(named_pipeline(id));
  for (const auto& f : a.pipeline_files) {
    try {
      specs.push_back(parse_pipeline_spec(read_text_file(f)));
    } catch (const Error& e) {
      throw Error(e.code(), f + ": " + e.what());
    }
  }
  if (specs.empty()) fail(ErrorCode::PipelineConfig, "give --pipeline or --pipeline-file");
  for (auto& s : specs) {
    if (a.threads) s.training.threads = *a.threads;
    if (!s.templates_path.empty()) parse_templates(read_text_file(s.templates_path));
  }
  const Corpus corpus = read_corpus_file(a.corpus);

  std::string report, table, timings;
  for (const auto& s : specs) {
    const auto r = cross_validate(s, corpus, schema, a.k, a.seed, a.confusion);
    if (!report.empty()) report += "\n";
    report += format_report(r);
    table += format_fold_table(r);
    timings += format_timings(r);
  }
  emit(a.report, report);
  if (!a.table.empty()) emit(a.table, table);
  if (!a.timings.empty()) emit(a.timings, timings);
  return 0;
}

// ---- schema

struct SchemaArgs {
  std::string schema, tag;
  std::vector<std::string> parts;
};

int cmd_schema_validate(const SchemaArgs& a) {
  const auto s = schema_from(a.schema);
  std::printf("ok: %zu L0, %zu L1, %zu L2 tags; components %zu/%zu/%zu/%zu; %zu rules; hash %s\n",
              s.l0().size(), s.l1().size(), s.l2().size(), s.alphabet(0).size(),
              s.alphabet(1).size(), s.alphabet(2).size(), s.alphabet(3).size(), s.rules().size(),
              s.hash().c_str());
  return 0;
}

int cmd_schema_product(const SchemaArgs& a) {
  const auto s = schema_from(a.schema);
  const auto p = count_product(s);
  std::printf("%llu valid of %llu raw combinations (%llu pass the rules)\n",
              static_cast<unsigned long long>(p.valid), static_cast<unsigned long long>(p.raw),
              static_cast<unsigned long long>(p.rule_ok));
  return 0;
}

int cmd_schema_decompose(const SchemaArgs& a) {
  std::printf("%s\n", decompose(schema_from(a.schema), a.tag).describe().c_str());
  return 0;
}

int cmd_schema_recombine(const SchemaArgs& a) {
  ComponentTag t;
  for (std::size_t i = 0; i < kComponentCount; ++i) t[i] = component_symbol(a.parts[i]);
  std::printf("%s\n", recombine(schema_from(a.schema), t).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear-chain CRF tagging for hierarchical tagsets"};
  app.require_subcommand(1);
  std::function<int()> action;

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "Train one CRF on a labeled corpus (last column = label)");
  train_cmd->add_option("--corpus", ta.corpus)->required();
  train_cmd->add_option("--model", ta.model, "output model file")->required();
  train_cmd->add_option("--recipe", ta.recipe, "named recipe (I..IVbis) or element list");
  train_cmd->add_option("--templates", ta.templates, "template file (default: window templates)");
  ta.hyper.add_to(*train_cmd);
  train_cmd->callback([&] { action = [&] { return cmd_train(ta); }; });

  TagArgs tg;
  auto* tag_cmd = app.add_subcommand("tag", "Append a prediction column to a corpus");
  tag_cmd->add_option("--model", tg.model)->required();
  tag_cmd->add_option("--corpus", tg.corpus)->required();
  tag_cmd->add_option("--output", tg.output, "output file (default stdout)");
  tag_cmd->add_flag("--marginals", tg.marginals, "also append the marginal of each chosen label");
  tag_cmd->callback([&] { action = [&] { return cmd_tag(tg); }; });

  CvArgs cv;
  auto* cv_cmd = app.add_subcommand("cv", "k-fold cross-validation of one or more pipelines");
  cv_cmd->add_option("--corpus", cv.corpus)->required();
  cv_cmd->add_option("--pipeline", cv.pipelines, "named pipeline (I..VIIIbis), repeatable");
  cv_cmd->add_option("--pipeline-file", cv.pipeline_files, "pipeline spec file, repeatable");
  cv_cmd->add_option("--k", cv.k)->check(CLI::Range(std::size_t{2}, std::size_t{1000000}));
  cv_cmd->add_option("--seed", cv.seed);
  cv_cmd->add_option("--schema", cv.schema, "tagset schema (default: bundled)");
  cv_cmd->add_option("--report", cv.report, "report file (default stdout)");
  cv_cmd->add_option("--table", cv.table, "per-fold TSV");
  cv_cmd->add_option("--timings", cv.timings, "wall-clock timings");
  cv_cmd->add_option("--confusion", cv.confusion, "confusion rows in the report");
  cv_cmd->add_option("--threads", cv.threads, "override the pipelines' thread count")
      ->check(CLI::PositiveNumber);
  cv_cmd->callback([&] { action = [&] { return cmd_cv(cv); }; });

  SchemaArgs sa;
  auto* schema_cmd = app.add_subcommand("schema", "Check and query a tagset schema");
  schema_cmd->add_option("--schema", sa.schema, "schema file (default: bundled)");
  schema_cmd->require_subcommand(1);
  schema_cmd->add_subcommand("validate", "load and check every invariant")
      ->callback([&] { action = [&] { return cmd_schema_validate(sa); }; });
  schema_cmd->add_subcommand("product", "count valid vs raw component combinations")
      ->callback([&] { action = [&] { return cmd_schema_product(sa); }; });
  auto* dec = schema_cmd->add_subcommand("decompose", "print the component tuple of an L2 tag");
  dec->add_option("tag", sa.tag)->required();
  dec->callback([&] { action = [&] { return cmd_schema_decompose(sa); }; });
  auto* rec = schema_cmd->add_subcommand("recombine", "render g0 g1 g2 g3 (EPS = empty)");
  rec->add_option("parts", sa.parts)->required()->expected(4);
  rec->callback([&] { action = [&] { return cmd_schema_recombine(sa); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    return action();
  } catch (const Error& e) {
    std::cerr << "crftag: " << e.what() << "\n";
    return e.is_internal() ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "crftag: internal error: " << e.what() << "\n";
    return 2;
  }
}
