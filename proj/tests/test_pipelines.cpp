#include <doctest.h>

#include <set>

#include "crftag/error.hpp"
#include "crftag/evaluation.hpp"
#include "crftag/pipelines.hpp"
#include "synthetic.hpp"
#include "test_support.hpp"

using namespace crftag;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Internal;
}

PipelineSpec quick(std::string_view id) {
  auto s = named_pipeline(id);
  s.training.max_iterations = 60;
  s.training.sigma = 5.0;
  return s;
}

struct Split {
  Corpus train;
  Corpus test;
  std::vector<std::string> gold;
};

Split split_off(const Corpus& c, std::size_t test_sentences) {
  std::vector<std::size_t> tr, te;
  for (std::size_t i = 0; i < c.size(); ++i) (i < c.size() - test_sentences ? tr : te).push_back(i);
  const auto label = *c.schema().find(ColumnRole::Label);
  const auto test_full = subset(c, te);
  return {subset(c, tr), drop_column(test_full, label), test_full.column(label)};
}

std::vector<std::string> column_names(const Corpus& c) {
  std::vector<std::string> out;
  for (const auto& col : c.schema().columns()) out.push_back(col.name);
  return out;
}

}  // namespace

TEST_CASE("named configurations") {
  CHECK(named_pipeline("IVbis").recipe.describe() == "mot,D3(mot),D2(mot),D1(mot)");
  CHECK(named_pipeline("IVbis").strategy == Strategy::Direct);
  CHECK(named_pipeline("IVbis").target == Level::L2);
  CHECK(named_pipeline("V").recipe.describe() == "mot,lemme,D3(lemme)");
  CHECK(named_pipeline("V").stages == std::vector<Level>{Level::L0, Level::L1, Level::L2});
  CHECK(named_pipeline("VI").recipe.describe() == "mot,Rmot,Rlemme,D3(mot),D3(lemme)");
  CHECK(named_pipeline("VIII").strategy == Strategy::Decomposed);
  CHECK(named_pipeline("VIII").recombination == Recombination::Rules);
  CHECK(named_pipeline("VIII").recipe.describe() == "mot,lemme,D3(mot)");
  CHECK(named_pipeline("VIIbis").recombination == Recombination::Crf);
  CHECK(named_pipeline("VIIbis").recipe.describe() == "mot,D3(mot),D2(mot),D1(mot)");
  CHECK(named_pipeline("V").stage_source == StageSource::Jackknifed);
  CHECK(code_of([] { named_pipeline("IX"); }) == ErrorCode::PipelineConfig);
}

TEST_CASE("pipeline spec files round-trip") {
  for (const auto& id : pipeline_names()) {
    const auto s = named_pipeline(id);
    CHECK(parse_pipeline_spec(format_pipeline_spec(s)) == s);
  }
  PipelineSpec custom;
  custom.strategy = Strategy::Cascade;
  custom.recipe = parse_recipe("mot,D2(mot)");
  custom.stages = {Level::L0, Level::L2};
  custom.stage_source = StageSource::Gold;
  custom.seed = 99;
  custom.training.sigma = 0.25;
  custom.training.tolerance = 1e-7;
  custom.templates_path = "t.txt";
  CHECK(parse_pipeline_spec(format_pipeline_spec(custom)) == custom);

  CHECK(code_of([] { parse_pipeline_spec("[pipeline]\nid = V\ncolour = red\n"); }) ==
        ErrorCode::PipelineConfig);
  CHECK(code_of([] { parse_pipeline_spec("[pipeline]\nid = V\nstages = L1,L0,L2\n"); }) ==
        ErrorCode::PipelineConfig);
  CHECK(code_of([] { parse_pipeline_spec("[hyper]\nsigma = -1\n[pipeline]\nid = I\n"); }) ==
        ErrorCode::PipelineConfig);
  CHECK(parse_pipeline_spec("[pipeline]\nid = VIII\n[hyper]\nsigma = 2\n").training.sigma == 2.0);
}

TEST_CASE("direct pipelines") {
  const auto corpus = synthetic::cascade_corpus(60, 1);
  const auto sp = split_off(corpus, 15);

  auto l0 = quick("IV");
  l0.target = Level::L0;
  const auto r = run_direct(l0, sp.train, sp.test, reference_schema());
  std::vector<std::string> gold_l0;
  for (const auto& t : sp.gold) gold_l0.push_back(project_tag(reference_schema(), t, Level::L0));
  CHECK(token_accuracy(gold_l0, r.predictions) == 1.0);
  CHECK(column_names(r.tagged) == std::vector<std::string>{"mot", "lemme", "PredL0"});
  CHECK(r.models_trained == 1);

  const auto lemma_less = synthetic::suffix_corpus(10, 2);
  const auto s2 = split_off(lemma_less, 3);
  CHECK(code_of([&] { run_direct(quick("I"), s2.train, s2.test, reference_schema()); }) ==
        ErrorCode::MissingColumn);
  const auto ok = run_direct(quick("IVbis"), s2.train, s2.test, reference_schema());
  CHECK(ok.predictions.size() == s2.test.token_count());
}

TEST_CASE("test corpora must not carry labels") {
  const auto corpus = synthetic::cascade_corpus(10, 3);
  const auto c = code_of([&] { run_pipeline(quick("IV"), corpus, corpus, reference_schema()); });
  CHECK(c == ErrorCode::Internal);
}

TEST_CASE("cascade stages and columns") {
  const auto corpus = synthetic::cascade_corpus(60, 4);
  const auto sp = split_off(corpus, 15);
  const auto r = run_cascade(quick("V"), sp.train, sp.test, reference_schema());
  CHECK(column_names(r.tagged) ==
        std::vector<std::string>{"mot", "lemme", "ResL0", "ResL01", "PredL2"});
  REQUIRE(r.training_stages.size() == 2);
  CHECK(r.training_stages[0].stage == "ResL0");
  CHECK(r.training_stages[0].source == StageSource::Jackknifed);
  CHECK(r.training_stages[0].values.size() == sp.train.token_count());
  CHECK(r.test_stages[1].source == StageSource::Predicted);
  // three stage models plus five jackknife models for each of two stages
  CHECK(r.models_trained == 3 + 2 * 5);

  // L0 fixes L2 on this corpus: the final level is no worse than the first
  std::vector<std::string> gold_l0;
  for (const auto& t : sp.gold) gold_l0.push_back(project_tag(reference_schema(), t, Level::L0));
  const double a0 = token_accuracy(gold_l0, r.test_stages[0].values);
  const double a2 = token_accuracy(sp.gold, r.predictions);
  CHECK(std::abs(a0 - a2) <= 0.005);

  auto gold_src = quick("VI");
  gold_src.stage_source = StageSource::Gold;
  const auto g = run_cascade(gold_src, sp.train, sp.test, reference_schema());
  CHECK(g.models_trained == 3);
  CHECK(g.training_stages[0].values ==
        [&] {
          std::vector<std::string> v;
          for (const auto& t : sp.train.column(2)) v.push_back(project_tag(reference_schema(), t, Level::L0));
          return v;
        }());
}

TEST_CASE("decomposed pipelines") {
  const auto corpus = synthetic::cascade_corpus(50, 5);
  const auto sp = split_off(corpus, 10);
  const auto r = run_decomposed(quick("VIII"), sp.train, sp.test, reference_schema());
  CHECK(column_names(r.tagged) ==
        std::vector<std::string>{"mot", "lemme", "ResG0", "ResG1", "ResG2", "ResG3", "PredL2"});
  CHECK(r.models_trained == 4);
  for (const auto& p : r.predictions) CHECK(reference_schema().has_tag(Level::L2, p));

  auto crf = quick("VIIbis");
  crf.stage_source = StageSource::Gold;
  const auto c = run_decomposed(crf, sp.train, sp.test, reference_schema());
  CHECK(c.models_trained == 5);
  const auto train_tags = sp.train.column(2);
  const std::set<std::string> observed(train_tags.begin(), train_tags.end());
  for (const auto& p : c.predictions) CHECK(observed.count(p) == 1);
}

TEST_CASE("all-NFS components recombine to NFS") {
  std::vector<testing::Rows> rows;
  for (int s = 0; s < 6; ++s) rows.push_back({{"table", "table", "NFS"}, {"porte", "porte", "NFS"}});
  const auto corpus = testing::make_corpus(rows);
  const auto sp = split_off(corpus, 2);
  const auto r = run_decomposed(quick("VIII"), sp.train, sp.test, reference_schema());
  for (const auto& p : r.predictions) CHECK(p == "NFS");
  CHECK(r.test_stages[3].values.front() == "EPS");
}

TEST_CASE("training tags must decompose") {
  const auto corpus = testing::make_corpus({{{"a", "a", "NFS"}}, {{"b", "b", "XYZ"}}});
  const auto test = drop_column(corpus, 2);
  CHECK(code_of([&] { run_decomposed(quick("VIII"), corpus, test, reference_schema()); }) ==
        ErrorCode::UndecomposableTag);
}

TEST_CASE("jackknifed stage features") {
  const auto corpus =
      testing::make_corpus({{{"aa"}, {"ab"}, {"aa"}}, {{"bb"}, {"ba"}}});
  const std::vector<std::string> gold{"X", "X", "X", "Y", "Y"};
  const auto ts = parse_templates("U00:%x[0,0]\nB");
  TrainingOptions o;
  o.max_iterations = 30;
  const auto p = jackknife_stage_features(corpus, gold, ts, o, 2, 1);
  // each half is tagged by a model that only ever saw the other label
  CHECK(p.values == std::vector<std::string>{"Y", "Y", "Y", "X", "X"});
  CHECK(p.source == StageSource::Jackknifed);

  const auto big = synthetic::suffix_corpus(7, 8);
  const auto obs = drop_column(big, 1);
  const auto labels = big.column(1);
  const auto loo = jackknife_stage_features(obs, labels, ts, o, 7, 3);
  CHECK(loo.values.size() == big.token_count());
  CHECK(kfold_split(obs, 7, 3).sizes() == std::vector<std::size_t>(7, 1));
  CHECK(jackknife_stage_features(obs, labels, ts, o, 7, 3).values == loo.values);
}

TEST_CASE("runs are reproducible") {
  const auto corpus = synthetic::cascade_corpus(30, 9);
  const auto sp = split_off(corpus, 8);
  for (const auto* id : {"IV", "V", "VII"}) {
    const auto a = run_pipeline(quick(id), sp.train, sp.test, reference_schema());
    const auto b = run_pipeline(quick(id), sp.train, sp.test, reference_schema());
    CHECK(a.tagged == b.tagged);
    CHECK(a.template_hash == b.template_hash);
  }
}
