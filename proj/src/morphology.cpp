#include "crftag/morphology.hpp"

#include <charconv>

#include "crftag/error.hpp"
#include "crftag/text.hpp"

namespace crftag {

RacineReste racine_reste(std::string_view mot, std::string_view lemme) {
  if (mot.empty() || lemme.empty())
    fail(ErrorCode::EmptyInput, "racine_reste needs a non-empty form and lemma");
  const std::string m = text::to_nfc(mot);
  const std::string l = text::to_nfc(lemme);
  if (m == l) return {m, std::string(kIdenticalReste), std::string(kIdenticalReste)};

  const auto mc = text::code_points(m);
  const auto lc = text::code_points(l);
  std::size_t common = 0;
  std::size_t bytes = 0;
  while (common < mc.size() && common < lc.size() && mc[common] == lc[common]) {
    bytes += mc[common].size();
    ++common;
  }
  return {m.substr(0, bytes), m.substr(bytes), l.substr(bytes)};
}

std::string last_n(std::string_view word, std::size_t n) {
  const auto cps = text::code_points(word);
  const std::size_t take = std::min(n, cps.size());
  if (take == 0) return {};
  const auto* first = cps[cps.size() - take].data();
  return std::string(first, static_cast<std::size_t>(word.data() + word.size() - first));
}

std::string reste_cell(std::string_view reste) {
  return reste.empty() ? std::string(kEmptyReste) : std::string(reste);
}

bool RecipeElement::needs_lemma() const {
  switch (kind) {
    case Kind::Form: return false;
    case Kind::Suffix: return source == Source::Lemme;
    default: return true;
  }
}

std::string RecipeElement::name() const {
  const std::string src = source == Source::Mot ? "mot" : "lemme";
  const std::string suffix = "D" + std::to_string(n) + "(" + src + ")";
  switch (kind) {
    case Kind::Form: return "mot";
    case Kind::Lemma: return "lemme";
    case Kind::RMot: return "Rmot";
    case Kind::RLemme: return "Rlemme";
    case Kind::RMotOrSuffix: return "Rmot|" + suffix;
    case Kind::RLemmeOrSuffix: return "Rlemme|" + suffix;
    case Kind::Suffix: return suffix;
  }
  return {};
}

std::string RecipeElement::derive(std::string_view mot, std::string_view lemme) const {
  const auto source_word = [&] { return source == Source::Mot ? mot : lemme; };
  switch (kind) {
    case Kind::Form: return std::string(mot);
    case Kind::Lemma: return std::string(lemme);
    case Kind::Suffix: return last_n(source_word(), n);
    case Kind::RMot: return reste_cell(racine_reste(mot, lemme).r_mot);
    case Kind::RLemme: return reste_cell(racine_reste(mot, lemme).r_lemme);
    case Kind::RMotOrSuffix:
    case Kind::RLemmeOrSuffix: {
      if (text::to_nfc(mot) == text::to_nfc(lemme)) return last_n(source_word(), n);
      const auto rr = racine_reste(mot, lemme);
      return reste_cell(kind == Kind::RMotOrSuffix ? rr.r_mot : rr.r_lemme);
    }
  }
  return {};
}

namespace {

// Parses "Dn(mot)" / "Dn(lemme)".
bool parse_suffix(std::string_view s, std::size_t& n, RecipeElement::Source& source) {
  if (s.size() < 5 || s.front() != 'D' || s.back() != ')') return false;
  const auto open = s.find('(');
  if (open == std::string_view::npos || open < 2) return false;
  const auto digits = s.substr(1, open - 1);
  const auto res = std::from_chars(digits.data(), digits.data() + digits.size(), n);
  if (res.ec != std::errc() || res.ptr != digits.data() + digits.size() || n == 0) return false;
  const auto arg = s.substr(open + 1, s.size() - open - 2);
  if (arg == "mot") source = RecipeElement::Source::Mot;
  else if (arg == "lemme") source = RecipeElement::Source::Lemme;
  else return false;
  return true;
}

}  // namespace

RecipeElement RecipeElement::parse(std::string_view raw) {
  const auto s = text::trim(raw);
  RecipeElement e;
  if (s == "mot") return e;
  if (s == "lemme") { e.kind = Kind::Lemma; return e; }
  if (s == "Rmot") { e.kind = Kind::RMot; return e; }
  if (s == "Rlemme") { e.kind = Kind::RLemme; return e; }
  const auto bar = s.find('|');
  if (bar != std::string_view::npos) {
    const auto head = s.substr(0, bar);
    if (head == "Rmot") e.kind = Kind::RMotOrSuffix;
    else if (head == "Rlemme") e.kind = Kind::RLemmeOrSuffix;
    else fail(ErrorCode::PipelineConfig, "bad recipe element '" + std::string(s) + "'");
    if (!parse_suffix(s.substr(bar + 1), e.n, e.source))
      fail(ErrorCode::PipelineConfig, "bad recipe element '" + std::string(s) + "'");
    return e;
  }
  e.kind = Kind::Suffix;
  if (!parse_suffix(s, e.n, e.source))
    fail(ErrorCode::PipelineConfig, "bad recipe element '" + std::string(s) + "'");
  return e;
}

bool FeatureRecipe::needs_lemma() const {
  for (const auto& e : elements)
    if (e.needs_lemma()) return true;
  return false;
}

std::string FeatureRecipe::describe() const {
  std::vector<std::string> parts;
  for (const auto& e : elements) parts.push_back(e.name());
  return text::join(parts, ",");
}

namespace {

FeatureRecipe make_recipe(std::string name, std::initializer_list<std::string_view> elems) {
  FeatureRecipe r{std::move(name), {}};
  for (auto e : elems) r.elements.push_back(RecipeElement::parse(e));
  return r;
}

}  // namespace

std::vector<std::string> recipe_names() { return {"I", "II", "III", "IV", "IIIbis", "IVbis"}; }

FeatureRecipe named_recipe(std::string_view name) {
  if (name == "I") return make_recipe("I", {"mot", "lemme"});
  if (name == "II") return make_recipe("II", {"mot", "lemme", "Rmot", "Rlemme"});
  if (name == "III")
    return make_recipe("III", {"mot", "lemme", "Rmot|D2(mot)", "Rlemme|D3(lemme)"});
  if (name == "IV")
    return make_recipe("IV", {"mot", "lemme", "Rmot|D3(mot)", "Rlemme|D3(lemme)"});
  if (name == "IIIbis") return make_recipe("IIIbis", {"mot", "D3(mot)"});
  if (name == "IVbis") return make_recipe("IVbis", {"mot", "D3(mot)", "D2(mot)", "D1(mot)"});
  fail(ErrorCode::PipelineConfig, "unknown recipe '" + std::string(name) + "'");
}

FeatureRecipe parse_recipe(std::string_view text_in) {
  const auto s = text::trim(text_in);
  for (const auto& n : recipe_names())
    if (s == n) return named_recipe(n);
  FeatureRecipe r{"custom", {}};
  for (const auto& part : text::split(s, ','))
    r.elements.push_back(RecipeElement::parse(part));
  if (r.elements.empty()) fail(ErrorCode::PipelineConfig, "empty recipe");
  return r;
}

namespace {

std::size_t form_column(const Corpus& corpus) {
  return corpus.schema().find(ColumnRole::Form).value_or(0);
}

std::size_t lemma_column(const Corpus& corpus, const FeatureRecipe& recipe) {
  const auto idx = corpus.schema().find(ColumnRole::Lemma);
  if (!idx)
    fail(ErrorCode::MissingColumn, "recipe " + recipe.name + " (" + recipe.describe() +
                                       ") needs a lemma column");
  return *idx;
}

std::vector<std::string> derive_column(const Corpus& corpus, const RecipeElement& e,
                                       std::size_t form_col, std::size_t lemma_col) {
  std::vector<std::string> out;
  out.reserve(corpus.token_count());
  const bool lemma = e.needs_lemma();
  for (const auto& s : corpus.sentences())
    for (const auto& t : s.tokens) {
      const std::string& mot = t.columns[form_col];
      out.push_back(e.derive(mot, lemma ? std::string_view(t.columns[lemma_col]) : mot));
    }
  return out;
}

}  // namespace

Corpus materialize_recipe(const Corpus& corpus, const FeatureRecipe& recipe) {
  const std::size_t form_col = form_column(corpus);
  const std::size_t lemma_col = recipe.needs_lemma() ? lemma_column(corpus, recipe) : form_col;
  Corpus out = corpus;
  for (const auto& e : recipe.elements) {
    if (e.is_base()) continue;
    const auto values = derive_column(corpus, e, form_col, lemma_col);
    out = append_column(out, Column{e.name(), ColumnRole::Feature}, values);
  }
  return out;
}

Corpus feature_view(const Corpus& corpus, const FeatureRecipe& recipe) {
  const std::size_t form_col = form_column(corpus);
  const std::size_t lemma_col = recipe.needs_lemma() ? lemma_column(corpus, recipe) : form_col;

  std::vector<Column> cols;
  std::vector<std::vector<std::string>> values;
  for (const auto& e : recipe.elements) {
    ColumnRole role = ColumnRole::Feature;
    if (e.kind == RecipeElement::Kind::Form) role = ColumnRole::Form;
    if (e.kind == RecipeElement::Kind::Lemma) role = ColumnRole::Lemma;
    cols.push_back({e.name(), role});
    values.push_back(derive_column(corpus, e, form_col, lemma_col));
  }
  std::vector<Sentence> sentences;
  sentences.reserve(corpus.size());
  std::size_t k = 0;
  for (const auto& s : corpus.sentences()) {
    Sentence out;
    for (std::size_t t = 0; t < s.size(); ++t, ++k) {
      Token tok;
      tok.columns.reserve(values.size());
      for (const auto& col : values) tok.columns.push_back(col[k]);
      out.tokens.push_back(std::move(tok));
    }
    sentences.push_back(std::move(out));
  }
  return Corpus(ColumnSchema(std::move(cols)), std::move(sentences), corpus.provenance());
}

}  // namespace crftag
