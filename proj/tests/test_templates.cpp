#include <doctest.h>

#include <map>
#include <regex>
#include <set>

#include "crftag/error.hpp"
#include "crftag/templates.hpp"
#include "crftag/text.hpp"
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

Sentence omelette_sentence() { return crftag::testing::omelette_corpus().sentences()[0]; }

// Regex-based macro substitution, written separately from expand().
std::string oracle_expand(const std::string& line, const Sentence& s, std::size_t pos) {
  static const std::regex macro(R"(%x\[(-?\d+),(\d+)\])");
  std::string out;
  std::size_t last = 0;
  for (std::sregex_iterator it(line.begin(), line.end(), macro), end; it != end; ++it) {
    out += line.substr(last, it->position() - last);
    const long row = static_cast<long>(pos) + std::stol((*it)[1]);
    const std::size_t col = std::stoul((*it)[2]);
    if (row < 0) out += "_B-" + std::to_string(-row);
    else if (row >= static_cast<long>(s.size()))
      out += "_B+" + std::to_string(row - static_cast<long>(s.size()) + 1);
    else out += s.cell(static_cast<std::size_t>(row), col);
    last = it->position() + it->length();
  }
  return out + line.substr(last);
}

// Weight count by brute enumeration: distinct unigram strings own L weights,
// distinct bigram strings (positions t >= 1) own L*L.
std::size_t oracle_dictionary_size(const std::vector<std::string>& lines, const Corpus& obs,
                                   std::size_t labels) {
  std::set<std::string> uni, bi;
  for (const auto& s : obs.sentences())
    for (std::size_t t = 0; t < s.size(); ++t)
      for (const auto& l : lines) {
        if (l[0] == 'U') uni.insert(oracle_expand(l, s, t));
        else if (t >= 1) bi.insert(oracle_expand(l, s, t));
      }
  return uni.size() * labels + bi.size() * labels * labels;
}

}  // namespace

TEST_CASE("template grammar") {
  const auto t = parse_templates("U00:%x[0,0]\n");
  REQUIRE(t.size() == 1);
  CHECK(t[0].kind == FeatureTemplate::Kind::Unigram);
  CHECK(t[0].macros == std::vector<FeatureTemplate::Macro>{{0, 0}});
  CHECK(t[0].id == "U00");

  const auto b = parse_templates("# comment\n\nB\n");
  REQUIRE(b.size() == 1);
  CHECK(b[0].kind == FeatureTemplate::Kind::Bigram);
  CHECK(b[0].macros.empty());

  CHECK(code_of([] { parse_templates("X00:%x[0,0]"); }) == ErrorCode::SyntaxError);
  CHECK(code_of([] { parse_templates("U00:%x[0]"); }) == ErrorCode::SyntaxError);
  CHECK(code_of([] { parse_templates("U00:%x[0,0]\nU00:%x[1,0]"); }) == ErrorCode::DuplicateId);

  const auto many = parse_templates(default_template_text(3));
  CHECK(parse_templates(format_templates(many)) == many);
}

TEST_CASE("expansion around the worked example") {
  const auto s = omelette_sentence();
  const auto t = parse_templates(
      "U00:%x[0,0]\nU03:%x[-2,0]/%x[-1,0]/%x[1,0]/%x[2,0]\nU01:%x[-1,0]\nU02:%x[1,0]/%x[2,1]");
  CHECK(expand(t[0], s, 2) == "U00:faites");
  CHECK(expand(t[1], s, 2) == "U03:comment/vous/vous/une");
  CHECK(expand(t[2], s, 0) == "U01:_B-1");
  CHECK(expand(t[1], s, 5) == "U03:vous/une/_B+1/_B+2");
  CHECK(expand(t[3], s, 4) == "U02:omelette/_B+1");
  const auto bad = parse_templates("U09:%x[0,7]");
  CHECK(code_of([&] { expand(bad[0], s, 0); }) == ErrorCode::BadColumn);
}

TEST_CASE("expand agrees with the regex oracle everywhere") {
  const auto s = omelette_sentence();
  const auto text = default_template_text(2) + "U90:x%x[-3,1]y%x[4,0]z\n";
  const auto lines = text::split(text, '\n');
  const auto ts = parse_templates(text);
  std::size_t k = 0;
  for (const auto& l : lines) {
    if (l.empty() || l[0] == '#') continue;
    for (std::size_t pos = 0; pos < s.size(); ++pos)
      CHECK(expand(ts[k], s, pos) == oracle_expand(l, s, pos));
    ++k;
  }
}

TEST_CASE("dictionary sizes") {
  const auto one = crftag::testing::make_corpus({{{"w"}}});
  const auto u = parse_templates("U00:%x[0,0]");
  CHECK(build_dictionary(one, u, 1, 1).size() == 1);
  CHECK(build_dictionary(one, u, 1, kInfiniteCutoff).size() == 0);

  const auto omelette = crftag::testing::omelette_corpus();
  const std::vector<std::size_t> obs_cols{0, 1};
  const auto obs = select_columns(omelette, obs_cols);
  const auto text = default_template_text(2);
  const auto ts = parse_templates(text);
  std::vector<std::string> lines;
  for (const auto& l : text::split(text, '\n'))
    if (!l.empty() && l[0] != '#') lines.push_back(l);
  const auto labels = label_alphabet(omelette, 2);
  CHECK(labels.size() == 5);
  const auto dict = build_dictionary(obs, ts, labels.size(), 1);
  CHECK(dict.size() == oracle_dictionary_size(lines, obs, labels.size()));

  std::vector<std::string> out;
  CHECK(build_dictionary(omelette, ts, 2, 1, &out) == dict);
  CHECK(out == labels);
}

TEST_CASE("cutoff drops rare strings") {
  const auto c = crftag::testing::make_corpus({{{"a"}, {"b"}, {"a"}}});
  const auto ts = parse_templates("U00:%x[0,0]");
  const auto d = build_dictionary(c, ts, 2, 2);
  CHECK(d.feature_count() == 1);
  CHECK(d.base("U00:a").has_value());
  CHECK_FALSE(d.base("U00:b").has_value());
  CHECK(d.entries()[0].frequency == 2);
}
