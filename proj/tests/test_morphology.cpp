#include <doctest.h>

#include <random>

#include "crftag/error.hpp"
#include "crftag/morphology.hpp"
#include "crftag/text.hpp"
#include "test_support.hpp"

using namespace crftag;

namespace {

// Oracle: walk code points one at a time, independent of racine_reste.
std::size_t lcp_code_points(const std::vector<std::string_view>& a,
                            const std::vector<std::string_view>& b) {
  std::size_t i = 0;
  while (i < a.size() && i < b.size() && a[i] == b[i]) ++i;
  return i;
}

std::string concat(const std::vector<std::string_view>& cps, std::size_t from, std::size_t to) {
  std::string s;
  for (std::size_t i = from; i < to; ++i) s += cps[i];
  return s;
}

}  // namespace

TEST_CASE("racine and reste") {
  CHECK(racine_reste("marchant", "marcher") == RacineReste{"march", "ant", "er"});
  const auto same = racine_reste("table", "table");
  CHECK(same.r_mot == "x");
  CHECK(same.r_lemme == "x");
  CHECK(racine_reste("yeux", "\xC5\x93il") == RacineReste{"", "yeux", "\xC5\x93il"});
  CHECK(racine_reste("Marche", "marcher").racine.empty());
  CHECK_THROWS_AS(racine_reste("", "a"), Error);
}

TEST_CASE("racine_reste works on code points after NFC") {
  // "été" decomposed vs composed, and a multi-byte divergence point
  const auto r = racine_reste("e\xCC\x81te\xCC\x81", "\xC3\xA9tait");
  CHECK(r.racine == "\xC3\xA9t");
  CHECK(r.r_mot == "\xC3\xA9");
  CHECK(r.r_lemme == "ait");
  // é (C3 A9) and è (C3 A8) share a lead byte but not a code point
  CHECK(racine_reste("\xC3\xA9", "\xC3\xA8").racine.empty());
}

TEST_CASE("racine is the maximal common prefix") {
  std::mt19937_64 rng(5);
  const std::vector<std::string> pieces{"a", "b", "\xC3\xA9", "\xC3\xA8", "\xC5\x93"};
  for (int trial = 0; trial < 500; ++trial) {
    std::string a, b;
    const std::size_t na = 1 + rng() % 6, nb = 1 + rng() % 6;
    for (std::size_t i = 0; i < na; ++i) a += pieces[rng() % pieces.size()];
    for (std::size_t i = 0; i < nb; ++i) b += pieces[rng() % pieces.size()];
    const auto r = racine_reste(a, b);
    if (a == b) {
      CHECK(r.r_mot == "x");
      continue;
    }
    const auto ca = text::code_points(a), cb = text::code_points(b);
    const std::size_t k = lcp_code_points(ca, cb);
    CHECK(r.racine == concat(ca, 0, k));
    CHECK(r.r_mot == concat(ca, k, ca.size()));
    CHECK(r.r_lemme == concat(cb, k, cb.size()));
    CHECK(r.racine + r.r_mot == a);
  }
}

TEST_CASE("last_n") {
  CHECK(last_n("marchant", 2) == "nt");
  CHECK(last_n("marcher", 3) == "her");
  CHECK(last_n("\xC3\xA0", 3) == "\xC3\xA0");
  CHECK(last_n("caf\xC3\xA9", 1) == "\xC3\xA9");
  CHECK(last_n("abc", 0).empty());
}

TEST_CASE("named recipes") {
  CHECK(named_recipe("IVbis").describe() == "mot,D3(mot),D2(mot),D1(mot)");
  CHECK(named_recipe("I").describe() == "mot,lemme");
  CHECK(named_recipe("II").describe() == "mot,lemme,Rmot,Rlemme");
  CHECK(named_recipe("IIIbis").describe() == "mot,D3(mot)");
  CHECK_FALSE(named_recipe("IVbis").needs_lemma());
  CHECK(named_recipe("IV").needs_lemma());
  CHECK_THROWS_AS(named_recipe("IX"), Error);
  CHECK(parse_recipe("mot,D3(lemme)").elements.size() == 2);
  CHECK(parse_recipe(named_recipe("III").describe()).elements == named_recipe("III").elements);
}

TEST_CASE("recipe IVbis on omelette") {
  const auto c = crftag::testing::make_corpus({{{"omelette", "NCFS"}}});
  const auto m = materialize_recipe(c, named_recipe("IVbis"));
  REQUIRE(m.column_count() == 5);
  CHECK(m.sentences()[0].tokens[0].columns ==
        std::vector<std::string>{"omelette", "NCFS", "tte", "te", "e"});
}

TEST_CASE("recipe II gives the restes") {
  const auto c = crftag::testing::make_corpus({{{"marchant", "marcher", "VPARPRES"}}});
  const auto m = feature_view(c, named_recipe("II"));
  CHECK(m.sentences()[0].tokens[0].columns ==
        std::vector<std::string>{"marchant", "marcher", "ant", "er"});
}

TEST_CASE("reste-or-suffix falls back to the suffix only when form equals lemma") {
  const auto e = RecipeElement::parse("Rmot|D3(mot)");
  CHECK(e.derive("table", "table") == "ble");
  CHECK(e.derive("marchant", "marcher") == "ant");
  CHECK(e.derive("marche", "marcher") == "_EMPTY_");
  // a genuine reste that happens to spell the sentinel
  CHECK(e.derive("max", "ma") == "x");
}

TEST_CASE("lemma recipes need a lemma column") {
  const auto c = crftag::testing::make_corpus({{{"vous", "P"}}});
  const auto code = [&] {
    try {
      materialize_recipe(c, named_recipe("I"));
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Internal;
  }();
  CHECK(code == ErrorCode::MissingColumn);
}
