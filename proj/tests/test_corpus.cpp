#include <doctest.h>

#include <random>

#include "crftag/corpus.hpp"
#include "crftag/error.hpp"
#include "test_support.hpp"

using namespace crftag;
using crftag::testing::make_corpus;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Internal;
}

std::string message_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("parse the two-token sample under a three-column schema") {
  const auto c = parse_corpus("comment\tcomment\tADV\nvous\tvous\tPPER2P\n\n", ColumnSchema::infer(3));
  CHECK(c.size() == 1);
  CHECK(c.token_count() == 2);
  CHECK(c.sentences()[0].cell(1, 2) == "PPER2P");
  CHECK(c.schema().find(ColumnRole::Lemma) == 1u);
  CHECK(c.schema().find(ColumnRole::Label) == 2u);
}

TEST_CASE("empty and blank inputs are rejected") {
  CHECK(code_of([] { parse_corpus(""); }) == ErrorCode::EmptyCorpus);
  CHECK(code_of([] { parse_corpus("\n\n  \n"); }) == ErrorCode::EmptyCorpus);
  CHECK(code_of([] { Corpus(ColumnSchema::infer(1), {}); }) == ErrorCode::EmptyCorpus);
}

TEST_CASE("ragged rows report their line") {
  const auto fn = [] { parse_corpus("a\tb\tc\nmot\tlemme\n", ColumnSchema::infer(3)); };
  CHECK(code_of(fn) == ErrorCode::RaggedRow);
  CHECK(message_of(fn).find("line 2") != std::string::npos);
}

TEST_CASE("write reproduces a one-sentence source") {
  const std::string src = "comment\tcomment\tADV\nvous\tvous\tPPER2P\n\n";
  CHECK(write_corpus(parse_corpus(src)) == src);
}

TEST_CASE("two sentences are separated by exactly one blank line") {
  const auto text = write_corpus(parse_corpus("a\tX\nb\tY\n\n\n\nc\tX\n"));
  CHECK(text == "a\tX\nb\tY\n\nc\tX\n\n");
}

TEST_CASE("header lines, CRLF and missing final newline") {
  const auto c = parse_corpus("# source: toy\r\nje\tP\r\n\r\nsuis\tV");
  CHECK(c.provenance() == std::vector<std::string>{"# source: toy"});
  CHECK(c.size() == 2);
  CHECK(write_corpus(c) == "# source: toy\nje\tP\n\nsuis\tV\n\n");
}

TEST_CASE("input is NFC-normalized and malformed UTF-8 rejected") {
  const auto c = parse_corpus("cafe\xCC\x81\tN\n");
  CHECK(c.sentences()[0].cell(0, 0) == "caf\xC3\xA9");
  CHECK(code_of([] { parse_corpus("caf\xC3\tN\n"); }) == ErrorCode::EncodingError);
}

TEST_CASE("append_column adds a column and leaves the source untouched") {
  const auto base = crftag::testing::omelette_corpus();
  const std::vector<std::string> l0{"ADV", "P", "V", "P", "DET", "N"};
  const auto wide = append_column(base, "ResL0", l0);
  CHECK(wide.column_count() == 4);
  CHECK(base.column_count() == 3);
  CHECK(wide.schema()[3].role == ColumnRole::Prediction);
  CHECK(wide.column(3) == l0);
  CHECK(drop_column(wide, 3) == base);

  const std::vector<std::string> five(5, "X");
  CHECK(code_of([&] { append_column(base, "bad", five); }) == ErrorCode::LengthMismatch);
}

TEST_CASE("subset, select and split helpers") {
  const auto c = make_corpus({{{"a", "X"}}, {{"b", "Y"}, {"c", "Z"}}, {{"d", "X"}}});
  const std::vector<std::size_t> idx{2, 0};
  const auto s = subset(c, idx);
  CHECK(s.size() == 2);
  CHECK(s.sentences()[0].cell(0, 0) == "d");

  const std::vector<std::size_t> cols{1};
  CHECK(select_columns(c, cols).column(0) == std::vector<std::string>{"X", "Y", "Z", "X"});

  const std::vector<std::string> flat{"1", "2", "3", "4"};
  const auto chunks = split_by_sentence(c, flat);
  REQUIRE(chunks.size() == 3);
  CHECK(chunks[1] == std::vector<std::string>{"2", "3"});
}

TEST_CASE("random corpora survive write then parse") {
  std::mt19937_64 rng(11);
  const std::vector<std::string> alphabet{"a", "b", "\xC3\xA9", "-", "x", "'", "\xC5\x93"};
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t width = 1 + rng() % 5;
    const std::size_t n_sent = 1 + rng() % 6;
    std::vector<crftag::testing::Rows> sentences;
    for (std::size_t s = 0; s < n_sent; ++s) {
      crftag::testing::Rows rows;
      const std::size_t len = 1 + rng() % 7;
      for (std::size_t t = 0; t < len; ++t) {
        std::vector<std::string> row;
        for (std::size_t c = 0; c < width; ++c) {
          std::string cell;
          const std::size_t n = 1 + rng() % 4;
          for (std::size_t k = 0; k < n; ++k) cell += alphabet[rng() % alphabet.size()];
          row.push_back(cell);
        }
        rows.push_back(row);
      }
      sentences.push_back(rows);
    }
    const auto corpus = make_corpus(sentences);
    const auto text = write_corpus(corpus);
    const auto back = parse_corpus(text, corpus.schema());
    REQUIRE(back == corpus);
    REQUIRE(write_corpus(back) == text);
  }
}
