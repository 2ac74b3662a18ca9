#include <doctest.h>

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <set>

#include "crftag/error.hpp"
#include "crftag/tagset.hpp"
#include "crftag/text.hpp"

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

const TagSchema& ref() { return reference_schema(); }

ComponentTag tuple(std::string g0, std::string g1, std::string g2, std::string g3) {
  return ComponentTag{{std::move(g0), std::move(g1), std::move(g2), std::move(g3)}};
}

// Parent maps read straight from the schema text, without TagSchema.
std::map<std::string, std::string> raw_parents(std::string_view section) {
  std::map<std::string, std::string> out;
  std::string current;
  for (const auto& line : text::split(reference_schema_text(), '\n')) {
    const auto t = text::trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t[0] == '[') {
      current = std::string(t);
      continue;
    }
    if (current != section) continue;
    const auto f = text::split(t, '\t');
    out[f[0]] = f[1];
  }
  return out;
}

// The three composition constraints, restated. IND is shared by the two G3
// groups; it reads as the indicative for verbs and as indefinite for
// determiners, so neither rule excludes it.
bool oracle_rules(const ComponentTag& t) {
  static const std::set<std::string> invariant{"ADV", "CONJCOO", "CONJSUB", "INT"};
  static const std::set<std::string> det_pro{"DEM", "DEF", "POSS", "PER", "INT"};
  static const std::set<std::string> mode_temps{"CON", "IMP", "SUB", "INDF", "INDI",
                                                "INDP", "INF", "PARP", "PARPRES"};
  if (invariant.count(t[0]) && !(t[1].empty() && t[2].empty() && t[3].empty())) return false;
  if (t[0] == "V" && det_pro.count(t[3])) return false;
  if (t[0] == "DET" && mode_temps.count(t[3])) return false;
  return true;
}

// Every way to spell `tag` as g0 followed by the other components in
// `order`, each either empty or one alphabet symbol (longest tried first).
void parse_all(const TagSchema& s, std::string_view rest, const std::array<std::size_t, 4>& order,
               std::size_t k, ComponentTag& acc, std::vector<ComponentTag>& out) {
  if (k == 4) {
    if (rest.empty()) out.push_back(acc);
    return;
  }
  const std::size_t c = order[k];
  std::vector<std::string> syms = s.alphabet(c);
  std::stable_sort(syms.begin(), syms.end(),
            [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
  for (const auto& sym : syms) {
    if (rest.substr(0, sym.size()) != sym) continue;
    acc[c] = sym;
    parse_all(s, rest.substr(sym.size()), order, k + 1, acc, out);
  }
  if (c != 0) {
    acc[c].clear();
    parse_all(s, rest, order, k + 1, acc, out);
  }
}

// Candidate parses in greedy order: longest G0 first, then longest symbol
// first at every later component, epsilon last.
std::vector<ComponentTag> string_parses(const TagSchema& s, std::string_view tag) {
  std::vector<ComponentTag> out;
  std::vector<std::string> heads = s.alphabet(0);
  std::stable_sort(heads.begin(), heads.end(),
                   [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
  for (const auto& g0 : heads) {
    if (tag.substr(0, g0.size()) != g0) continue;
    ComponentTag acc;
    acc[0] = g0;
    const auto& order = s.render_order(g0);
    std::vector<ComponentTag> found;
    parse_all(s, tag.substr(g0.size()), order, 1, acc, found);
    for (auto& f : found)
      if (f[0] == g0) out.push_back(f);
  }
  return out;
}

std::string custom_schema(std::string_view l2_extra = "") {
  return std::string(
             "[COMPONENTS]\nG0\tPOS\tN ADV\nG1\tGenre\tM F\nG2\tNombre\tS P\n"
             "[L0]\nN\nADV\n[L1]\nNS\tN\nADV\tADV\n"
             "[L2]\nNFS\tNS\tN\tF\tS\tEPS\nADV\tADV\tADV\tEPS\tEPS\tEPS\n") +
         std::string(l2_extra);
}

}  // namespace

TEST_CASE("bundled schema sizes") {
  CHECK(ref().l0().size() == 16);
  CHECK(ref().l1().size() == 72);
  CHECK(ref().l2().size() == 107);
}

TEST_CASE("custom schema projections resolve") {
  const auto s = parse_schema(custom_schema());
  CHECK(project_tag(s, "NFS", Level::L1) == "NS");
  CHECK(project_tag(s, "NFS", Level::L0) == "N");
  CHECK(project_tag(s, "NFS", Level::L2) == "NFS");
}

TEST_CASE("schema invariants are enforced") {
  CHECK(code_of([] { parse_schema(custom_schema("NFS2\tNS\tN\tF\tS\tEPS\n")); }) ==
        ErrorCode::NonInjectiveDecomposition);
  CHECK(code_of([] { parse_schema(custom_schema("NSF\tNS\tN\tF\tP\tEPS\n")); }) ==
        ErrorCode::SchemaSyntax);
  CHECK(code_of([] { parse_schema(custom_schema("NFS\tNS\tN\tF\tS\tEPS\n")); }) ==
        ErrorCode::DuplicateTag);
  CHECK(code_of([] { parse_schema(custom_schema("NMS\tNZ\tN\tM\tS\tEPS\n")); }) ==
        ErrorCode::DanglingParent);
  CHECK(code_of([] { parse_schema(custom_schema("NQS\tNS\tN\tQ\tS\tEPS\n")); }) ==
        ErrorCode::UnknownComponentSymbol);
}

TEST_CASE("projection matches an independent walk of the parent maps") {
  const auto l2p = raw_parents("[L2]");
  const auto l1p = raw_parents("[L1]");
  REQUIRE(l2p.size() == 107);
  for (const auto& [tag, parent] : l2p) {
    CHECK(project_tag(ref(), tag, Level::L1) == parent);
    CHECK(project_tag(ref(), tag, Level::L0) == l1p.at(parent));
  }
  CHECK(project_tag(ref(), "ADV", Level::L0) == "ADV");
  CHECK(project_tag(ref(), "NFS", Level::L0) == "N");
  CHECK(code_of([] { project_tag(ref(), "ZZZ", Level::L0); }) == ErrorCode::UnknownTag);
}

TEST_CASE("decompose known tags") {
  CHECK(decompose(ref(), "NFS") == tuple("N", "F", "S", ""));
  CHECK(decompose(ref(), "ADV") == tuple("ADV", "", "", ""));
  CHECK(decompose(ref(), "VINDP2P") == tuple("V", "2", "P", "INDP"));
  CHECK(decompose(ref(), "NFS").describe() == "N F S EPS");
}

// Some strings parse two ways (PINDFS: IND+F or INDF+nothing), so the
// parse is cross-checked against the tuples the inventory declares.
TEST_CASE("decomposition agrees with parsing the tag string") {
  for (const auto& tag : ref().l2()) {
    std::optional<ComponentTag> first;
    for (const auto& p : string_parses(ref(), tag))
      if (oracle_rules(p) && ref().tag_of(p) != nullptr) {
        first = p;
        break;
      }
    INFO(tag);
    REQUIRE(first.has_value());
    CHECK(decompose(ref(), tag) == *first);
  }
}

TEST_CASE("validity and recombination") {
  CHECK_FALSE(validate_combination(ref(), tuple("ADV", "M", "P", "")));
  CHECK(validate_combination(ref(), tuple("N", "F", "S", "")));
  CHECK_FALSE(validate_combination(ref(), tuple("V", "", "", "DEF")));
  CHECK(recombine(ref(), tuple("N", "F", "S", "")) == "NFS");
  CHECK(code_of([] { recombine(ref(), tuple("ADV", "M", "P", "")); }) ==
        ErrorCode::InvalidCombination);
  for (const auto& tag : ref().l2()) CHECK(recombine(ref(), decompose(ref(), tag)) == tag);
}

TEST_CASE("exhaustive product against the restated rules") {
  std::vector<std::vector<std::string>> alph(4);
  for (std::size_t c = 0; c < 4; ++c) {
    alph[c] = ref().alphabet(c);
    if (c > 0) alph[c].push_back("");
  }
  std::uint64_t raw = 0, valid = 0;
  for (const auto& a : alph[0])
    for (const auto& b : alph[1])
      for (const auto& c : alph[2])
        for (const auto& d : alph[3]) {
          const auto t = tuple(a, b, c, d);
          ++raw;
          const bool v = validate_combination(ref(), t);
          valid += v;
          if (!oracle_rules(t)) CHECK_FALSE(v);
          if (v) CHECK(ref().tag_of(t) != nullptr);
        }
  const auto pc = count_product(ref());
  CHECK(pc.raw == raw);
  CHECK(pc.raw == 4608);
  CHECK(pc.valid == valid);
  CHECK(valid == 107);
  for (const auto& g0 : {"ADV", "CONJCOO", "CONJSUB", "INT"}) {
    const auto only = tuple(g0, "", "", "");
    CHECK(validate_combination(ref(), only));
  }
}

namespace {

std::optional<std::string> repair_oracle(const std::array<ScoredComponent, 4>& scored) {
  std::optional<std::string> best;
  double best_score = 0.0;
  for (const auto& tag : ref().l2()) {
    const auto& t = decompose(ref(), tag);
    double s = 0.0;
    bool covered = true;
    for (std::size_t c = 0; c < 4 && covered; ++c) {
      const auto it = std::find_if(scored[c].begin(), scored[c].end(),
                                   [&](const auto& p) { return p.first == t[c]; });
      if (it == scored[c].end()) covered = false;
      else s += it->second;
    }
    if (!covered) continue;
    if (!best || s > best_score || (s == best_score && tag < *best)) {
      best = tag;
      best_score = s;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("repair examples") {
  std::array<ScoredComponent, 4> top1{{{{"N", 0.0}}, {{"F", 0.0}}, {{"S", 0.0}}, {{"", 0.0}}}};
  CHECK(repair(ref(), top1) == "NFS");

  std::array<ScoredComponent, 4> adv{{{{"ADV", -0.1}, {"N", -3.0}},
                                      {{"M", -0.2}, {"", -0.9}},
                                      {{"", -0.5}, {"S", -1.5}},
                                      {{"", -0.01}}}};
  CHECK(repair(ref(), adv) == "ADV");
  CHECK(repair_oracle(adv) == "ADV");

  std::array<ScoredComponent, 4> stuck{{{{"ADV", 0.0}}, {{"M", 0.0}}, {{"P", 0.0}}, {{"", 0.0}}}};
  CHECK(code_of([&] { repair(ref(), stuck); }) == ErrorCode::NoValidTuple);
}

TEST_CASE("repair matches exhaustive search on random scores") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5.0, 0.0);
  for (int trial = 0; trial < 300; ++trial) {
    std::array<ScoredComponent, 4> scored;
    for (std::size_t c = 0; c < 4; ++c) {
      std::vector<std::string> syms = ref().alphabet(c);
      if (c > 0) syms.push_back("");
      std::shuffle(syms.begin(), syms.end(), rng);
      const std::size_t keep = 1 + rng() % syms.size();
      for (std::size_t i = 0; i < keep; ++i)
        scored[c].emplace_back(syms[i], trial % 3 == 0 ? std::round(u(rng)) : u(rng));
    }
    const auto expected = repair_oracle(scored);
    if (expected) {
      CHECK(repair(ref(), scored) == *expected);
    } else {
      CHECK(code_of([&] { repair(ref(), scored); }) == ErrorCode::NoValidTuple);
    }
  }
}
