#include "crftag/tagset.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "crftag/corpus.hpp"
#include "crftag/error.hpp"
#include "crftag/text.hpp"

namespace crftag {

std::string_view level_name(Level level) {
  switch (level) {
    case Level::L0: return "L0";
    case Level::L1: return "L1";
    case Level::L2: return "L2";
  }
  return "L2";
}

Level parse_level(std::string_view name) {
  if (name == "L0") return Level::L0;
  if (name == "L1") return Level::L1;
  if (name == "L2") return Level::L2;
  fail(ErrorCode::PipelineConfig, "unknown level '" + std::string(name) + "'");
}

std::string component_cell(std::string_view symbol) {
  return symbol.empty() ? std::string(kEpsilonCell) : std::string(symbol);
}

std::string component_symbol(std::string_view cell) {
  return cell == kEpsilonCell ? std::string() : std::string(cell);
}

std::string ComponentTag::describe() const {
  std::string out;
  for (std::size_t i = 0; i < kComponentCount; ++i) {
    if (i) out += ' ';
    out += component_cell(parts[i]);
  }
  return out;
}

bool CompositionRule::accepts(const ComponentTag& tuple) const {
  if (!applies_to(tuple[0])) return true;
  for (const auto& c : constraints) {
    const bool member = c.symbols.count(tuple[c.component]) > 0;
    if (member != c.allowed) return false;
  }
  return true;
}

bool TagSchema::has_tag(Level lv, std::string_view tag) const {
  const auto& set = level_sets_[static_cast<std::size_t>(lv)];
  return set.find(tag) != set.end();
}

const std::set<std::string>& TagSchema::group(std::string_view name) const {
  const auto it = groups_.find(std::string(name));
  if (it == groups_.end())
    fail(ErrorCode::UnknownComponentSymbol, "no component group '" + std::string(name) + "'");
  return it->second.second;
}

bool TagSchema::component_has(std::size_t component, std::string_view symbol) const {
  if (symbol.empty()) return component != 0;
  return alphabet_sets_[component].find(symbol) != alphabet_sets_[component].end();
}

const std::array<std::size_t, kComponentCount>& TagSchema::render_order(std::string_view g0) const {
  static constexpr std::array<std::size_t, kComponentCount> kDefault{0, 1, 2, 3};
  const auto it = orders_.find(g0);
  return it == orders_.end() ? kDefault : it->second;
}

const std::string& TagSchema::parent(Level child_level, std::string_view tag) const {
  const auto& parents = child_level == Level::L2 ? l2_parent_ : l1_parent_;
  const auto it = parents.find(tag);
  if (it == parents.end())
    fail(ErrorCode::UnknownTag, "'" + std::string(tag) + "' is not an " +
                                    std::string(level_name(child_level)) + " tag");
  return it->second;
}

const ComponentTag& TagSchema::tuple_of(std::string_view l2_tag) const {
  const auto it = decomposition_.find(l2_tag);
  if (it == decomposition_.end())
    fail(ErrorCode::UnknownTag, "'" + std::string(l2_tag) + "' is not an L2 tag");
  return it->second;
}

const std::string* TagSchema::tag_of(const ComponentTag& tuple) const {
  const auto it = composition_.find(tuple);
  return it == composition_.end() ? nullptr : &it->second;
}

namespace {

std::vector<std::string> words(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.emplace_back(line.substr(start, i - start));
  }
  return out;
}

[[noreturn]] void fail_at(ErrorCode code, std::size_t line, const std::string& msg) {
  fail(code, "schema line " + std::to_string(line) + ": " + msg);
}

std::size_t parse_component_name(std::string_view w, std::size_t line) {
  if (w.size() == 2 && (w[0] == 'G' || w[0] == 'g') && w[1] >= '0' && w[1] <= '3')
    return static_cast<std::size_t>(w[1] - '0');
  fail_at(ErrorCode::SchemaSyntax, line, "expected a component name G0..G3, got '" +
                                             std::string(w) + "'");
}

struct PendingL2 {
  std::string tag;
  std::string parent;
  ComponentTag tuple;
  std::size_t line;
};

struct PendingParent {
  std::string child;
  std::string parent;
  std::size_t line;
};

}  // namespace

TagSchema parse_schema(std::string_view raw) {
  if (!text::is_valid_utf8(raw)) fail(ErrorCode::EncodingError, "schema is not valid UTF-8");
  TagSchema s;
  s.hash_ = text::fnv1a_hex(raw);

  enum class Section { None, L0, L1, L2, Components, Rules, Order } section = Section::None;
  std::vector<PendingParent> l1_lines;
  std::vector<PendingL2> l2_lines;
  std::vector<std::pair<std::vector<std::string>, std::size_t>> rule_lines;
  std::size_t line_no = 0;

  const auto add_tag = [&](std::size_t lv, const std::string& tag, std::size_t line) {
    if (!s.level_sets_[lv].insert(tag).second)
      fail_at(ErrorCode::DuplicateTag, line, "tag '" + tag + "' declared twice in L" +
                                                 std::to_string(lv));
    s.levels_[lv].push_back(tag);
  };

  for (const auto& raw_line : text::split(raw, '\n')) {
    ++line_no;
    std::string_view line = raw_line;
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = text::trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line == "[L0]") section = Section::L0;
      else if (line == "[L1]") section = Section::L1;
      else if (line == "[L2]") section = Section::L2;
      else if (line == "[COMPONENTS]") section = Section::Components;
      else if (line == "[RULES]") section = Section::Rules;
      else if (line == "[ORDER]") section = Section::Order;
      else fail_at(ErrorCode::SchemaSyntax, line_no, "unknown section " + std::string(line));
      continue;
    }
    const auto w = words(line);
    switch (section) {
      case Section::None:
        fail_at(ErrorCode::SchemaSyntax, line_no, "content before the first section");
      case Section::L0:
        if (w.size() != 1) fail_at(ErrorCode::SchemaSyntax, line_no, "[L0] expects one tag per line");
        add_tag(0, w[0], line_no);
        break;
      case Section::L1:
        if (w.size() != 2)
          fail_at(ErrorCode::SchemaSyntax, line_no, "[L1] expects 'tag parent'");
        add_tag(1, w[0], line_no);
        l1_lines.push_back({w[0], w[1], line_no});
        break;
      case Section::L2: {
        if (w.size() != 6)
          fail_at(ErrorCode::SchemaSyntax, line_no, "[L2] expects 'tag parent g0 g1 g2 g3'");
        add_tag(2, w[0], line_no);
        PendingL2 p{w[0], w[1], {}, line_no};
        for (std::size_t c = 0; c < kComponentCount; ++c) p.tuple[c] = component_symbol(w[2 + c]);
        l2_lines.push_back(std::move(p));
        break;
      }
      case Section::Components: {
        if (w.size() < 3)
          fail_at(ErrorCode::SchemaSyntax, line_no, "[COMPONENTS] expects 'Gi group symbols...'");
        const std::size_t comp = parse_component_name(w[0], line_no);
        auto& grp = s.groups_[w[1]];
        if (!grp.second.empty() && grp.first != comp)
          fail_at(ErrorCode::SchemaSyntax, line_no, "group '" + w[1] + "' spans two components");
        grp.first = comp;
        for (std::size_t i = 2; i < w.size(); ++i) {
          if (w[i] == kEpsilonCell)
            fail_at(ErrorCode::SchemaSyntax, line_no, "EPS is implicit in G1..G3");
          grp.second.insert(w[i]);
          if (s.alphabet_sets_[comp].insert(w[i]).second) s.alphabets_[comp].push_back(w[i]);
        }
        break;
      }
      case Section::Rules:
        rule_lines.emplace_back(w, line_no);
        break;
      case Section::Order: {
        if (w.size() != 1 + kComponentCount)
          fail_at(ErrorCode::SchemaSyntax, line_no, "[ORDER] expects 'g0 gA gB gC gD'");
        std::array<std::size_t, kComponentCount> order{};
        std::array<bool, kComponentCount> seen{};
        for (std::size_t i = 0; i < kComponentCount; ++i) {
          order[i] = parse_component_name(w[1 + i], line_no);
          if (seen[order[i]])
            fail_at(ErrorCode::SchemaSyntax, line_no, "order is not a permutation of g0..g3");
          seen[order[i]] = true;
        }
        if (!s.orders_.emplace(w[0], order).second)
          fail_at(ErrorCode::SchemaSyntax, line_no, "duplicate order for " + w[0]);
        break;
      }
    }
  }

  if (s.levels_[0].empty() || s.levels_[1].empty() || s.levels_[2].empty())
    fail(ErrorCode::SchemaSyntax, "schema must declare [L0], [L1] and [L2] tags");
  if (s.alphabets_[0].empty())
    fail(ErrorCode::SchemaSyntax, "schema must declare the G0 alphabet in [COMPONENTS]");

  for (const auto& p : l1_lines) {
    if (!s.has_tag(Level::L0, p.parent))
      fail_at(ErrorCode::DanglingParent, p.line, "L1 tag '" + p.child + "' has unknown L0 parent '" +
                                                     p.parent + "'");
    s.l1_parent_[p.child] = p.parent;
  }

  for (const auto& [w, line] : rule_lines) {
    CompositionRule rule;
    rule.line = line;
    rule.text = text::join(w, " ");
    const auto arrow = std::find(w.begin(), w.end(), "->");
    if (arrow == w.end())
      fail_at(ErrorCode::SchemaSyntax, line, "rule needs 'guard -> constraints'");
    for (auto it = w.begin(); it != arrow; ++it) {
      if (*it == "*") continue;
      if (!s.component_has(0, *it))
        fail_at(ErrorCode::UnknownComponentSymbol, line, "rule guard '" + *it + "' is not in G0");
      rule.guard.insert(*it);
    }
    std::vector<std::vector<std::string>> clauses(1);
    for (auto it = arrow + 1; it != w.end(); ++it) {
      if (*it == ";") clauses.emplace_back();
      else clauses.back().push_back(*it);
    }
    for (const auto& cl : clauses) {
      if (cl.size() < 3)
        fail_at(ErrorCode::SchemaSyntax, line, "constraint needs 'Gi in|notin symbols...'");
      CompositionRule::Constraint c;
      c.component = parse_component_name(cl[0], line);
      if (cl[1] == "in") c.allowed = true;
      else if (cl[1] == "notin") c.allowed = false;
      else fail_at(ErrorCode::SchemaSyntax, line, "expected 'in' or 'notin', got '" + cl[1] + "'");
      for (std::size_t i = 2; i < cl.size(); ++i) {
        const std::string sym = component_symbol(cl[i]);
        if (!s.component_has(c.component, sym))
          fail_at(ErrorCode::UnknownComponentSymbol, line,
                  "'" + cl[i] + "' is not a G" + std::to_string(c.component) + " symbol");
        c.symbols.insert(sym);
      }
      rule.constraints.push_back(std::move(c));
    }
    s.rules_.push_back(std::move(rule));
  }

  for (const auto& [g0, order] : s.orders_)
    if (!s.component_has(0, g0))
      fail(ErrorCode::UnknownComponentSymbol, "[ORDER] names '" + g0 + "', not a G0 symbol");

  for (const auto& p : l2_lines) {
    if (!s.has_tag(Level::L1, p.parent))
      fail_at(ErrorCode::DanglingParent, p.line, "L2 tag '" + p.tag + "' has unknown L1 parent '" +
                                                     p.parent + "'");
    if (p.tuple[0].empty())
      fail_at(ErrorCode::UnknownComponentSymbol, p.line, "g0 of '" + p.tag + "' cannot be EPS");
    for (std::size_t c = 0; c < kComponentCount; ++c)
      if (!s.component_has(c, p.tuple[c]))
        fail_at(ErrorCode::UnknownComponentSymbol, p.line,
                "'" + p.tuple[c] + "' is not a G" + std::to_string(c) + " symbol (tag '" +
                    p.tag + "')");
    const auto [it, inserted] = s.composition_.emplace(p.tuple, p.tag);
    if (!inserted)
      fail_at(ErrorCode::NonInjectiveDecomposition, p.line,
              "'" + p.tag + "' and '" + it->second + "' share the tuple (" + p.tuple.describe() + ")");
    s.decomposition_[p.tag] = p.tuple;
    s.l2_parent_[p.tag] = p.parent;
    const std::string rendered = render(s, p.tuple);
    if (rendered != p.tag)
      fail_at(ErrorCode::SchemaSyntax, p.line,
              "tag '" + p.tag + "' does not match its rendered tuple '" + rendered + "'");
    for (const auto& r : s.rules_)
      if (!r.accepts(p.tuple))
        fail_at(ErrorCode::InvalidCombination, p.line,
                "tag '" + p.tag + "' violates rule at line " + std::to_string(r.line));
  }
  return s;
}

TagSchema load_schema_file(const std::string& path) {
  const std::string contents = read_text_file(path);
  try {
    return parse_schema(contents);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

const TagSchema& reference_schema() {
  static const TagSchema schema = parse_schema(reference_schema_text());
  return schema;
}

std::string project_tag(const TagSchema& schema, std::string_view tag, Level level) {
  if (!schema.has_tag(Level::L2, tag))
    fail(ErrorCode::UnknownTag, "'" + std::string(tag) + "' is not an L2 tag");
  if (level == Level::L2) return std::string(tag);
  const std::string& l1 = schema.parent(Level::L2, tag);
  if (level == Level::L1) return l1;
  return schema.parent(Level::L1, l1);
}

ComponentTag decompose(const TagSchema& schema, std::string_view tag) {
  return schema.tuple_of(tag);
}

std::string render(const TagSchema& schema, const ComponentTag& tuple) {
  std::string out;
  for (auto c : schema.render_order(tuple[0])) out += tuple[c];
  return out;
}

bool satisfies_rules(const TagSchema& schema, const ComponentTag& tuple) {
  if (tuple[0].empty()) return false;
  for (std::size_t c = 0; c < kComponentCount; ++c)
    if (!schema.component_has(c, tuple[c])) return false;
  for (const auto& r : schema.rules())
    if (!r.accepts(tuple)) return false;
  return true;
}

bool validate_combination(const TagSchema& schema, const ComponentTag& tuple) {
  return satisfies_rules(schema, tuple) && schema.tag_of(tuple) != nullptr;
}

std::string recombine(const TagSchema& schema, const ComponentTag& tuple) {
  if (!validate_combination(schema, tuple))
    fail(ErrorCode::InvalidCombination, "(" + tuple.describe() + ") is not a valid tag");
  return *schema.tag_of(tuple);
}

std::string repair(const TagSchema& schema,
                   const std::array<ScoredComponent, kComponentCount>& scored) {
  std::array<std::map<std::string, double, std::less<>>, kComponentCount> best;
  for (std::size_t c = 0; c < kComponentCount; ++c) {
    if (scored[c].empty())
      fail(ErrorCode::NoValidTuple, "component G" + std::to_string(c) + " has no candidates");
    for (const auto& [sym, score] : scored[c]) {
      if (!std::isfinite(score))
        fail(ErrorCode::NoValidTuple, "non-finite score for G" + std::to_string(c) + " symbol '" +
                                          sym + "'");
      const auto it = best[c].find(sym);
      if (it == best[c].end() || score > it->second) best[c][sym] = score;
    }
  }
  const std::string* winner = nullptr;
  double winner_score = 0.0;
  for (const auto& tag : schema.l2()) {
    const auto& tuple = schema.tuple_of(tag);
    double total = 0.0;
    bool covered = true;
    for (std::size_t c = 0; c < kComponentCount && covered; ++c) {
      const auto it = best[c].find(tuple[c]);
      if (it == best[c].end()) covered = false;
      else total += it->second;
    }
    if (!covered || !satisfies_rules(schema, tuple)) continue;
    if (!winner || total > winner_score || (total == winner_score && tag < *winner)) {
      winner = &tag;
      winner_score = total;
    }
  }
  if (!winner) fail(ErrorCode::NoValidTuple, "no valid tuple can be formed from the candidates");
  return *winner;
}

ProductCount count_product(const TagSchema& schema) {
  std::array<std::vector<std::string>, kComponentCount> alpha;
  for (std::size_t c = 0; c < kComponentCount; ++c) {
    alpha[c] = schema.alphabet(c);
    if (c > 0) alpha[c].insert(alpha[c].begin(), std::string());
  }
  ProductCount count;
  ComponentTag t;
  for (const auto& a : alpha[0])
    for (const auto& b : alpha[1])
      for (const auto& c : alpha[2])
        for (const auto& d : alpha[3]) {
          t.parts = {a, b, c, d};
          ++count.raw;
          if (satisfies_rules(schema, t)) {
            ++count.rule_ok;
            if (schema.tag_of(t)) ++count.valid;
          }
        }
  return count;
}

}  // namespace crftag
