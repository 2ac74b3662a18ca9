#ifndef CRFTAG_TAGSET_HPP_
#define CRFTAG_TAGSET_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace crftag {

enum class Level { L0, L1, L2 };

std::string_view level_name(Level level);
Level parse_level(std::string_view name);

inline constexpr std::size_t kComponentCount = 4;

/// Spelling of the empty component in prediction columns. Inside a
/// ComponentTag the empty component is the empty string.
inline constexpr std::string_view kEpsilonCell = "EPS";

std::string component_cell(std::string_view symbol);
std::string component_symbol(std::string_view cell);

/// (g0, g1, g2, g3); g1..g3 may be empty (epsilon), g0 never is.
struct ComponentTag {
  std::array<std::string, kComponentCount> parts;

  const std::string& operator[](std::size_t i) const { return parts[i]; }
  std::string& operator[](std::size_t i) { return parts[i]; }

  /// "N F S EPS"
  std::string describe() const;

  auto operator<=>(const ComponentTag&) const = default;
};

/// A guarded constraint: when g0 is in `guard` (or the guard is empty),
/// every listed component must satisfy its allowed/forbidden set.
struct CompositionRule {
  struct Constraint {
    std::size_t component = 1;
    bool allowed = true;  // true: symbol must be in `symbols`; false: must not be
    std::set<std::string> symbols;
  };

  std::set<std::string> guard;
  std::vector<Constraint> constraints;
  std::string text;
  std::size_t line = 0;

  bool applies_to(const std::string& g0) const { return guard.empty() || guard.count(g0) > 0; }
  bool accepts(const ComponentTag& tuple) const;
};

/// Hierarchical tagset: three levels with parent maps, four component
/// alphabets, the L2 -> tuple decomposition, per-POS render order and rules.
/// Immutable once parsed.
class TagSchema {
 public:
  const std::vector<std::string>& l0() const { return levels_[0]; }
  const std::vector<std::string>& l1() const { return levels_[1]; }
  const std::vector<std::string>& l2() const { return levels_[2]; }
  const std::vector<std::string>& level(Level lv) const {
    return levels_[static_cast<std::size_t>(lv)];
  }

  bool has_tag(Level lv, std::string_view tag) const;

  /// Component alphabet without epsilon.
  const std::vector<std::string>& alphabet(std::size_t component) const {
    return alphabets_[component];
  }
  /// Symbols of a named group ("Mode_Temps", "Det_Pro", ...).
  const std::set<std::string>& group(std::string_view name) const;
  const std::map<std::string, std::pair<std::size_t, std::set<std::string>>>& groups() const {
    return groups_;
  }
  bool component_has(std::size_t component, std::string_view symbol) const;

  const std::vector<CompositionRule>& rules() const { return rules_; }
  const std::array<std::size_t, kComponentCount>& render_order(std::string_view g0) const;

  const std::string& parent(Level child_level, std::string_view tag) const;
  const ComponentTag& tuple_of(std::string_view l2_tag) const;
  const std::string* tag_of(const ComponentTag& tuple) const;

  /// FNV-1a hash of the source text.
  const std::string& hash() const { return hash_; }

 private:
  friend TagSchema parse_schema(std::string_view text);

  std::array<std::vector<std::string>, 3> levels_;
  std::array<std::set<std::string, std::less<>>, 3> level_sets_;
  std::map<std::string, std::string, std::less<>> l1_parent_;
  std::map<std::string, std::string, std::less<>> l2_parent_;
  std::array<std::vector<std::string>, kComponentCount> alphabets_;
  std::array<std::set<std::string, std::less<>>, kComponentCount> alphabet_sets_;
  std::map<std::string, std::pair<std::size_t, std::set<std::string>>> groups_;
  std::map<std::string, ComponentTag, std::less<>> decomposition_;
  std::map<ComponentTag, std::string> composition_;
  std::map<std::string, std::array<std::size_t, kComponentCount>, std::less<>> orders_;
  std::vector<CompositionRule> rules_;
  std::string hash_;
};

/// Parses the line-oriented schema format (sections [L0] [L1] [L2]
/// [COMPONENTS] [RULES] [ORDER]) and checks every schema invariant.
TagSchema parse_schema(std::string_view text);

TagSchema load_schema_file(const std::string& path);

/// The bundled 16/72/107 reference tagset.
const TagSchema& reference_schema();
std::string_view reference_schema_text();

/// Ancestor of an L2 tag at `level` (identity for L2). Throws UnknownTag.
std::string project_tag(const TagSchema& schema, std::string_view tag, Level level);

ComponentTag decompose(const TagSchema& schema, std::string_view tag);

/// Surface spelling of a tuple under the schema's render order for its g0.
std::string render(const TagSchema& schema, const ComponentTag& tuple);

bool satisfies_rules(const TagSchema& schema, const ComponentTag& tuple);

/// Rules pass and the tuple is in the image of the decomposition map.
bool validate_combination(const TagSchema& schema, const ComponentTag& tuple);

/// Inverse of decompose. Throws InvalidCombination.
std::string recombine(const TagSchema& schema, const ComponentTag& tuple);

/// Candidate symbols with scores for one component (epsilon = "").
using ScoredComponent = std::vector<std::pair<std::string, double>>;

/// Best valid tuple under the summed component scores; ties go to the
/// lexicographically smallest rendered tag. Throws NoValidTuple.
std::string repair(const TagSchema& schema,
                   const std::array<ScoredComponent, kComponentCount>& scored);

struct ProductCount {
  std::uint64_t raw = 0;        // |G0| x |G1+eps| x |G2+eps| x |G3+eps|
  std::uint64_t rule_ok = 0;    // tuples passing the composition rules
  std::uint64_t valid = 0;      // rules and inventory
};

ProductCount count_product(const TagSchema& schema);

}  // namespace crftag

#endif  // CRFTAG_TAGSET_HPP_
