#ifndef CRFTAG_MORPHOLOGY_HPP_
#define CRFTAG_MORPHOLOGY_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "crftag/corpus.hpp"

namespace crftag {

/// Racine/reste split of a (form, lemma) pair. When the two are identical
/// both restes are the sentinel "x".
struct RacineReste {
  std::string racine;
  std::string r_mot;
  std::string r_lemme;

  bool operator==(const RacineReste&) const = default;
};

inline constexpr std::string_view kIdenticalReste = "x";
inline constexpr std::string_view kEmptyReste = "_EMPTY_";

/// Longest-common-prefix decomposition over NFC code points, case-sensitive.
RacineReste racine_reste(std::string_view mot, std::string_view lemme);

/// The last min(n, length) code points of `word`.
std::string last_n(std::string_view word, std::size_t n);

/// A reste as a feature cell: the empty reste becomes "_EMPTY_".
std::string reste_cell(std::string_view reste);

/// One observation column of a feature recipe.
struct RecipeElement {
  enum class Kind {
    Form,        // mot
    Lemma,       // lemme
    RMot,        // Rmot
    RLemme,      // Rlemme
    RMotOrSuffix,    // Rmot|Dn(w): reste when mot != lemme, else Dn(w)
    RLemmeOrSuffix,  // Rlemme|Dn(w)
    Suffix,      // Dn(w)
  };
  enum class Source { Mot, Lemme };

  Kind kind = Kind::Form;
  std::size_t n = 0;
  Source source = Source::Mot;

  bool is_base() const { return kind == Kind::Form || kind == Kind::Lemma; }
  bool needs_lemma() const;
  std::string name() const;
  std::string derive(std::string_view mot, std::string_view lemme) const;

  /// Accepts mot, lemme, Rmot, Rlemme, Dn(mot), Dn(lemme), Rmot|Dn(w), Rlemme|Dn(w).
  static RecipeElement parse(std::string_view text);

  bool operator==(const RecipeElement&) const = default;
};

struct FeatureRecipe {
  std::string name;
  std::vector<RecipeElement> elements;

  bool needs_lemma() const;
  /// Comma-separated element list, e.g. "mot,D3(mot),D2(mot)".
  std::string describe() const;

  bool operator==(const FeatureRecipe&) const = default;
};

/// The named recipes I, II, III, IV, IIIbis, IVbis. Throws PipelineConfig
/// for other names.
FeatureRecipe named_recipe(std::string_view name);

/// A named recipe, or a comma-separated element list.
FeatureRecipe parse_recipe(std::string_view text);

std::vector<std::string> recipe_names();

/// Appends one derived column per non-base recipe element, in recipe order.
/// Throws MissingColumn when the recipe needs a lemma the corpus lacks.
Corpus materialize_recipe(const Corpus& corpus, const FeatureRecipe& recipe);

/// Exactly the recipe's columns, in recipe order (base columns copied,
/// derived columns computed).
Corpus feature_view(const Corpus& corpus, const FeatureRecipe& recipe);

}  // namespace crftag

#endif  // CRFTAG_MORPHOLOGY_HPP_
