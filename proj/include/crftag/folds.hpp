#ifndef CRFTAG_FOLDS_HPP_
#define CRFTAG_FOLDS_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "crftag/corpus.hpp"

namespace crftag {

/// Sentence-level k-way partition. fold_of[i] is the fold of sentence i.
struct FoldAssignment {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> fold_of;

  std::vector<std::size_t> test_indices(std::size_t fold) const;
  std::vector<std::size_t> train_indices(std::size_t fold) const;
  std::vector<std::size_t> sizes() const;

  bool operator==(const FoldAssignment&) const = default;
};

/// Seeded shuffle, then round-robin: sizes are floor(n/k) or ceil(n/k).
/// Throws TooFewSentences when n < k, PipelineConfig when k < 2.
FoldAssignment kfold_split(std::size_t sentence_count, std::size_t k, std::uint64_t seed);
FoldAssignment kfold_split(const Corpus& corpus, std::size_t k, std::uint64_t seed);

}  // namespace crftag

#endif  // CRFTAG_FOLDS_HPP_
