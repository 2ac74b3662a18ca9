#include "crftag/folds.hpp"

#include <numeric>
#include <random>

#include "crftag/error.hpp"

namespace crftag {

std::vector<std::size_t> FoldAssignment::test_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i)
    if (fold_of[i] == fold) out.push_back(i);
  return out;
}

std::vector<std::size_t> FoldAssignment::train_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i)
    if (fold_of[i] != fold) out.push_back(i);
  return out;
}

std::vector<std::size_t> FoldAssignment::sizes() const {
  std::vector<std::size_t> out(k, 0);
  for (auto f : fold_of) ++out[f];
  return out;
}

FoldAssignment kfold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) fail(ErrorCode::PipelineConfig, "k must be at least 2");
  if (n < k)
    fail(ErrorCode::TooFewSentences, std::to_string(n) + " sentences cannot fill " +
                                         std::to_string(k) + " folds");
  // Fisher-Yates driven directly by the engine: std::shuffle and the
  // standard distributions are not specified bit-for-bit across libraries.
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = n; i-- > 1;) std::swap(order[i], order[rng() % (i + 1)]);

  FoldAssignment a{k, seed, std::vector<std::size_t>(n)};
  for (std::size_t j = 0; j < n; ++j) a.fold_of[order[j]] = j % k;
  return a;
}

FoldAssignment kfold_split(const Corpus& corpus, std::size_t k, std::uint64_t seed) {
  return kfold_split(corpus.size(), k, seed);
}

}  // namespace crftag
