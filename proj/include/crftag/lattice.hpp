#ifndef CRFTAG_LATTICE_HPP_
#define CRFTAG_LATTICE_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace crftag {

/// Log-domain scores of one sentence: T x L node scores and (T-1) x L x L
/// transition scores, where edge(t, p, y) scores label p at t followed by y
/// at t+1.
class Lattice {
 public:
  Lattice() = default;
  Lattice(std::size_t length, std::size_t labels)
      : length_(length),
        labels_(labels),
        node_(length * labels, 0.0),
        edge_(length > 0 ? (length - 1) * labels * labels : 0, 0.0) {}

  std::size_t length() const { return length_; }
  std::size_t labels() const { return labels_; }

  double node(std::size_t t, std::size_t y) const { return node_[t * labels_ + y]; }
  double& node(std::size_t t, std::size_t y) { return node_[t * labels_ + y]; }
  double edge(std::size_t t, std::size_t prev, std::size_t cur) const {
    return edge_[(t * labels_ + prev) * labels_ + cur];
  }
  double& edge(std::size_t t, std::size_t prev, std::size_t cur) {
    return edge_[(t * labels_ + prev) * labels_ + cur];
  }

  std::span<const double> node_scores() const { return node_; }
  std::span<const double> edge_scores() const { return edge_; }

 private:
  std::size_t length_ = 0;
  std::size_t labels_ = 0;
  std::vector<double> node_;
  std::vector<double> edge_;
};

/// Sum of node and transition scores along `labels`. Throws LengthMismatch.
double sequence_score(const Lattice& lattice, std::span<const std::size_t> labels);

struct Marginals {
  double log_z = 0.0;
  std::vector<double> node;  // T x L
  std::vector<double> edge;  // (T-1) x L x L, same layout as Lattice

  double node_at(std::size_t t, std::size_t y, std::size_t labels) const {
    return node[t * labels + y];
  }
  double edge_at(std::size_t t, std::size_t p, std::size_t y, std::size_t labels) const {
    return edge[(t * labels + p) * labels + y];
  }
};

/// Log-partition and marginals, computed with log-sum-exp recursions.
Marginals forward_backward(const Lattice& lattice);

/// Only the log-partition (forward pass).
double log_partition(const Lattice& lattice);

/// Best label sequence; ties go to the lower label index at every decision.
std::vector<std::size_t> viterbi(const Lattice& lattice);

}  // namespace crftag

#endif  // CRFTAG_LATTICE_HPP_
