#include "crftag/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crftag/error.hpp"

namespace crftag {

namespace {

double log_sum_exp(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// alpha(t, y) = node(t, y) + logsumexp_p(alpha(t-1, p) + edge(t-1, p, y))
std::vector<double> forward(const Lattice& lat) {
  const std::size_t T = lat.length();
  const std::size_t L = lat.labels();
  std::vector<double> alpha(T * L);
  std::vector<double> tmp(L);
  for (std::size_t y = 0; y < L; ++y) alpha[y] = lat.node(0, y);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t y = 0; y < L; ++y) {
      for (std::size_t p = 0; p < L; ++p)
        tmp[p] = alpha[(t - 1) * L + p] + lat.edge(t - 1, p, y);
      alpha[t * L + y] = lat.node(t, y) + log_sum_exp(tmp);
    }
  }
  return alpha;
}

}  // namespace

double sequence_score(const Lattice& lattice, std::span<const std::size_t> labels) {
  if (labels.size() != lattice.length())
    fail(ErrorCode::LengthMismatch, std::to_string(labels.size()) + " labels for a lattice of length " +
                                        std::to_string(lattice.length()));
  double s = 0.0;
  for (std::size_t t = 0; t < labels.size(); ++t) {
    if (labels[t] >= lattice.labels())
      fail(ErrorCode::UnknownLabel, "label index " + std::to_string(labels[t]) + " out of range");
    s += lattice.node(t, labels[t]);
    if (t + 1 < labels.size()) s += lattice.edge(t, labels[t], labels[t + 1]);
  }
  return s;
}

double log_partition(const Lattice& lattice) {
  if (lattice.length() == 0) return 0.0;
  const auto alpha = forward(lattice);
  const std::size_t L = lattice.labels();
  return log_sum_exp(std::span<const double>(alpha).subspan((lattice.length() - 1) * L, L));
}

Marginals forward_backward(const Lattice& lat) {
  const std::size_t T = lat.length();
  const std::size_t L = lat.labels();
  Marginals m;
  if (T == 0) return m;

  const auto alpha = forward(lat);
  std::vector<double> beta(T * L, 0.0);
  std::vector<double> tmp(L);
  for (std::size_t t = T - 1; t-- > 0;) {
    for (std::size_t p = 0; p < L; ++p) {
      for (std::size_t y = 0; y < L; ++y)
        tmp[y] = lat.edge(t, p, y) + lat.node(t + 1, y) + beta[(t + 1) * L + y];
      beta[t * L + p] = log_sum_exp(tmp);
    }
  }
  m.log_z = log_sum_exp(std::span<const double>(alpha).subspan((T - 1) * L, L));

  m.node.resize(T * L);
  for (std::size_t i = 0; i < T * L; ++i) m.node[i] = std::exp(alpha[i] + beta[i] - m.log_z);

  m.edge.resize((T - 1) * L * L);
  for (std::size_t t = 0; t + 1 < T; ++t)
    for (std::size_t p = 0; p < L; ++p) {
      const double a = alpha[t * L + p] - m.log_z;
      for (std::size_t y = 0; y < L; ++y)
        m.edge[(t * L + p) * L + y] =
            std::exp(a + lat.edge(t, p, y) + lat.node(t + 1, y) + beta[(t + 1) * L + y]);
    }
  return m;
}

std::vector<std::size_t> viterbi(const Lattice& lat) {
  const std::size_t T = lat.length();
  const std::size_t L = lat.labels();
  if (T == 0) return {};
  std::vector<double> delta(T * L);
  std::vector<std::size_t> back(T * L, 0);
  for (std::size_t y = 0; y < L; ++y) delta[y] = lat.node(0, y);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t y = 0; y < L; ++y) {
      std::size_t best_p = 0;
      double best = delta[(t - 1) * L] + lat.edge(t - 1, 0, y);
      for (std::size_t p = 1; p < L; ++p) {
        const double v = delta[(t - 1) * L + p] + lat.edge(t - 1, p, y);
        if (v > best) {
          best = v;
          best_p = p;
        }
      }
      delta[t * L + y] = best + lat.node(t, y);
      back[t * L + y] = best_p;
    }
  }
  std::vector<std::size_t> path(T);
  std::size_t y = 0;
  for (std::size_t k = 1; k < L; ++k)
    if (delta[(T - 1) * L + k] > delta[(T - 1) * L + y]) y = k;
  path[T - 1] = y;
  for (std::size_t t = T - 1; t > 0; --t) {
    y = back[t * L + y];
    path[t - 1] = y;
  }
  return path;
}

}  // namespace crftag
