#ifndef CRFTAG_LBFGS_HPP_
#define CRFTAG_LBFGS_HPP_

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace crftag {

struct LbfgsOptions {
  std::size_t history = 7;
  std::size_t max_iterations = 300;
  /// Stop once |f_prev - f| / |f| falls below this.
  double tolerance = 1e-5;
  std::size_t max_backtracks = 40;
  double armijo = 1e-4;
};

struct LbfgsResult {
  std::vector<double> x;
  double value = 0.0;
  std::size_t iterations = 0;
  /// Objective after the starting point and after every accepted step.
  std::vector<double> trace;
  bool converged = false;
  std::string stop_reason;
};

/// Writes the gradient into its second argument and returns f(x).
using Objective = std::function<double(std::span<const double>, std::span<double>)>;

/// Limited-memory BFGS with backtracking Armijo line search; every accepted
/// step strictly decreases f.
LbfgsResult lbfgs_minimize(const Objective& f, std::vector<double> x0, const LbfgsOptions& options);

}  // namespace crftag

#endif  // CRFTAG_LBFGS_HPP_
