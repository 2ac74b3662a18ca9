#include "crftag/lbfgs.hpp"

#include <cmath>
#include <deque>

#include "crftag/error.hpp"

namespace crftag {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

struct Pair {
  std::vector<double> s;
  std::vector<double> y;
  double rho;
};

// Two-loop recursion: returns -H g.
std::vector<double> direction(const std::deque<Pair>& mem, std::span<const double> g) {
  std::vector<double> q(g.begin(), g.end());
  std::vector<double> alpha(mem.size());
  for (std::size_t k = mem.size(); k-- > 0;) {
    alpha[k] = mem[k].rho * dot(mem[k].s, q);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] -= alpha[k] * mem[k].y[i];
  }
  if (!mem.empty()) {
    const auto& last = mem.back();
    const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
    for (double& v : q) v *= gamma;
  }
  for (std::size_t k = 0; k < mem.size(); ++k) {
    const double beta = mem[k].rho * dot(mem[k].y, q);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] += mem[k].s[i] * (alpha[k] - beta);
  }
  for (double& v : q) v = -v;
  return q;
}

}  // namespace

LbfgsResult lbfgs_minimize(const Objective& f, std::vector<double> x0, const LbfgsOptions& opt) {
  LbfgsResult r;
  const std::size_t n = x0.size();
  r.x = std::move(x0);
  std::vector<double> g(n), x_new(n), g_new(n);
  r.value = f(r.x, g);
  if (!std::isfinite(r.value)) fail(ErrorCode::NonFiniteObjective, "objective is not finite at the start");
  r.trace.push_back(r.value);

  std::deque<Pair> mem;
  while (r.iterations < opt.max_iterations) {
    const double gnorm = std::sqrt(dot(g, g));
    if (gnorm == 0.0 || n == 0) {
      r.converged = true;
      r.stop_reason = "zero gradient";
      break;
    }
    auto d = direction(mem, g);
    double slope = dot(g, d);
    if (!(slope < 0.0)) {
      mem.clear();
      for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
      slope = -gnorm * gnorm;
    }
    double step = mem.empty() ? 1.0 / gnorm : 1.0;
    double f_new = 0.0;
    bool accepted = false;
    for (std::size_t k = 0; k < opt.max_backtracks; ++k) {
      for (std::size_t i = 0; i < n; ++i) x_new[i] = r.x[i] + step * d[i];
      f_new = f(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= r.value + opt.armijo * step * slope && f_new < r.value) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      r.converged = true;
      r.stop_reason = "line search made no progress";
      break;
    }
    ++r.iterations;

    Pair p{std::vector<double>(n), std::vector<double>(n), 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      p.s[i] = x_new[i] - r.x[i];
      p.y[i] = g_new[i] - g[i];
    }
    const double sy = dot(p.s, p.y);
    if (sy > 1e-12 * std::sqrt(dot(p.s, p.s) * dot(p.y, p.y))) {
      p.rho = 1.0 / sy;
      mem.push_back(std::move(p));
      if (mem.size() > opt.history) mem.pop_front();
    }

    const double previous = r.value;
    r.x.swap(x_new);
    g.swap(g_new);
    r.value = f_new;
    r.trace.push_back(r.value);
    if (std::abs(previous - r.value) < opt.tolerance * std::abs(r.value)) {
      r.converged = true;
      r.stop_reason = "relative objective change below tolerance";
      break;
    }
  }
  if (r.stop_reason.empty()) r.stop_reason = "iteration limit";
  return r;
}

}  // namespace crftag
