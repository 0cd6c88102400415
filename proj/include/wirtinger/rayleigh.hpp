#pragma once

/**
 * @file rayleigh.hpp
 * @brief Brute-force minimization of the discrete weighted Rayleigh quotient
 *        (∫a^{1-p}|u'|^p)^{1/p} / (∫a|u|^q)^{1/q} under ∫a|u|^{q-2}u = 0.
 *
 * The minimizer is independent of the closed-form constant: it only uses the
 * functionals of inequality.hpp on piecewise-linear grid functions.
 *
 * The constraint is removed from the search space by the admissible shift:
 * for v on the grid let c(v) solve ∫a φ'(v - c) = 0 and minimize
 *
 *   f(v) = (1/p) log R(v) - (1/q) log L(v - c(v)).
 *
 * Because ∫a φ'(v - c) vanishes at c(v), the derivative of L through c(v) is
 * zero and ∇f is available in closed form. f is invariant under v → λv + μ,
 * so every iterate is feasible after one shift and renormalization.
 *
 * |·| is smoothed to (·² + ε²)^{1/2} while ε is decayed on the coarsest grid;
 * finer grids are reached by linear prolongation and solved with ε = 0.
 * Directions come from limited-memory BFGS with Armijo backtracking. Grid
 * cells that touch a zero of the weight tie their two end nodes together, so
 * the search never leaves the finite-energy set.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "wirtinger/error.hpp"
#include "wirtinger/exponents.hpp"
#include "wirtinger/inequality.hpp"
#include "wirtinger/mesh.hpp"
#include "wirtinger/weights.hpp"

namespace wirt {

struct BacktrackingRule {
  double initial_step = 1.0;
  double shrink = 0.5;
  double sufficient_decrease = 1e-4;
};

struct MinimizerConfig {
  std::size_t nodes = 4096;
  double smoothing_eps = 1e-2;
  double eps_decay = 0.1;
  /// Smoothing below this level is replaced by the exact functional.
  double eps_floor = 1e-6;
  /// Iteration budget per start, summed over all stages and grids.
  int max_outer = 40000;
  BacktrackingRule step_rule{};
  int restarts = 2;
  std::uint64_t seed = 0;
  /// Coarsest grid of the prolongation cascade.
  std::size_t coarse_nodes = 64;
  int lbfgs_memory = 12;
  /// A stage ends when the quotient changes by less than stall_tolerance
  /// (relative) over stall_window iterations.
  int stall_window = 50;
  double stall_tolerance = 1e-10;
};

struct MinimizationResult {
  /// (∫a^{1-p}|u'|^p)^{1/p} / (∫a|u|^q)^{1/q} at argmin.
  double quotient = std::numeric_limits<double>::infinity();
  PeriodicFunction argmin{1.0, std::vector<double>(kMinNodes, 0.0)};
  int iterations = 0;
  bool converged = false;
  std::vector<std::pair<int, double>> history;
  double lhs = 0.0;
  double rhs = 0.0;
  /// Admissible shift residual of argmin relative to ‖u‖_∞^{q-1}∫a.
  double constraint_residual = 0.0;
};

namespace detail {

inline void validate(const MinimizerConfig& c) {
  if (c.nodes < 64) throw DomainError("MinimizerConfig: nodes must be at least 64");
  if (c.restarts < 1) throw DomainError("MinimizerConfig: restarts must be at least 1");
  if (!(c.smoothing_eps > 0.0)) throw DomainError("MinimizerConfig: smoothing_eps must be positive");
  if (!(c.eps_decay > 0.0 && c.eps_decay < 1.0)) {
    throw DomainError("MinimizerConfig: eps_decay must lie in (0, 1)");
  }
  if (c.max_outer < 1) throw DomainError("MinimizerConfig: max_outer must be positive");
  if (!(c.step_rule.shrink > 0.0 && c.step_rule.shrink < 1.0) || !(c.step_rule.initial_step > 0.0) ||
      !(c.step_rule.sufficient_decrease > 0.0 && c.step_rule.sufficient_decrease < 1.0)) {
    throw DomainError("MinimizerConfig: invalid backtracking parameters");
  }
  if (c.lbfgs_memory < 1 || c.stall_window < 1) {
    throw DomainError("MinimizerConfig: memory and stall window must be positive");
  }
}

/// Log-quotient objective on one grid, over the free (merged) variables.
class QuotientObjective {
 public:
  QuotientObjective(const Weight& weight, const ExponentPair& e, std::size_t nodes)
      : mesh_(weight, nodes), p_(e.p()), q_(e.q()), h_(mesh_.spacing()) {
    dweights_ = mesh_.derivative_weights(p_);
    // Union the two end nodes of every cell that touches a zero of a.
    std::vector<std::size_t> parent(nodes);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (std::size_t i = 0; i < nodes; ++i) {
      if (mesh_.has_zero(i)) {
        const std::size_t a = find(i);
        const std::size_t b = find((i + 1) % nodes);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
    group_.resize(nodes);
    std::vector<std::size_t> index(nodes, nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
      const std::size_t r = find(i);
      if (index[r] == nodes) {
        index[r] = groups_;
        leader_.push_back(i);
        ++groups_;
      }
      group_[i] = index[r];
    }
  }

  const CellMesh& mesh() const { return mesh_; }
  std::size_t nodes() const { return mesh_.nodes(); }
  std::size_t size() const { return groups_; }

  std::vector<double> expand(const std::vector<double>& z) const {
    std::vector<double> v(nodes());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = z[group_[i]];
    return v;
  }

  std::vector<double> restrict_to_groups(const std::vector<double>& v) const {
    std::vector<double> z(groups_);
    for (std::size_t g = 0; g < groups_; ++g) z[g] = v[leader_[g]];
    return z;
  }

  /// Shift c solving Σ W φ'_ε(v - c) = 0, φ_ε(w) = (w² + ε²)^{q/2}.
  double smoothed_shift(const std::vector<double>& v, double eps, double guess) const {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& pt : mesh_.points()) {
      const double x = mesh_.interpolate(v, pt);
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    if (!(hi > lo)) return lo;
    const double tol = 1e-15 * std::max(std::abs(lo), std::abs(hi));
    const double e2 = eps * eps;
    double c = std::clamp(guess, lo, hi);
    if (!(c > lo && c < hi)) c = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
      double g = 0.0;
      double dg = 0.0;
      bool singular = false;
      for (const auto& pt : mesh_.points()) {
        const double w = mesh_.interpolate(v, pt) - c;
        const double s = w * w + e2;
        if (s == 0.0) {
          singular = singular || q_ < 2.0;
          continue;
        }
        const double m = std::pow(s, 0.5 * q_ - 2.0);
        g += pt.weight * m * s * w;
        dg += pt.weight * m * ((q_ - 1.0) * w * w + e2);
      }
      if (g == 0.0) return c;
      if (g > 0.0) {
        lo = c;
      } else {
        hi = c;
      }
      double next = !singular && dg > 0.0 ? c + g / dg : lo;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      const double step = std::abs(next - c);
      c = next;
      if (step <= tol || hi - lo <= tol) return c;
    }
    return c;
  }

  /// f(z) and ∇f(z); returns +∞ when a functional degenerates.
  double evaluate(const std::vector<double>& z, double eps, std::vector<double>& grad) {
    const std::vector<double> v = expand(z);
    shift_ = smoothed_shift(v, eps, shift_);
    const double e2 = eps * eps;
    const double ed = eps * 2.0 * std::numbers::pi / mesh_.period();
    const double ed2 = ed * ed;

    std::vector<double> gv(nodes(), 0.0);
    double L = 0.0;
    for (const auto& pt : mesh_.points()) {
      const double w = mesh_.interpolate(v, pt) - shift_;
      const double s = w * w + e2;
      if (s == 0.0) continue;
      const double m = std::pow(s, 0.5 * q_ - 1.0);
      L += pt.weight * m * s;
      const double dphi = pt.weight * q_ * m * w;
      const std::size_t next = pt.cell + 1 == nodes() ? 0 : pt.cell + 1;
      gv[pt.cell] -= (1.0 - pt.tau) * dphi / q_;
      gv[next] -= pt.tau * dphi / q_;
    }
    double R = 0.0;
    std::vector<double> gr(nodes(), 0.0);
    for (std::size_t i = 0; i < nodes(); ++i) {
      if (mesh_.has_zero(i)) continue;
      const std::size_t next = i + 1 == nodes() ? 0 : i + 1;
      const double d = (v[next] - v[i]) / h_;
      const double s = d * d + ed2;
      if (s == 0.0) continue;
      const double m = std::pow(s, 0.5 * p_ - 1.0);
      R += dweights_[i] * m * s;
      const double dpsi = dweights_[i] * p_ * m * d / h_;
      gr[i] -= dpsi;
      gr[next] += dpsi;
    }
    if (!(L > 0.0) || !(R > 0.0) || !std::isfinite(L) || !std::isfinite(R)) {
      return std::numeric_limits<double>::infinity();
    }
    grad.assign(groups_, 0.0);
    for (std::size_t i = 0; i < nodes(); ++i) {
      grad[group_[i]] += gr[i] / (p_ * R) + gv[i] / L;
    }
    return std::log(R) / p_ - std::log(L) / q_;
  }

  /// Exact quotient, lhs and rhs of the grid function v (after projection).
  struct Exact {
    PeriodicFunction u;
    double lhs;
    double rhs;
    double quotient;
    double residual;
  };

  Exact exact(const std::vector<double>& v) const {
    PeriodicFunction u(mesh_.period(), v);
    u = project_constraint(u, mesh_, q_);
    const double sup = u.sup_norm();
    if (sup > 0.0) u = u.scaled(1.0 / sup);
    const double lhs = lhs_norm(u, mesh_, q_);
    const double rhs = rhs_seminorm(u, mesh_, dweights_, p_);
    const double residual = constraint(u, mesh_, q_) / (std::pow(u.sup_norm(), q_ - 1.0) * total_weight());
    return {std::move(u), lhs, rhs, rhs / lhs, residual};
  }

  double total_weight() const {
    double s = 0.0;
    for (const auto& pt : mesh_.points()) s += pt.weight;
    return s;
  }

  void reset_shift() { shift_ = 0.0; }

 private:
  CellMesh mesh_;
  double p_;
  double q_;
  double h_;
  std::vector<double> dweights_;
  std::vector<std::size_t> group_;
  std::vector<std::size_t> leader_;
  std::size_t groups_ = 0;
  double shift_ = 0.0;
};

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

/// Outcome of one L-BFGS stage.
struct StageOutcome {
  int iterations = 0;
  bool settled = false;
};

/**
 * L-BFGS with Armijo backtracking on a fixed smoothing level. Stops on
 * stall, on a vanishing gradient, on a failed line search (the objective
 * is flat to rounding), or when the iteration budget runs out.
 */
inline StageOutcome lbfgs_stage(QuotientObjective& obj, std::vector<double>& z, double eps,
                                const MinimizerConfig& cfg, int budget, int& counter,
                                std::vector<std::pair<int, double>>& history) {
  StageOutcome out;
  std::vector<double> g;
  double f = obj.evaluate(z, eps, g);
  if (!std::isfinite(f)) return out;
  std::deque<std::pair<std::vector<double>, std::vector<double>>> memory;
  std::deque<double> window{f};
  const std::size_t n = z.size();
  std::vector<double> d(n), z_new(n), g_new;

  while (out.iterations < budget) {
    // Two-loop recursion.
    d = g;
    std::vector<double> alpha(memory.size());
    for (std::size_t k = memory.size(); k-- > 0;) {
      const auto& [s, y] = memory[k];
      alpha[k] = dot(s, d) / dot(y, s);
      for (std::size_t i = 0; i < n; ++i) d[i] -= alpha[k] * y[i];
    }
    double gamma;
    if (memory.empty()) {
      double gmax = 0.0;
      double zmax = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        gmax = std::max(gmax, std::abs(g[i]));
        zmax = std::max(zmax, std::abs(z[i]));
      }
      if (gmax == 0.0) {
        out.settled = true;
        return out;
      }
      gamma = 1e-2 * std::max(zmax, 1.0) / gmax;
    } else {
      const auto& [s, y] = memory.back();
      gamma = dot(s, y) / dot(y, y);
    }
    for (double& x : d) x *= gamma;
    for (std::size_t k = 0; k < memory.size(); ++k) {
      const auto& [s, y] = memory[k];
      const double beta = dot(y, d) / dot(y, s);
      for (std::size_t i = 0; i < n; ++i) d[i] += s[i] * (alpha[k] - beta);
    }
    for (double& x : d) x = -x;
    double slope = dot(g, d);
    if (!(slope < 0.0)) {
      memory.clear();
      d = g;
      for (double& x : d) x = -x * gamma;
      slope = dot(g, d);
      if (!(slope < 0.0)) {
        out.settled = true;
        return out;
      }
    }

    double step = cfg.step_rule.initial_step;
    double f_new = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < n; ++i) z_new[i] = z[i] + step * d[i];
      f_new = obj.evaluate(z_new, eps, g_new);
      if (std::isfinite(f_new) && f_new <= f + cfg.step_rule.sufficient_decrease * step * slope) {
        accepted = true;
        break;
      }
      step *= cfg.step_rule.shrink;
    }
    if (!accepted) {
      if (!memory.empty()) {
        memory.clear();
        continue;
      }
      out.settled = true;
      return out;
    }

    std::vector<double> s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = z_new[i] - z[i];
      y[i] = g_new[i] - g[i];
    }
    if (dot(s, y) > 1e-300) {
      memory.emplace_back(std::move(s), std::move(y));
      if (static_cast<int>(memory.size()) > cfg.lbfgs_memory) memory.pop_front();
    }
    z.swap(z_new);
    g.swap(g_new);
    f = f_new;
    ++out.iterations;
    ++counter;
    history.emplace_back(counter, std::exp(f));

    window.push_back(f);
    if (static_cast<int>(window.size()) > cfg.stall_window + 1) window.pop_front();
    if (static_cast<int>(window.size()) == cfg.stall_window + 1) {
      // f is a log-quotient, so differences are relative changes.
      if (std::abs(window.front() - window.back()) < cfg.stall_tolerance) {
        out.settled = true;
        return out;
      }
    }
  }
  return out;
}

/// Linear prolongation of a periodic grid function to twice the nodes.
inline std::vector<double> prolong(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<double> out(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    out[2 * i] = v[i];
    out[2 * i + 1] = 0.5 * (v[i] + v[(i + 1) % n]);
  }
  return out;
}

/**
 * Grid sizes of the cascade, coarsest first, ending at cfg.nodes. Grids on
 * which the zero set of the weight leaves fewer than coarse_nodes free
 * variables are skipped.
 */
inline std::vector<std::size_t> cascade(const Weight& weight, const ExponentPair& e,
                                        const MinimizerConfig& cfg) {
  std::vector<std::size_t> levels{cfg.nodes};
  const std::size_t floor = std::max<std::size_t>(cfg.coarse_nodes, 64);
  while (levels.back() % 2 == 0 && levels.back() / 2 >= floor) levels.push_back(levels.back() / 2);
  std::reverse(levels.begin(), levels.end());
  while (levels.size() > 1 && QuotientObjective(weight, e, levels.front()).size() < floor) {
    levels.erase(levels.begin());
  }
  if (QuotientObjective(weight, e, levels.back()).size() < 2) {
    throw DomainError("minimize: the zero set of the weight leaves no free variables on this grid");
  }
  return levels;
}

struct StartOutcome {
  std::vector<double> values;
  int iterations = 0;
  bool converged = true;
  std::vector<std::pair<int, double>> history;
};

inline StartOutcome run_start(const Weight& weight, const ExponentPair& e, const MinimizerConfig& cfg,
                              const std::vector<std::size_t>& levels, std::vector<double> initial) {
  StartOutcome out;
  std::vector<double> v = std::move(initial);
  int counter = 0;
  for (std::size_t li = 0; li < levels.size(); ++li) {
    if (li > 0) v = prolong(v);
    QuotientObjective obj(weight, e, levels[li]);
    std::vector<double> z = obj.restrict_to_groups(v);
    std::vector<double> eps_schedule;
    if (li == 0) {
      for (double eps = cfg.smoothing_eps; eps >= cfg.eps_floor; eps *= cfg.eps_decay) {
        eps_schedule.push_back(eps);
      }
    }
    eps_schedule.push_back(0.0);
    for (double eps : eps_schedule) {
      // Renormalize: the objective is invariant under z -> (z - c)/‖z - c‖_∞.
      {
        std::vector<double> full = obj.expand(z);
        const double c = obj.smoothed_shift(full, 0.0, 0.0);
        double m = 0.0;
        for (double& x : z) {
          x -= c;
          m = std::max(m, std::abs(x));
        }
        if (m > 0.0) {
          for (double& x : z) x /= m;
        }
      }
      obj.reset_shift();
      const int budget = cfg.max_outer - counter;
      if (budget <= 0) {
        out.converged = false;
        break;
      }
      const StageOutcome st = lbfgs_stage(obj, z, eps, cfg, budget, counter, out.history);
      if (!st.settled) out.converged = false;
    }
    v = obj.expand(z);
  }
  out.values = std::move(v);
  out.iterations = counter;
  return out;
}

/// Random trigonometric polynomial with six modes and 1/k decay.
inline std::vector<double> random_start(std::size_t nodes, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> a(6), b(6);
  for (int k = 0; k < 6; ++k) {
    a[k] = normal(rng) / (k + 1);
    b[k] = normal(rng) / (k + 1);
  }
  std::vector<double> v(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    const double x = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(nodes);
    double s = 0.0;
    for (int k = 0; k < 6; ++k) s += a[k] * std::cos((k + 1) * x) + b[k] * std::sin((k + 1) * x);
    v[i] = s;
  }
  return v;
}

}  // namespace detail

/**
 * Minimizes the weighted quotient over N-node grid functions on [0, T].
 * Runs `restarts` random starts plus one start from the extremal profile
 * and keeps the smallest exact quotient. Never throws for non-convergence.
 */
inline MinimizationResult minimize_weighted(const Weight& weight, const ExponentPair& e,
                                            const MinimizerConfig& config) {
  detail::validate(config);
  const auto levels = detail::cascade(weight, e, config);
  const std::size_t coarse = levels.front();
  std::mt19937_64 rng(config.seed);

  std::vector<std::vector<double>> starts;
  for (int r = 0; r < config.restarts; ++r) starts.push_back(detail::random_start(coarse, rng));
  {
    const auto seed_profile = extremal(weight, e, ExtremalSpec{}, coarse);
    starts.emplace_back(seed_profile.values().begin(), seed_profile.values().end());
  }

  detail::QuotientObjective fine(weight, e, config.nodes);
  MinimizationResult best;
  for (auto& start : starts) {
    detail::StartOutcome run = detail::run_start(weight, e, config, levels, std::move(start));
    auto exact = fine.exact(run.values);
    best.iterations += run.iterations;
    if (exact.quotient < best.quotient) {
      best.quotient = exact.quotient;
      best.argmin = std::move(exact.u);
      best.lhs = exact.lhs;
      best.rhs = exact.rhs;
      best.constraint_residual = exact.residual;
      best.converged = run.converged;
      best.history = std::move(run.history);
    }
  }
  return best;
}

/// The unweighted 2-periodic problem: a ≡ 1 on [0, 2].
inline MinimizationResult minimize_uniform(const ExponentPair& e, const MinimizerConfig& config) {
  return minimize_weighted(Weight::uniform(2.0, 1.0), e, config);
}

}  // namespace wirt
