#pragma once

/**
 * @file weights.hpp
 * @brief Piecewise-constant weights, their cumulative mass and phase map, and
 *        periodic grid functions.
 *
 * A weight a ≥ 0 on [0, T] is stored as cells [b_j, b_{j+1}) with constant
 * values, so the cumulative mass A(x) = ∫₀ˣ a is exact and intervals where a
 * vanishes give genuinely flat stretches of the phase map.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wirtinger/error.hpp"

namespace wirt {

enum class WeightKind { Uniform, Piecewise, FatCantor };

inline const char* to_string(WeightKind k) {
  switch (k) {
    case WeightKind::Uniform:
      return "uniform";
    case WeightKind::Piecewise:
      return "piecewise";
    case WeightKind::FatCantor:
      return "fat_cantor";
  }
  return "unknown";
}

/// Largest fat-Cantor construction depth accepted by make_fat_cantor.
inline constexpr int kMaxCantorLevel = 24;

/**
 * Nonnegative, not identically zero, piecewise-constant weight on [0, T].
 * Immutable after construction.
 */
class Weight {
 public:
  /// Constant weight `level` on [0, T].
  static Weight uniform(double period, double level) {
    check_period(period);
    if (!(level > 0.0) || !std::isfinite(level)) {
      throw DomainError("uniform weight: level must be positive and finite");
    }
    Weight w(WeightKind::Uniform, {0.0, period}, {level});
    w.level_value_ = level;
    return w;
  }

  /// Weight equal to values[j] on [breakpoints[j], breakpoints[j+1]).
  /// breakpoints must start at 0, be strictly increasing, and end at T.
  static Weight piecewise(std::vector<double> breakpoints, std::vector<double> values) {
    if (breakpoints.size() < 2 || values.size() + 1 != breakpoints.size()) {
      throw DomainError("piecewise weight: need n+1 breakpoints for n values");
    }
    if (breakpoints.front() != 0.0) throw DomainError("piecewise weight: first breakpoint must be 0");
    check_period(breakpoints.back());
    for (std::size_t j = 0; j + 1 < breakpoints.size(); ++j) {
      if (!(breakpoints[j] < breakpoints[j + 1])) {
        throw DomainError("piecewise weight: breakpoints must be strictly increasing");
      }
    }
    for (double v : values) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw DomainError("piecewise weight: values must be finite and nonnegative");
      }
    }
    return Weight(WeightKind::Piecewise, std::move(breakpoints), std::move(values));
  }

  WeightKind kind() const { return kind_; }
  double period() const { return breakpoints_.back(); }
  double total_mass() const { return total_mass_; }
  /// Mean value ã = ∫a / T.
  double mean() const { return total_mass_ / period(); }
  std::span<const double> breakpoints() const { return breakpoints_; }
  std::span<const double> values() const { return values_; }
  std::size_t cell_count() const { return values_.size(); }
  /// Construction depth (fat-Cantor weights only).
  int level() const { return level_; }
  /// Value on surviving cells (fat-Cantor) or the constant (uniform).
  double height() const { return level_value_; }

  /// Index of the cell containing x, with x = T mapped to the last cell.
  std::size_t cell_index(double x) const {
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
    std::size_t j = static_cast<std::size_t>(it - breakpoints_.begin());
    j = j == 0 ? 0 : j - 1;
    return std::min(j, values_.size() - 1);
  }

  double value_at(double x) const { return values_[cell_index(x)]; }

  /// Exact cumulative mass A(x) = ∫₀ˣ a for x in [0, T].
  double cumulative(double x) const {
    if (!(x >= 0.0) || !(x <= period())) {
      throw DomainError("cumulative: x must lie in [0, T], got " + std::to_string(x));
    }
    if (x == period()) return total_mass_;
    const std::size_t j = cell_index(x);
    const double a = prefix_[j] + values_[j] * (x - breakpoints_[j]);
    return std::min(a, total_mass_);
  }

  /// Cumulative mass at breakpoint j.
  double cumulative_at_breakpoint(std::size_t j) const {
    return j + 1 == breakpoints_.size() ? total_mass_ : prefix_[j];
  }

  /// The weight multiplied by factor > 0.
  Weight scaled(double factor) const {
    if (!(factor > 0.0) || !std::isfinite(factor)) throw DomainError("scaled: factor must be positive");
    Weight w = *this;
    for (double& v : w.values_) v *= factor;
    for (double& a : w.prefix_) a *= factor;
    w.total_mass_ *= factor;
    w.level_value_ *= factor;
    return w;
  }

 private:
  friend Weight make_fat_cantor(double period, int level, double height);

  Weight(WeightKind kind, std::vector<double> breakpoints, std::vector<double> values)
      : kind_(kind), breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
    prefix_.resize(values_.size() + 1);
    prefix_[0] = 0.0;
    for (std::size_t j = 0; j < values_.size(); ++j) {
      prefix_[j + 1] = prefix_[j] + values_[j] * (breakpoints_[j + 1] - breakpoints_[j]);
    }
    total_mass_ = prefix_.back();
    if (!(total_mass_ > 0.0)) throw DomainError("weight must not vanish identically");
  }

  static void check_period(double period) {
    if (!(period > 0.0) || !std::isfinite(period)) {
      throw DomainError("weight: period T must be positive and finite");
    }
  }

  WeightKind kind_;
  std::vector<double> breakpoints_;
  std::vector<double> values_;
  std::vector<double> prefix_;
  double total_mass_ = 0.0;
  double level_value_ = 0.0;
  int level_ = 0;
};

/**
 * Level-n outer approximation of the Smith–Volterra–Cantor set on [0, T]:
 * at step k = 1..n the open middle interval of length 4^{-k} (relative to
 * [0, 1]) is removed from each of the 2^{k-1} surviving intervals. The weight
 * is `height` on surviving cells and 0 on removed ones.
 *
 * All endpoints are integers in units of 2^{-(2n+1)}, so for T = 1 every
 * breakpoint and the mass h·T·(1/2 + 2^{-(n+1)}) are exact doubles.
 */
inline Weight make_fat_cantor(double period, int level, double height) {
  if (level < 1 || level > kMaxCantorLevel) {
    throw DomainError("fat Cantor level must lie in [1, 24], got " + std::to_string(level));
  }
  if (!(height > 0.0) || !std::isfinite(height)) {
    throw DomainError("fat Cantor height must be positive and finite");
  }
  if (!(period > 0.0) || !std::isfinite(period)) {
    throw DomainError("weight: period T must be positive and finite");
  }
  const int shift = 2 * level + 1;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> survivors{{0, std::uint64_t{1} << shift}};
  for (int k = 1; k <= level; ++k) {
    const std::uint64_t half_gap = std::uint64_t{1} << (shift - 2 * k - 1);
    std::vector<std::pair<std::uint64_t, std::uint64_t>> next;
    next.reserve(survivors.size() * 2);
    for (auto [s, e] : survivors) {
      const std::uint64_t mid = s + (e - s) / 2;
      next.emplace_back(s, mid - half_gap);
      next.emplace_back(mid + half_gap, e);
    }
    survivors = std::move(next);
  }

  std::uint64_t surviving_units = 0;
  std::vector<double> breakpoints{0.0};
  std::vector<double> values;
  breakpoints.reserve(2 * survivors.size() + 1);
  values.reserve(2 * survivors.size());
  auto at = [&](std::uint64_t units) { return period * std::ldexp(static_cast<double>(units), -shift); };
  for (std::size_t i = 0; i < survivors.size(); ++i) {
    const auto [s, e] = survivors[i];
    surviving_units += e - s;
    breakpoints.push_back(i + 1 == survivors.size() ? period : at(e));
    values.push_back(height);
    if (i + 1 < survivors.size()) {
      breakpoints.push_back(at(survivors[i + 1].first));
      values.push_back(0.0);
    }
  }

  Weight w(WeightKind::FatCantor, std::move(breakpoints), std::move(values));
  const double fraction = std::ldexp(static_cast<double>(surviving_units), -shift);
  w.total_mass_ = height * period * fraction;
  w.level_value_ = height;
  w.level_ = level;
  return w;
}

/// Free-function form of Weight::cumulative.
inline double cumulative(const Weight& weight, double x) { return weight.cumulative(x); }

/**
 * Phase map of a weight: A(x), y(x) = A(x)/ã in [0, T], and the normalized
 * phase Y(x) = A(x)/A(T) in [0, 1]. Nondecreasing, flat where a = 0.
 */
class PhaseMap {
 public:
  explicit PhaseMap(const Weight& weight) : weight_(&weight) {}

  const Weight& weight() const { return *weight_; }
  double mass(double x) const { return weight_->cumulative(x); }
  double y(double x) const { return mass(x) / weight_->mean(); }
  double normalized(double x) const {
    if (x == weight_->period()) return 1.0;
    return mass(x) / weight_->total_mass();
  }
  /// Y(x) reduced to [0, 1): nodes past the last positive cell map to 0, like x = 0.
  double fraction(double x) const {
    const double y = normalized(x);
    return y == 1.0 ? 0.0 : y;
  }

 private:
  const Weight* weight_;
};

inline PhaseMap phase(const Weight& weight) { return PhaseMap(weight); }
PhaseMap phase(Weight&&) = delete;

/// Smallest grid accepted by PeriodicFunction.
inline constexpr std::size_t kMinNodes = 8;

/**
 * T-periodic function sampled at x_i = T·(i/N), i = 0..N-1; the value at T
 * is the value at 0. Between nodes it is linear, so its derivative on cell i
 * is the forward difference (u_{i+1} - u_i)/(T/N).
 */
class PeriodicFunction {
 public:
  PeriodicFunction(double period, std::vector<double> values)
      : period_(period), values_(std::move(values)) {
    if (!(period > 0.0) || !std::isfinite(period)) {
      throw DomainError("periodic function: period must be positive and finite");
    }
    if (values_.size() < kMinNodes) {
      throw DomainError("periodic function: need at least 8 nodes, got " +
                        std::to_string(values_.size()));
    }
  }

  template <typename F>
  static PeriodicFunction sample(double period, std::size_t nodes, F&& f) {
    std::vector<double> v(nodes);
    for (std::size_t i = 0; i < nodes; ++i) v[i] = f(node(period, nodes, i));
    return PeriodicFunction(period, std::move(v));
  }

  /// Grid node T·(i/N); i = N gives T.
  static double node(double period, std::size_t nodes, std::size_t i) {
    return i == nodes ? period : period * (static_cast<double>(i) / static_cast<double>(nodes));
  }

  double period() const { return period_; }
  std::size_t size() const { return values_.size(); }
  double spacing() const { return period_ / static_cast<double>(values_.size()); }
  double node(std::size_t i) const { return node(period_, values_.size(), i); }
  std::span<const double> values() const { return values_; }
  std::vector<double>& mutable_values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  /// Value at node i with periodic wraparound (i = N gives the value at 0).
  double wrapped(std::size_t i) const { return values_[i % values_.size()]; }

  /// Forward-difference derivative on cell i.
  double derivative(std::size_t i) const { return (wrapped(i + 1) - values_[i]) / spacing(); }

  /// Periodic linear interpolation at fraction s of the period.
  double at_fraction(double s) const {
    s -= std::floor(s);
    const double pos = s * static_cast<double>(values_.size());
    double cell = std::floor(pos);
    double frac = pos - cell;
    auto i = static_cast<std::size_t>(cell) % values_.size();
    if (frac == 0.0) return values_[i];
    return values_[i] + frac * (wrapped(i + 1) - values_[i]);
  }

  /// Periodic linear interpolation at any real x.
  double operator()(double x) const { return at_fraction(x / period_); }

  double sup_norm() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  PeriodicFunction scaled(double factor) const {
    PeriodicFunction f = *this;
    for (double& v : f.values_) v *= factor;
    return f;
  }

  PeriodicFunction shifted(double c) const {
    PeriodicFunction f = *this;
    for (double& v : f.values_) v -= c;
    return f;
  }

 private:
  double period_;
  std::vector<double> values_;
};

/**
 * u(x) = U(y(x)) on the grid of U. The phase is evaluated as the normalized
 * mass fraction, so zero-weight cells map to a single point of U.
 */
inline PeriodicFunction pullback(const PeriodicFunction& U, const Weight& weight) {
  if (U.period() != weight.period()) {
    throw DomainError("pullback: function period " + std::to_string(U.period()) +
                      " differs from weight period " + std::to_string(weight.period()));
  }
  const PhaseMap map(weight);
  std::vector<double> u(U.size());
  for (std::size_t i = 0; i < U.size(); ++i) u[i] = U.at_fraction(map.normalized(U.node(i)));
  return PeriodicFunction(U.period(), std::move(u));
}

}  // namespace wirt
