#pragma once

/**
 * @file special.hpp
 * @brief Complete and incomplete Beta functions.
 *
 * The incomplete Beta function is evaluated with the classical continued
 * fraction (modified Lentz). Callers pick the side of the symmetry
 * B_x(a, b) = B(a, b) - B_{1-x}(b, a) on which the fraction converges fast,
 * which is x < (a + 1) / (a + b + 2).
 */

#include <cmath>
#include <limits>
#include <string>

#include "wirtinger/error.hpp"

namespace wirt {

/// Euler Beta function B(a, b) for a, b > 0.
inline double beta(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw DomainError("beta: arguments must be positive and finite, got (" + std::to_string(a) +
                      ", " + std::to_string(b) + ")");
  }
  if (a + b < 170.0) {
    return std::tgamma(a) / std::tgamma(a + b) * std::tgamma(b);
  }
  return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

/// Crossover below which the continued fraction for I_x(a, b) converges fast.
inline double beta_fraction_split(double a, double b) { return (a + 1.0) / (a + b + 2.0); }

/**
 * Continued fraction part of the incomplete Beta function:
 * B_x(a, b) = x^a (1-x)^b / a * beta_continued_fraction(a, b, x).
 */
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 1000;
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) <= kEps) return h;
  }
  throw InternalError("beta_continued_fraction: no convergence for a=" + std::to_string(a) +
                      " b=" + std::to_string(b) + " x=" + std::to_string(x));
}

/// Unnormalized incomplete Beta function B_x(a, b) = ∫₀ˣ t^{a-1}(1-t)^{b-1} dt.
inline double incomplete_beta(double a, double b, double x) {
  if (!(x >= 0.0) || !(x <= 1.0)) {
    throw DomainError("incomplete_beta: x must lie in [0, 1], got " + std::to_string(x));
  }
  const double full = beta(a, b);
  if (x == 0.0) return 0.0;
  if (x == 1.0) return full;
  const double y = 1.0 - x;
  const double front = std::exp(a * std::log(x) + b * std::log1p(-x));
  if (x < beta_fraction_split(a, b)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return full - front * beta_continued_fraction(b, a, y) / b;
}

/// Regularized incomplete Beta function I_x(a, b).
inline double regularized_incomplete_beta(double a, double b, double x) {
  return incomplete_beta(a, b, x) / beta(a, b);
}

}  // namespace wirt
