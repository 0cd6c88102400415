#pragma once

#include <cmath>
#include <string>

#include "wirtinger/error.hpp"

namespace wirt {

/// Largest exponent accepted by ExponentPair.
inline constexpr double kMaxExponent = 64.0;

/// Hölder conjugate p/(p-1).
inline double conjugate(double p) { return p / (p - 1.0); }

/**
 * The exponent pair (p, q) of the inequality together with the conjugates
 * p* = p/(p-1) and q* = q/(q-1).
 *
 * Both exponents must lie in (1, 64].
 */
class ExponentPair {
 public:
  ExponentPair(double p, double q) : p_(p), q_(q) {
    check(p, "p");
    check(q, "q");
    p_conj_ = conjugate(p);
    q_conj_ = conjugate(q);
  }

  double p() const { return p_; }
  double q() const { return q_; }
  double p_conj() const { return p_conj_; }
  double q_conj() const { return q_conj_; }

  /// Exponent 1/p* + 1/q carried by the total weight mass in the sharp factor.
  double mass_exponent() const { return 1.0 / p_conj_ + 1.0 / q_; }

  /// The pair (q, p*) whose generalized sine generates the extremals. The
  /// second entry may exceed the constructor bound when p is close to 1.
  ExponentPair extremal_pair() const { return ExponentPair(q_, p_conj_, q_conj_, p_); }

  friend bool operator==(const ExponentPair&, const ExponentPair&) = default;

 private:
  ExponentPair(double p, double q, double p_conj, double q_conj)
      : p_(p), q_(q), p_conj_(p_conj), q_conj_(q_conj) {}

  static void check(double e, const char* name) {
    if (!std::isfinite(e) || !(e > 1.0) || e > kMaxExponent) {
      throw DomainError(std::string("exponent ") + name + " must satisfy 1 < " + name +
                        " <= 64, got " + std::to_string(e));
    }
  }

  double p_;
  double q_;
  double p_conj_;
  double q_conj_;
};

}  // namespace wirt
