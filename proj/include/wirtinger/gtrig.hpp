#pragma once

/**
 * @file gtrig.hpp
 * @brief Generalized trigonometric functions sin_pq, arcsin_pq and the sharp
 *        Wirtinger constant C(p, q).
 *
 * arcsin_pq(σ) = ∫₀^σ (1 - s^p)^{-1/q*} ds. Substituting u = s^p turns it into
 * (1/p) B_{σ^p}(1/p, 1/q), an incomplete Beta function, which is evaluated on
 * whichever side of the Beta symmetry keeps the continued fraction fast:
 *
 *   lower side:  arcsin_pq(σ) = σ (1 - σ^p)^{1/q} F(1/p, 1/q; σ^p)
 *   upper side:  π_pq/2 - arcsin_pq(σ) = (q/p) σ w F(1/q, 1/p; w^q),
 *                with w = (1 - σ^p)^{1/q}
 *
 * where F is beta_continued_fraction. On the upper side the inverse is
 * solved for w instead of σ; in that variable the complement is close to
 * linear, (q/p) w, so Newton's method stays well conditioned right up to the
 * peak where the derivative of sin_pq vanishes.
 */

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "wirtinger/error.hpp"
#include "wirtinger/exponents.hpp"
#include "wirtinger/special.hpp"

namespace wirt {

/// Half period π_pq = 2 arcsin_pq(1) = (2/p) B(1/p, 1/q).
inline double pi_pq(const ExponentPair& e) { return 2.0 / e.p() * beta(1.0 / e.p(), 1.0 / e.q()); }

/**
 * Sharp constant of the normalized 2-periodic problem,
 * C(p,q) = [2 (1/p*)^{1/q} (1/q)^{1/p*} (2/(p*+q))^{1/p-1/q} B(1/p*, 1/q)]^{-1}.
 */
inline double sharp_constant(const ExponentPair& e) {
  const double p = e.p();
  const double q = e.q();
  const double ps = e.p_conj();
  const double denom = 2.0 * std::pow(1.0 / ps, 1.0 / q) * std::pow(1.0 / q, 1.0 / ps) *
                       std::pow(2.0 / (ps + q), 1.0 / p - 1.0 / q) * beta(1.0 / ps, 1.0 / q);
  return 1.0 / denom;
}

/// A point on the principal branch [0, π_pq/2], carrying 1 - σ^p accurately.
struct PrincipalValue {
  double sigma;
  double one_minus_sigma_p;
};

/**
 * Precomputed state for evaluating sin_pq and arcsin_pq at one exponent pair.
 * Immutable after construction.
 */
class GTrigContext {
 public:
  explicit GTrigContext(const ExponentPair& exponents, double inversion_tolerance = 1e-15,
                        int max_newton_iters = 200)
      : exponents_(exponents),
        pi_pq_(wirt::pi_pq(exponents)),
        inversion_tolerance_(inversion_tolerance),
        max_newton_iters_(max_newton_iters) {
    if (!(inversion_tolerance > 0.0) || max_newton_iters < 1) {
      throw DomainError("GTrigContext: tolerance and iteration budget must be positive");
    }
    a_ = 1.0 / p();
    b_ = 1.0 / q();
    split_x_ = beta_fraction_split(a_, b_);
    split_sigma_ = std::pow(split_x_, a_);
    split_w_ = std::pow(1.0 - split_x_, b_);
    split_t_ = lower_arcsin(split_sigma_);
  }

  const ExponentPair& exponents() const { return exponents_; }
  double p() const { return exponents_.p(); }
  double q() const { return exponents_.q(); }
  double pi_pq() const { return pi_pq_; }
  double half_pi_pq() const { return 0.5 * pi_pq_; }
  double inversion_tolerance() const { return inversion_tolerance_; }
  int max_newton_iters() const { return max_newton_iters_; }

  /// arcsin_pq(σ) for σ in [0, 1].
  double arcsin(double sigma) const {
    if (!(sigma >= 0.0) || !(sigma <= 1.0)) {
      throw DomainError("arcsin_pq: argument must lie in [0, 1], got " + std::to_string(sigma));
    }
    if (sigma == 0.0) return 0.0;
    if (sigma == 1.0) return half_pi_pq();
    if (std::pow(sigma, p()) < split_x_) return lower_arcsin(sigma);
    const double y = -std::expm1(p() * std::log(sigma));
    return half_pi_pq() - upper_complement(std::pow(y, b_));
  }

  /// sin_pq(t): odd, symmetric about π_pq/2, 2π_pq-periodic.
  double sin(double t) const {
    const Folded f = fold(t);
    return f.sign * principal(f.r).sigma;
  }

  /// d/dt sin_pq(t) = ±(1 - |sin_pq(t)|^p)^{1/q*}, negative on the reflected branch.
  double sin_derivative(double t) const {
    const Folded f = fold(t);
    const PrincipalValue v = principal(f.r);
    if (v.one_minus_sigma_p == 0.0) return 0.0;
    const double magnitude = std::pow(v.one_minus_sigma_p, 1.0 / exponents_.q_conj());
    return f.reflected ? -magnitude : magnitude;
  }

  /// Solves arcsin_pq(σ) = r for r in [0, π_pq/2].
  PrincipalValue principal(double r) const {
    if (r <= 0.0) return {0.0, 1.0};
    if (r >= half_pi_pq()) return {1.0, 0.0};
    if (r <= split_t_) {
      const double sigma = solve_lower(r);
      return {sigma, -std::expm1(p() * std::log(sigma))};
    }
    const double w = solve_upper(half_pi_pq() - r);
    const double y = std::pow(w, q());
    return {std::pow(1.0 - y, a_), y};
  }

 private:
  struct Folded {
    double r;        // principal argument in [0, π_pq/2]
    double sign;     // ±1 from oddness
    bool reflected;  // true on (π_pq/2, π_pq] before reflection
  };

  Folded fold(double t) const {
    if (!std::isfinite(t)) throw DomainError("sin_pq: argument must be finite");
    double r = std::remainder(t, 2.0 * pi_pq_);
    const double sign = std::signbit(r) ? -1.0 : 1.0;
    r = std::abs(r);
    bool reflected = false;
    if (r > half_pi_pq()) {
      r = pi_pq_ - r;
      reflected = true;
    }
    return {std::max(r, 0.0), sign, reflected};
  }

  // σ (1 - σ^p)^{1/q} F(1/p, 1/q; σ^p), valid for σ^p below the split.
  double lower_arcsin(double sigma) const {
    const double x = std::pow(sigma, p());
    return sigma * std::pow(1.0 - x, b_) * beta_continued_fraction(a_, b_, x);
  }

  // π_pq/2 - arcsin_pq(σ) as a function of w = (1 - σ^p)^{1/q}.
  double upper_complement(double w) const {
    const double y = std::pow(w, q());
    const double sigma = std::pow(1.0 - y, a_);
    return q() / p() * sigma * w * beta_continued_fraction(b_, a_, y);
  }

  template <typename Residual, typename Slope>
  double safeguarded_newton(double target, double lo, double hi, double x, Residual residual,
                            Slope slope, bool increasing) const {
    x = std::clamp(x, lo, hi);
    for (int it = 0; it < max_newton_iters_; ++it) {
      const double f = residual(x) - target;
      if (f == 0.0) return x;
      if ((f > 0.0) == increasing) {
        hi = x;
      } else {
        lo = x;
      }
      double next = x - f / slope(x);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      const double step = std::abs(next - x);
      x = next;
      if (step <= inversion_tolerance_ || hi - lo <= inversion_tolerance_) return x;
      if (next == lo || next == hi) return x;
    }
    throw InternalError("sin_pq: inversion did not converge within " +
                        std::to_string(max_newton_iters_) + " iterations (p=" +
                        std::to_string(p()) + ", q=" + std::to_string(q()) + ")");
  }

  double solve_lower(double r) const {
    const double qc = exponents_.q_conj();
    const double seed = r / half_pi_pq();
    return safeguarded_newton(
        r, 0.0, split_sigma_, seed, [this](double s) { return lower_arcsin(s); },
        [this, qc](double s) { return std::pow(1.0 - std::pow(s, p()), -1.0 / qc); }, true);
  }

  double solve_upper(double tau) const {
    const double seed = tau * p() / q();
    return safeguarded_newton(
        tau, 0.0, split_w_, seed, [this](double w) { return upper_complement(w); },
        [this](double w) { return q() / p() * std::pow(1.0 - std::pow(w, q()), a_ - 1.0); },
        true);
  }

  ExponentPair exponents_;
  double pi_pq_;
  double inversion_tolerance_;
  int max_newton_iters_;
  double a_ = 0.0;
  double b_ = 0.0;
  double split_x_ = 0.0;
  double split_sigma_ = 0.0;
  double split_w_ = 0.0;
  double split_t_ = 0.0;
};

inline double pi_pq(const GTrigContext& ctx) { return ctx.pi_pq(); }
inline double arcsin_pq(const GTrigContext& ctx, double sigma) { return ctx.arcsin(sigma); }
inline double sin_pq(const GTrigContext& ctx, double t) { return ctx.sin(t); }
inline double sin_pq_derivative(const GTrigContext& ctx, double t) {
  return ctx.sin_derivative(t);
}

/// Context for sin_{q p*}, the generalized sine that generates the extremals.
inline GTrigContext extremal_context(const ExponentPair& e) {
  return GTrigContext(e.extremal_pair());
}

/// ξ(t) = sin_{q p*}(π_{q p*} t), given a context built by extremal_context.
inline double xi(const GTrigContext& extremal_ctx, double t) {
  return extremal_ctx.sin(extremal_ctx.pi_pq() * t);
}

/// ξ(t) = sin_{q p*}(π_{q p*} t): 2-periodic, odd, ξ(1/2) = 1.
inline double xi(const ExponentPair& e, double t) { return xi(extremal_context(e), t); }

}  // namespace wirt
