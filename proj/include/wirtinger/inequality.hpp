#pragma once

/**
 * @file inequality.hpp
 * @brief Both sides of the weighted Wirtinger inequality, the constraint
 *        functional, the sharp factor, extremals and verification reports.
 *
 * For u on [0, T] with ∫ a|u|^{q-2}u = 0,
 *
 *   (∫ a|u|^q)^{1/q} ≤ K(a, p, q) (∫ a^{1-p}|u'|^p)^{1/p},
 *   K(a, p, q) = ((∫a)/2)^{1/p* + 1/q} C(p, q),
 *
 * with equality exactly for u = α sin_{q p*}(2π_{q p*} Y(x) + δ), where
 * Y(x) = A(x)/A(T) is the normalized phase of the weight.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "wirtinger/error.hpp"
#include "wirtinger/exponents.hpp"
#include "wirtinger/gtrig.hpp"
#include "wirtinger/mesh.hpp"
#include "wirtinger/weights.hpp"

namespace wirt {

/// Slack for inputs whose derivative is exact (extremals, analytic samples).
inline constexpr double kSlackAnalytic = 1e-9;
/// Slack for forward-difference derivatives of arbitrary grid functions.
inline constexpr double kSlackFiniteDifference = 1e-3;

namespace detail {

/// |v|^{e}, with 0^e = 0 for every e > 0.
inline double abs_pow(double v, double e) { return v == 0.0 ? 0.0 : std::pow(std::abs(v), e); }

/// |v|^{e-1} sign(v), i.e. |v|^{e-2} v.
inline double signed_pow(double v, double e) {
  return v == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(v), e - 1.0), v);
}

inline void check_period(const PeriodicFunction& u, const Weight& weight, const char* op) {
  if (u.period() != weight.period()) {
    throw DomainError(std::string(op) + ": function period " + std::to_string(u.period()) +
                      " differs from weight period " + std::to_string(weight.period()));
  }
}

inline void check_mesh(const PeriodicFunction& u, const CellMesh& mesh, const char* op) {
  if (u.size() != mesh.nodes() || u.period() != mesh.period()) {
    throw DomainError(std::string(op) + ": function grid does not match the mesh");
  }
}

inline constexpr std::size_t kNoZeroPiece = static_cast<std::size_t>(-1);

/// For every grid cell, the first weight cell with a = 0 overlapping it in positive length.
inline std::vector<std::size_t> zero_piece_of_cells(const Weight& weight, std::size_t nodes) {
  std::vector<std::size_t> out(nodes, kNoZeroPiece);
  const auto bps = weight.breakpoints();
  const auto vals = weight.values();
  const double T = weight.period();
  for (std::size_t k = 0; k < vals.size(); ++k) {
    if (vals[k] != 0.0) continue;
    const double b0 = bps[k];
    const double b1 = bps[k + 1];
    auto i = static_cast<std::size_t>(
        std::clamp(std::floor(b0 / T * static_cast<double>(nodes)), 0.0, static_cast<double>(nodes - 1)));
    while (i > 0 && PeriodicFunction::node(T, nodes, i) > b0) --i;
    for (; i < nodes && PeriodicFunction::node(T, nodes, i) < b1; ++i) {
      const double lo = std::max(PeriodicFunction::node(T, nodes, i), b0);
      const double hi = std::min(PeriodicFunction::node(T, nodes, i + 1), b1);
      if (hi - lo > 0.0 && out[i] == kNoZeroPiece) out[i] = k;
    }
  }
  return out;
}

}  // namespace detail

/// ∫ a|u|^q with five Gauss–Legendre points per weight piece of every cell.
inline double weighted_power_integral(const PeriodicFunction& u, const CellMesh& mesh, double q) {
  detail::check_mesh(u, mesh, "lhs_norm");
  const auto v = u.values();
  double s = 0.0;
  for (const auto& pt : mesh.points()) s += pt.weight * detail::abs_pow(mesh.interpolate(v, pt), q);
  return s;
}

/// (∫ a|u|^q)^{1/q}.
inline double lhs_norm(const PeriodicFunction& u, const CellMesh& mesh, double q) {
  return std::pow(weighted_power_integral(u, mesh, q), 1.0 / q);
}

inline double lhs_norm(const PeriodicFunction& u, const Weight& weight, double q) {
  detail::check_period(u, weight, "lhs_norm");
  return lhs_norm(u, CellMesh(weight, u.size()), q);
}

/**
 * (Σ_cells ∫_cell a^{1-p} |u'_cell|^p)^{1/p} with forward-difference u'.
 * A cell where a vanishes contributes 0 if u is flat there and makes the
 * seminorm +∞ otherwise (|u'| > 1e-12‖u‖_∞/T).
 */
inline double rhs_seminorm(const PeriodicFunction& u, const CellMesh& mesh,
                           std::span<const double> derivative_weights, double p) {
  detail::check_mesh(u, mesh, "rhs_seminorm");
  const double flat_tol = 1e-12 * u.sup_norm() / u.period();
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = u.derivative(i);
    if (mesh.has_zero(i)) {
      if (std::abs(d) > flat_tol) return std::numeric_limits<double>::infinity();
      continue;
    }
    s += derivative_weights[i] * detail::abs_pow(d, p);
  }
  return std::pow(s, 1.0 / p);
}

inline double rhs_seminorm(const PeriodicFunction& u, const CellMesh& mesh, double p) {
  const auto w = mesh.derivative_weights(p);
  return rhs_seminorm(u, mesh, w, p);
}

inline double rhs_seminorm(const PeriodicFunction& u, const Weight& weight, double p) {
  detail::check_period(u, weight, "rhs_seminorm");
  return rhs_seminorm(u, CellMesh(weight, u.size()), p);
}

/// Signed constraint functional ∫ a|u - c|^{q-2}(u - c).
inline double constraint(const PeriodicFunction& u, const CellMesh& mesh, double q, double c = 0.0) {
  detail::check_mesh(u, mesh, "constraint");
  const auto v = u.values();
  double s = 0.0;
  for (const auto& pt : mesh.points()) {
    s += pt.weight * detail::signed_pow(mesh.interpolate(v, pt) - c, q);
  }
  return s;
}

inline double constraint(const PeriodicFunction& u, const Weight& weight, double q) {
  detail::check_period(u, weight, "constraint");
  return constraint(u, CellMesh(weight, u.size()), q);
}

/**
 * The shift c with ∫ a|u - c|^{q-2}(u - c) = 0.
 *
 * c ↦ constraint(u - c) is strictly decreasing and changes sign on the range
 * of u over the support of a. Bisection, accelerated by Newton steps that stay
 * inside the bracket, to absolute tolerance 1e-13‖u‖_∞.
 */
inline double admissible_shift(const PeriodicFunction& u, const CellMesh& mesh, double q) {
  detail::check_mesh(u, mesh, "project_constraint");
  const auto v = u.values();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& pt : mesh.points()) {
    const double x = mesh.interpolate(v, pt);
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  if (!(hi > lo)) {
    throw DomainError("project_constraint: function is constant on the support of the weight");
  }
  const double tol = 1e-13 * u.sup_norm();
  double c = 0.5 * (lo + hi);
  for (int it = 0; it < 400; ++it) {
    double g = 0.0;
    double dg = 0.0;
    for (const auto& pt : mesh.points()) {
      const double w = mesh.interpolate(v, pt) - c;
      if (w == 0.0) {
        if (q < 2.0) dg = std::numeric_limits<double>::infinity();
        continue;
      }
      const double m = std::pow(std::abs(w), q - 2.0);
      g += pt.weight * m * w;
      dg += pt.weight * m;
    }
    if (g == 0.0) return c;
    if (g > 0.0) {
      lo = c;
    } else {
      hi = c;
    }
    double next = std::isfinite(dg) && dg > 0.0 ? c + g / ((q - 1.0) * dg) : lo;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - c);
    c = next;
    if (step <= tol || hi - lo <= tol) return c;
  }
  throw InternalError("project_constraint: root search did not converge");
}

inline PeriodicFunction project_constraint(const PeriodicFunction& u, const CellMesh& mesh, double q) {
  return u.shifted(admissible_shift(u, mesh, q));
}

inline PeriodicFunction project_constraint(const PeriodicFunction& u, const Weight& weight, double q) {
  detail::check_period(u, weight, "project_constraint");
  return project_constraint(u, CellMesh(weight, u.size()), q);
}

/// Both sides of ∫|f| ≤ (∫|f|^p a^{1-p})^{1/p} (∫a)^{1/p*}.
struct HolderSides {
  double lhs = 0.0;
  double rhs = 0.0;
};

/**
 * Evaluates the weighted Hölder bound for f constant on each cell of the
 * weight. A cell with a = 0 and f ≠ 0 makes the right side infinite.
 */
inline HolderSides holder_sides(std::span<const double> f, const Weight& weight, double p) {
  if (f.size() != weight.cell_count()) throw DomainError("holder_sides: need one value of f per weight cell");
  if (!(p > 1.0) || !std::isfinite(p)) throw DomainError("holder_sides: p must exceed 1");
  const auto bps = weight.breakpoints();
  const auto a = weight.values();
  double l1 = 0.0;
  double energy = 0.0;
  bool unbounded = false;
  for (std::size_t j = 0; j < f.size(); ++j) {
    const double len = bps[j + 1] - bps[j];
    const double v = std::abs(f[j]);
    l1 += v * len;
    if (v == 0.0) continue;
    if (a[j] == 0.0) {
      unbounded = true;
      continue;
    }
    energy += std::pow(v / a[j], p) * a[j] * len;
  }
  if (unbounded) return {l1, std::numeric_limits<double>::infinity()};
  return {l1, std::pow(energy, 1.0 / p) * std::pow(weight.total_mass(), 1.0 - 1.0 / p)};
}

/// K(a, p, q) = ((∫a)/2)^{1/p* + 1/q} C(p, q).
inline double sharp_factor(const Weight& weight, const ExponentPair& e) {
  return std::pow(0.5 * weight.total_mass(), e.mass_exponent()) * sharp_constant(e);
}

/// Amplitude α ≠ 0 and phase shift δ (in units of the sin_{q p*} argument).
struct ExtremalSpec {
  double amplitude = 1.0;
  double phase_shift = 0.0;
};

/// Smallest grid accepted by extremal().
inline constexpr std::size_t kMinExtremalNodes = 64;

/// u(x_i) = α sin_{q p*}(2π_{q p*} Y(x_i) + δ) on an N-node grid.
inline PeriodicFunction extremal(const Weight& weight, const ExponentPair& e, const ExtremalSpec& spec,
                                 std::size_t nodes) {
  if (nodes < kMinExtremalNodes) throw DomainError("extremal: need at least 64 nodes");
  if (spec.amplitude == 0.0 || !std::isfinite(spec.amplitude)) {
    throw DomainError("extremal: amplitude must be nonzero and finite");
  }
  if (!std::isfinite(spec.phase_shift)) throw DomainError("extremal: phase shift must be finite");
  const GTrigContext ctx = extremal_context(e);
  const PhaseMap map(weight);
  const double full_turn = 2.0 * ctx.pi_pq();
  const auto value = [&](double x) {
    return spec.amplitude * ctx.sin(full_turn * map.fraction(x) + spec.phase_shift);
  };
  PeriodicFunction u = PeriodicFunction::sample(weight.period(), nodes, value);

  // A grid cell that meets a zero of a must be flat, or the discrete energy is
  // infinite. Runs of such cells take the value on their first zero piece.
  const auto zero_piece = detail::zero_piece_of_cells(weight, nodes);
  const auto free_cell = std::find(zero_piece.begin(), zero_piece.end(), detail::kNoZeroPiece);
  const std::size_t start = free_cell == zero_piece.end() ? 0 : free_cell - zero_piece.begin();
  auto& v = u.mutable_values();
  double level = 0.0;
  bool in_run = false;
  for (std::size_t k = 0; k < nodes; ++k) {
    const std::size_t i = (start + k) % nodes;
    if (zero_piece[i] == detail::kNoZeroPiece) {
      in_run = false;
      continue;
    }
    if (!in_run) level = value(weight.breakpoints()[zero_piece[i]]);
    in_run = true;
    v[i] = level;
    v[(i + 1) % nodes] = level;
  }
  return u;
}

/// Outcome of one verification run.
struct InequalityReport {
  double lhs = 0.0;
  double rhs_seminorm = 0.0;
  double sharp_factor = 0.0;
  double ratio = 0.0;
  double constraint_residual = 0.0;
  bool satisfied = true;
  bool admissible = true;
};

/**
 * Evaluates both sides for u. Inputs whose constraint residual exceeds
 * 1e-6‖u‖_∞^{q-1}∫a are reported with admissible = false; nothing is thrown.
 */
inline InequalityReport verify(const PeriodicFunction& u, const CellMesh& mesh, double total_mass,
                               const ExponentPair& e, double factor, double slack) {
  InequalityReport r;
  r.lhs = lhs_norm(u, mesh, e.q());
  r.rhs_seminorm = rhs_seminorm(u, mesh, e.p());
  r.sharp_factor = factor;
  r.constraint_residual = constraint(u, mesh, e.q());
  const double bound = r.sharp_factor * r.rhs_seminorm;
  if (r.lhs == 0.0 && r.rhs_seminorm == 0.0) {
    r.ratio = std::numeric_limits<double>::quiet_NaN();
  } else {
    r.ratio = r.lhs / bound;
  }
  r.satisfied = std::isinf(r.rhs_seminorm) || r.lhs <= bound * (1.0 + slack);
  const double scale = std::pow(u.sup_norm(), e.q() - 1.0) * total_mass;
  r.admissible = std::abs(r.constraint_residual) <= 1e-6 * scale;
  return r;
}

inline InequalityReport verify(const PeriodicFunction& u, const Weight& weight, const ExponentPair& e,
                               double slack = kSlackAnalytic) {
  detail::check_period(u, weight, "verify");
  return verify(u, CellMesh(weight, u.size()), weight.total_mass(), e, sharp_factor(weight, e), slack);
}

/// Best fit of u by the extremal family in the phase variable.
struct ExtremalFit {
  double relative_distance = 0.0;  // ‖U - αV(· + s)‖₂ / ‖U‖₂
  double amplitude = 0.0;
  double phase_fraction = 0.0;  // shift s as a fraction of the period
};

/**
 * Aligns u with the extremal family: u is resampled as U(Y) on a uniform
 * grid in the normalized phase Y, then the discrete shift and amplitude
 * minimizing the L² distance to V(Y) = sin_{q p*}(2π_{q p*}Y) are found.
 * The shift is searched on a 512-point subsample first and refined at full
 * resolution around the coarse optimum.
 */
inline ExtremalFit fit_extremal(const PeriodicFunction& u, const Weight& weight, const ExponentPair& e) {
  detail::check_period(u, weight, "fit_extremal");
  const std::size_t n = u.size();
  const PhaseMap map(weight);

  // U on the uniform phase grid; u is linear in Y between nodes.
  std::vector<double> ys(n + 1);
  for (std::size_t i = 0; i <= n; ++i) ys[i] = map.normalized(u.node(i));
  std::vector<double> U(n);
  std::size_t i = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const double y = static_cast<double>(j) / static_cast<double>(n);
    while (i + 1 < n && ys[i + 1] <= y) ++i;
    const double span = ys[i + 1] - ys[i];
    const double t = span > 0.0 ? std::clamp((y - ys[i]) / span, 0.0, 1.0) : 0.0;
    U[j] = u[i] + t * (u.wrapped(i + 1) - u[i]);
  }

  const GTrigContext ctx = extremal_context(e);
  std::vector<double> V(n);
  for (std::size_t j = 0; j < n; ++j) {
    V[j] = ctx.sin(2.0 * ctx.pi_pq() * static_cast<double>(j) / static_cast<double>(n));
  }
  const double uu = std::inner_product(U.begin(), U.end(), U.begin(), 0.0);
  const double vv = std::inner_product(V.begin(), V.end(), V.begin(), 0.0);
  if (uu == 0.0) return {0.0, 0.0, 0.0};

  auto correlation = [&](std::size_t shift, std::size_t stride) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; j += stride) s += U[j] * V[(j + shift) % n];
    return s;
  };
  const std::size_t stride = std::max<std::size_t>(1, n / 512);
  std::size_t best = 0;
  double best_abs = -1.0;
  for (std::size_t k = 0; k < n; k += stride) {
    const double c = std::abs(correlation(k, stride));
    if (c > best_abs) {
      best_abs = c;
      best = k;
    }
  }
  if (stride > 1) {
    const std::size_t centre = best;
    best_abs = -1.0;
    for (std::size_t d = 0; d <= 2 * stride; ++d) {
      const std::size_t k = (centre + n - stride + d) % n;
      const double c = std::abs(correlation(k, 1));
      if (c > best_abs) {
        best_abs = c;
        best = k;
      }
    }
  } else {
    best_abs = std::abs(correlation(best, 1));
  }
  const double corr = correlation(best, 1);
  const double dist2 = std::max(0.0, uu - corr * corr / vv);
  return {std::sqrt(dist2 / uu), corr / vv, static_cast<double>(best) / static_cast<double>(n)};
}

}  // namespace wirt
