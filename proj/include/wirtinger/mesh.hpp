#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "wirtinger/weights.hpp"

namespace wirt {

/// 5-point Gauss–Legendre rule mapped to [0, 1].
struct GaussLegendre5 {
  static constexpr std::array<double, 5> nodes{
      0.5 * (1.0 - 0.9061798459386639927976269), 0.5 * (1.0 - 0.5384693101056830910363144), 0.5,
      0.5 * (1.0 + 0.5384693101056830910363144), 0.5 * (1.0 + 0.9061798459386639927976269)};
  static constexpr std::array<double, 5> weights{
      0.5 * 0.2369268850561890875142640, 0.5 * 0.4786286704993664680412915,
      0.5 * 0.5688888888888888888888889, 0.5 * 0.4786286704993664680412915,
      0.5 * 0.2369268850561890875142640};
};

/**
 * Intersection of a uniform N-cell grid on [0, T] with the cells of a
 * piecewise-constant weight.
 *
 * Every grid cell is split at the weight breakpoints it contains. Each piece
 * with a > 0 contributes five Gauss–Legendre points, recorded as the grid
 * cell index, the local coordinate τ in [0, 1] (u = (1-τ)u_i + τu_{i+1}) and
 * the combined weight a·|piece|·w_g. Pieces with a = 0 only mark their grid
 * cell as degenerate.
 */
class CellMesh {
 public:
  struct Point {
    std::size_t cell;
    double tau;
    double weight;
  };
  struct Piece {
    double value;
    double length;
  };

  CellMesh(const Weight& weight, std::size_t nodes) : period_(weight.period()), nodes_(nodes) {
    if (nodes < kMinNodes) throw DomainError("CellMesh: need at least 8 nodes");
    const auto bps = weight.breakpoints();
    const auto vals = weight.values();
    piece_offset_.reserve(nodes + 1);
    has_zero_.assign(nodes, false);
    points_.reserve(5 * nodes);
    std::size_t j = 0;
    for (std::size_t i = 0; i < nodes; ++i) {
      piece_offset_.push_back(pieces_.size());
      const double x0 = PeriodicFunction::node(period_, nodes, i);
      const double x1 = PeriodicFunction::node(period_, nodes, i + 1);
      const double width = x1 - x0;
      while (j + 1 < vals.size() && bps[j + 1] <= x0) ++j;
      double start = x0;
      std::size_t k = j;
      while (start < x1) {
        const double end = k + 1 < vals.size() ? std::min(x1, bps[k + 1]) : x1;
        const double len = end - start;
        const double a = vals[k];
        if (len > 0.0) {
          pieces_.push_back({a, len});
          if (a == 0.0) {
            has_zero_[i] = true;
          } else {
            const double t0 = (start - x0) / width;
            const double t1 = (end - x0) / width;
            for (std::size_t g = 0; g < 5; ++g) {
              points_.push_back({i, t0 + (t1 - t0) * GaussLegendre5::nodes[g],
                                 a * len * GaussLegendre5::weights[g]});
            }
          }
        }
        start = end;
        if (k + 1 < vals.size() && end >= bps[k + 1]) ++k;
      }
    }
    piece_offset_.push_back(pieces_.size());
  }

  double period() const { return period_; }
  std::size_t nodes() const { return nodes_; }
  double spacing() const { return period_ / static_cast<double>(nodes_); }
  const std::vector<Point>& points() const { return points_; }
  bool has_zero(std::size_t cell) const { return has_zero_[cell]; }

  /// ∫_cell a^{1-p} for every grid cell; +∞ on cells touching a zero of a.
  std::vector<double> derivative_weights(double p) const {
    std::vector<double> w(nodes_);
    for (std::size_t i = 0; i < nodes_; ++i) {
      if (has_zero_[i]) {
        w[i] = std::numeric_limits<double>::infinity();
        continue;
      }
      double s = 0.0;
      for (std::size_t k = piece_offset_[i]; k < piece_offset_[i + 1]; ++k) {
        s += std::pow(pieces_[k].value, 1.0 - p) * pieces_[k].length;
      }
      w[i] = s;
    }
    return w;
  }

  /// Value of the piecewise-linear interpolant of `u` at quadrature point k.
  double interpolate(std::span<const double> u, const Point& pt) const {
    const double u0 = u[pt.cell];
    const double u1 = u[pt.cell + 1 == nodes_ ? 0 : pt.cell + 1];
    return u0 + pt.tau * (u1 - u0);
  }

 private:
  double period_;
  std::size_t nodes_;
  std::vector<Point> points_;
  std::vector<Piece> pieces_;
  std::vector<std::size_t> piece_offset_;
  std::vector<bool> has_zero_;
};

}  // namespace wirt
