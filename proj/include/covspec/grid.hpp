#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace covspec {

/// Midpoint tensor grid on [0,1]^d.
///
/// Each axis carries n nodes at (i+1/2)/n, i = 0..n-1, with uniform cell
/// weight h = 1/n. Flat indices are lexicographic with the *last* axis
/// fastest, matching the Kronecker-product convention of the evaluator:
/// the first tensor factor acts on the slowest-varying index.
class Grid {
 public:
  Grid(int n, int d);

  int axis_points() const { return n_; }
  int dim() const { return d_; }
  double cell_width() const { return h_; }
  std::int64_t size() const { return size_; }  // n^d
  std::span<const double> nodes_1d() const { return nodes_; }
  double node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  double cell_volume() const;  // h^d

  std::int64_t flatten(std::span<const int> multi) const;
  std::vector<int> unflatten(std::int64_t flat) const;

  /// Coordinates of the flat-indexed grid point.
  std::vector<double> point(std::int64_t flat) const;

  /// Same node spacing, dimension 1. Used when evaluating tensor factors.
  Grid axis_grid() const { return Grid(n_, 1); }

 private:
  int n_;
  int d_;
  double h_;
  std::int64_t size_;
  std::vector<double> nodes_;
};

Grid make_grid(int n, int d);

/// h^d-weighted inner product of node-value vectors: the quadrature of u·v.
double inner(std::span<const double> u, std::span<const double> v, const Grid& g);

}  // namespace covspec
