#include "covspec/grid.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "covspec/errors.hpp"

namespace covspec {

Grid::Grid(int n, int d) : n_(n), d_(d) {
  if (n < 1) throw ArgumentError("grid: points per axis must be positive, got " + std::to_string(n));
  if (d < 1) throw ArgumentError("grid: dimension must be positive, got " + std::to_string(d));
  // n^d must fit in int64 with room to spare for index arithmetic.
  double bits = d * std::log2(static_cast<double>(n));
  if (bits > 62) throw CapacityError("grid: n^d overflows the index type (n=" + std::to_string(n) +
                                     ", d=" + std::to_string(d) + ")");
  h_ = 1.0 / n;
  size_ = 1;
  for (int k = 0; k < d; ++k) size_ *= n;
  nodes_.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) nodes_[static_cast<std::size_t>(i)] = (i + 0.5) * h_;
}

double Grid::cell_volume() const {
  double v = 1.0;
  for (int k = 0; k < d_; ++k) v *= h_;
  return v;
}

std::int64_t Grid::flatten(std::span<const int> multi) const {
  if (static_cast<int>(multi.size()) != d_)
    throw ArgumentError("grid: multi-index has wrong rank");
  std::int64_t flat = 0;
  for (int k = 0; k < d_; ++k) {
    int i = multi[static_cast<std::size_t>(k)];
    if (i < 0 || i >= n_) throw ArgumentError("grid: multi-index out of range");
    flat = flat * n_ + i;
  }
  return flat;
}

std::vector<int> Grid::unflatten(std::int64_t flat) const {
  if (flat < 0 || flat >= size_) throw ArgumentError("grid: flat index out of range");
  std::vector<int> multi(static_cast<std::size_t>(d_));
  for (int k = d_ - 1; k >= 0; --k) {
    multi[static_cast<std::size_t>(k)] = static_cast<int>(flat % n_);
    flat /= n_;
  }
  return multi;
}

std::vector<double> Grid::point(std::int64_t flat) const {
  auto multi = unflatten(flat);
  std::vector<double> x(multi.size());
  for (std::size_t k = 0; k < multi.size(); ++k) x[k] = nodes_[static_cast<std::size_t>(multi[k])];
  return x;
}

Grid make_grid(int n, int d) { return Grid(n, d); }

double inner(std::span<const double> u, std::span<const double> v, const Grid& g) {
  if (u.size() != v.size() || static_cast<std::int64_t>(u.size()) != g.size())
    throw ArgumentError("inner: vector length must equal the grid size");
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s * g.cell_volume();
}

}  // namespace covspec
