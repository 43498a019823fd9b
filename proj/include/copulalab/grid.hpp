#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace copulalab {

// Finite evaluation lattice in the unit cube: a tensor product of per-axis
// sorted point lists, optionally augmented with the margin points
// (1,...,u_j,...,1) required by the corrected Gaussian field.
class Grid {
 public:
  Grid(std::vector<std::vector<double>> axes, bool include_margin_points);

  // points_per_axis equally spaced values including 0 and 1.
  static Grid regular(int dimension, int points_per_axis,
                      bool include_margin_points = true);

  int dimension() const { return static_cast<int>(axes_.size()); }
  const std::vector<std::vector<double>>& axes() const { return axes_; }

  std::size_t size() const { return size_; }
  std::size_t product_size() const { return product_size_; }
  std::span<const double> point(std::size_t idx) const {
    const std::size_t d = axes_.size();
    return {points_.data() + idx * d, d};
  }

  bool has_margin_points() const { return include_margins_; }
  // Index of (1,...,axes()[axis][value_idx],...,1) in the point list.
  std::size_t margin_point_index(int axis, std::size_t value_idx) const;

  std::size_t product_index(std::span<const std::size_t> multi) const;

 private:
  std::vector<std::vector<double>> axes_;
  bool include_margins_ = false;
  std::size_t product_size_ = 0;
  std::size_t size_ = 0;
  std::vector<double> points_;                           // row major
  std::vector<std::vector<std::size_t>> margin_index_;   // [axis][value_idx]
};

}  // namespace copulalab
