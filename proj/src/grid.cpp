#include "copulalab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace copulalab {

namespace {
constexpr std::size_t kAbsent = std::numeric_limits<std::size_t>::max();
}

Grid::Grid(std::vector<std::vector<double>> axes, bool include_margin_points)
    : axes_(std::move(axes)), include_margins_(include_margin_points) {
  if (axes_.empty()) throw std::invalid_argument("Grid: no axes");
  for (auto& ax : axes_) {
    if (ax.empty()) throw std::invalid_argument("Grid: empty axis");
    if (!std::is_sorted(ax.begin(), ax.end()))
      throw std::invalid_argument("Grid: axis points must be sorted");
    if (std::adjacent_find(ax.begin(), ax.end()) != ax.end())
      throw std::invalid_argument("Grid: axis points must be unique");
    for (double v : ax)
      if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument("Grid: axis points must lie in [0,1]");
  }

  const std::size_t d = axes_.size();
  product_size_ = 1;
  for (const auto& ax : axes_) product_size_ *= ax.size();

  points_.reserve(product_size_ * d);
  std::vector<std::size_t> multi(d, 0);
  for (std::size_t idx = 0; idx < product_size_; ++idx) {
    for (std::size_t j = 0; j < d; ++j) points_.push_back(axes_[j][multi[j]]);
    for (std::size_t j = d; j-- > 0;) {  // last axis fastest
      if (++multi[j] < axes_[j].size()) break;
      multi[j] = 0;
    }
  }
  size_ = product_size_;

  // Locate (1,...,v,...,1) for every axis value; append the ones missing
  // from the product lattice when margin augmentation is requested.
  margin_index_.resize(d);
  std::vector<std::size_t> strides(d, 1);
  for (std::size_t j = d; j-- > 1;)
    strides[j - 1] = strides[j] * axes_[j].size();
  std::vector<std::size_t> one_pos(d, kAbsent);
  for (std::size_t j = 0; j < d; ++j) {
    const auto& ax = axes_[j];
    if (ax.back() == 1.0) one_pos[j] = ax.size() - 1;
  }
  for (std::size_t j = 0; j < d; ++j) {
    margin_index_[j].assign(axes_[j].size(), kAbsent);
    bool others_have_one = true;
    for (std::size_t i = 0; i < d; ++i)
      if (i != j && one_pos[i] == kAbsent) others_have_one = false;
    for (std::size_t a = 0; a < axes_[j].size(); ++a) {
      if (others_have_one) {
        std::size_t idx = 0;
        for (std::size_t i = 0; i < d; ++i)
          idx += strides[i] * (i == j ? a : one_pos[i]);
        margin_index_[j][a] = idx;
      } else if (include_margins_) {
        for (std::size_t i = 0; i < d; ++i)
          points_.push_back(i == static_cast<std::size_t>(j) ? axes_[j][a] : 1.0);
        margin_index_[j][a] = size_++;
      }
    }
  }
}

Grid Grid::regular(int dimension, int points_per_axis,
                   bool include_margin_points) {
  if (dimension < 1 || points_per_axis < 2)
    throw std::invalid_argument("Grid::regular: need dimension >= 1, >= 2 points");
  std::vector<double> axis(points_per_axis);
  for (int i = 0; i < points_per_axis; ++i)
    axis[i] = static_cast<double>(i) / (points_per_axis - 1);
  axis.back() = 1.0;
  return Grid(std::vector<std::vector<double>>(dimension, axis),
              include_margin_points);
}

std::size_t Grid::margin_point_index(int axis, std::size_t value_idx) const {
  const std::size_t idx = margin_index_.at(axis).at(value_idx);
  if (idx == kAbsent)
    throw std::invalid_argument(
        "Grid: margin point absent; construct the grid with margin "
        "augmentation");
  return idx;
}

std::size_t Grid::product_index(std::span<const std::size_t> multi) const {
  const std::size_t d = axes_.size();
  if (multi.size() != d) throw std::invalid_argument("product_index: bad size");
  std::size_t idx = 0;
  for (std::size_t j = 0; j < d; ++j) {
    idx = idx * axes_[j].size() + multi[j];
  }
  return idx;
}

}  // namespace copulalab
