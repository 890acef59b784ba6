#include "ialut/grid.hpp"

#include <algorithm>
#include <cmath>

#include "ialut/errors.hpp"

namespace ialut {

Grid1D::Grid1D(std::vector<double> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw FormatError("grid needs at least two points");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i])) throw FormatError("grid point not finite");
    if (i > 0 && points_[i] <= points_[i - 1]) throw FormatError("grid not increasing");
  }
  if (points_.front() != 0.0 || points_.back() != 1.0)
    throw FormatError("grid must span [0,1]");
}

Grid1D Grid1D::uniform(int size) {
  if (size < 2) throw FormatError("grid needs at least two points");
  std::vector<double> pts(static_cast<std::size_t>(size));
  for (int i = 0; i < size; ++i)
    pts[static_cast<std::size_t>(i)] = static_cast<double>(i) / (size - 1);
  pts.back() = 1.0;
  return Grid1D(std::move(pts));
}

int locate_cell(const Grid1D& grid, double v) {
  const auto& p = grid.points();
  const auto it = std::upper_bound(p.begin(), p.end(), v);
  const int c = static_cast<int>(it - p.begin()) - 1;
  return std::clamp(c, 0, grid.size() - 2);
}

}  // namespace ialut
