#pragma once

#include <vector>

namespace ialut {

// Sorted sample coordinates of one LUT axis: strictly increasing, spanning
// exactly [0, 1]. Axes may be non-uniform, so cell lookup stays a search.
class Grid1D {
 public:
  Grid1D() = default;
  explicit Grid1D(std::vector<double> points);
  static Grid1D uniform(int size);

  int size() const { return static_cast<int>(points_.size()); }
  double operator[](int i) const { return points_[static_cast<std::size_t>(i)]; }
  const std::vector<double>& points() const { return points_; }

  bool operator==(const Grid1D&) const = default;

 private:
  std::vector<double> points_;
};

// Index c of the cell [points[c], points[c+1]] that owns v, in [0, size-2].
// An exact hit on an interior grid point returns that point's own index;
// v = 1 falls into the last cell. Binary search; callers clamp v to [0, 1].
int locate_cell(const Grid1D& grid, double v);

}  // namespace ialut
