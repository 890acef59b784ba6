#pragma once

#include <cstddef>
#include <vector>

#include "ialut/errors.hpp"

namespace ialut {

// Interleaved RGB float frames, values nominally in [0, 1].
struct VideoTensor {
  int frames = 0;
  int height = 0;
  int width = 0;
  std::vector<float> data;  // [frame][row][col][channel]

  static VideoTensor zeros(int frames, int height, int width);

  std::size_t pixel_count() const {
    return static_cast<std::size_t>(frames) * static_cast<std::size_t>(height) *
           static_cast<std::size_t>(width);
  }
  std::size_t element_count() const { return pixel_count() * 3; }

  std::size_t pixel_offset(int n, int y, int x) const {
    return 3 * ((static_cast<std::size_t>(n) * height + y) * width + x);
  }
  float* pixel(int n, int y, int x) { return data.data() + pixel_offset(n, y, x); }
  const float* pixel(int n, int y, int x) const { return data.data() + pixel_offset(n, y, x); }

  bool same_shape(const VideoTensor& o) const {
    return frames == o.frames && height == o.height && width == o.width;
  }
};

// One enhancement-intensity scalar per pixel, in [0, 1].
struct IntensityMap {
  int frames = 0;
  int height = 0;
  int width = 0;
  std::vector<float> data;  // [frame][row][col]

  static IntensityMap filled(int frames, int height, int width, float value);

  std::size_t pixel_count() const {
    return static_cast<std::size_t>(frames) * static_cast<std::size_t>(height) *
           static_cast<std::size_t>(width);
  }
  float at(int n, int y, int x) const {
    return data[(static_cast<std::size_t>(n) * height + y) * width + x];
  }
  float& at(int n, int y, int x) {
    return data[(static_cast<std::size_t>(n) * height + y) * width + x];
  }

  bool matches(const VideoTensor& v) const {
    return frames == v.frames && height == v.height && width == v.width;
  }
};

}  // namespace ialut
