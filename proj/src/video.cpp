#include "ialut/video.hpp"

namespace ialut {

VideoTensor VideoTensor::zeros(int frames, int height, int width) {
  if (frames <= 0 || height <= 0 || width <= 0) throw ShapeError("zero-size video");
  VideoTensor v;
  v.frames = frames;
  v.height = height;
  v.width = width;
  v.data.assign(v.element_count(), 0.0f);
  return v;
}

IntensityMap IntensityMap::filled(int frames, int height, int width, float value) {
  if (frames <= 0 || height <= 0 || width <= 0) throw ShapeError("zero-size intensity map");
  IntensityMap m;
  m.frames = frames;
  m.height = height;
  m.width = width;
  m.data.assign(m.pixel_count(), value);
  return m;
}

}  // namespace ialut
