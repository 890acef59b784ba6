#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "ialut/lut.hpp"
#include "ialut/video.hpp"

namespace ialut {

// Where per-pixel enhancement intensity comes from: a constant, the inverted
// Rec.601 luminance (darker pixel -> stronger enhancement), or a map on disk.
struct IntensitySource {
  enum class Kind { Constant, Luma, File };
  Kind kind = Kind::Luma;
  double value = 0.5;
  std::filesystem::path path;

  static IntensitySource constant(double v);
  static IntensitySource luma() { return {Kind::Luma, 0.0, {}}; }
  static IntensitySource from_file(std::filesystem::path p);
  // "constant:C" | "luma" | "file:PATH"
  static IntensitySource parse(const std::string& text);
};

IntensityMap make_intensity(const VideoTensor& v, const IntensitySource& src);

/*
 * The hot path: every output pixel is lut_apply(lut, (r, g, b, e)) with e
 * taken from the map. Lookup and interpolation are fused into one pass per
 * pixel. Rows are processed in parallel; pixels are independent, so the
 * result is bitwise identical for any worker count (0 = all cores).
 */
VideoTensor transform_video(const IaLut4& lut, const VideoTensor& v, const IntensityMap& imap,
                            int workers = 0);

// Plain-loop reference of the same kernel, kept for equivalence tests.
VideoTensor transform_video_serial(const IaLut4& lut, const VideoTensor& v,
                                   const IntensityMap& imap);

/*
 * Post-processing hand-off to an external denoiser. The command gets the
 * dimensions line "W H N" followed by the frames in the raw planar float32
 * format on stdin and must answer with the same protocol on stdout. An empty
 * command is the identity.
 */
VideoTensor denoise_hook(const VideoTensor& v, const std::string& command);

struct ThroughputReport {
  int width = 0;
  int height = 0;
  int frames = 0;
  int workers = 0;
  int passes = 0;
  double seconds_per_frame = 0.0;
  double fps = 0.0;
};

// Steady-state throughput of transform_video on seeded random frames and a
// random valid 33-point table, excluding all I/O.
ThroughputReport bench_transform(int width, int height, int frames, int workers,
                                 std::uint64_t seed = 0);

}  // namespace ialut
