#pragma once

#include <span>
#include <vector>

#include "ialut/video.hpp"

namespace ialut {

// Rec.601 luminance weights, used for SSIM and the brightness series.
inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

inline double luminance(double r, double g, double b) {
  return kLumaR * r + kLumaG * g + kLumaB * b;
}

// Peak signal-to-noise ratio in dB against a unit peak, capped at 99 dB for
// (near-)identical inputs.
double psnr(const VideoTensor& pred, const VideoTensor& gt);

// Mean structural similarity of the luminance planes: 11x11 Gaussian window
// (sigma 1.5), stabilizers (0.01)^2 and (0.03)^2, averaged over the valid
// (fully covered) region of each frame, then over frames. Frames must be at
// least 11x11.
double ssim(const VideoTensor& pred, const VideoTensor& gt);

// Average brightness per frame: the mean luminance of each frame.
std::vector<double> ab_series(const VideoTensor& v);

// Population variance of the per-frame brightness error (pred - gt),
// scaled by 1e3. Needs at least two frames. Zero iff the brightness error
// is constant over time, i.e. enhancement errs by a steady offset only.
double ab_var(const VideoTensor& pred, const VideoTensor& gt);

// Mean absolute difference between consecutive-frame brightness deltas of
// prediction and truth, scaled by 1e3. Needs at least two frames.
double mabd(const VideoTensor& pred, const VideoTensor& gt);

// Mean over videos of |AB(p+1) - AB(p)| for one inter-frame pair index p:
// how hard brightness jumps across that cut, averaged over a collection.
double md_ab(std::span<const VideoTensor> videos, int pair_index);

}  // namespace ialut
