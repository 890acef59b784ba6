#pragma once

#include <filesystem>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "ialut/fusion.hpp"
#include "ialut/lut.hpp"
#include "ialut/video.hpp"

namespace ialut {

/*
 * Frame directories hold one clip as frame_000000, frame_000001, ... in a
 * single format: binary 8-bit PPM (P6), or raw planar little-endian float32
 * (.raw, three H*W planes R,G,B) next to a "dims.txt" sidecar of three ASCII
 * integers "W H N". Intensity maps use the same layout with PGM (P5) or
 * one-plane .raw frames.
 */
enum class FrameFormat { Ppm8, FloatRaw };

VideoTensor read_frames(const std::filesystem::path& dir);
void write_frames(const VideoTensor& v, const std::filesystem::path& dir, FrameFormat fmt);

IntensityMap read_intensity(const std::filesystem::path& dir);
void write_intensity(const IntensityMap& m, const std::filesystem::path& dir, FrameFormat fmt);

/*
 * LUT files. Binary: magic "IALUT4D1"/"IALUT3D1", then L and a flags word as
 * little-endian uint32, then the axis grids and the value array as
 * little-endian float32. Values are laid out channel-fastest, last axis
 * next, first axis slowest. Text: the same magic on a header line, L on the
 * next, one line of grid coordinates per axis, then one "r g b" line per
 * grid point in the binary order, all numbers with 8 fractional digits.
 * Writers clamp values into [0,1]; readers validate but never clamp.
 */
enum class LutEncoding { Binary, Text };

using AnyLut = std::variant<IaLut4, Lut3>;

void write_lut(const IaLut4& lut, const std::filesystem::path& path, LutEncoding enc);
void write_lut(const Lut3& lut, const std::filesystem::path& path, LutEncoding enc);
AnyLut read_lut(const std::filesystem::path& path);

// A fitted basis set: magic "IALUTBS1", count and flags as little-endian
// uint32, the T basis tables as consecutive binary LUT blocks, then a
// "IALUTWT1" record holding the weights as little-endian float64.
void write_basis(const BasisSet4& basis, std::span<const double> w,
                 const std::filesystem::path& path);
std::pair<BasisSet4, std::vector<double>> read_basis(const std::filesystem::path& path);

}  // namespace ialut
