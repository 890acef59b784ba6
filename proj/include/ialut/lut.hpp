#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "ialut/errors.hpp"
#include "ialut/grid.hpp"

namespace ialut {

inline constexpr int kChannels = 3;

using Rgb = std::array<double, 3>;

template <int D>
using CellIndex = std::array<int, static_cast<std::size_t>(D)>;
using CellIndex4 = CellIndex<4>;
using CellIndex3 = CellIndex<3>;

// Query coordinate ((r,g,b) or (r,g,b,e)). The alias keeps D deducible from
// the accompanying Lut argument rather than from the array length.
template <int D>
using Point = std::array<double, static_cast<std::size_t>(D)>;

/*
 * D-dimensional lattice of stored RGB triples. Values are channel-fastest,
 * last axis next, first axis slowest -- the same order as the serialized
 * form. The 4D table is indexed by (r, g, b, e) with e the per-pixel
 * enhancement intensity; the 3D table is a plain color cube. Values are
 * unconstrained doubles while fitting and are clamped to [0,1] at export.
 */
template <int D>
struct Lut {
  static_assert(D == 3 || D == 4, "only color cubes and intensity-aware tables");

  std::array<Grid1D, D> grids;
  std::vector<double> values;

  int size() const { return grids[0].size(); }

  std::size_t grid_point_count() const {
    std::size_t n = 1;
    for (int a = 0; a < D; ++a) n *= static_cast<std::size_t>(size());
    return n;
  }

  // Flat offset of the channel-0 entry at a grid point.
  std::size_t offset(const CellIndex<D>& idx) const {
    const auto L = static_cast<std::size_t>(size());
    std::size_t o = 0;
    for (int a = 0; a < D; ++a) o = o * L + static_cast<std::size_t>(idx[a]);
    return o * kChannels;
  }

  double at(const CellIndex<D>& idx, int channel) const {
    return values[offset(idx) + static_cast<std::size_t>(channel)];
  }
  double& at(const CellIndex<D>& idx, int channel) {
    return values[offset(idx) + static_cast<std::size_t>(channel)];
  }
};

using IaLut4 = Lut<4>;
using Lut3 = Lut<3>;

// All axes must share one resolution and the value array must match it.
template <int D>
void validate_lut(const Lut<D>& lut) {
  const int L = lut.grids[0].size();
  if (L < 2) throw FormatError("grid needs at least two points");
  for (const auto& g : lut.grids)
    if (g.size() != L) throw ShapeError("lut axes disagree in resolution");
  if (lut.values.size() != kChannels * lut.grid_point_count())
    throw ShapeError("lut value array does not match grid resolution");
}

// Decode a flat grid-point index (first axis slowest) into per-axis indices.
template <int D>
inline CellIndex<D> decode_grid_point(std::size_t gp, int size) {
  CellIndex<D> ix;
  for (int a = D - 1; a >= 0; --a) {
    ix[a] = static_cast<int>(gp % static_cast<std::size_t>(size));
    gp /= static_cast<std::size_t>(size);
  }
  return ix;
}

// Value-array stride of each axis (channel-0 entries).
template <int D>
inline std::array<std::size_t, D> value_strides(int size) {
  std::array<std::size_t, D> stride{};
  std::size_t s = kChannels;
  for (int a = D - 1; a >= 0; --a) {
    stride[a] = s;
    s *= static_cast<std::size_t>(size);
  }
  return stride;
}

// Uniform-grid table mapping every color to itself; the 4D variant repeats
// the map across the intensity axis.
template <int D>
Lut<D> identity_lut(int size) {
  Lut<D> lut;
  for (auto& g : lut.grids) g = Grid1D::uniform(size);
  const std::size_t npts = lut.grid_point_count();
  lut.values.resize(kChannels * npts);
  for (std::size_t gp = 0; gp < npts; ++gp) {
    const auto ix = decode_grid_point<D>(gp, size);
    lut.values[gp * kChannels + 0] = lut.grids[0][ix[0]];
    lut.values[gp * kChannels + 1] = lut.grids[1][ix[1]];
    lut.values[gp * kChannels + 2] = lut.grids[2][ix[2]];
  }
  return lut;
}

template <int D>
CellIndex<D> locate(const Lut<D>& lut, const Point<D>& p) {
  CellIndex<D> c;
  for (int a = 0; a < D; ++a) c[a] = locate_cell(lut.grids[a], p[a]);
  return c;
}

/*
 * Interpolation coefficients of the 2^D corners of one cell: the tensor
 * product of the per-axis offset pairs {t_a, 1-t_a}, where t_a is the
 * fractional position inside the cell. Bit a of a corner id selects the
 * upper end of axis a. Coefficients are nonnegative and sum to 1.
 */
template <int D>
struct CornerWeights {
  static constexpr int kCorners = 1 << D;
  std::array<double, kCorners> coeff;
  std::array<std::size_t, kCorners> offset;  // channel-0 offset of each corner
};
using CornerWeights4 = CornerWeights<4>;
using CornerWeights3 = CornerWeights<3>;

template <int D>
CornerWeights<D> corner_weights(const Lut<D>& lut, const CellIndex<D>& cell,
                                const Point<D>& p) {
  CornerWeights<D> out;
  const auto stride = value_strides<D>(lut.size());
  Point<D> t;
  std::size_t base = 0;
  for (int a = 0; a < D; ++a) {
    const Grid1D& g = lut.grids[a];
    const double lo = g[cell[a]];
    const double hi = g[cell[a] + 1];
    t[a] = (p[a] - lo) / (hi - lo);
    base += static_cast<std::size_t>(cell[a]) * stride[a];
  }
  for (int n = 0; n < CornerWeights<D>::kCorners; ++n) {
    double w = 1.0;
    std::size_t off = base;
    for (int a = 0; a < D; ++a) {
      if (n >> a & 1) {
        w *= t[a];
        off += stride[a];
      } else {
        w *= 1.0 - t[a];
      }
    }
    out.coeff[static_cast<std::size_t>(n)] = w;
    out.offset[static_cast<std::size_t>(n)] = off;
  }
  return out;
}

// Inputs are clamped into [0,1] per axis; non-finite coordinates are refused.
template <std::size_t N>
std::array<double, N> clamp_point(std::array<double, N> p) {
  for (auto& v : p) {
    if (!std::isfinite(v)) throw NumericError("non-finite input sample");
    v = std::clamp(v, 0.0, 1.0);
  }
  return p;
}

// Multilinear interpolation without output clamping (fitting needs the raw
// affine map). Exact grid points reproduce stored values bit-for-bit.
template <int D>
Rgb sample_unclamped(const Lut<D>& lut, Point<D> p) {
  p = clamp_point(p);
  const auto cw = corner_weights(lut, locate(lut, p), p);
  Rgb out{0.0, 0.0, 0.0};
  for (int n = 0; n < CornerWeights<D>::kCorners; ++n) {
    const double w = cw.coeff[static_cast<std::size_t>(n)];
    const double* v = lut.values.data() + cw.offset[static_cast<std::size_t>(n)];
    out[0] += w * v[0];
    out[1] += w * v[1];
    out[2] += w * v[2];
  }
  return out;
}

template <int D>
Rgb sample(const Lut<D>& lut, const Point<D>& p) {
  Rgb out = sample_unclamped(lut, p);
  for (auto& c : out) c = std::clamp(c, 0.0, 1.0);
  return out;
}

/*
 * Forward value plus everything backward passes need: the corner
 * coefficients double as d(out_c)/d(corner value, channel c), and
 * d_intensity is the analytic derivative of the output along the intensity
 * axis (one-sided at cell boundaries: the derivative of the owning cell).
 */
struct SampleGradient {
  Rgb value;  // pre-clamp output
  CornerWeights4 corners;
  Rgb d_intensity;
};

SampleGradient sample_grad(const IaLut4& lut, Point<4> p);

}  // namespace ialut
