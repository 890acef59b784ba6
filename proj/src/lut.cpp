#include "ialut/lut.hpp"

namespace ialut {

SampleGradient sample_grad(const IaLut4& lut, std::array<double, 4> p) {
  p = clamp_point(p);
  const auto cell = locate(lut, p);
  SampleGradient out;
  out.corners = corner_weights(lut, cell, p);
  out.value = {0.0, 0.0, 0.0};
  out.d_intensity = {0.0, 0.0, 0.0};

  const double* values = lut.values.data();
  for (int n = 0; n < CornerWeights4::kCorners; ++n) {
    const double w = out.corners.coeff[static_cast<std::size_t>(n)];
    const double* v = values + out.corners.offset[static_cast<std::size_t>(n)];
    out.value[0] += w * v[0];
    out.value[1] += w * v[1];
    out.value[2] += w * v[2];
  }

  /*
   * d(out)/de, paired over the e axis: each of the 8 rgb-corner columns
   * contributes (upper - lower) / cell width times its rgb coefficient.
   * Tables constant along e give an exact 0.
   */
  std::array<double, 3> t;
  for (int a = 0; a < 3; ++a) {
    const Grid1D& g = lut.grids[a];
    const double lo = g[cell[a]];
    t[static_cast<std::size_t>(a)] = (p[a] - lo) / (g[cell[a] + 1] - lo);
  }
  const Grid1D& ge = lut.grids[3];
  const double inv_he = 1.0 / (ge[cell[3] + 1] - ge[cell[3]]);
  for (int n = 0; n < 8; ++n) {
    double base = 1.0;
    for (int a = 0; a < 3; ++a)
      base *= (n >> a & 1) ? t[static_cast<std::size_t>(a)] : 1.0 - t[static_cast<std::size_t>(a)];
    const double* vlo = values + out.corners.offset[static_cast<std::size_t>(n)];
    const double* vhi = values + out.corners.offset[static_cast<std::size_t>(n | 8)];
    const double s = base * inv_he;
    out.d_intensity[0] += s * (vhi[0] - vlo[0]);
    out.d_intensity[1] += s * (vhi[1] - vlo[1]);
    out.d_intensity[2] += s * (vhi[2] - vlo[2]);
  }
  return out;
}

}  // namespace ialut
