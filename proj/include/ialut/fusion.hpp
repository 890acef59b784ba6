#pragma once

#include <span>
#include <utility>
#include <vector>

#include "ialut/lut.hpp"
#include "ialut/parallel.hpp"

namespace ialut {

/*
 * T basis tables sharing one set of axis grids. A scene-adaptive weight
 * vector w fuses them into a single table by an elementwise weighted sum,
 * so the basis can be fitted once while weights stay cheap per clip.
 */
template <int D>
struct BasisLutSet {
  std::array<Grid1D, D> grids;
  std::vector<std::vector<double>> values;  // T arrays of kChannels * L^D each

  int count() const { return static_cast<int>(values.size()); }
  int size() const { return grids[0].size(); }
};

using BasisSet4 = BasisLutSet<4>;
using BasisSet3 = BasisLutSet<3>;

template <int D>
void validate_basis(const BasisLutSet<D>& basis) {
  if (basis.count() < 1) throw ShapeError("basis set needs at least one table");
  const int L = basis.grids[0].size();
  if (L < 2) throw FormatError("grid needs at least two points");
  for (const auto& g : basis.grids)
    if (g.size() != L) throw ShapeError("basis axes disagree in resolution");
  std::size_t npts = 1;
  for (int a = 0; a < D; ++a) npts *= static_cast<std::size_t>(L);
  for (const auto& v : basis.values)
    if (v.size() != kChannels * npts)
      throw ShapeError("basis value array does not match grid resolution");
}

// fused = sum_t w[t] * basis_t, elementwise. No clamping here; exported
// tables are clamped by the writer.
template <int D>
Lut<D> fuse(const BasisLutSet<D>& basis, std::span<const double> w, int workers = 0) {
  validate_basis(basis);
  if (static_cast<int>(w.size()) != basis.count())
    throw ShapeError("weight count does not match basis count");
  Lut<D> out;
  out.grids = basis.grids;
  out.values.resize(basis.values[0].size());
  const int T = basis.count();
  parallel_for(
      static_cast<std::int64_t>(out.values.size()),
      [&](std::size_t i) {
        double acc = 0.0;
        for (int t = 0; t < T; ++t) acc += w[static_cast<std::size_t>(t)] * basis.values[static_cast<std::size_t>(t)][i];
        out.values[i] = acc;
      },
      workers);
  return out;
}

// Identity-start initialization: basis 0 is the identity table, the rest are
// zero, and the weights pick out basis 0 -- so the untrained model is a
// no-op on colors.
template <int D>
std::pair<BasisLutSet<D>, std::vector<double>> init_basis(int count, int size) {
  if (count < 1) throw ShapeError("basis set needs at least one table");
  BasisLutSet<D> basis;
  Lut<D> ident = identity_lut<D>(size);
  basis.grids = ident.grids;
  basis.values.resize(static_cast<std::size_t>(count));
  basis.values[0] = std::move(ident.values);
  for (int t = 1; t < count; ++t)
    basis.values[static_cast<std::size_t>(t)].assign(basis.values[0].size(), 0.0);
  std::vector<double> w(static_cast<std::size_t>(count), 0.0);
  w[0] = 1.0;
  return {std::move(basis), std::move(w)};
}

}  // namespace ialut
