#pragma once

// Shared fixtures and independent reference implementations ("oracles") the
// suites check the production kernels against. Everything here favors the
// most obvious algorithm over speed and deliberately shares no code with the
// library beyond the public data types.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ialut/grid.hpp"
#include "ialut/lut.hpp"
#include "ialut/video.hpp"

namespace testutil {

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double urand(std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Random strictly increasing axis spanning [0,1], built from positive gaps.
inline ialut::Grid1D random_grid(int size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> gaps(static_cast<std::size_t>(size) - 1);
  double total = 0.0;
  for (auto& g : gaps) {
    g = urand(rng, 0.2, 1.0);
    total += g;
  }
  std::vector<double> pts(static_cast<std::size_t>(size), 0.0);
  double acc = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    acc += gaps[i - 1];
    pts[i] = acc / total;
  }
  pts.front() = 0.0;
  pts.back() = 1.0;
  return ialut::Grid1D(std::move(pts));
}

template <int D>
ialut::Lut<D> random_lut(int size, std::uint64_t seed, double lo = 0.0, double hi = 1.0,
                         bool uniform_grids = true) {
  std::mt19937_64 rng(seed);
  ialut::Lut<D> lut;
  for (int a = 0; a < D; ++a)
    lut.grids[static_cast<std::size_t>(a)] =
        uniform_grids ? ialut::Grid1D::uniform(size) : random_grid(size, seed + 100 + a);
  lut.values.resize(ialut::kChannels * lut.grid_point_count());
  for (auto& v : lut.values) v = urand(rng, lo, hi);
  return lut;
}

inline ialut::VideoTensor random_video(int frames, int height, int width, std::uint64_t seed) {
  auto v = ialut::VideoTensor::zeros(frames, height, width);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> uf(0.0f, 1.0f);
  for (auto& x : v.data) x = uf(rng);
  return v;
}

inline ialut::IntensityMap random_imap(int frames, int height, int width, std::uint64_t seed) {
  auto m = ialut::IntensityMap::filled(frames, height, width, 0.0f);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> uf(0.0f, 1.0f);
  for (auto& x : m.data) x = uf(rng);
  return m;
}

// Reference cell lookup: largest c in [0, size-2] with points[c] <= v.
inline int locate_by_scan(const ialut::Grid1D& g, double v) {
  int c = 0;
  for (int i = 0; i + 1 < g.size(); ++i)
    if (g[i] <= v) c = i;
  return c;
}

namespace detail {

// Sequential per-axis lerp: collapse axis by axis instead of expanding the
// tensor-product weights, so agreement is a real cross-check.
template <int D, class CornerFn>
double lerp_chain(const std::array<double, static_cast<std::size_t>(D)>& t, int axis,
                  unsigned bits, const CornerFn& corner) {
  if (axis == D) return corner(bits);
  const double lo = lerp_chain<D>(t, axis + 1, bits, corner);
  const double hi = lerp_chain<D>(t, axis + 1, bits | (1u << axis), corner);
  const double ta = t[static_cast<std::size_t>(axis)];
  return (1.0 - ta) * lo + ta * hi;
}

}  // namespace detail

// Reference interpolation: linear-scan lookup plus a chain of 1-D lerps.
template <int D>
ialut::Rgb nested_lerp(const ialut::Lut<D>& lut,
                       std::array<double, static_cast<std::size_t>(D)> p) {
  std::array<int, static_cast<std::size_t>(D)> cell;
  std::array<double, static_cast<std::size_t>(D)> t;
  for (int a = 0; a < D; ++a) {
    const auto& g = lut.grids[static_cast<std::size_t>(a)];
    p[static_cast<std::size_t>(a)] = std::clamp(p[static_cast<std::size_t>(a)], 0.0, 1.0);
    const int c = locate_by_scan(g, p[static_cast<std::size_t>(a)]);
    cell[static_cast<std::size_t>(a)] = c;
    t[static_cast<std::size_t>(a)] = (p[static_cast<std::size_t>(a)] - g[c]) / (g[c + 1] - g[c]);
  }
  ialut::Rgb out;
  for (int ch = 0; ch < 3; ++ch) {
    out[static_cast<std::size_t>(ch)] = detail::lerp_chain<D>(t, 0, 0u, [&](unsigned bits) {
      auto ix = cell;
      for (int a = 0; a < D; ++a)
        if (bits >> a & 1) ++ix[static_cast<std::size_t>(a)];
      return lut.at(ix, ch);
    });
  }
  return out;
}

// Coefficient of one corner, recovered by pushing an indicator corner
// assignment through the same lerp chain.
template <int D>
double corner_coeff_by_chain(const std::array<double, static_cast<std::size_t>(D)>& t,
                             unsigned corner) {
  return detail::lerp_chain<D>(t, 0, 0u,
                               [&](unsigned bits) { return bits == corner ? 1.0 : 0.0; });
}

struct TempDir {
  std::filesystem::path path;

  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "ialut_test_XXXXXX").string();
    std::vector<char> buf(tmpl.begin(), tmpl.end());
    buf.push_back('\0');
    if (!mkdtemp(buf.data())) throw std::runtime_error("mkdtemp failed");
    path = buf.data();
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

inline std::string slurp_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void dump_file(const std::filesystem::path& p, const std::string& contents) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << contents;
}

inline std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (const char c : text) {
    if (c == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  return lines;
}

}  // namespace testutil
