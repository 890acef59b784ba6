#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <limits>

#include "helpers.hpp"
#include "ialut/lut.hpp"

using namespace ialut;
using testutil::corner_coeff_by_chain;
using testutil::locate_by_scan;
using testutil::make_rng;
using testutil::nested_lerp;
using testutil::random_grid;
using testutil::random_lut;
using testutil::urand;

TEST_CASE("axis grids validate their preconditions") {
  CHECK_THROWS_WITH_AS(Grid1D({0.5}), "grid needs at least two points", FormatError);
  CHECK_THROWS_WITH_AS(Grid1D({0.0, 0.5, 0.5, 1.0}), "grid not increasing", FormatError);
  CHECK_THROWS_WITH_AS(Grid1D({0.0, 0.7, 0.3, 1.0}), "grid not increasing", FormatError);
  CHECK_THROWS_WITH_AS(Grid1D({0.1, 1.0}), "grid must span [0,1]", FormatError);
  CHECK_THROWS_WITH_AS(Grid1D({0.0, 0.9}), "grid must span [0,1]", FormatError);
  CHECK_THROWS_WITH_AS(Grid1D({0.0, std::numeric_limits<double>::infinity(), 1.0}),
                       "grid point not finite", FormatError);
  CHECK_THROWS_AS(Grid1D::uniform(1), FormatError);
  CHECK(Grid1D({0.0, 1.0}).size() == 2);
  CHECK(Grid1D::uniform(33).size() == 33);
  CHECK(Grid1D::uniform(33)[32] == 1.0);
}

TEST_CASE("cell lookup matches a linear scan and pins the boundary convention") {
  const Grid1D u = Grid1D::uniform(33);

  // endpoints and the midpoint of the canonical 33-point axis
  CHECK(locate_cell(u, 0.0) == 0);
  CHECK(locate_cell(u, 1.0) == 31);
  CHECK(locate_cell(u, 0.5) == 16);
  CHECK(locate_cell(u, -2.0) == 0);
  CHECK(locate_cell(u, 2.0) == 31);

  SUBCASE("exact hits on grid points land in the cell they start") {
    for (int i = 0; i < u.size(); ++i)
      CHECK(locate_cell(u, u[i]) == std::min(i, u.size() - 2));
  }

  SUBCASE("dense sweep agrees with the scan oracle on uniform and warped axes") {
    const Grid1D grids[] = {u, testutil::random_grid(17, 7)};
    auto rng = make_rng(11);
    for (const auto& g : grids) {
      for (int k = 0; k < 20000; ++k) {
        const double v = urand(rng);
        CHECK(locate_cell(g, v) == locate_by_scan(g, v));
      }
      for (int i = 0; i < g.size(); ++i)
        CHECK(locate_cell(g, g[i]) == locate_by_scan(g, g[i]));
    }
  }
}

TEST_CASE("corner coefficients form a partition of unity") {
  const IaLut4 lut = random_lut<4>(9, 21, 0.0, 1.0, /*uniform_grids=*/false);
  auto rng = make_rng(22);
  for (int k = 0; k < 2000; ++k) {
    const Point<4> p{urand(rng), urand(rng), urand(rng), urand(rng)};
    const auto cw = corner_weights(lut, locate(lut, p), p);
    double sum = 0.0;
    for (int n = 0; n < 16; ++n) {
      const double c = cw.coeff[static_cast<std::size_t>(n)];
      CHECK(c >= 0.0);
      CHECK(c <= 1.0);
      sum += c;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
}

TEST_CASE("corner coefficients and offsets are the tensor product of axis lerps") {
  const IaLut4 lut = random_lut<4>(7, 23, 0.0, 1.0, /*uniform_grids=*/false);

  SUBCASE("a point on a cell's lower corner weights that corner alone") {
    const CellIndex4 cell{1, 2, 3, 0};
    const Point<4> p{lut.grids[0][1], lut.grids[1][2], lut.grids[2][3], lut.grids[3][0]};
    const auto cw = corner_weights(lut, cell, p);
    CHECK(cw.coeff[0] == 1.0);
    for (int n = 1; n < 16; ++n) CHECK(cw.coeff[static_cast<std::size_t>(n)] == 0.0);
  }

  SUBCASE("the center of a uniform cell weights every corner 1/16 exactly") {
    const IaLut4 ulut = random_lut<4>(33, 24);
    const double h = 1.0 / 32.0;
    const Point<4> p{3 * h + h / 2, 10 * h + h / 2, 0 * h + h / 2, 16 * h + h / 2};
    const auto cw = corner_weights(ulut, locate(ulut, p), p);
    for (int n = 0; n < 16; ++n) CHECK(cw.coeff[static_cast<std::size_t>(n)] == 0.0625);
  }

  SUBCASE("coefficients match the sequential-lerp oracle and offsets match the layout") {
    auto rng = make_rng(25);
    for (int k = 0; k < 500; ++k) {
      const Point<4> p{urand(rng), urand(rng), urand(rng), urand(rng)};
      const auto cell = locate(lut, p);
      const auto cw = corner_weights(lut, cell, p);
      Point<4> t;
      for (int a = 0; a < 4; ++a) {
        const auto& g = lut.grids[static_cast<std::size_t>(a)];
        t[static_cast<std::size_t>(a)] =
            (p[static_cast<std::size_t>(a)] - g[cell[static_cast<std::size_t>(a)]]) /
            (g[cell[static_cast<std::size_t>(a)] + 1] - g[cell[static_cast<std::size_t>(a)]]);
      }
      for (unsigned n = 0; n < 16; ++n) {
        CHECK(std::abs(cw.coeff[n] - corner_coeff_by_chain<4>(t, n)) <= 1e-12);
        CellIndex4 ix = cell;
        for (int a = 0; a < 4; ++a)
          if (n >> a & 1) ++ix[static_cast<std::size_t>(a)];
        CHECK(cw.offset[n] == lut.offset(ix));
      }
    }
  }
}

TEST_CASE("4D interpolation of the identity table returns the color for every intensity") {
  const IaLut4 lut = identity_lut<4>(33);
  auto rng = make_rng(31);
  for (int k = 0; k < 1000; ++k) {
    const Point<4> p{urand(rng), urand(rng), urand(rng), urand(rng)};
    const Rgb out = sample(lut, p);
    for (int c = 0; c < 3; ++c)
      CHECK(std::abs(out[static_cast<std::size_t>(c)] - p[static_cast<std::size_t>(c)]) <=
            1e-12);
  }
}

TEST_CASE("4D interpolation of a constant table returns the constant") {
  IaLut4 lut = identity_lut<4>(9);
  for (std::size_t i = 0; i < lut.values.size(); i += 3) {
    lut.values[i] = 0.25;
    lut.values[i + 1] = 0.5;
    lut.values[i + 2] = 0.75;
  }
  auto rng = make_rng(32);
  for (int k = 0; k < 200; ++k) {
    const Rgb out = sample(lut, {urand(rng), urand(rng), urand(rng), urand(rng)});
    CHECK(std::abs(out[0] - 0.25) <= 1e-12);
    CHECK(std::abs(out[1] - 0.5) <= 1e-12);
    CHECK(std::abs(out[2] - 0.75) <= 1e-12);
  }
}

TEST_CASE("4D interpolation agrees with the nested-lerp oracle") {
  SUBCASE("uniform grids") {
    const IaLut4 lut = random_lut<4>(9, 41);
    auto rng = make_rng(42);
    for (int k = 0; k < 10000; ++k) {
      const Point<4> p{urand(rng), urand(rng), urand(rng), urand(rng)};
      const Rgb got = sample_unclamped(lut, p);
      const Rgb ref = nested_lerp(lut, p);
      for (int c = 0; c < 3; ++c)
        CHECK(std::abs(got[static_cast<std::size_t>(c)] - ref[static_cast<std::size_t>(c)]) <=
              1e-12);
    }
  }
  SUBCASE("warped grids") {
    const IaLut4 lut = random_lut<4>(6, 43, 0.0, 1.0, /*uniform_grids=*/false);
    auto rng = make_rng(44);
    for (int k = 0; k < 10000; ++k) {
      const Point<4> p{urand(rng), urand(rng), urand(rng), urand(rng)};
      const Rgb got = sample_unclamped(lut, p);
      const Rgb ref = nested_lerp(lut, p);
      for (int c = 0; c < 3; ++c)
        CHECK(std::abs(got[static_cast<std::size_t>(c)] - ref[static_cast<std::size_t>(c)]) <=
              1e-12);
    }
  }
}

TEST_CASE("sampling exactly on grid points reproduces stored values bit for bit") {
  const IaLut4 lut = random_lut<4>(5, 51, 0.0, 1.0, /*uniform_grids=*/false);
  const int L = lut.size();
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j)
      for (int k = 0; k < L; ++k)
        for (int m = 0; m < L; ++m) {
          const CellIndex4 ix{i, j, k, m};
          const Point<4> p{lut.grids[0][i], lut.grids[1][j], lut.grids[2][k], lut.grids[3][m]};
          const Rgb raw = sample_unclamped(lut, p);
          const Rgb clamped = sample(lut, p);
          for (int c = 0; c < 3; ++c) {
            CHECK(raw[static_cast<std::size_t>(c)] == lut.at(ix, c));
            CHECK(clamped[static_cast<std::size_t>(c)] == lut.at(ix, c));
          }
        }
}

TEST_CASE("interpolation is linear in the stored values") {
  const IaLut4 a = random_lut<4>(5, 61);
  const IaLut4 b = random_lut<4>(5, 62);
  IaLut4 mix = a;
  const double s = 0.3, t = 1.7;
  for (std::size_t i = 0; i < mix.values.size(); ++i)
    mix.values[i] = s * a.values[i] + t * b.values[i];
  auto rng = make_rng(63);
  for (int k = 0; k < 1000; ++k) {
    const Point<4> p{urand(rng), urand(rng), urand(rng), urand(rng)};
    const Rgb va = sample_unclamped(a, p);
    const Rgb vb = sample_unclamped(b, p);
    const Rgb vm = sample_unclamped(mix, p);
    for (int c = 0; c < 3; ++c)
      CHECK(std::abs(vm[static_cast<std::size_t>(c)] - (s * va[static_cast<std::size_t>(c)] +
                                                        t * vb[static_cast<std::size_t>(c)])) <=
            1e-12);
  }
}

TEST_CASE("out-of-domain inputs clamp to the cube and non-finite inputs are refused") {
  const IaLut4 lut = random_lut<4>(5, 71);
  const Rgb outside = sample(lut, {-0.5, 1.7, 0.3, 2.0});
  const Rgb edge = sample(lut, {0.0, 1.0, 0.3, 1.0});
  for (int c = 0; c < 3; ++c)
    CHECK(outside[static_cast<std::size_t>(c)] == edge[static_cast<std::size_t>(c)]);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS((void)sample(lut, {nan, 0.5, 0.5, 0.5}), NumericError);
  CHECK_THROWS_AS((void)sample(lut, {0.5, 0.5, inf, 0.5}), NumericError);
  CHECK_THROWS_AS((void)sample_unclamped(lut, {0.5, -inf, 0.5, 0.5}), NumericError);
}

TEST_CASE("sample clamps outputs to [0,1] while the raw variant does not") {
  IaLut4 lut = identity_lut<4>(3);
  for (auto& v : lut.values) v = v * 3.0 - 1.0;  // push values into [-1, 2]
  auto rng = make_rng(81);
  bool saw_clamp = false;
  for (int k = 0; k < 500; ++k) {
    const Point<4> p{urand(rng), urand(rng), urand(rng), urand(rng)};
    const Rgb raw = sample_unclamped(lut, p);
    const Rgb out = sample(lut, p);
    for (int c = 0; c < 3; ++c) {
      const double rc = raw[static_cast<std::size_t>(c)];
      const double oc = out[static_cast<std::size_t>(c)];
      CHECK(oc == std::clamp(rc, 0.0, 1.0));
      if (rc < 0.0 || rc > 1.0) saw_clamp = true;
    }
  }
  CHECK(saw_clamp);
}

TEST_CASE("intensity derivative of an intensity-constant table is exactly zero") {
  const IaLut4 lut = identity_lut<4>(9);
  auto rng = make_rng(91);
  for (int k = 0; k < 200; ++k) {
    const auto g = sample_grad(lut, {urand(rng), urand(rng), urand(rng), urand(rng)});
    CHECK(g.d_intensity[0] == 0.0);
    CHECK(g.d_intensity[1] == 0.0);
    CHECK(g.d_intensity[2] == 0.0);
  }
}

TEST_CASE("sample_grad exposes the forward value and the corner coefficients") {
  const IaLut4 lut = random_lut<4>(7, 92, 0.0, 1.0, /*uniform_grids=*/false);
  auto rng = make_rng(93);
  for (int k = 0; k < 500; ++k) {
    const Point<4> p{urand(rng), urand(rng), urand(rng), urand(rng)};
    const auto g = sample_grad(lut, p);
    const Rgb ref = sample_unclamped(lut, p);
    for (int c = 0; c < 3; ++c)
      CHECK(std::abs(g.value[static_cast<std::size_t>(c)] - ref[static_cast<std::size_t>(c)]) <=
            1e-14);
    const auto cw = corner_weights(lut, locate(lut, p), p);
    for (int n = 0; n < 16; ++n) {
      CHECK(g.corners.coeff[static_cast<std::size_t>(n)] ==
            cw.coeff[static_cast<std::size_t>(n)]);
      CHECK(g.corners.offset[static_cast<std::size_t>(n)] ==
            cw.offset[static_cast<std::size_t>(n)]);
    }
  }
}

TEST_CASE("corner coefficients are the derivatives with respect to stored values") {
  IaLut4 lut = random_lut<4>(5, 94);
  auto rng = make_rng(95);
  const double h = 1e-6;
  for (int k = 0; k < 40; ++k) {
    const Point<4> p{urand(rng), urand(rng), urand(rng), urand(rng)};
    const auto g = sample_grad(lut, p);
    for (int n = 0; n < 16; n += 5) {  // a spread of corners per point
      for (int c = 0; c < 3; ++c) {
        const std::size_t idx = g.corners.offset[static_cast<std::size_t>(n)] +
                                static_cast<std::size_t>(c);
        const double saved = lut.values[idx];
        lut.values[idx] = saved + h;
        const double up = sample_unclamped(lut, p)[static_cast<std::size_t>(c)];
        lut.values[idx] = saved - h;
        const double dn = sample_unclamped(lut, p)[static_cast<std::size_t>(c)];
        lut.values[idx] = saved;
        const double fd = (up - dn) / (2.0 * h);
        CHECK(std::abs(fd - g.corners.coeff[static_cast<std::size_t>(n)]) <= 1e-7);
      }
    }
  }
}

TEST_CASE("intensity derivative matches central differences inside each cell") {
  const IaLut4 lut = random_lut<4>(9, 96, 0.0, 1.0, /*uniform_grids=*/false);
  auto rng = make_rng(97);
  const double h = 1e-4;
  const double margin = 1e-3;
  int tested = 0;
  while (tested < 1000) {
    Point<4> p{urand(rng), urand(rng), urand(rng), urand(rng)};
    const auto cell = locate(lut, p);
    const auto& ge = lut.grids[3];
    // stay inside one intensity cell so the derivative is the analytic slope
    if (p[3] - ge[cell[3]] < margin || ge[cell[3] + 1] - p[3] < margin) continue;
    ++tested;
    const auto g = sample_grad(lut, p);
    Point<4> up = p, dn = p;
    up[3] += h;
    dn[3] -= h;
    const Rgb vu = sample_unclamped(lut, up);
    const Rgb vd = sample_unclamped(lut, dn);
    for (int c = 0; c < 3; ++c) {
      const double fd =
          (vu[static_cast<std::size_t>(c)] - vd[static_cast<std::size_t>(c)]) / (2.0 * h);
      const double an = g.d_intensity[static_cast<std::size_t>(c)];
      CHECK(std::abs(fd - an) <= 1e-9 * std::max(1.0, std::abs(an)));
    }
  }
}

TEST_CASE("3D interpolation behaves like the 4D kernel with the intensity axis dropped") {
  SUBCASE("identity cube returns its input") {
    const Lut3 lut = identity_lut<3>(17);
    auto rng = make_rng(101);
    for (int k = 0; k < 500; ++k) {
      const Point<3> p{urand(rng), urand(rng), urand(rng)};
      const Rgb out = sample(lut, p);
      for (int c = 0; c < 3; ++c)
        CHECK(std::abs(out[static_cast<std::size_t>(c)] - p[static_cast<std::size_t>(c)]) <=
              1e-12);
    }
  }
  SUBCASE("random cube agrees with the nested-lerp oracle") {
    const Lut3 lut = random_lut<3>(8, 102, 0.0, 1.0, /*uniform_grids=*/false);
    auto rng = make_rng(103);
    for (int k = 0; k < 10000; ++k) {
      const Point<3> p{urand(rng), urand(rng), urand(rng)};
      const Rgb got = sample_unclamped(lut, p);
      const Rgb ref = nested_lerp(lut, p);
      for (int c = 0; c < 3; ++c)
        CHECK(std::abs(got[static_cast<std::size_t>(c)] - ref[static_cast<std::size_t>(c)]) <=
              1e-12);
    }
  }
  SUBCASE("eight corner coefficients sum to one") {
    const Lut3 lut = random_lut<3>(6, 104);
    auto rng = make_rng(105);
    for (int k = 0; k < 1000; ++k) {
      const Point<3> p{urand(rng), urand(rng), urand(rng)};
      const auto cw = corner_weights(lut, locate(lut, p), p);
      double sum = 0.0;
      for (int n = 0; n < 8; ++n) sum += cw.coeff[static_cast<std::size_t>(n)];
      CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("table validation rejects inconsistent shapes") {
  IaLut4 lut = identity_lut<4>(3);
  CHECK_NOTHROW(validate_lut(lut));

  lut.values.pop_back();
  CHECK_THROWS_WITH_AS(validate_lut(lut), "lut value array does not match grid resolution",
                       ShapeError);

  IaLut4 mixed = identity_lut<4>(3);
  mixed.grids[2] = Grid1D::uniform(4);
  CHECK_THROWS_WITH_AS(validate_lut(mixed), "lut axes disagree in resolution", ShapeError);

  IaLut4 empty;
  CHECK_THROWS_WITH_AS(validate_lut(empty), "grid needs at least two points", FormatError);
}

TEST_CASE("identity table stores the grid coordinates at every point") {
  const IaLut4 lut = identity_lut<4>(5);
  const int L = lut.size();
  CHECK(lut.values.size() == 3u * 5 * 5 * 5 * 5);
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j)
      for (int k = 0; k < L; ++k)
        for (int m = 0; m < L; ++m) {
          const CellIndex4 ix{i, j, k, m};
          CHECK(lut.at(ix, 0) == lut.grids[0][i]);
          CHECK(lut.at(ix, 1) == lut.grids[1][j]);
          CHECK(lut.at(ix, 2) == lut.grids[2][k]);
        }
}
