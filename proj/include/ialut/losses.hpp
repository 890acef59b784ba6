#pragma once

#include <span>
#include <vector>

#include "ialut/lut.hpp"
#include "ialut/parallel.hpp"
#include "ialut/video.hpp"

namespace ialut {

struct LossWeights {
  double alpha_smooth = 1e-4;     // scales both smoothness terms (table + weights)
  double alpha_mono = 10.0;       // scales the monotonicity hinge
  double charbonnier_eps = 1e-3;  // smoothing constant of the robust L1
};

// Smoothed-L1 reconstruction penalty: mean of sqrt((pred-gt)^2 + eps^2) over
// all elements. When grad is non-null it is resized to match pred and filled
// with d(loss)/d(pred).
double charbonnier(std::span<const double> pred, std::span<const double> gt, double eps,
                   std::vector<double>* grad = nullptr);
double charbonnier(const VideoTensor& pred, const VideoTensor& gt, double eps,
                   std::vector<double>* grad = nullptr);

double weight_l2(std::span<const double> w, std::vector<double>* grad = nullptr);

// total = recon + alpha_smooth * (smooth + weight_term) + alpha_mono * mono
double total_loss(double recon, double smooth, double mono, double weight_term,
                  const LossWeights& lw);

/*
 * Sum over grid points and axes of the squared forward-difference norm
 * ||C(x + e_a) - C(x)||^2. Penalizes jagged tables; the gradient is written
 * in gather form (each entry reads its neighbors) so it parallelizes without
 * races and deterministically.
 */
template <int D>
double lut_smoothness(const Lut<D>& lut, std::vector<double>* grad = nullptr,
                      int workers = 0) {
  validate_lut(lut);
  const int L = lut.size();
  const std::size_t npts = lut.grid_point_count();
  const auto stride = value_strides<D>(L);
  const double* v = lut.values.data();

  const double loss = blocked_sum(
      static_cast<std::int64_t>(npts),
      [&](std::size_t gp) {
        const auto ix = decode_grid_point<D>(gp, L);
        const std::size_t o = gp * kChannels;
        double f = 0.0;
        for (int a = 0; a < D; ++a) {
          if (ix[a] + 1 >= L) continue;
          const std::size_t q = o + stride[a];
          for (int c = 0; c < kChannels; ++c) {
            const double d = v[q + c] - v[o + c];
            f += d * d;
          }
        }
        return f;
      },
      workers);

  if (grad) {
    grad->assign(lut.values.size(), 0.0);
    double* g = grad->data();
    parallel_for(
        static_cast<std::int64_t>(npts),
        [&](std::size_t gp) {
          const auto ix = decode_grid_point<D>(gp, L);
          const std::size_t o = gp * kChannels;
          for (int a = 0; a < D; ++a) {
            if (ix[a] + 1 < L) {
              const std::size_t q = o + stride[a];
              for (int c = 0; c < kChannels; ++c) g[o + c] -= 2.0 * (v[q + c] - v[o + c]);
            }
            if (ix[a] > 0) {
              const std::size_t q = o - stride[a];
              for (int c = 0; c < kChannels; ++c) g[o + c] += 2.0 * (v[o + c] - v[q + c]);
            }
          }
        },
        workers);
  }
  return loss;
}

/*
 * Hinge penalty on stored values that decrease as any input coordinate
 * increases: sum of max(C(x)[c] - C(x + e_a)[c], 0). Zero on any
 * coordinatewise non-decreasing table (the identity included). The
 * subgradient at exact ties is 0.
 */
template <int D>
double lut_monotonicity(const Lut<D>& lut, std::vector<double>* grad = nullptr,
                        int workers = 0) {
  validate_lut(lut);
  const int L = lut.size();
  const std::size_t npts = lut.grid_point_count();
  const auto stride = value_strides<D>(L);
  const double* v = lut.values.data();

  const double loss = blocked_sum(
      static_cast<std::int64_t>(npts),
      [&](std::size_t gp) {
        const auto ix = decode_grid_point<D>(gp, L);
        const std::size_t o = gp * kChannels;
        double f = 0.0;
        for (int a = 0; a < D; ++a) {
          if (ix[a] + 1 >= L) continue;
          const std::size_t q = o + stride[a];
          for (int c = 0; c < kChannels; ++c) {
            const double d = v[o + c] - v[q + c];
            if (d > 0.0) f += d;
          }
        }
        return f;
      },
      workers);

  if (grad) {
    grad->assign(lut.values.size(), 0.0);
    double* g = grad->data();
    parallel_for(
        static_cast<std::int64_t>(npts),
        [&](std::size_t gp) {
          const auto ix = decode_grid_point<D>(gp, L);
          const std::size_t o = gp * kChannels;
          for (int a = 0; a < D; ++a) {
            if (ix[a] + 1 < L) {
              const std::size_t q = o + stride[a];
              for (int c = 0; c < kChannels; ++c)
                if (v[o + c] > v[q + c]) g[o + c] += 1.0;
            }
            if (ix[a] > 0) {
              const std::size_t q = o - stride[a];
              for (int c = 0; c < kChannels; ++c)
                if (v[q + c] > v[o + c]) g[o + c] -= 1.0;
            }
          }
        },
        workers);
  }
  return loss;
}

}  // namespace ialut
