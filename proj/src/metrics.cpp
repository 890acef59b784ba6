#include "ialut/metrics.hpp"

#include <cmath>
#include <cstddef>

#include "ialut/errors.hpp"
#include "ialut/parallel.hpp"

namespace ialut {

namespace {

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr double kSsimC1 = 0.01 * 0.01;  // (K1 * peak)^2 with unit peak
constexpr double kSsimC2 = 0.03 * 0.03;

std::array<double, kSsimWindow> gaussian_window() {
  std::array<double, kSsimWindow> w{};
  const int half = kSsimWindow / 2;
  double sum = 0.0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - half;
    w[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
    sum += w[static_cast<std::size_t>(i)];
  }
  for (auto& x : w) x /= sum;
  return w;
}

// Horizontal then vertical pass of the separable window over one plane.
void gauss_filter(const std::vector<double>& src, int h, int w, std::vector<double>& tmp,
                  std::vector<double>& dst) {
  static const auto win = gaussian_window();
  const int half = kSsimWindow / 2;
  const int ow = w - 2 * half;
  const int oh = h - 2 * half;
  tmp.assign(static_cast<std::size_t>(h) * ow, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kSsimWindow; ++k)
        acc += win[static_cast<std::size_t>(k)] * src[static_cast<std::size_t>(y) * w + x + k];
      tmp[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  dst.assign(static_cast<std::size_t>(oh) * ow, 0.0);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kSsimWindow; ++k)
        acc += win[static_cast<std::size_t>(k)] * tmp[static_cast<std::size_t>(y + k) * ow + x];
      dst[static_cast<std::size_t>(y) * ow + x] = acc;
    }
}

double frame_ssim(const VideoTensor& pred, const VideoTensor& gt, int n) {
  const int h = pred.height;
  const int w = pred.width;
  const std::size_t npx = static_cast<std::size_t>(h) * w;
  std::vector<double> x(npx), y(npx), xx(npx), yy(npx), xy(npx);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const float* p = pred.pixel(n, r, c);
      const float* q = gt.pixel(n, r, c);
      const double a = luminance(p[0], p[1], p[2]);
      const double b = luminance(q[0], q[1], q[2]);
      const std::size_t i = static_cast<std::size_t>(r) * w + c;
      x[i] = a;
      y[i] = b;
      xx[i] = a * a;
      yy[i] = b * b;
      xy[i] = a * b;
    }
  std::vector<double> tmp, mx, my, mxx, myy, mxy;
  gauss_filter(x, h, w, tmp, mx);
  gauss_filter(y, h, w, tmp, my);
  gauss_filter(xx, h, w, tmp, mxx);
  gauss_filter(yy, h, w, tmp, myy);
  gauss_filter(xy, h, w, tmp, mxy);

  const std::int64_t nvalid = static_cast<std::int64_t>(mx.size());
  const double total = blocked_sum(nvalid, [&](std::size_t i) {
    const double mux = mx[i];
    const double muy = my[i];
    const double vx = mxx[i] - mux * mux;
    const double vy = myy[i] - muy * muy;
    const double cov = mxy[i] - mux * muy;
    const double num = (2.0 * mux * muy + kSsimC1) * (2.0 * cov + kSsimC2);
    const double den = (mux * mux + muy * muy + kSsimC1) * (vx + vy + kSsimC2);
    return num / den;
  });
  return total / static_cast<double>(nvalid);
}

}  // namespace

double psnr(const VideoTensor& pred, const VideoTensor& gt) {
  if (!pred.same_shape(gt)) throw ShapeError("prediction/target shape mismatch");
  if (pred.data.empty()) throw ShapeError("empty tensors");
  const std::int64_t n = static_cast<std::int64_t>(pred.element_count());
  const double mse = blocked_sum(n, [&](std::size_t i) {
                       const double d = static_cast<double>(pred.data[i]) -
                                        static_cast<double>(gt.data[i]);
                       return d * d;
                     }) /
                     static_cast<double>(n);
  if (mse <= 0.0) return 99.0;
  const double db = 10.0 * std::log10(1.0 / mse);
  return db > 99.0 ? 99.0 : db;
}

double ssim(const VideoTensor& pred, const VideoTensor& gt) {
  if (!pred.same_shape(gt)) throw ShapeError("prediction/target shape mismatch");
  if (pred.height < kSsimWindow || pred.width < kSsimWindow)
    throw ShapeError("frames smaller than the similarity window");
  double total = 0.0;
  for (int n = 0; n < pred.frames; ++n) total += frame_ssim(pred, gt, n);
  return total / pred.frames;
}

std::vector<double> ab_series(const VideoTensor& v) {
  if (v.data.empty()) throw ShapeError("empty tensors");
  std::vector<double> ab(static_cast<std::size_t>(v.frames));
  const std::int64_t npx = static_cast<std::int64_t>(v.height) * v.width;
  for (int n = 0; n < v.frames; ++n) {
    const float* base = v.pixel(n, 0, 0);
    const double sum = blocked_sum(npx, [&](std::size_t i) {
      const float* p = base + 3 * i;
      return luminance(p[0], p[1], p[2]);
    });
    ab[static_cast<std::size_t>(n)] = sum / static_cast<double>(npx);
  }
  return ab;
}

double ab_var(const VideoTensor& pred, const VideoTensor& gt) {
  if (!pred.same_shape(gt)) throw ShapeError("prediction/target shape mismatch");
  if (pred.frames < 2) throw ShapeError("brightness variance needs at least two frames");
  const auto abp = ab_series(pred);
  const auto abg = ab_series(gt);
  const std::size_t n = abp.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = abp[i] - abg[i];
  /* shifted two-pass variance: exact zero when the error is constant */
  const double d0 = d[0];
  double acc = 0.0;
  for (const double x : d) acc += x - d0;
  const double mean = d0 + acc / static_cast<double>(n);
  double var = 0.0;
  for (const double x : d) {
    const double c = x - mean;
    var += c * c;
  }
  return var / static_cast<double>(n) * 1e3;
}

double mabd(const VideoTensor& pred, const VideoTensor& gt) {
  if (!pred.same_shape(gt)) throw ShapeError("prediction/target shape mismatch");
  if (pred.frames < 2) throw ShapeError("brightness deltas need at least two frames");
  const auto abp = ab_series(pred);
  const auto abg = ab_series(gt);
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < abp.size(); ++i) {
    const double dp = abp[i + 1] - abp[i];
    const double dg = abg[i + 1] - abg[i];
    acc += std::abs(dp - dg);
  }
  return acc / static_cast<double>(abp.size() - 1) * 1e3;
}

double md_ab(std::span<const VideoTensor> videos, int pair_index) {
  if (videos.empty()) throw ShapeError("empty video collection");
  if (pair_index < 0) throw ShapeError("pair index out of range");
  double acc = 0.0;
  for (const auto& v : videos) {
    if (pair_index + 1 >= v.frames) throw ShapeError("pair index out of range");
    const auto ab = ab_series(v);
    acc += std::abs(ab[static_cast<std::size_t>(pair_index) + 1] -
                    ab[static_cast<std::size_t>(pair_index)]);
  }
  return acc / static_cast<double>(videos.size());
}

}  // namespace ialut
