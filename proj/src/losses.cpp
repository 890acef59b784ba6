#include "ialut/losses.hpp"

#include <cmath>

namespace ialut {

double charbonnier(std::span<const double> pred, std::span<const double> gt, double eps,
                   std::vector<double>* grad) {
  if (pred.size() != gt.size()) throw ShapeError("prediction/target size mismatch");
  if (pred.empty()) throw ShapeError("empty tensors");
  if (!(eps > 0.0)) throw FormatError("charbonnier eps must be positive");
  const double eps2 = eps * eps;
  const double inv_n = 1.0 / static_cast<double>(pred.size());
  const double loss =
      inv_n * blocked_sum(static_cast<std::int64_t>(pred.size()), [&](std::size_t i) {
        const double d = pred[i] - gt[i];
        return std::sqrt(d * d + eps2);
      });
  if (grad) {
    grad->resize(pred.size());
    double* g = grad->data();
    parallel_for(static_cast<std::int64_t>(pred.size()), [&](std::size_t i) {
      const double d = pred[i] - gt[i];
      g[i] = d / std::sqrt(d * d + eps2) * inv_n;
    });
  }
  return loss;
}

double charbonnier(const VideoTensor& pred, const VideoTensor& gt, double eps,
                   std::vector<double>* grad) {
  if (!pred.same_shape(gt)) throw ShapeError("prediction/target shape mismatch");
  if (pred.data.empty()) throw ShapeError("empty tensors");
  if (!(eps > 0.0)) throw FormatError("charbonnier eps must be positive");
  const double eps2 = eps * eps;
  const double inv_n = 1.0 / static_cast<double>(pred.element_count());
  const double loss =
      inv_n * blocked_sum(static_cast<std::int64_t>(pred.element_count()), [&](std::size_t i) {
        const double d = static_cast<double>(pred.data[i]) - static_cast<double>(gt.data[i]);
        return std::sqrt(d * d + eps2);
      });
  if (grad) {
    grad->resize(pred.element_count());
    double* g = grad->data();
    parallel_for(static_cast<std::int64_t>(pred.element_count()), [&](std::size_t i) {
      const double d = static_cast<double>(pred.data[i]) - static_cast<double>(gt.data[i]);
      g[i] = d / std::sqrt(d * d + eps2) * inv_n;
    });
  }
  return loss;
}

double weight_l2(std::span<const double> w, std::vector<double>* grad) {
  double loss = 0.0;
  for (const double x : w) loss += x * x;
  if (grad) {
    grad->resize(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) (*grad)[i] = 2.0 * w[i];
  }
  return loss;
}

double total_loss(double recon, double smooth, double mono, double weight_term,
                  const LossWeights& lw) {
  return recon + lw.alpha_smooth * (smooth + weight_term) + lw.alpha_mono * mono;
}

}  // namespace ialut
