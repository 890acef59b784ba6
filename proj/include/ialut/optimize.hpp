#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ialut/fusion.hpp"
#include "ialut/losses.hpp"
#include "ialut/video.hpp"

namespace ialut {

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adaptive-moment accumulators for one parameter array.
struct AdamState {
  AdamParams hp;
  std::vector<double> m, v;
  std::int64_t step = 0;

  explicit AdamState(std::size_t n, AdamParams params = {})
      : hp(params), m(n, 0.0), v(n, 0.0) {}
};

// In-place bias-corrected update: m <- b1*m + (1-b1)*g; v <- b2*v + (1-b2)*g^2;
// p <- p - lr * m_hat / (sqrt(v_hat) + eps).
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double lr);

// Half-cosine decay from lr0 at step 0 to lr_min at total_steps.
double cosine_lr(std::int64_t step, std::int64_t total_steps, double lr0, double lr_min);

enum class IntensityMode { Constant, Luma, Provided, Free };

struct FitConfig {
  int grid_size = 33;    // points per axis
  int basis_count = 3;   // tables in the fused set
  int epochs = 100;
  int batch_size = 8;    // frames per optimization step
  double lr = 4e-4;
  double lr_min = 1e-7;
  int restarts = 0;      // extra cosine cycles beyond the first
  LossWeights loss;
  IntensityMode intensity = IntensityMode::Luma;
  double intensity_constant = 0.5;
  bool fit_3d = false;   // ablation: drop the intensity axis, fit a color cube
  std::uint64_t seed = 0;
  int workers = 0;

  void validate() const;
};

struct ClipPair {
  VideoTensor low, gt;
  std::optional<IntensityMap> intensity;  // consumed by IntensityMode::Provided
};

struct EpochStats {
  int epoch = 0;
  double lr = 0.0;
  double total = 0.0;
  double recon = 0.0;
  double smooth = 0.0;
  double mono = 0.0;
  double weight_term = 0.0;
};

struct FitReport {
  std::vector<EpochStats> epochs;
  double final_psnr = 0.0;
  double final_mse = 0.0;
  bool held_out = false;  // whether the final figures used held-out frames
  bool diverged = false;
  std::string note;
  double wall_seconds = 0.0;

  // Line-oriented text export (one epoch per line plus summary lines).
  void write(std::ostream& os) const;
};

struct FitResult {
  std::variant<BasisSet4, BasisSet3> basis;
  std::vector<std::vector<double>> weights;  // one vector per clip
  std::vector<IntensityMap> intensity;       // per clip, IntensityMode::Free only
  FitReport report;

  IaLut4 fused4(int clip) const;
  Lut3 fused3(int clip) const;
};

/*
 * Jointly fits basis tables, per-clip fusion weights, and (in free mode)
 * per-pixel intensities to paired low/normal clips by Adam on
 *   charbonnier + alpha_s * (smoothness + |w|^2) + alpha_m * monotonicity,
 * with the regularizers taken on the fused table. Deterministic for a fixed
 * config and seed regardless of worker count.
 */
FitResult fit(std::span<const ClipPair> clips, const FitConfig& cfg);

/*
 * One optimization step's objective on a fixed batch of frames, with analytic
 * gradients: the unit fit() iterates, exposed so the full gradient chain can
 * be checked against finite differences. free_intensity, when non-empty, is
 * the clip-sized per-pixel intensity parameter array (free mode).
 */
template <int D>
struct BatchGrads {
  std::vector<std::vector<double>> basis;  // per basis table
  std::vector<double> weights;
  std::vector<double> intensity;  // clip-sized; zero outside the batch
};

struct BatchLosses {
  double recon = 0.0;
  double smooth = 0.0;
  double mono = 0.0;
  double weight_term = 0.0;
  double total = 0.0;
};

template <int D>
BatchLosses evaluate_fit_batch(const BasisLutSet<D>& basis, std::span<const double> w,
                               const ClipPair& clip, std::span<const int> frame_ids,
                               const FitConfig& cfg, std::span<const double> free_intensity,
                               BatchGrads<D>* grads);

/*
 * Synthetic clip exercising the one-to-many mapping: the low video is one
 * uniform color everywhere, while the target is target_a on the left half
 * and target_b on the right half of every frame. The intensity map is 0 on
 * the left and 1 on the right, so a 4D table can separate what no single
 * color cube can. The seed is reserved for optional noise; generation is
 * deterministic.
 */
struct OneToManyClip {
  VideoTensor low, gt;
  IntensityMap intensity;
};

OneToManyClip gen_one_to_many(int height, int width, int frames, Rgb input_color, Rgb target_a,
                              Rgb target_b, std::uint64_t seed = 0);

}  // namespace ialut
