#include "ialut/optimize.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "ialut/errors.hpp"
#include "ialut/metrics.hpp"
#include "ialut/parallel.hpp"

namespace ialut {

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double lr) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw ShapeError("parameter/gradient shapes disagree");
  state.step += 1;
  const double b1 = state.hp.beta1;
  const double b2 = state.hp.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  std::atomic<bool> bad{false};
  double* m = state.m.data();
  double* v = state.v.data();
  double* p = params.data();
  const double* g = grads.data();
  const double eps = state.hp.eps;
  parallel_for(static_cast<std::int64_t>(params.size()), [&](std::size_t i) {
    const double gi = g[i];
    if (!std::isfinite(gi)) {
      bad.store(true, std::memory_order_relaxed);
      return;
    }
    const double mi = m[i] = b1 * m[i] + (1.0 - b1) * gi;
    const double vi = v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
    p[i] -= lr * (mi / bc1) / (std::sqrt(vi / bc2) + eps);
  });
  if (bad.load(std::memory_order_relaxed)) throw NumericError("non-finite gradient");
}

double cosine_lr(std::int64_t step, std::int64_t total_steps, double lr0, double lr_min) {
  if (total_steps <= 0) throw FormatError("schedule needs a positive step count");
  if (step < 0 || step > total_steps) throw FormatError("step outside schedule");
  if (!(lr_min > 0.0) || lr_min > lr0) throw FormatError("need 0 < min lr <= initial lr");
  const double phase = M_PI * static_cast<double>(step) / static_cast<double>(total_steps);
  return lr_min + 0.5 * (lr0 - lr_min) * (1.0 + std::cos(phase));
}

void FitConfig::validate() const {
  if (grid_size < 2) throw FormatError("grid size must be >= 2");
  if (basis_count < 1) throw FormatError("basis count must be >= 1");
  if (epochs < 1) throw FormatError("epochs must be >= 1");
  if (batch_size < 1) throw FormatError("batch size must be >= 1");
  if (!(lr_min > 0.0) || lr_min > lr) throw FormatError("need 0 < min lr <= initial lr");
  if (restarts < 0) throw FormatError("restarts must be >= 0");
  if (loss.alpha_smooth < 0.0 || loss.alpha_mono < 0.0)
    throw FormatError("loss weights must be nonnegative");
  if (!(loss.charbonnier_eps > 0.0)) throw FormatError("charbonnier eps must be positive");
  if (!(intensity_constant >= 0.0 && intensity_constant <= 1.0))
    throw FormatError("constant intensity must lie in [0,1]");
}

namespace {

// Enhancement intensity of one pixel under the configured mode.
template <int D>
double pixel_intensity(const FitConfig& cfg, const ClipPair& clip,
                       std::span<const double> free_intensity, std::size_t clip_px,
                       const float* low) {
  if constexpr (D == 3) {
    (void)cfg, (void)clip, (void)free_intensity, (void)clip_px, (void)low;
    return 0.0;
  } else {
    switch (cfg.intensity) {
      case IntensityMode::Constant:
        return cfg.intensity_constant;
      case IntensityMode::Luma:
        return std::clamp(1.0 - luminance(low[0], low[1], low[2]), 0.0, 1.0);
      case IntensityMode::Provided:
        return static_cast<double>(clip.intensity->data[clip_px]);
      case IntensityMode::Free:
        return free_intensity[clip_px];
    }
    return 0.0;
  }
}

template <int D>
struct PixScratch {
  CornerWeights<D> cw;
  std::array<double, 3> dout;
  std::array<double, 3> de;
  double contrib;
};

constexpr std::size_t kFitChunk = std::size_t{1} << 16;

}  // namespace

template <int D>
BatchLosses evaluate_fit_batch(const BasisLutSet<D>& basis, std::span<const double> w,
                               const ClipPair& clip, std::span<const int> frame_ids,
                               const FitConfig& cfg, std::span<const double> free_intensity,
                               BatchGrads<D>* grads) {
  if (frame_ids.empty()) throw ShapeError("empty batch");
  const Lut<D> fused = fuse(basis, w, cfg.workers);
  const int T = basis.count();

  const std::size_t frame_px = static_cast<std::size_t>(clip.low.height) * clip.low.width;
  const std::size_t batch_px = frame_px * frame_ids.size();
  const double inv_nelem = 1.0 / static_cast<double>(batch_px * 3);
  const double eps2 = cfg.loss.charbonnier_eps * cfg.loss.charbonnier_eps;

  const auto pixel_point = [&](std::size_t bi, std::size_t* clip_px) {
    const std::size_t fi = bi / frame_px;
    const std::size_t k = bi % frame_px;
    *clip_px = static_cast<std::size_t>(frame_ids[fi]) * frame_px + k;
    Point<D> pt;
    const float* low = clip.low.data.data() + *clip_px * 3;
    pt[0] = low[0];
    pt[1] = low[1];
    pt[2] = low[2];
    if constexpr (D == 4)
      pt[3] = pixel_intensity<D>(cfg, clip, free_intensity, *clip_px, low);
    return pt;
  };

  BatchLosses out;

  if (!grads) {
    // Evaluation only: deterministic blocked reduction over batch pixels.
    out.recon = inv_nelem * blocked_sum(
                                static_cast<std::int64_t>(batch_px),
                                [&](std::size_t bi) {
                                  std::size_t clip_px;
                                  const auto pt = pixel_point(bi, &clip_px);
                                  const Rgb pred = sample_unclamped(fused, pt);
                                  const float* gt = clip.gt.data.data() + clip_px * 3;
                                  double c = 0.0;
                                  for (int ch = 0; ch < 3; ++ch) {
                                    const double d = pred[static_cast<std::size_t>(ch)] -
                                                     static_cast<double>(gt[ch]);
                                    c += std::sqrt(d * d + eps2);
                                  }
                                  return c;
                                },
                                cfg.workers);
    out.smooth = lut_smoothness(fused, nullptr, cfg.workers);
    out.mono = lut_monotonicity(fused, nullptr, cfg.workers);
    out.weight_term = weight_l2(w);
    out.total = total_loss(out.recon, out.smooth, out.mono, out.weight_term, cfg.loss);
    return out;
  }

  /*
   * Gradient pass. Pixels are processed in fixed chunks: a parallel phase
   * fills per-pixel scratch, then a serial phase accumulates the loss and
   * scatters corner gradients in pixel order, so the result is bitwise
   * independent of the worker count.
   */
  std::vector<double> grad_fused(fused.values.size(), 0.0);
  const bool want_e = D == 4 && cfg.intensity == IntensityMode::Free;
  if (want_e) grads->intensity.assign(clip.low.pixel_count(), 0.0);

  std::vector<PixScratch<D>> scratch(std::min(batch_px, kFitChunk));
  double recon_sum = 0.0;
  for (std::size_t chunk = 0; chunk < batch_px; chunk += kFitChunk) {
    const std::size_t len = std::min(kFitChunk, batch_px - chunk);
    parallel_for(
        static_cast<std::int64_t>(len),
        [&](std::size_t j) {
          std::size_t clip_px;
          const auto pt = pixel_point(chunk + j, &clip_px);
          PixScratch<D>& s = scratch[j];
          Rgb pred;
          if constexpr (D == 4) {
            const SampleGradient ag = sample_grad(fused, pt);
            s.cw = ag.corners;
            s.de = ag.d_intensity;
            pred = ag.value;
          } else {
            const auto cpt = clamp_point(pt);
            s.cw = corner_weights(fused, locate(fused, cpt), cpt);
            pred = {0.0, 0.0, 0.0};
            for (int n = 0; n < CornerWeights<D>::kCorners; ++n) {
              const double cw = s.cw.coeff[static_cast<std::size_t>(n)];
              const double* vv = fused.values.data() + s.cw.offset[static_cast<std::size_t>(n)];
              pred[0] += cw * vv[0];
              pred[1] += cw * vv[1];
              pred[2] += cw * vv[2];
            }
          }
          const float* gt = clip.gt.data.data() + clip_px * 3;
          s.contrib = 0.0;
          for (int ch = 0; ch < 3; ++ch) {
            const double d = pred[static_cast<std::size_t>(ch)] - static_cast<double>(gt[ch]);
            const double r = std::sqrt(d * d + eps2);
            s.contrib += r;
            s.dout[static_cast<std::size_t>(ch)] = d / r * inv_nelem;
          }
        },
        cfg.workers);
    for (std::size_t j = 0; j < len; ++j) {
      const PixScratch<D>& s = scratch[j];
      recon_sum += s.contrib;
      for (int n = 0; n < CornerWeights<D>::kCorners; ++n) {
        const double cw = s.cw.coeff[static_cast<std::size_t>(n)];
        double* gdst = grad_fused.data() + s.cw.offset[static_cast<std::size_t>(n)];
        gdst[0] += s.dout[0] * cw;
        gdst[1] += s.dout[1] * cw;
        gdst[2] += s.dout[2] * cw;
      }
      if (want_e) {
        std::size_t clip_px;
        (void)pixel_point(chunk + j, &clip_px);
        grads->intensity[clip_px] =
            s.dout[0] * s.de[0] + s.dout[1] * s.de[1] + s.dout[2] * s.de[2];
      }
    }
  }
  out.recon = recon_sum * inv_nelem;

  std::vector<double> grad_smooth, grad_mono;
  out.smooth = lut_smoothness(fused, &grad_smooth, cfg.workers);
  out.mono = lut_monotonicity(fused, &grad_mono, cfg.workers);
  std::vector<double> grad_w;
  out.weight_term = weight_l2(w, &grad_w);
  out.total = total_loss(out.recon, out.smooth, out.mono, out.weight_term, cfg.loss);

  // Total gradient on the fused table, then the chain through the fusion:
  // d/d(basis_t) = w_t * d/d(fused); d/d(w_t) = <d/d(fused), basis_t>.
  const double as = cfg.loss.alpha_smooth;
  const double am = cfg.loss.alpha_mono;
  parallel_for(
      static_cast<std::int64_t>(grad_fused.size()),
      [&](std::size_t i) { grad_fused[i] += as * grad_smooth[i] + am * grad_mono[i]; },
      cfg.workers);

  grads->basis.assign(static_cast<std::size_t>(T), {});
  for (int t = 0; t < T; ++t) {
    auto& gb = grads->basis[static_cast<std::size_t>(t)];
    gb.resize(grad_fused.size());
    const double wt = w[static_cast<std::size_t>(t)];
    parallel_for(
        static_cast<std::int64_t>(grad_fused.size()),
        [&](std::size_t i) { gb[i] = wt * grad_fused[i]; }, cfg.workers);
  }
  grads->weights.resize(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    const double* bt = basis.values[static_cast<std::size_t>(t)].data();
    grads->weights[static_cast<std::size_t>(t)] =
        blocked_sum(
            static_cast<std::int64_t>(grad_fused.size()),
            [&](std::size_t i) { return grad_fused[i] * bt[i]; }, cfg.workers) +
        as * grad_w[static_cast<std::size_t>(t)];
  }
  return out;
}

template BatchLosses evaluate_fit_batch<4>(const BasisLutSet<4>&, std::span<const double>,
                                           const ClipPair&, std::span<const int>,
                                           const FitConfig&, std::span<const double>,
                                           BatchGrads<4>*);
template BatchLosses evaluate_fit_batch<3>(const BasisLutSet<3>&, std::span<const double>,
                                           const ClipPair&, std::span<const int>,
                                           const FitConfig&, std::span<const double>,
                                           BatchGrads<3>*);

namespace {

template <int D>
FitResult run_fit(std::span<const ClipPair> clips, const FitConfig& cfg) {
  const auto t_start = std::chrono::steady_clock::now();
  auto [basis, w0] = init_basis<D>(cfg.basis_count, cfg.grid_size);
  const std::size_t nclips = clips.size();
  const int T = cfg.basis_count;

  std::vector<std::vector<double>> weights(nclips, w0);
  std::vector<std::vector<double>> free_e(nclips);
  const bool free_mode = D == 4 && cfg.intensity == IntensityMode::Free;
  if (free_mode)
    for (std::size_t c = 0; c < nclips; ++c)
      free_e[c].assign(clips[c].low.pixel_count(), 0.5);

  // Hold out the last frame of each clip for the final report when there is
  // one to spare; free-mode intensities only exist for trained frames, so
  // that mode reports on the training frames instead.
  bool hold = !free_mode;
  for (const auto& clip : clips) hold = hold && clip.low.frames >= 2;
  std::vector<std::vector<int>> train_ids(nclips);
  for (std::size_t c = 0; c < nclips; ++c) {
    const int n = clips[c].low.frames - (hold ? 1 : 0);
    train_ids[c].resize(static_cast<std::size_t>(n));
    std::iota(train_ids[c].begin(), train_ids[c].end(), 0);
  }

  std::int64_t steps_per_epoch = 0;
  std::size_t max_chunks = 0;
  for (std::size_t c = 0; c < nclips; ++c) {
    const std::size_t nb =
        (train_ids[c].size() + static_cast<std::size_t>(cfg.batch_size) - 1) /
        static_cast<std::size_t>(cfg.batch_size);
    steps_per_epoch += static_cast<std::int64_t>(nb);
    max_chunks = std::max(max_chunks, nb);
  }
  const std::int64_t total_steps = steps_per_epoch * cfg.epochs;
  const std::int64_t cycles = cfg.restarts + 1;
  const std::int64_t cycle_len = (total_steps + cycles - 1) / cycles;

  std::vector<AdamState> basis_state;
  for (int t = 0; t < T; ++t) basis_state.emplace_back(basis.values[0].size());
  std::vector<AdamState> weight_state(nclips, AdamState(static_cast<std::size_t>(T)));
  std::vector<AdamState> e_state;
  if (free_mode)
    for (std::size_t c = 0; c < nclips; ++c) e_state.emplace_back(free_e[c].size());

  std::mt19937_64 rng(cfg.seed);
  FitReport report;
  std::int64_t gstep = 0;
  bool stopped = false;

  for (int epoch = 0; epoch < cfg.epochs && !stopped; ++epoch) {
    for (auto& ids : train_ids) std::shuffle(ids.begin(), ids.end(), rng);
    EpochStats acc;
    acc.epoch = epoch;
    int nbatches = 0;
    for (std::size_t chunk = 0; chunk < max_chunks && !stopped; ++chunk) {
      for (std::size_t c = 0; c < nclips && !stopped; ++c) {
        const std::size_t lo = chunk * static_cast<std::size_t>(cfg.batch_size);
        if (lo >= train_ids[c].size()) continue;
        const std::size_t hi =
            std::min(lo + static_cast<std::size_t>(cfg.batch_size), train_ids[c].size());
        const std::span<const int> batch(train_ids[c].data() + lo, hi - lo);
        const double lr =
            cosine_lr(std::min(gstep % cycle_len, cycle_len), cycle_len, cfg.lr, cfg.lr_min);

        BatchGrads<D> g;
        const BatchLosses losses = evaluate_fit_batch<D>(
            basis, weights[c], clips[c], batch, cfg,
            free_mode ? std::span<const double>(free_e[c]) : std::span<const double>(), &g);
        if (!std::isfinite(losses.total))
          throw NumericError("non-finite loss at step " + std::to_string(gstep));
        if (losses.total > 1e6) {
          report.diverged = true;
          report.note = "diverged at step " + std::to_string(gstep) + " (loss " +
                        std::to_string(losses.total) + ")";
          stopped = true;
          break;
        }

        for (int t = 0; t < T; ++t)
          adam_step(basis.values[static_cast<std::size_t>(t)],
                    g.basis[static_cast<std::size_t>(t)],
                    basis_state[static_cast<std::size_t>(t)], lr);
        adam_step(weights[c], g.weights, weight_state[c], lr);
        if (free_mode) {
          adam_step(free_e[c], g.intensity, e_state[c], lr);
          for (auto& e : free_e[c]) e = std::clamp(e, 0.0, 1.0);
        }

        acc.lr += lr;
        acc.total += losses.total;
        acc.recon += losses.recon;
        acc.smooth += losses.smooth;
        acc.mono += losses.mono;
        acc.weight_term += losses.weight_term;
        ++nbatches;
        ++gstep;
      }
    }
    if (nbatches > 0) {
      acc.lr /= nbatches;
      acc.total /= nbatches;
      acc.recon /= nbatches;
      acc.smooth /= nbatches;
      acc.mono /= nbatches;
      acc.weight_term /= nbatches;
      report.epochs.push_back(acc);
    }
  }

  // Final report: squared error of the clamped forward pass on the report
  // frames (the held-out tail, or the training frames when nothing is spare).
  double sq_sum = 0.0;
  std::size_t sq_count = 0;
  for (std::size_t c = 0; c < nclips; ++c) {
    const Lut<D> fused = fuse(basis, weights[c], cfg.workers);
    const std::size_t frame_px =
        static_cast<std::size_t>(clips[c].low.height) * clips[c].low.width;
    std::vector<int> eval_ids;
    if (hold)
      eval_ids.push_back(clips[c].low.frames - 1);
    else
      eval_ids = train_ids[c];
    for (const int f : eval_ids) {
      sq_sum += blocked_sum(
          static_cast<std::int64_t>(frame_px),
          [&](std::size_t k) {
            const std::size_t clip_px = static_cast<std::size_t>(f) * frame_px + k;
            const float* low = clips[c].low.data.data() + clip_px * 3;
            Point<D> pt;
            pt[0] = low[0];
            pt[1] = low[1];
            pt[2] = low[2];
            if constexpr (D == 4)
              pt[3] = pixel_intensity<D>(cfg, clips[c],
                                         free_mode ? std::span<const double>(free_e[c])
                                                   : std::span<const double>(),
                                         clip_px, low);
            const Rgb pred = sample(fused, pt);
            const float* gt = clips[c].gt.data.data() + clip_px * 3;
            double s = 0.0;
            for (int ch = 0; ch < 3; ++ch) {
              const double d = pred[static_cast<std::size_t>(ch)] - static_cast<double>(gt[ch]);
              s += d * d;
            }
            return s;
          },
          cfg.workers);
      sq_count += frame_px * 3;
    }
  }
  report.final_mse = sq_count ? sq_sum / static_cast<double>(sq_count) : 0.0;
  report.final_psnr =
      report.final_mse <= 0.0 ? 99.0
                              : std::min(99.0, 10.0 * std::log10(1.0 / report.final_mse));
  report.held_out = hold;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

  FitResult res;
  res.basis = std::move(basis);
  res.weights = std::move(weights);
  if (free_mode) {
    for (std::size_t c = 0; c < nclips; ++c) {
      IntensityMap m = IntensityMap::filled(clips[c].low.frames, clips[c].low.height,
                                            clips[c].low.width, 0.0f);
      for (std::size_t i = 0; i < m.data.size(); ++i)
        m.data[i] = static_cast<float>(free_e[c][i]);
      res.intensity.push_back(std::move(m));
    }
  }
  res.report = std::move(report);
  return res;
}

}  // namespace

FitResult fit(std::span<const ClipPair> clips, const FitConfig& cfg) {
  cfg.validate();
  if (clips.empty()) throw FormatError("empty dataset");
  for (const auto& clip : clips) {
    if (clip.low.data.empty()) throw ShapeError("zero-size video");
    if (!clip.low.same_shape(clip.gt)) throw ShapeError("paired clips disagree in shape");
    if (!cfg.fit_3d && cfg.intensity == IntensityMode::Provided &&
        (!clip.intensity || !clip.intensity->matches(clip.low)))
      throw ShapeError("provided intensity map missing or mismatched");
  }
  if (cfg.fit_3d) return run_fit<3>(clips, cfg);
  return run_fit<4>(clips, cfg);
}

IaLut4 FitResult::fused4(int clip) const {
  if (!std::holds_alternative<BasisSet4>(basis))
    throw FormatError("fit ran in 3D ablation mode; no 4D table available");
  return fuse(std::get<BasisSet4>(basis), weights[static_cast<std::size_t>(clip)]);
}

Lut3 FitResult::fused3(int clip) const {
  if (!std::holds_alternative<BasisSet3>(basis))
    throw FormatError("fit ran in 4D mode; no 3D table available");
  return fuse(std::get<BasisSet3>(basis), weights[static_cast<std::size_t>(clip)]);
}

void FitReport::write(std::ostream& os) const {
  char buf[256];
  for (const auto& e : epochs) {
    std::snprintf(buf, sizeof buf,
                  "epoch %d lr %.9g total %.9g recon %.9g smooth %.9g mono %.9g weights %.9g\n",
                  e.epoch, e.lr, e.total, e.recon, e.smooth, e.mono, e.weight_term);
    os << buf;
  }
  std::snprintf(buf, sizeof buf, "final_mse %.9g\nfinal_psnr %.4f\nheld_out %d\n", final_mse,
                final_psnr, held_out ? 1 : 0);
  os << buf;
  if (diverged) os << "diverged 1\nnote " << note << "\n";
  std::snprintf(buf, sizeof buf, "wall_seconds %.3f\n", wall_seconds);
  os << buf;
}

OneToManyClip gen_one_to_many(int height, int width, int frames, Rgb input_color, Rgb target_a,
                              Rgb target_b, std::uint64_t seed) {
  (void)seed;  // reserved for optional noise; generation is deterministic
  for (const Rgb& c : {input_color, target_a, target_b})
    for (const double v : c)
      if (!(v >= 0.0 && v <= 1.0)) throw FormatError("colors must lie in [0,1]");
  OneToManyClip clip;
  clip.low = VideoTensor::zeros(frames, height, width);
  clip.gt = VideoTensor::zeros(frames, height, width);
  clip.intensity = IntensityMap::filled(frames, height, width, 0.0f);
  const int half = width / 2;
  for (int n = 0; n < frames; ++n)
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        float* lo = clip.low.pixel(n, y, x);
        float* gt = clip.gt.pixel(n, y, x);
        const Rgb& t = x < half ? target_a : target_b;
        for (int ch = 0; ch < 3; ++ch) {
          lo[ch] = static_cast<float>(input_color[static_cast<std::size_t>(ch)]);
          gt[ch] = static_cast<float>(t[static_cast<std::size_t>(ch)]);
        }
        clip.intensity.at(n, y, x) = x < half ? 0.0f : 1.0f;
      }
  return clip;
}

}  // namespace ialut
