#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>

#include "ialut/errors.hpp"
#include "ialut/media_io.hpp"
#include "ialut/metrics.hpp"
#include "ialut/optimize.hpp"
#include "ialut/pipeline.hpp"

namespace fs = std::filesystem;
using namespace ialut;

namespace {

FrameFormat detect_frame_format(const fs::path& dir) {
  if (fs::exists(dir / "frame_000000.ppm")) return FrameFormat::Ppm8;
  return FrameFormat::FloatRaw;
}

IaLut4 load_lut4(const fs::path& path) {
  AnyLut lut = read_lut(path);
  if (!std::holds_alternative<IaLut4>(lut))
    throw FormatError("need a 4D lut: " + path.string());
  return std::move(std::get<IaLut4>(lut));
}

int run_apply(const std::string& lut_path, const std::string& frames_dir,
              const std::string& intensity_spec, const std::string& out_dir,
              const std::string& denoise_cmd, int workers) {
  const IaLut4 lut = load_lut4(lut_path);
  const VideoTensor video = read_frames(frames_dir);
  const IntensitySource src = IntensitySource::parse(intensity_spec);
  IntensityMap imap;
  if (src.kind == IntensitySource::Kind::File) {
    imap = read_intensity(src.path);
    if (!imap.matches(video)) throw ShapeError("intensity map does not match video shape");
  } else {
    imap = make_intensity(video, src);
  }
  VideoTensor out = transform_video(lut, video, imap, workers);
  out = denoise_hook(out, denoise_cmd);
  write_frames(out, out_dir, detect_frame_format(frames_dir));
  return 0;
}

int run_fit_cmd(const std::string& low_dir, const std::string& gt_dir,
                const std::string& intensity_spec, const std::string& out_path, FitConfig cfg) {
  ClipPair clip{};
  clip.low = read_frames(low_dir);
  clip.gt = read_frames(gt_dir);
  if (intensity_spec == "free") {
    cfg.intensity = IntensityMode::Free;
  } else {
    const IntensitySource src = IntensitySource::parse(intensity_spec);
    switch (src.kind) {
      case IntensitySource::Kind::Constant:
        cfg.intensity = IntensityMode::Constant;
        cfg.intensity_constant = src.value;
        break;
      case IntensitySource::Kind::Luma:
        cfg.intensity = IntensityMode::Luma;
        break;
      case IntensitySource::Kind::File:
        cfg.intensity = IntensityMode::Provided;
        clip.intensity = read_intensity(src.path);
        break;
    }
  }
  std::vector<ClipPair> owned;
  owned.push_back(std::move(clip));
  const FitResult res = fit(owned, cfg);
  res.report.write(std::cout);
  if (res.report.diverged) return 4;
  if (cfg.fit_3d) {
    write_lut(res.fused3(0), out_path, LutEncoding::Binary);
  } else {
    write_lut(res.fused4(0), out_path, LutEncoding::Binary);
    write_basis(std::get<BasisSet4>(res.basis), res.weights[0], out_path + ".basis");
    if (cfg.intensity == IntensityMode::Free)
      write_intensity(res.intensity[0], out_path + ".intensity", FrameFormat::FloatRaw);
  }
  return 0;
}

int run_metrics(const std::string& pred_dir, const std::string& gt_dir,
                const std::string& format) {
  const VideoTensor pred = read_frames(pred_dir);
  const VideoTensor gt = read_frames(gt_dir);
  const double v_psnr = psnr(pred, gt);
  const double v_ssim = ssim(pred, gt);
  const double v_abvar = ab_var(pred, gt);
  const double v_mabd = mabd(pred, gt);
  double md_pred = 0.0, md_gt = 0.0;
  const std::vector<VideoTensor> vp{pred}, vg{gt};
  for (int p = 0; p + 1 < pred.frames; ++p) {
    md_pred += md_ab(vp, p);
    md_gt += md_ab(vg, p);
  }
  md_pred /= pred.frames - 1;
  md_gt /= pred.frames - 1;

  char buf[512];
  if (format == "kv") {
    std::snprintf(buf, sizeof buf,
                  "psnr=%.9g\nssim=%.9g\nab_var=%.9g\nmabd=%.9g\nmd_ab_pred=%.9g\nmd_ab_gt=%.9g\n",
                  v_psnr, v_ssim, v_abvar, v_mabd, md_pred, md_gt);
  } else {
    std::snprintf(buf, sizeof buf,
                  "PSNR (dB)   %10.4f\nSSIM        %10.6f\nAB(Var)x1e3 %10.6f\nMABD x1e3   "
                  "%10.6f\nMD-AB pred  %10.6f\nMD-AB gt    %10.6f\n",
                  v_psnr, v_ssim, v_abvar, v_mabd, md_pred, md_gt);
  }
  std::cout << buf;
  return 0;
}

int run_slice(const std::string& lut_path, double e, const std::string& out_path) {
  if (!(e >= 0.0 && e <= 1.0)) throw FormatError("slice intensity must lie in [0,1]");
  const IaLut4 lut = load_lut4(lut_path);
  const int L = lut.size();
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(L))));
  const int rows = (L + cols - 1) / cols;
  const int W = cols * L;
  const int H = rows * L;
  std::vector<unsigned char> img(static_cast<std::size_t>(W) * H * 3, 0);
  for (int k = 0; k < L; ++k) {
    const int tx = (k % cols) * L;
    const int ty = (k / cols) * L;
    for (int j = 0; j < L; ++j)
      for (int i = 0; i < L; ++i) {
        const Rgb c = sample(lut, {lut.grids[0][i], lut.grids[1][j], lut.grids[2][k], e});
        unsigned char* px =
            img.data() + 3 * (static_cast<std::size_t>(ty + j) * W + (tx + i));
        for (int ch = 0; ch < 3; ++ch)
          px[ch] = static_cast<unsigned char>(
              std::clamp(c[static_cast<std::size_t>(ch)], 0.0, 1.0) * 255.0 + 0.5);
      }
  }
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + out_path);
  out << "P6\n" << W << " " << H << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data()), static_cast<std::streamsize>(img.size()));
  if (!out) throw FormatError("cannot write " + out_path);
  return 0;
}

int run_bench(const std::string& size, int frames, int workers, std::uint64_t seed) {
  int w = 0, h = 0;
  if (std::sscanf(size.c_str(), "%dx%d", &w, &h) != 2 || w <= 0 || h <= 0)
    throw FormatError("bad --size, expected WxH");
  const ThroughputReport rep = bench_transform(w, h, frames, workers, seed);
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "size %dx%d frames %d workers %d passes %d spf %.6f fps %.3f\n", rep.width,
                rep.height, rep.frames, rep.workers, rep.passes, rep.seconds_per_frame, rep.fps);
  std::cout << buf;
  return 0;
}

bool sniff_text_lut(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open lut " + path.string());
  char head[9] = {};
  in.read(head, 9);
  return in.gcount() == 9 && head[8] == '\n';
}

int run_lutconv(const std::string& in_path, const std::string& out_path, std::string to) {
  if (to.empty()) to = sniff_text_lut(in_path) ? "binary" : "text";
  if (to != "text" && to != "binary") throw FormatError("bad --to, expected text or binary");
  const LutEncoding enc = to == "text" ? LutEncoding::Text : LutEncoding::Binary;
  const AnyLut lut = read_lut(in_path);
  std::visit([&](const auto& l) { write_lut(l, out_path, enc); }, lut);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"intensity-aware 4D LUT engine for low-light video enhancement"};
  app.require_subcommand(1);
  int rc = 0;

  // apply
  auto* apply_cmd = app.add_subcommand("apply", "transform frames through a 4D LUT");
  std::string a_lut, a_frames, a_out, a_intensity = "luma", a_denoise;
  int a_workers = 0;
  apply_cmd->add_option("--lut", a_lut, "LUT file")->required();
  apply_cmd->add_option("--frames", a_frames, "input frame directory")->required();
  apply_cmd->add_option("--out", a_out, "output frame directory")->required();
  apply_cmd->add_option("--intensity", a_intensity, "constant:C | luma | file:PATH");
  apply_cmd->add_option("--denoise", a_denoise, "external denoiser command");
  apply_cmd->add_option("--workers", a_workers, "worker count (0 = all cores)");
  apply_cmd->callback(
      [&] { rc = run_apply(a_lut, a_frames, a_intensity, a_out, a_denoise, a_workers); });

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "fit basis LUTs to a paired clip");
  fit_cmd->option_defaults()->always_capture_default();
  std::string f_low, f_gt, f_out, f_intensity = "luma";
  FitConfig cfg;
  fit_cmd->add_option("--low", f_low, "low-light frame directory")->required();
  fit_cmd->add_option("--gt", f_gt, "ground-truth frame directory")->required();
  fit_cmd->add_option("--out", f_out, "output LUT path")->required();
  fit_cmd->add_option("--intensity", f_intensity, "constant:C | luma | file:PATH | free");
  fit_cmd->add_option("--grid", cfg.grid_size, "grid points per axis");
  fit_cmd->add_option("--basis", cfg.basis_count, "basis table count");
  fit_cmd->add_option("--epochs", cfg.epochs, "training epochs");
  fit_cmd->add_option("--batch", cfg.batch_size, "frames per step");
  fit_cmd->add_option("--lr", cfg.lr, "initial learning rate");
  fit_cmd->add_option("--min-lr", cfg.lr_min, "cosine annealing floor");
  fit_cmd->add_option("--restarts", cfg.restarts, "extra cosine cycles");
  fit_cmd->add_option("--alpha-s", cfg.loss.alpha_smooth, "smoothness weight");
  fit_cmd->add_option("--alpha-m", cfg.loss.alpha_mono, "monotonicity weight");
  fit_cmd->add_option("--charb-eps", cfg.loss.charbonnier_eps, "reconstruction loss knee");
  fit_cmd->add_flag("--fit-3d", cfg.fit_3d, "ablation: fit a plain color cube");
  fit_cmd->add_option("--seed", cfg.seed, "shuffle seed");
  fit_cmd->add_option("--workers", cfg.workers, "worker count (0 = all cores)");
  fit_cmd->callback([&] { rc = run_fit_cmd(f_low, f_gt, f_intensity, f_out, cfg); });

  // metrics
  auto* met_cmd = app.add_subcommand("metrics", "quality and brightness-consistency metrics");
  std::string m_pred, m_gt, m_format = "text";
  met_cmd->add_option("--pred", m_pred, "prediction frame directory")->required();
  met_cmd->add_option("--gt", m_gt, "ground-truth frame directory")->required();
  met_cmd->add_option("--format", m_format, "text | kv");
  met_cmd->callback([&] { rc = run_metrics(m_pred, m_gt, m_format); });

  // slice
  auto* slice_cmd = app.add_subcommand("slice", "render one intensity slice as an image grid");
  std::string s_lut, s_out;
  double s_e = 0.0;
  slice_cmd->add_option("--lut", s_lut, "LUT file")->required();
  slice_cmd->add_option("--e", s_e, "intensity in [0,1]")->required();
  slice_cmd->add_option("--out", s_out, "output PPM path")->required();
  slice_cmd->callback([&] { rc = run_slice(s_lut, s_e, s_out); });

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "transform throughput on synthetic frames");
  std::string b_size = "1920x1080";
  int b_frames = 4, b_workers = 0;
  std::uint64_t b_seed = 0;
  bench_cmd->add_option("--size", b_size, "frame size WxH");
  bench_cmd->add_option("--frames", b_frames, "frame count");
  bench_cmd->add_option("--workers", b_workers, "worker count (0 = all cores)");
  bench_cmd->add_option("--seed", b_seed, "data seed");
  bench_cmd->callback([&] { rc = run_bench(b_size, b_frames, b_workers, b_seed); });

  // lutconv
  auto* conv_cmd = app.add_subcommand("lutconv", "convert a LUT between text and binary");
  std::string c_in, c_out, c_to;
  conv_cmd->add_option("--in", c_in, "input LUT")->required();
  conv_cmd->add_option("--out", c_out, "output LUT")->required();
  conv_cmd->add_option("--to", c_to, "text | binary (default: the other encoding)");
  conv_cmd->callback([&] { rc = run_lutconv(c_in, c_out, c_to); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ShapeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return rc;
}
