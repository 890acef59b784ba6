#include "ialut/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <random>
#include <thread>
#include <vector>

#include <csignal>
#include <cstring>
#include <sys/wait.h>
#include <unistd.h>

#include "ialut/errors.hpp"
#include "ialut/metrics.hpp"
#include "ialut/parallel.hpp"

namespace ialut {

IntensitySource IntensitySource::constant(double v) {
  if (!(v >= 0.0 && v <= 1.0)) throw FormatError("constant intensity must lie in [0,1]");
  return {Kind::Constant, v, {}};
}

IntensitySource IntensitySource::from_file(std::filesystem::path p) {
  return {Kind::File, 0.0, std::move(p)};
}

IntensitySource IntensitySource::parse(const std::string& text) {
  if (text == "luma") return luma();
  if (text.rfind("constant:", 0) == 0) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text.substr(9), &used);
    } catch (const std::exception&) {
      throw FormatError("bad intensity spec: " + text);
    }
    if (used != text.size() - 9) throw FormatError("bad intensity spec: " + text);
    return constant(v);
  }
  if (text.rfind("file:", 0) == 0 && text.size() > 5) return from_file(text.substr(5));
  throw FormatError("bad intensity spec: " + text);
}

IntensityMap make_intensity(const VideoTensor& v, const IntensitySource& src) {
  if (v.data.empty()) throw ShapeError("zero-size video");
  switch (src.kind) {
    case IntensitySource::Kind::Constant:
      return IntensityMap::filled(v.frames, v.height, v.width, static_cast<float>(src.value));
    case IntensitySource::Kind::Luma: {
      IntensityMap m = IntensityMap::filled(v.frames, v.height, v.width, 0.0f);
      parallel_for(static_cast<std::int64_t>(v.pixel_count()), [&](std::size_t i) {
        const float* p = v.data.data() + 3 * i;
        const double y = luminance(p[0], p[1], p[2]);
        m.data[i] = static_cast<float>(std::clamp(1.0 - y, 0.0, 1.0));
      });
      return m;
    }
    case IntensitySource::Kind::File:
      // Resolved by the caller (media_io) so this module stays I/O-free.
      throw FormatError("file intensity source must be loaded before make_intensity");
  }
  throw FormatError("bad intensity source");
}

namespace {

// Exceptions must not escape the OpenMP loops below, so inputs are screened
// for non-finite samples up front and the hot path never throws.
void require_finite(const VideoTensor& v, const IntensityMap& imap, int workers) {
  std::atomic<bool> bad{false};
  parallel_for(
      static_cast<std::int64_t>(v.pixel_count()),
      [&](std::size_t i) {
        const float* p = v.data.data() + 3 * i;
        if (!std::isfinite(p[0]) || !std::isfinite(p[1]) || !std::isfinite(p[2]) ||
            !std::isfinite(imap.data[i]))
          bad.store(true, std::memory_order_relaxed);
      },
      workers);
  if (bad.load()) throw NumericError("non-finite input sample");
}

inline void transform_pixel(const IaLut4& lut, const float* in, float e, float* out) {
  const Rgb rgb = sample(lut, {static_cast<double>(in[0]), static_cast<double>(in[1]),
                              static_cast<double>(in[2]), static_cast<double>(e)});
  out[0] = static_cast<float>(rgb[0]);
  out[1] = static_cast<float>(rgb[1]);
  out[2] = static_cast<float>(rgb[2]);
}

}  // namespace

VideoTensor transform_video(const IaLut4& lut, const VideoTensor& v, const IntensityMap& imap,
                            int workers) {
  validate_lut(lut);
  if (!imap.matches(v)) throw ShapeError("intensity map does not match video shape");
  const int w = resolve_workers(workers);
  require_finite(v, imap, w);
  VideoTensor out = VideoTensor::zeros(v.frames, v.height, v.width);
  const std::int64_t rows = static_cast<std::int64_t>(v.frames) * v.height;
#pragma omp parallel for schedule(static) num_threads(w)
  for (std::int64_t row = 0; row < rows; ++row) {
    const std::size_t px0 = static_cast<std::size_t>(row) * v.width;
    const float* in = v.data.data() + px0 * 3;
    const float* e = imap.data.data() + px0;
    float* dst = out.data.data() + px0 * 3;
    for (int x = 0; x < v.width; ++x)
      transform_pixel(lut, in + 3 * x, e[x], dst + 3 * x);
  }
  return out;
}

VideoTensor transform_video_serial(const IaLut4& lut, const VideoTensor& v,
                                   const IntensityMap& imap) {
  validate_lut(lut);
  if (!imap.matches(v)) throw ShapeError("intensity map does not match video shape");
  VideoTensor out = VideoTensor::zeros(v.frames, v.height, v.width);
  for (std::size_t i = 0; i < v.pixel_count(); ++i)
    transform_pixel(lut, v.data.data() + 3 * i, imap.data[i], out.data.data() + 3 * i);
  return out;
}

/* ---- denoiser hand-off ---- */

namespace {

void write_all(int fd, const char* data, std::size_t n) {
  while (n > 0) {
    const ssize_t k = ::write(fd, data, n);
    if (k < 0) {
      if (errno == EINTR) continue;
      return;  // child died; the exit-status check reports it
    }
    data += k;
    n -= static_cast<std::size_t>(k);
  }
}

std::string read_all(int fd) {
  std::string out;
  char buf[1 << 16];
  for (;;) {
    const ssize_t k = ::read(fd, buf, sizeof buf);
    if (k < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (k == 0) break;
    out.append(buf, static_cast<std::size_t>(k));
  }
  return out;
}

}  // namespace

VideoTensor denoise_hook(const VideoTensor& v, const std::string& command) {
  if (command.empty()) return v;
  if (v.data.empty()) throw ShapeError("zero-size video");

  std::signal(SIGPIPE, SIG_IGN);
  int to_child[2], from_child[2];
  if (pipe(to_child) != 0 || pipe(from_child) != 0)
    throw FormatError("denoiser pipe setup failed");
  const pid_t pid = fork();
  if (pid < 0) throw FormatError("denoiser fork failed");
  if (pid == 0) {
    dup2(to_child[0], 0);
    dup2(from_child[1], 1);
    close(to_child[0]);
    close(to_child[1]);
    close(from_child[0]);
    close(from_child[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(to_child[0]);
  close(from_child[1]);

  // Dimensions line, then interleaved->planar float32 frames.
  std::string payload = std::to_string(v.width) + " " + std::to_string(v.height) + " " +
                        std::to_string(v.frames) + "\n";
  const std::size_t npx = static_cast<std::size_t>(v.height) * v.width;
  std::vector<float> plane(npx);
  for (int n = 0; n < v.frames; ++n)
    for (int pl = 0; pl < 3; ++pl) {
      const float* src = v.pixel(n, 0, 0);
      for (std::size_t i = 0; i < npx; ++i) plane[i] = src[3 * i + static_cast<std::size_t>(pl)];
      payload.append(reinterpret_cast<const char*>(plane.data()), npx * 4);
    }

  std::thread writer([&] {
    write_all(to_child[1], payload.data(), payload.size());
    close(to_child[1]);
  });
  const std::string reply = read_all(from_child[0]);
  close(from_child[0]);
  writer.join();

  int status = 0;
  waitpid(pid, &status, 0);
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
    throw FormatError("denoiser command failed");

  const auto nl = reply.find('\n');
  if (nl == std::string::npos) throw FormatError("denoiser protocol error: missing header");
  int w = 0, h = 0, n = 0;
  if (std::sscanf(reply.c_str(), "%d %d %d", &w, &h, &n) != 3)
    throw FormatError("denoiser protocol error: bad header");
  if (w != v.width || h != v.height || n != v.frames)
    throw ShapeError("denoiser shape mismatch");
  const std::size_t want = static_cast<std::size_t>(n) * npx * 3 * 4;
  if (reply.size() - nl - 1 != want) throw ShapeError("denoiser shape mismatch");

  VideoTensor out = VideoTensor::zeros(v.frames, v.height, v.width);
  const char* cur = reply.data() + nl + 1;
  for (int f = 0; f < v.frames; ++f)
    for (int pl = 0; pl < 3; ++pl) {
      float* dst = out.pixel(f, 0, 0);
      std::memcpy(plane.data(), cur, npx * 4);
      cur += npx * 4;
      for (std::size_t i = 0; i < npx; ++i) dst[3 * i + static_cast<std::size_t>(pl)] = plane[i];
    }
  return out;
}

/* ---- throughput ---- */

ThroughputReport bench_transform(int width, int height, int frames, int workers,
                                 std::uint64_t seed) {
  if (width <= 0 || height <= 0 || frames <= 0) throw ShapeError("zero-size video");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> uf(0.0f, 1.0f);

  VideoTensor v = VideoTensor::zeros(frames, height, width);
  for (auto& x : v.data) x = uf(rng);
  IntensityMap m = IntensityMap::filled(frames, height, width, 0.0f);
  for (auto& x : m.data) x = uf(rng);

  IaLut4 lut = identity_lut<4>(33);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  for (auto& x : lut.values) x = ud(rng);

  ThroughputReport rep;
  rep.width = width;
  rep.height = height;
  rep.frames = frames;
  rep.workers = resolve_workers(workers);

  using clock = std::chrono::steady_clock;
  (void)transform_video(lut, v, m, workers);  // warm-up pass
  const auto t0 = clock::now();
  (void)transform_video(lut, v, m, workers);
  double first = std::chrono::duration<double>(clock::now() - t0).count();
  int passes = 1;
  if (first < 0.5) {
    passes = std::clamp(static_cast<int>(std::ceil(0.5 / std::max(first / 1, 1e-4))), 2, 50);
    const auto t1 = clock::now();
    for (int r = 0; r < passes; ++r) (void)transform_video(lut, v, m, workers);
    first = std::chrono::duration<double>(clock::now() - t1).count();
  }
  rep.passes = passes;
  rep.seconds_per_frame = first / (static_cast<double>(passes) * frames);
  rep.fps = 1.0 / rep.seconds_per_frame;
  return rep;
}

}  // namespace ialut
