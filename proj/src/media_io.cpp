#include "ialut/media_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "ialut/errors.hpp"

namespace ialut {

namespace fs = std::filesystem;

namespace {

/* ---- little-endian byte plumbing (host-order independent) ---- */

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8 & 0xff));
  out.push_back(static_cast<char>(v >> 16 & 0xff));
  out.push_back(static_cast<char>(v >> 24 & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  put_u32(out, static_cast<std::uint32_t>(v & 0xffffffffu));
  put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

void put_f32(std::string& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }
void put_f64(std::string& out, double f) { put_u64(out, std::bit_cast<std::uint64_t>(f)); }

struct Cursor {
  const std::string& buf;
  std::size_t pos = 0;
  std::string what;  // for error messages

  void need(std::size_t n) const {
    if (pos + n > buf.size()) throw FormatError("truncated " + what);
  }
  std::uint32_t u32() {
    need(4);
    const auto* p = reinterpret_cast<const unsigned char*>(buf.data() + pos);
    pos += 4;
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
  }
  std::uint64_t u64() {
    const std::uint64_t lo = u32();
    return lo | static_cast<std::uint64_t>(u32()) << 32;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = buf.substr(pos, n);
    pos += n;
    return s;
  }
  bool done() const { return pos == buf.size(); }
};

std::string slurp(const fs::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(std::string("cannot open ") + what + " " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void spill(const fs::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw FormatError("cannot write " + path.string());
}

std::string frame_name(int index, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%06d.%s", index, ext);
  return buf;
}

/* ---- PPM / PGM ---- */

// Header token reader: whitespace-separated, '#' comments to end of line.
int netpbm_int(Cursor& c) {
  for (;;) {
    c.need(1);
    const char ch = c.buf[c.pos];
    if (ch == '#') {
      while (c.pos < c.buf.size() && c.buf[c.pos] != '\n') ++c.pos;
    } else if (std::isspace(static_cast<unsigned char>(ch))) {
      ++c.pos;
    } else {
      break;
    }
  }
  int v = 0;
  bool any = false;
  while (c.pos < c.buf.size() && std::isdigit(static_cast<unsigned char>(c.buf[c.pos]))) {
    v = v * 10 + (c.buf[c.pos] - '0');
    ++c.pos;
    any = true;
    if (v > 1 << 26) throw FormatError("malformed header in " + c.what);
  }
  if (!any) throw FormatError("malformed header in " + c.what);
  return v;
}

struct PnmImage {
  int width = 0, height = 0, channels = 0;
  std::string payload;  // raw 8-bit samples
};

PnmImage read_pnm(const fs::path& path) {
  PnmImage img;
  const std::string data = slurp(path, "frame");
  Cursor c{data, 0, "frame " + path.string()};
  const std::string magic = c.bytes(2);
  if (magic == "P6")
    img.channels = 3;
  else if (magic == "P5")
    img.channels = 1;
  else
    throw FormatError("malformed header in frame " + path.string());
  img.width = netpbm_int(c);
  img.height = netpbm_int(c);
  const int maxval = netpbm_int(c);
  if (img.width <= 0 || img.height <= 0 || maxval != 255)
    throw FormatError("malformed header in frame " + path.string());
  c.need(1);
  ++c.pos;  // single whitespace after maxval
  img.payload = c.bytes(static_cast<std::size_t>(img.width) * img.height * img.channels);
  return img;
}

std::uint8_t quantize8(float v) {
  const float x = std::clamp(v, 0.0f, 1.0f);
  return static_cast<std::uint8_t>(x * 255.0f + 0.5f);  // round half up
}

void write_pnm(const fs::path& path, int w, int h, int channels, const float* samples) {
  std::string out = channels == 3 ? "P6\n" : "P5\n";
  out += std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  const std::size_t n = static_cast<std::size_t>(w) * h * channels;
  out.reserve(out.size() + n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(static_cast<char>(quantize8(samples[i])));
  spill(path, out);
}

/* ---- float-raw frames + dims sidecar ---- */

struct RawDims {
  int width = 0, height = 0, frames = 0;
};

RawDims read_dims(const fs::path& dir) {
  const std::string data = slurp(dir / "dims.txt", "dimensions sidecar");
  std::istringstream ss(data);
  RawDims d;
  if (!(ss >> d.width >> d.height >> d.frames) || d.width <= 0 || d.height <= 0 || d.frames <= 0)
    throw FormatError("malformed dimensions sidecar in " + dir.string());
  return d;
}

void write_dims(const fs::path& dir, int w, int h, int n) {
  spill(dir / "dims.txt", std::to_string(w) + " " + std::to_string(h) + " " + std::to_string(n) + "\n");
}

// One raw frame: `planes` H*W float32 planes. Interleaves into dst on read.
void read_raw_frame(const fs::path& path, int w, int h, int planes, float* dst) {
  const std::string data = slurp(path, "frame");
  const std::size_t npx = static_cast<std::size_t>(w) * h;
  if (data.size() != npx * static_cast<std::size_t>(planes) * 4)
    throw FormatError("truncated frame " + path.string());
  Cursor c{data, 0, "frame " + path.string()};
  for (int pl = 0; pl < planes; ++pl)
    for (std::size_t i = 0; i < npx; ++i) {
      const float v = c.f32();
      if (!std::isfinite(v)) throw FormatError("non-finite sample in frame " + path.string());
      dst[i * static_cast<std::size_t>(planes) + static_cast<std::size_t>(pl)] = v;
    }
}

void write_raw_frame(const fs::path& path, int w, int h, int planes, const float* src) {
  const std::size_t npx = static_cast<std::size_t>(w) * h;
  std::string out;
  out.reserve(npx * static_cast<std::size_t>(planes) * 4);
  for (int pl = 0; pl < planes; ++pl)
    for (std::size_t i = 0; i < npx; ++i)
      put_f32(out, src[i * static_cast<std::size_t>(planes) + static_cast<std::size_t>(pl)]);
  spill(path, out);
}

/* ---- LUT blocks (shared by files and the basis container) ---- */

constexpr char kMagic4[] = "IALUT4D1";
constexpr char kMagic3[] = "IALUT3D1";
constexpr char kMagicBasis[] = "IALUTBS1";
constexpr char kMagicWeights[] = "IALUTWT1";

template <int D>
void put_lut_block(std::string& out, const Lut<D>& lut) {
  validate_lut(lut);
  out.append(D == 4 ? kMagic4 : kMagic3, 8);
  put_u32(out, static_cast<std::uint32_t>(lut.size()));
  put_u32(out, 0);  // flags, reserved
  for (const auto& g : lut.grids)
    for (const double p : g.points()) put_f32(out, static_cast<float>(p));
  for (const double v : lut.values)
    put_f32(out, static_cast<float>(std::clamp(v, 0.0, 1.0)));
}

template <int D>
Lut<D> get_lut_block(Cursor& c) {
  const std::uint32_t L = c.u32();
  c.u32();  // flags
  if (L < 2 || L > 4096) throw FormatError("bad grid size in " + c.what);
  Lut<D> lut;
  for (int a = 0; a < D; ++a) {
    std::vector<double> pts(L);
    for (auto& p : pts) p = static_cast<double>(c.f32());
    lut.grids[static_cast<std::size_t>(a)] = Grid1D(std::move(pts));  // throws "grid not increasing"
  }
  std::size_t npts = 1;
  for (int a = 0; a < D; ++a) npts *= L;
  lut.values.resize(npts * kChannels);
  for (auto& v : lut.values) {
    v = static_cast<double>(c.f32());
    if (!std::isfinite(v)) throw FormatError("non-finite value in " + c.what);
  }
  return lut;
}

bool looks_text(const std::string& data) {
  // Binary files carry the magic followed by raw bytes; text files have the
  // magic as the whole first line.
  const auto nl = data.find('\n');
  if (nl == std::string::npos) return false;
  std::string first = data.substr(0, nl);
  if (!first.empty() && first.back() == '\r') first.pop_back();
  return first == kMagic4 || first == kMagic3;
}

std::string fmt8(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.8f", v);
  return buf;
}

template <int D>
std::string lut_text(const Lut<D>& lut) {
  validate_lut(lut);
  std::string out = (D == 4 ? kMagic4 : kMagic3);
  out += "\n" + std::to_string(lut.size()) + "\n";
  for (const auto& g : lut.grids) {
    for (int i = 0; i < g.size(); ++i) {
      if (i) out += ' ';
      out += fmt8(g[i]);
    }
    out += '\n';
  }
  const std::size_t npts = lut.grid_point_count();
  for (std::size_t gp = 0; gp < npts; ++gp) {
    const double* v = lut.values.data() + gp * kChannels;
    out += fmt8(std::clamp(v[0], 0.0, 1.0));
    out += ' ';
    out += fmt8(std::clamp(v[1], 0.0, 1.0));
    out += ' ';
    out += fmt8(std::clamp(v[2], 0.0, 1.0));
    out += '\n';
  }
  return out;
}

template <int D>
Lut<D> lut_from_text(std::istringstream& ss, const std::string& what) {
  int L = 0;
  if (!(ss >> L) || L < 2 || L > 4096) throw FormatError("bad grid size in " + what);
  Lut<D> lut;
  for (int a = 0; a < D; ++a) {
    std::vector<double> pts(static_cast<std::size_t>(L));
    for (auto& p : pts)
      if (!(ss >> p)) throw FormatError("truncated " + what);
    lut.grids[static_cast<std::size_t>(a)] = Grid1D(std::move(pts));
  }
  std::size_t npts = 1;
  for (int a = 0; a < D; ++a) npts *= static_cast<std::size_t>(L);
  lut.values.resize(npts * kChannels);
  for (auto& v : lut.values) {
    if (!(ss >> v)) throw FormatError("truncated " + what);
    if (!std::isfinite(v)) throw FormatError("non-finite value in " + what);
  }
  double extra;
  if (ss >> extra) throw FormatError("trailing data in " + what);
  return lut;
}

template <int D>
void write_lut_impl(const Lut<D>& lut, const fs::path& path, LutEncoding enc) {
  if (enc == LutEncoding::Text) {
    spill(path, lut_text(lut));
    return;
  }
  std::string out;
  put_lut_block(out, lut);
  spill(path, out);
}

}  // namespace

/* ---- frames ---- */

VideoTensor read_frames(const fs::path& dir) {
  if (fs::exists(dir / frame_name(0, "ppm"))) {
    std::vector<PnmImage> imgs;
    for (int n = 0;; ++n) {
      const fs::path p = dir / frame_name(n, "ppm");
      if (!fs::exists(p)) break;
      imgs.push_back(read_pnm(p));
      if (imgs.back().channels != 3)
        throw FormatError("malformed header in frame " + p.string());
      if (imgs.back().width != imgs[0].width || imgs.back().height != imgs[0].height)
        throw FormatError("inconsistent frame dimensions in " + dir.string());
    }
    VideoTensor v = VideoTensor::zeros(static_cast<int>(imgs.size()), imgs[0].height, imgs[0].width);
    for (std::size_t n = 0; n < imgs.size(); ++n) {
      const auto* src = reinterpret_cast<const unsigned char*>(imgs[n].payload.data());
      float* dst = v.data.data() + n * v.pixel_offset(1, 0, 0);
      for (std::size_t i = 0; i < imgs[n].payload.size(); ++i)
        dst[i] = static_cast<float>(src[i]) / 255.0f;
    }
    return v;
  }
  if (fs::exists(dir / "dims.txt")) {
    const RawDims d = read_dims(dir);
    VideoTensor v = VideoTensor::zeros(d.frames, d.height, d.width);
    for (int n = 0; n < d.frames; ++n) {
      const fs::path p = dir / frame_name(n, "raw");
      if (!fs::exists(p)) throw FormatError("missing frame " + p.string());
      read_raw_frame(p, d.width, d.height, 3, v.pixel(n, 0, 0));
    }
    return v;
  }
  throw FormatError("no frames found in " + dir.string());
}

void write_frames(const VideoTensor& v, const fs::path& dir, FrameFormat fmt) {
  if (v.data.empty()) throw ShapeError("zero-size video");
  fs::create_directories(dir);
  if (fmt == FrameFormat::Ppm8) {
    for (int n = 0; n < v.frames; ++n)
      write_pnm(dir / frame_name(n, "ppm"), v.width, v.height, 3, v.pixel(n, 0, 0));
  } else {
    write_dims(dir, v.width, v.height, v.frames);
    for (int n = 0; n < v.frames; ++n)
      write_raw_frame(dir / frame_name(n, "raw"), v.width, v.height, 3, v.pixel(n, 0, 0));
  }
}

IntensityMap read_intensity(const fs::path& dir) {
  if (fs::exists(dir / frame_name(0, "pgm"))) {
    std::vector<PnmImage> imgs;
    for (int n = 0;; ++n) {
      const fs::path p = dir / frame_name(n, "pgm");
      if (!fs::exists(p)) break;
      imgs.push_back(read_pnm(p));
      if (imgs.back().channels != 1)
        throw FormatError("malformed header in frame " + p.string());
      if (imgs.back().width != imgs[0].width || imgs.back().height != imgs[0].height)
        throw FormatError("inconsistent frame dimensions in " + dir.string());
    }
    IntensityMap m = IntensityMap::filled(static_cast<int>(imgs.size()), imgs[0].height,
                                          imgs[0].width, 0.0f);
    for (std::size_t n = 0; n < imgs.size(); ++n) {
      const auto* src = reinterpret_cast<const unsigned char*>(imgs[n].payload.data());
      float* dst = m.data.data() + n * static_cast<std::size_t>(m.height) * m.width;
      for (std::size_t i = 0; i < imgs[n].payload.size(); ++i)
        dst[i] = static_cast<float>(src[i]) / 255.0f;
    }
    return m;
  }
  if (fs::exists(dir / "dims.txt")) {
    const RawDims d = read_dims(dir);
    IntensityMap m = IntensityMap::filled(d.frames, d.height, d.width, 0.0f);
    for (int n = 0; n < d.frames; ++n) {
      const fs::path p = dir / frame_name(n, "raw");
      if (!fs::exists(p)) throw FormatError("missing frame " + p.string());
      read_raw_frame(p, d.width, d.height, 1,
                     m.data.data() + static_cast<std::size_t>(n) * d.height * d.width);
    }
    return m;
  }
  throw FormatError("no frames found in " + dir.string());
}

void write_intensity(const IntensityMap& m, const fs::path& dir, FrameFormat fmt) {
  if (m.data.empty()) throw ShapeError("zero-size intensity map");
  fs::create_directories(dir);
  const std::size_t stride = static_cast<std::size_t>(m.height) * m.width;
  if (fmt == FrameFormat::Ppm8) {
    for (int n = 0; n < m.frames; ++n)
      write_pnm(dir / frame_name(n, "pgm"), m.width, m.height, 1, m.data.data() + n * stride);
  } else {
    write_dims(dir, m.width, m.height, m.frames);
    for (int n = 0; n < m.frames; ++n)
      write_raw_frame(dir / frame_name(n, "raw"), m.width, m.height, 1, m.data.data() + n * stride);
  }
}

/* ---- LUTs ---- */

void write_lut(const IaLut4& lut, const fs::path& path, LutEncoding enc) {
  write_lut_impl(lut, path, enc);
}
void write_lut(const Lut3& lut, const fs::path& path, LutEncoding enc) {
  write_lut_impl(lut, path, enc);
}

AnyLut read_lut(const fs::path& path) {
  const std::string data = slurp(path, "lut");
  const std::string what = "lut " + path.string();
  if (looks_text(data)) {
    std::istringstream ss(data);
    std::string magic;
    ss >> magic;
    if (magic == kMagic4) return lut_from_text<4>(ss, what);
    return lut_from_text<3>(ss, what);
  }
  Cursor c{data, 0, what};
  const std::string magic = c.bytes(8);
  AnyLut lut;
  if (magic == kMagic4)
    lut = get_lut_block<4>(c);
  else if (magic == kMagic3)
    lut = get_lut_block<3>(c);
  else
    throw FormatError("magic mismatch in " + what);
  if (!c.done()) throw FormatError("trailing data in " + what);
  return lut;
}

/* ---- basis container ---- */

void write_basis(const BasisSet4& basis, std::span<const double> w, const fs::path& path) {
  validate_basis(basis);
  if (static_cast<int>(w.size()) != basis.count())
    throw ShapeError("weight count does not match basis count");
  std::string out(kMagicBasis, 8);
  put_u32(out, static_cast<std::uint32_t>(basis.count()));
  put_u32(out, 0);
  for (int t = 0; t < basis.count(); ++t) {
    IaLut4 lut;
    lut.grids = basis.grids;
    lut.values = basis.values[static_cast<std::size_t>(t)];
    put_lut_block(out, lut);
  }
  out.append(kMagicWeights, 8);
  put_u32(out, static_cast<std::uint32_t>(w.size()));
  for (const double x : w) put_f64(out, x);
  spill(path, out);
}

std::pair<BasisSet4, std::vector<double>> read_basis(const fs::path& path) {
  const std::string data = slurp(path, "basis");
  const std::string what = "basis " + path.string();
  Cursor c{data, 0, what};
  if (c.bytes(8) != kMagicBasis) throw FormatError("magic mismatch in " + what);
  const std::uint32_t count = c.u32();
  c.u32();  // flags
  if (count < 1 || count > 1024) throw FormatError("bad basis count in " + what);
  BasisSet4 basis;
  basis.values.reserve(count);
  for (std::uint32_t t = 0; t < count; ++t) {
    if (c.bytes(8) != kMagic4) throw FormatError("magic mismatch in " + what);
    IaLut4 lut = get_lut_block<4>(c);
    if (t == 0)
      basis.grids = lut.grids;
    else if (!(lut.grids == basis.grids))
      throw FormatError("basis grids disagree in " + what);
    basis.values.push_back(std::move(lut.values));
  }
  if (c.bytes(8) != kMagicWeights) throw FormatError("magic mismatch in " + what);
  const std::uint32_t wn = c.u32();
  if (wn != count) throw FormatError("bad weight count in " + what);
  std::vector<double> w(wn);
  for (auto& x : w) x = c.f64();
  if (!c.done()) throw FormatError("trailing data in " + what);
  return {std::move(basis), std::move(w)};
}

}  // namespace ialut
