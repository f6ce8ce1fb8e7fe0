#include "stint/seqdata.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>
#include <random>

namespace stint {

Frame FrameSequence::frame(std::size_t index) const {
  if (index >= n_frames()) {
    throw std::out_of_range("frame index " + std::to_string(index) + " out of range for " +
                            std::to_string(n_frames()) + " frames");
  }
  const std::size_t fs = frame_size();
  std::vector<float> out(frames.data() + index * fs, frames.data() + (index + 1) * fs);
  return Frame({channels(), height(), width()}, std::move(out));
}

void FrameSequence::set_frame(std::size_t index, const Frame& f) {
  require_same_shape({channels(), height(), width()}, f.shape(), "set_frame");
  std::copy(f.values().begin(), f.values().end(), frames.data() + index * frame_size());
}

void validate_sequence(const FrameSequence& seq) {
  if (seq.frames.rank() != 4) throw std::invalid_argument("frame sequence must have rank 4 (N, C, H, W)");
  for (std::size_t i = 0; i < 4; ++i) {
    if (seq.frames.dim(i) == 0) {
      throw std::invalid_argument("frame sequence dimension " + std::to_string(i) + " is zero");
    }
  }
  if (!(seq.capacity > 0.0f) || !std::isfinite(seq.capacity)) {
    throw std::invalid_argument("capacity must be finite and > 0");
  }
  for (float v : seq.frames.values()) {
    if (!std::isfinite(v)) throw std::invalid_argument("frame sequence contains a non-finite value");
  }
}

FrameSequence make_sequence(std::vector<Frame> frames, float capacity, std::string dt_label) {
  if (frames.empty()) throw std::invalid_argument("make_sequence: no frames");
  const Shape fshape = frames.front().shape();
  if (fshape.size() != 3) throw std::invalid_argument("make_sequence: frames must be (C, H, W)");
  const std::size_t fs = shape_size(fshape);
  std::vector<float> data;
  data.reserve(frames.size() * fs);
  for (const auto& f : frames) {
    require_same_shape(fshape, f.shape(), "make_sequence");
    data.insert(data.end(), f.values().begin(), f.values().end());
  }
  FrameSequence seq;
  seq.frames = Tensor<float>({frames.size(), fshape[0], fshape[1], fshape[2]}, std::move(data));
  seq.capacity = capacity;
  seq.dt_label = std::move(dt_label);
  return seq;
}

std::string to_string(SyntheticKind kind) {
  switch (kind) {
    case SyntheticKind::translate_gaussian: return "translate_gaussian";
    case SyntheticKind::rotate_field: return "rotate_field";
    case SyntheticKind::diffuse_blob: return "diffuse_blob";
    case SyntheticKind::shear_deform: return "shear_deform";
  }
  return "unknown";
}

SyntheticKind parse_synthetic_kind(const std::string& name) {
  for (auto kind : {SyntheticKind::translate_gaussian, SyntheticKind::rotate_field, SyntheticKind::diffuse_blob,
                    SyntheticKind::shear_deform}) {
    if (to_string(kind) == name) return kind;
  }
  throw std::invalid_argument("unknown synthetic kind '" + name + "'");
}

void validate_spec(const SyntheticSpec& spec) {
  auto reject = [](const std::string& msg) { throw std::invalid_argument(msg); };
  if (spec.n_frames < 4) reject("n_frames must be ≥ 4");
  if (spec.height < 1) reject("height must be ≥ 1");
  if (spec.width < 1) reject("width must be ≥ 1");
  if (spec.channels < 1) reject("channels must be ≥ 1");
  const std::pair<const char*, double> finite_fields[] = {
      {"vx", spec.vx},
      {"vy", spec.vy},
      {"angular_rate", spec.angular_rate},
      {"diffusion_rate", spec.diffusion_rate},
      {"shear_rate", spec.shear_rate},
      {"x0", spec.x0},
      {"y0", spec.y0},
  };
  for (const auto& [name, value] : finite_fields) {
    if (!std::isfinite(value)) reject(std::string(name) + " must be finite");
  }
  if (!(spec.blob_sigma > 0.0) || !std::isfinite(spec.blob_sigma)) reject("blob_sigma must be finite and > 0");
  if (!(spec.noise_std >= 0.0) || !std::isfinite(spec.noise_std)) reject("noise_std must be finite and ≥ 0");
  if (spec.diffusion_rate < 0.0) reject("diffusion_rate must be ≥ 0");
}

namespace {

// Signed displacement on a periodic axis of the given length, in [-len/2, len/2).
double wrap(double d, double len) {
  d = std::fmod(d, len);
  if (d < -len / 2) d += len;
  if (d >= len / 2) d -= len;
  return d;
}

double gaussian(double dx, double dy, double sigma) {
  return std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
}

}  // namespace

FrameSequence generate_synthetic(const SyntheticSpec& spec) {
  validate_spec(spec);
  const auto n = static_cast<std::size_t>(spec.n_frames);
  const auto c = static_cast<std::size_t>(spec.channels);
  const auto h = static_cast<std::size_t>(spec.height);
  const auto w = static_cast<std::size_t>(spec.width);
  const double width = static_cast<double>(w);
  const double height = static_cast<double>(h);
  const double x0 = spec.x0 >= 0.0 ? spec.x0 : (spec.kind == SyntheticKind::translate_gaussian ? width / 4 : width / 2);
  const double y0 = spec.y0 >= 0.0 ? spec.y0 : height / 2;
  const double sigma = spec.blob_sigma;

  Tensor<float> frames({n, c, h, w});
  float* out = frames.data();
  for (std::size_t t = 0; t < n; ++t) {
    const double td = static_cast<double>(t);
    for (std::size_t ch = 0; ch < c; ++ch) {
      const double amplitude = 1.0 / static_cast<double>(ch + 1);
      for (std::size_t row = 0; row < h; ++row) {
        const double y = static_cast<double>(row);
        for (std::size_t col = 0; col < w; ++col) {
          const double x = static_cast<double>(col);
          double v = 0.0;
          switch (spec.kind) {
            case SyntheticKind::translate_gaussian: {
              const double dx = wrap(x - (x0 + spec.vx * td), width);
              const double dy = wrap(y - (y0 + spec.vy * td), height);
              v = gaussian(dx, dy, sigma);
              break;
            }
            case SyntheticKind::rotate_field: {
              const double radius = std::min(width, height) / 4.0;
              const double theta = spec.angular_rate * td;
              const double ax = x0 + radius * std::cos(theta);
              const double ay = y0 + radius * std::sin(theta);
              const double bx = x0 - radius * std::cos(theta);
              const double by = y0 - radius * std::sin(theta);
              v = gaussian(x - ax, y - ay, sigma) + 0.6 * gaussian(x - bx, y - by, sigma);
              break;
            }
            case SyntheticKind::diffuse_blob: {
              const double var = sigma * sigma + 2.0 * spec.diffusion_rate * td;
              const double s = std::sqrt(var);
              v = (sigma * sigma / var) * gaussian(x - x0, y - y0, s);
              break;
            }
            case SyntheticKind::shear_deform: {
              const double shift = (spec.vx + spec.shear_rate * (y - y0)) * td;
              const double dx = wrap(x - x0 - shift, width);
              v = gaussian(dx, y - y0, sigma);
              break;
            }
          }
          *out++ = static_cast<float>(amplitude * v);
        }
      }
    }
  }

  if (spec.noise_std > 0.0) {
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, spec.noise_std);
    for (float& v : frames.values()) v = static_cast<float>(v + noise(rng));
  }

  FrameSequence seq;
  seq.capacity = *std::max_element(frames.values().begin(), frames.values().end());
  seq.frames = std::move(frames);
  seq.dt_label = spec.dt_label;
  seq.seed = spec.seed;
  if (!(seq.capacity > 0.0f)) throw std::invalid_argument("generated sequence has non-positive capacity");
  return seq;
}

// ---------------------------------------------------------------------------
// FSEQ v1

namespace {

constexpr std::uint8_t kFseqVersion = 1;
constexpr std::size_t kFseqFixedHeader = 4 + 1 + 16 + 4 + 2;

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void put_f32(std::vector<std::uint8_t>& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t get_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace

std::vector<std::uint8_t> encode_fseq(const FrameSequence& seq) {
  validate_sequence(seq);
  if (seq.dt_label.size() > 0xffff) throw std::invalid_argument("dt_label longer than 65535 bytes");
  std::vector<std::uint8_t> out;
  out.reserve(kFseqFixedHeader + seq.dt_label.size() + 4 * seq.frames.size());
  for (char c : {'F', 'S', 'E', 'Q'}) out.push_back(static_cast<std::uint8_t>(c));
  out.push_back(kFseqVersion);
  for (std::size_t i = 0; i < 4; ++i) {
    if (seq.frames.dim(i) > 0xffffffffu) throw std::invalid_argument("dimension does not fit in u32");
    put_u32(out, static_cast<std::uint32_t>(seq.frames.dim(i)));
  }
  put_f32(out, seq.capacity);
  put_u16(out, static_cast<std::uint16_t>(seq.dt_label.size()));
  out.insert(out.end(), seq.dt_label.begin(), seq.dt_label.end());
  for (float v : seq.frames.values()) put_f32(out, v);
  return out;
}

FrameSequence decode_fseq(const std::vector<std::uint8_t>& bytes) {
  using K = FseqError::Kind;
  if (bytes.size() < 5 || std::memcmp(bytes.data(), "FSEQ", 4) != 0) throw FseqError(K::bad_magic, "bad magic");
  if (bytes[4] != kFseqVersion) {
    throw FseqError(K::unsupported_version, "unsupported version " + std::to_string(bytes[4]));
  }
  if (bytes.size() < kFseqFixedHeader) throw FseqError(K::payload_size_mismatch, "payload size mismatch: truncated header");
  const std::uint8_t* p = bytes.data() + 5;
  std::uint32_t dims[4];
  for (auto& d : dims) {
    d = get_u32(p);
    p += 4;
  }
  for (int i = 0; i < 4; ++i) {
    if (dims[i] == 0) {
      static const char* names[] = {"N", "C", "H", "W"};
      throw FseqError(K::invalid_dimensions, std::string("invalid dimensions: ") + names[i] + " = 0");
    }
  }
  const float capacity = std::bit_cast<float>(get_u32(p));
  p += 4;
  const std::uint16_t label_len = get_u16(p);
  p += 2;
  const std::size_t header = kFseqFixedHeader + label_len;
  const std::uint64_t count = static_cast<std::uint64_t>(dims[0]) * dims[1] * dims[2] * dims[3];
  if (bytes.size() < header || bytes.size() - header != count * 4) {
    throw FseqError(K::payload_size_mismatch, "payload size mismatch");
  }
  FrameSequence seq;
  seq.dt_label.assign(reinterpret_cast<const char*>(p), label_len);
  p += label_len;
  std::vector<float> data(count);
  for (auto& v : data) {
    v = std::bit_cast<float>(get_u32(p));
    p += 4;
    if (!std::isfinite(v)) throw FseqError(K::non_finite, "non-finite value in payload");
  }
  if (!std::isfinite(capacity) || !(capacity > 0.0f)) {
    throw FseqError(K::non_finite, "capacity must be finite and > 0");
  }
  seq.frames = Tensor<float>({dims[0], dims[1], dims[2], dims[3]}, std::move(data));
  seq.capacity = capacity;
  return seq;
}

void save_sequence(const FrameSequence& seq, const std::filesystem::path& path) {
  const auto bytes = encode_fseq(seq);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw FseqError(FseqError::Kind::io, "cannot open " + path.string() + " for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw FseqError(FseqError::Kind::io, "failed writing " + path.string());
}

FrameSequence load_sequence(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FseqError(FseqError::Kind::io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return decode_fseq(bytes);
}

// ---------------------------------------------------------------------------
// Sampling

std::vector<TripletSample> make_triplets(const FrameSequence& seq, std::size_t stride) {
  if (stride < 1) throw std::invalid_argument("stride must be ≥ 1");
  std::vector<TripletSample> out;
  const std::size_t n = seq.n_frames();
  if (n < 3) return out;
  for (std::size_t i = 0; i + 2 < n; i += stride) {
    out.push_back({seq.frame(i), seq.frame(i + 1), seq.frame(i + 2), i});
  }
  return out;
}

std::vector<QuadrupleSample> make_quadruples(const FrameSequence& seq, std::size_t stride) {
  if (stride < 1) throw std::invalid_argument("stride must be ≥ 1");
  std::vector<QuadrupleSample> out;
  const std::size_t n = seq.n_frames();
  if (n < 4) return out;
  for (std::size_t i = 0; i + 3 < n; i += stride) {
    out.push_back({seq.frame(i), seq.frame(i + 3), seq.frame(i + 1), seq.frame(i + 2), i});
  }
  return out;
}

FrameSequence subsample(const FrameSequence& seq, std::size_t factor, std::size_t offset) {
  if (factor < 1) throw std::invalid_argument("subsample factor must be ≥ 1");
  if (offset >= seq.n_frames()) throw std::invalid_argument("subsample offset beyond sequence end");
  std::vector<Frame> frames;
  for (std::size_t i = offset; i < seq.n_frames(); i += factor) frames.push_back(seq.frame(i));
  FrameSequence out = make_sequence(std::move(frames), seq.capacity, seq.dt_label);
  out.norm_stats = seq.norm_stats;
  out.seed = seq.seed;
  return out;
}

FrameSequence slice_frames(const FrameSequence& seq, std::size_t begin, std::size_t end) {
  if (begin >= end || end > seq.n_frames()) {
    throw std::invalid_argument("invalid frame slice [" + std::to_string(begin) + ", " + std::to_string(end) + ")");
  }
  const std::size_t fs = seq.frame_size();
  std::vector<float> data(seq.frames.data() + begin * fs, seq.frames.data() + end * fs);
  FrameSequence out = seq;
  out.frames = Tensor<float>({end - begin, seq.channels(), seq.height(), seq.width()}, std::move(data));
  return out;
}

// ---------------------------------------------------------------------------
// Normalization

FrameSequence normalize(const FrameSequence& seq) {
  const std::size_t n = seq.n_frames(), c = seq.channels(), plane = seq.height() * seq.width();
  NormStats stats;
  stats.mean.resize(c);
  stats.stddev.resize(c);
  for (std::size_t ch = 0; ch < c; ++ch) {
    double sum = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const float* p = seq.frames.data() + (t * c + ch) * plane;
      for (std::size_t i = 0; i < plane; ++i) sum += p[i];
    }
    const double mean = sum / static_cast<double>(n * plane);
    double sq = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const float* p = seq.frames.data() + (t * c + ch) * plane;
      for (std::size_t i = 0; i < plane; ++i) sq += (p[i] - mean) * (p[i] - mean);
    }
    const double sd = std::sqrt(sq / static_cast<double>(n * plane));
    stats.mean[ch] = static_cast<float>(mean);
    stats.stddev[ch] = std::max(static_cast<float>(sd), kNormEpsilon);
  }
  FrameSequence out = seq;
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      float* p = out.frames.data() + (t * c + ch) * plane;
      for (std::size_t i = 0; i < plane; ++i) p[i] = (p[i] - stats.mean[ch]) / stats.stddev[ch];
    }
  }
  out.norm_stats = std::move(stats);
  return out;
}

FrameSequence denormalize(const FrameSequence& seq) {
  if (!seq.norm_stats) return seq;
  const NormStats& stats = *seq.norm_stats;
  const std::size_t n = seq.n_frames(), c = seq.channels(), plane = seq.height() * seq.width();
  FrameSequence out = seq;
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      float* p = out.frames.data() + (t * c + ch) * plane;
      for (std::size_t i = 0; i < plane; ++i) p[i] = p[i] * stats.stddev[ch] + stats.mean[ch];
    }
  }
  out.norm_stats.reset();
  return out;
}

Frame normalize_frame(const Frame& frame, const NormStats& stats) {
  Frame out = frame;
  const std::size_t c = frame.dim(0), plane = frame.dim(1) * frame.dim(2);
  for (std::size_t ch = 0; ch < c; ++ch) {
    float* p = out.data() + ch * plane;
    for (std::size_t i = 0; i < plane; ++i) p[i] = (p[i] - stats.mean[ch]) / stats.stddev[ch];
  }
  return out;
}

Frame denormalize_frame(const Frame& frame, const NormStats& stats) {
  Frame out = frame;
  const std::size_t c = frame.dim(0), plane = frame.dim(1) * frame.dim(2);
  for (std::size_t ch = 0; ch < c; ++ch) {
    float* p = out.data() + ch * plane;
    for (std::size_t i = 0; i < plane; ++i) p[i] = p[i] * stats.stddev[ch] + stats.mean[ch];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Augmentation

TripletSample augment_reverse(const TripletSample& sample, double draw, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("reversal probability must lie in [0, 1]");
  if (!(draw < p)) return sample;
  return {sample.i2, sample.i1, sample.i0, sample.index};
}

QuadrupleSample augment_reverse(const QuadrupleSample& sample, double draw, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("reversal probability must lie in [0, 1]");
  if (!(draw < p)) return sample;
  return {sample.in_b, sample.in_a, sample.gt_2, sample.gt_1, sample.index};
}

}  // namespace stint
