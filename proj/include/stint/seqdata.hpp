#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stint/tensor.hpp"

namespace stint {

/// Per-channel z-score statistics.
struct NormStats {
  std::vector<float> mean;
  std::vector<float> stddev;
};

/// Ordered stack of frames, stored as (N, C, H, W) float32.
struct FrameSequence {
  Tensor<float> frames;
  float capacity = 0.0f;
  std::string dt_label;
  std::optional<NormStats> norm_stats;
  std::optional<std::uint64_t> seed;

  std::size_t n_frames() const { return frames.dim(0); }
  std::size_t channels() const { return frames.dim(1); }
  std::size_t height() const { return frames.dim(2); }
  std::size_t width() const { return frames.dim(3); }
  std::size_t frame_size() const { return channels() * height() * width(); }

  Frame frame(std::size_t index) const;
  void set_frame(std::size_t index, const Frame& frame);
};

/// Throws std::invalid_argument unless dims are positive, values finite and capacity > 0.
void validate_sequence(const FrameSequence& seq);

FrameSequence make_sequence(std::vector<Frame> frames, float capacity, std::string dt_label = {});

struct TripletSample {
  Frame i0, i1, i2;
  std::size_t index = 0;
};

struct QuadrupleSample {
  Frame in_a, in_b;
  Frame gt_1, gt_2;
  std::size_t index = 0;
};

enum class SyntheticKind { translate_gaussian, rotate_field, diffuse_blob, shear_deform };

std::string to_string(SyntheticKind kind);
SyntheticKind parse_synthetic_kind(const std::string& name);

struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::translate_gaussian;
  std::int64_t n_frames = 64;
  std::int64_t height = 32;
  std::int64_t width = 32;
  std::int64_t channels = 1;
  // Pixels per frame.
  double vx = 1.0;
  double vy = 0.5;
  // Radians per frame.
  double angular_rate = 0.1;
  // Variance growth per frame, in squared pixels.
  double diffusion_rate = 0.5;
  // Horizontal displacement per frame per pixel of vertical offset.
  double shear_rate = 0.05;
  double blob_sigma = 3.0;
  // Initial blob center; negative means "use the default position".
  double x0 = -1.0;
  double y0 = -1.0;
  double noise_std = 0.0;
  std::uint64_t seed = 0;
  std::string dt_label = "synthetic";
};

/// Rejects an invalid spec with a message naming the offending field.
void validate_spec(const SyntheticSpec& spec);

FrameSequence generate_synthetic(const SyntheticSpec& spec);

class FseqError : public std::runtime_error {
 public:
  enum class Kind { io, bad_magic, unsupported_version, invalid_dimensions, payload_size_mismatch, non_finite };
  FseqError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

std::vector<std::uint8_t> encode_fseq(const FrameSequence& seq);
FrameSequence decode_fseq(const std::vector<std::uint8_t>& bytes);
void save_sequence(const FrameSequence& seq, const std::filesystem::path& path);
FrameSequence load_sequence(const std::filesystem::path& path);

std::vector<TripletSample> make_triplets(const FrameSequence& seq, std::size_t stride = 1);
std::vector<QuadrupleSample> make_quadruples(const FrameSequence& seq, std::size_t stride = 1);

/// Frames offset, offset+factor, offset+2*factor, ... Metadata is carried over.
FrameSequence subsample(const FrameSequence& seq, std::size_t factor, std::size_t offset = 0);

/// Frames [begin, end).
FrameSequence slice_frames(const FrameSequence& seq, std::size_t begin, std::size_t end);

inline constexpr float kNormEpsilon = 1e-8f;

FrameSequence normalize(const FrameSequence& seq);
FrameSequence denormalize(const FrameSequence& seq);

/// Applies stored statistics to a single frame (or undoes them).
Frame normalize_frame(const Frame& frame, const NormStats& stats);
Frame denormalize_frame(const Frame& frame, const NormStats& stats);

/// Reverses temporal order when draw < p.
TripletSample augment_reverse(const TripletSample& sample, double draw, double p);
QuadrupleSample augment_reverse(const QuadrupleSample& sample, double draw, double p);

}  // namespace stint
