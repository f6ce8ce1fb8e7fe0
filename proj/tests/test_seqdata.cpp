#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "helpers.hpp"
#include "stint/seqdata.hpp"

namespace stint {
namespace {

using testing::ramp_sequence;
using testing::scalar;
using testing::TempDir;

std::size_t argmax_column(const Frame& f) {
  const std::size_t h = f.dim(1), w = f.dim(2);
  std::size_t best = 0;
  for (std::size_t i = 1; i < h * w; ++i) {
    if (f[i] > f[best]) best = i;
  }
  return best % w;
}

TEST(Synthetic, SameSpecIsBitIdentical) {
  SyntheticSpec spec;
  spec.noise_std = 0.05;
  spec.seed = 42;
  for (auto kind : {SyntheticKind::translate_gaussian, SyntheticKind::rotate_field, SyntheticKind::diffuse_blob,
                    SyntheticKind::shear_deform}) {
    spec.kind = kind;
    const FrameSequence a = generate_synthetic(spec);
    const FrameSequence b = generate_synthetic(spec);
    EXPECT_EQ(a.frames, b.frames) << to_string(kind);
    EXPECT_EQ(a.capacity, b.capacity);
  }
}

TEST(Synthetic, DifferentSeedsDifferOnlyWithNoise) {
  SyntheticSpec spec;
  spec.noise_std = 0.05;
  spec.seed = 1;
  const auto a = generate_synthetic(spec);
  spec.seed = 2;
  EXPECT_NE(a.frames, generate_synthetic(spec).frames);
}

TEST(Synthetic, ShapeContract) {
  SyntheticSpec spec;
  spec.n_frames = 16;
  spec.height = spec.width = 32;
  spec.channels = 1;
  const FrameSequence seq = generate_synthetic(spec);
  EXPECT_EQ(seq.frames.shape(), (Shape{16, 1, 32, 32}));
}

TEST(Synthetic, CapacityIsMaximumValue) {
  SyntheticSpec spec;
  spec.noise_std = 0.02;
  spec.channels = 2;
  const FrameSequence seq = generate_synthetic(spec);
  float mx = seq.frames[0];
  for (float v : seq.frames.values()) mx = std::max(mx, v);
  EXPECT_EQ(seq.capacity, mx);
}

TEST(Synthetic, TranslatePeakFollowsVelocity) {
  SyntheticSpec spec;
  spec.vx = 1.0;
  spec.vy = 0.0;
  spec.x0 = 8.0;
  spec.y0 = 16.0;
  spec.noise_std = 0.0;
  const FrameSequence seq = generate_synthetic(spec);
  EXPECT_EQ(argmax_column(seq.frame(0)), 8u);
  EXPECT_EQ(argmax_column(seq.frame(4)), 12u);
}

TEST(Synthetic, RejectsInvalidSpecNamingField) {
  SyntheticSpec spec;
  spec.n_frames = 2;
  try {
    generate_synthetic(spec);
    FAIL() << "expected rejection";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("n_frames"), std::string::npos);
  }
  spec = {};
  spec.height = 0;
  EXPECT_THROW(validate_spec(spec), std::invalid_argument);
  spec = {};
  spec.vx = std::nan("");
  EXPECT_THROW(validate_spec(spec), std::invalid_argument);
  spec = {};
  spec.noise_std = -1.0;
  EXPECT_THROW(validate_spec(spec), std::invalid_argument);
}

TEST(Synthetic, KindNamesRoundTrip) {
  for (auto kind : {SyntheticKind::translate_gaussian, SyntheticKind::rotate_field, SyntheticKind::diffuse_blob,
                    SyntheticKind::shear_deform}) {
    EXPECT_EQ(parse_synthetic_kind(to_string(kind)), kind);
  }
  EXPECT_THROW(parse_synthetic_kind("vortex"), std::invalid_argument);
}

TEST(Fseq, SaveLoadRoundTripIsBitExact) {
  TempDir dir("fseq");
  SyntheticSpec spec;
  spec.kind = SyntheticKind::rotate_field;
  spec.channels = 2;
  spec.noise_std = 0.1;
  spec.dt_label = "1h";
  const FrameSequence seq = generate_synthetic(spec);
  save_sequence(seq, dir / "a.fseq");
  const FrameSequence back = load_sequence(dir / "a.fseq");
  EXPECT_EQ(back.frames, seq.frames);
  EXPECT_EQ(back.capacity, seq.capacity);
  EXPECT_EQ(back.dt_label, "1h");
}

TEST(Fseq, HeaderLayout) {
  FrameSequence seq = make_sequence({scalar(1.5f), scalar(-2.0f)}, 1.5f, "dt");
  const auto bytes = encode_fseq(seq);
  ASSERT_EQ(bytes.size(), 4u + 1 + 16 + 4 + 2 + 2 + 8);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "FSEQ");
  EXPECT_EQ(bytes[4], 0x01);
  EXPECT_EQ(bytes[5], 2);  // N, little-endian
  EXPECT_EQ(bytes[6], 0);
  // capacity 1.5f = 0x3fc00000
  EXPECT_EQ(bytes[21], 0x00);
  EXPECT_EQ(bytes[23], 0xc0);
  EXPECT_EQ(bytes[24], 0x3f);
  EXPECT_EQ(bytes[25], 2);  // label length
  EXPECT_EQ(bytes[27], 'd');
  EXPECT_EQ(decode_fseq(bytes).frames, seq.frames);
}

FseqError::Kind decode_error(const std::vector<std::uint8_t>& bytes, std::string* message = nullptr) {
  try {
    decode_fseq(bytes);
  } catch (const FseqError& e) {
    if (message) *message = e.what();
    return e.kind();
  }
  ADD_FAILURE() << "decode_fseq accepted malformed bytes";
  return FseqError::Kind::io;
}

TEST(Fseq, TruncatedPayload) {
  auto bytes = encode_fseq(ramp_sequence(4, 0.0f, 1.0f, 3, 3));
  bytes.resize(bytes.size() - 5);
  std::string msg;
  EXPECT_EQ(decode_error(bytes, &msg), FseqError::Kind::payload_size_mismatch);
  EXPECT_NE(msg.find("payload size mismatch"), std::string::npos);
}

TEST(Fseq, TruncatedFileOnDisk) {
  TempDir dir("trunc");
  save_sequence(ramp_sequence(4, 0.0f, 1.0f, 3, 3), dir / "t.fseq");
  std::filesystem::resize_file(dir / "t.fseq", 40);
  try {
    load_sequence(dir / "t.fseq");
    FAIL();
  } catch (const FseqError& e) {
    EXPECT_NE(std::string(e.what()).find("payload size mismatch"), std::string::npos);
  }
}

TEST(Fseq, ZeroFramesRejected) {
  auto bytes = encode_fseq(ramp_sequence(4, 0.0f, 1.0f));
  for (int i = 5; i < 9; ++i) bytes[i] = 0;
  std::string msg;
  EXPECT_EQ(decode_error(bytes, &msg), FseqError::Kind::invalid_dimensions);
  EXPECT_NE(msg.find("N = 0"), std::string::npos);
}

TEST(Fseq, BadMagicAndVersionAreDistinct) {
  auto bytes = encode_fseq(ramp_sequence(4, 0.0f, 1.0f));
  auto magic = bytes;
  magic[0] = 'X';
  EXPECT_EQ(decode_error(magic), FseqError::Kind::bad_magic);
  auto version = bytes;
  version[4] = 2;
  EXPECT_EQ(decode_error(version), FseqError::Kind::unsupported_version);
  auto extra = bytes;
  extra.push_back(0);
  EXPECT_EQ(decode_error(extra), FseqError::Kind::payload_size_mismatch);
}

TEST(Fseq, NonFiniteRejected) {
  auto bytes = encode_fseq(ramp_sequence(4, 0.0f, 1.0f));
  // last float -> +inf (0x7f800000)
  const std::size_t at = bytes.size() - 4;
  bytes[at] = 0x00;
  bytes[at + 1] = 0x00;
  bytes[at + 2] = 0x80;
  bytes[at + 3] = 0x7f;
  EXPECT_EQ(decode_error(bytes), FseqError::Kind::non_finite);
}

TEST(Fseq, MissingFileIsIoError) {
  try {
    load_sequence("/nonexistent/dir/x.fseq");
    FAIL();
  } catch (const FseqError& e) {
    EXPECT_EQ(e.kind(), FseqError::Kind::io);
  }
}

TEST(Windows, TripletCounts) {
  const auto five = make_triplets(ramp_sequence(5, 0.0f, 1.0f));
  ASSERT_EQ(five.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(five[i].index, i);
    EXPECT_EQ(five[i].i0[0], static_cast<float>(i));
    EXPECT_EQ(five[i].i1[0], static_cast<float>(i + 1));
    EXPECT_EQ(five[i].i2[0], static_cast<float>(i + 2));
  }
  EXPECT_EQ(make_triplets(ramp_sequence(3, 0.0f, 1.0f)).size(), 1u);
  EXPECT_TRUE(make_triplets(ramp_sequence(2, 0.0f, 1.0f)).empty());
}

TEST(Windows, QuadrupleLayout) {
  const auto q = make_quadruples(ramp_sequence(4, 0.0f, 1.0f));
  ASSERT_EQ(q.size(), 1u);
  EXPECT_EQ(q[0].in_a[0], 0.0f);
  EXPECT_EQ(q[0].in_b[0], 3.0f);
  EXPECT_EQ(q[0].gt_1[0], 1.0f);
  EXPECT_EQ(q[0].gt_2[0], 2.0f);
  EXPECT_EQ(make_quadruples(ramp_sequence(10, 0.0f, 1.0f), 1).size(), 7u);
  EXPECT_TRUE(make_quadruples(ramp_sequence(3, 0.0f, 1.0f)).empty());
}

TEST(Windows, CountFormulaForAllStrides) {
  for (std::size_t n = 1; n <= 20; ++n) {
    const FrameSequence seq = ramp_sequence(n, 0.0f, 1.0f);
    for (std::size_t stride = 1; stride <= 5; ++stride) {
      const std::size_t quads = n >= 4 ? (n - 4) / stride + 1 : 0;
      const std::size_t trips = n >= 3 ? (n - 3) / stride + 1 : 0;
      const auto qs = make_quadruples(seq, stride);
      const auto ts = make_triplets(seq, stride);
      ASSERT_EQ(qs.size(), quads) << "n=" << n << " stride=" << stride;
      ASSERT_EQ(ts.size(), trips);
      for (const auto& q : qs) {
        EXPECT_EQ(q.index % stride, 0u);
        EXPECT_EQ(q.in_a[0], static_cast<float>(q.index));
        EXPECT_EQ(q.gt_1[0], static_cast<float>(q.index + 1));
        EXPECT_EQ(q.gt_2[0], static_cast<float>(q.index + 2));
        EXPECT_EQ(q.in_b[0], static_cast<float>(q.index + 3));
      }
    }
  }
  EXPECT_THROW(make_quadruples(ramp_sequence(5, 0.0f, 1.0f), 0), std::invalid_argument);
}

TEST(Windows, SubsampleAndSlice) {
  const FrameSequence seq = ramp_sequence(10, 0.0f, 1.0f);
  const FrameSequence sub = subsample(seq, 3, 1);
  ASSERT_EQ(sub.n_frames(), 3u);  // 1, 4, 7
  EXPECT_EQ(sub.frame(2)[0], 7.0f);
  EXPECT_EQ(sub.capacity, seq.capacity);
  const FrameSequence part = slice_frames(seq, 2, 5);
  ASSERT_EQ(part.n_frames(), 3u);
  EXPECT_EQ(part.frame(0)[0], 2.0f);
  EXPECT_THROW(slice_frames(seq, 5, 5), std::invalid_argument);
}

TEST(Normalize, ZeroMeanUnitStd) {
  SyntheticSpec spec;
  spec.channels = 2;
  spec.noise_std = 0.01;
  const FrameSequence seq = normalize(generate_synthetic(spec));
  ASSERT_TRUE(seq.norm_stats.has_value());
  const std::size_t plane = seq.height() * seq.width();
  for (std::size_t c = 0; c < 2; ++c) {
    double sum = 0.0, sq = 0.0;
    std::size_t n = 0;
    for (std::size_t t = 0; t < seq.n_frames(); ++t) {
      const Frame f = seq.frame(t);
      for (std::size_t i = 0; i < plane; ++i) {
        sum += f[c * plane + i];
        sq += static_cast<double>(f[c * plane + i]) * f[c * plane + i];
        ++n;
      }
    }
    const double mean = sum / n;
    EXPECT_NEAR(mean, 0.0, 1e-5);
    EXPECT_NEAR(std::sqrt(sq / n - mean * mean), 1.0, 1e-4);
  }
}

TEST(Normalize, ConstantSequenceBecomesZeros) {
  const FrameSequence seq = normalize(ramp_sequence(5, 3.0f, 0.0f, 4, 4));
  for (float v : seq.frames.values()) EXPECT_EQ(v, 0.0f);
  const FrameSequence back = denormalize(seq);
  for (float v : back.frames.values()) EXPECT_FLOAT_EQ(v, 3.0f);
}

TEST(Normalize, RoundTrip) {
  SyntheticSpec spec;
  spec.kind = SyntheticKind::diffuse_blob;
  spec.noise_std = 0.05;
  const FrameSequence seq = generate_synthetic(spec);
  const FrameSequence back = denormalize(normalize(seq));
  float worst = 0.0f;
  for (std::size_t i = 0; i < seq.frames.size(); ++i) worst = std::max(worst, std::abs(back.frames[i] - seq.frames[i]));
  EXPECT_LT(worst, 1e-5f * seq.capacity);
  EXPECT_FALSE(back.norm_stats.has_value());
}

TEST(Normalize, FrameHelpersMatchSequence) {
  SyntheticSpec spec;
  spec.noise_std = 0.05;
  const FrameSequence raw = generate_synthetic(spec);
  const FrameSequence norm = normalize(raw);
  const Frame f = normalize_frame(raw.frame(7), *norm.norm_stats);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(f[i], norm.frame(7)[i], 1e-6);
  const Frame back = denormalize_frame(f, *norm.norm_stats);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(back[i], raw.frame(7)[i], 1e-6);
}

TEST(Reverse, ForcedReversalAndInvolution) {
  const TripletSample t{scalar(1), scalar(2), scalar(3), 0};
  const TripletSample r = augment_reverse(t, 0.3, 1.0);
  EXPECT_EQ(r.i0[0], 3.0f);
  EXPECT_EQ(r.i1[0], 2.0f);
  EXPECT_EQ(r.i2[0], 1.0f);
  const TripletSample rr = augment_reverse(r, 0.9, 1.0);
  EXPECT_EQ(rr.i0, t.i0);
  EXPECT_EQ(rr.i2, t.i2);

  const QuadrupleSample q{scalar(0), scalar(3), scalar(1), scalar(2), 0};
  const QuadrupleSample qr = augment_reverse(q, 0.0, 1.0);
  EXPECT_EQ(qr.in_a[0], 3.0f);
  EXPECT_EQ(qr.in_b[0], 0.0f);
  EXPECT_EQ(qr.gt_1[0], 2.0f);
  EXPECT_EQ(qr.gt_2[0], 1.0f);
  const QuadrupleSample qq = augment_reverse(qr, 0.0, 1.0);
  EXPECT_EQ(qq.in_a, q.in_a);
  EXPECT_EQ(qq.gt_1, q.gt_1);
}

TEST(Reverse, DrawAtOrAboveProbabilityKeepsOrder) {
  const TripletSample t{scalar(1), scalar(2), scalar(3), 0};
  EXPECT_EQ(augment_reverse(t, 0.5, 0.5).i0[0], 1.0f);
  EXPECT_EQ(augment_reverse(t, 0.0, 0.0).i0[0], 1.0f);
  EXPECT_THROW(augment_reverse(t, 0.1, 1.5), std::invalid_argument);
}

TEST(Reverse, FrequencyNearHalf) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const TripletSample t{scalar(1), scalar(2), scalar(3), 0};
  int reversed = 0;
  for (int i = 0; i < 10000; ++i) reversed += augment_reverse(t, u(rng), 0.5).i0[0] == 3.0f;
  const double freq = reversed / 10000.0;
  EXPECT_GE(freq, 0.48);
  EXPECT_LE(freq, 0.52);
}

}  // namespace
}  // namespace stint
