#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "stint/metrics.hpp"

namespace stint {
namespace {

using testing::constant_frame;
using testing::random_frame;
using testing::scalar;

// Direct 2D-window SSIM with the same constants, summing every window tap.
double ssim_oracle(const Frame& x, const Frame& y, double range) {
  const int r = 5;
  double kernel[11][11];
  double ksum = 0.0;
  for (int i = -r; i <= r; ++i) {
    for (int j = -r; j <= r; ++j) {
      kernel[i + r][j + r] = std::exp(-(i * i + j * j) / (2.0 * 1.5 * 1.5));
      ksum += kernel[i + r][j + r];
    }
  }
  const double c1 = (0.01 * range) * (0.01 * range), c2 = (0.03 * range) * (0.03 * range);
  const int ch = static_cast<int>(x.dim(0)), h = static_cast<int>(x.dim(1)), w = static_cast<int>(x.dim(2));
  double total = 0.0;
  int count = 0;
  for (int c = 0; c < ch; ++c) {
    for (int row = r; row < h - r; ++row) {
      for (int col = r; col < w - r; ++col) {
        double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
        for (int i = -r; i <= r; ++i) {
          for (int j = -r; j <= r; ++j) {
            const double k = kernel[i + r][j + r] / ksum;
            const double a = x[(c * h + row + i) * w + col + j], b = y[(c * h + row + i) * w + col + j];
            mx += k * a;
            my += k * b;
            sxx += k * a * a;
            syy += k * b * b;
            sxy += k * a * b;
          }
        }
        const double vx = sxx - mx * mx, vy = syy - my * my, cxy = sxy - mx * my;
        total += ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
        ++count;
      }
    }
  }
  return total / count;
}

// Fixed analytic pair used for the scikit-image cross-check.
std::pair<Frame, Frame> sinusoid_pair() {
  Frame a({1, 24, 20}), b({1, 24, 20});
  for (int y = 0; y < 24; ++y) {
    for (int x = 0; x < 20; ++x) {
      a[y * 20 + x] = static_cast<float>(0.5 + 0.4 * std::sin(0.3 * x + 0.2 * y));
      b[y * 20 + x] = static_cast<float>(0.5 + 0.4 * std::sin(0.3 * x + 0.2 * y + 0.5) + 0.05 * std::cos(0.7 * x));
    }
  }
  return {a, b};
}

FrameSequence linear_sequence(std::size_t n) {
  // Integer-valued per-pixel ramps so thirds of three-frame steps are exact.
  std::vector<Frame> frames;
  for (std::size_t t = 0; t < n; ++t) {
    Frame f({1, 12, 12});
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = static_cast<float>(static_cast<int>(i % 7) + static_cast<int>(t) * (1 + static_cast<int>(i % 3)));
    frames.push_back(std::move(f));
  }
  return make_sequence(std::move(frames), 60.0f);
}

TEST(Psnr, ClosedForms) {
  const Frame ref = constant_frame(1, 4, 4, 0.5f);
  EXPECT_NEAR(psnr(constant_frame(1, 4, 4, 0.6f), ref, 1.0), 20.0, 1e-5);
  Frame half = ref;
  for (std::size_t i = 0; i < half.size(); i += 2) half[i] += 0.2f;
  EXPECT_NEAR(psnr(half, ref, 1.0), 10.0 * std::log10(1.0 / 0.02), 1e-4);
  EXPECT_EQ(psnr(ref, ref, 1.0), kPsnrInfinity);
}

TEST(Psnr, ExactTwentyDecibels) {
  // 0.1 is exactly representable as the difference of these floats' doubles.
  const Frame ref = constant_frame(1, 3, 3, 0.0f);
  Frame pred(ref.shape(), 0.1f);
  const double mse = static_cast<double>(0.1f) * static_cast<double>(0.1f);
  EXPECT_NEAR(psnr(pred, ref, 1.0), 10.0 * std::log10(1.0 / mse), 1e-12);
  EXPECT_NEAR(psnr(pred, ref, 1.0), 20.0, 1e-6);
}

TEST(Psnr, DecreasingInMse) {
  const Frame ref = constant_frame(1, 2, 2, 0.0f);
  double prev = kPsnrInfinity;
  for (float e : {0.01f, 0.02f, 0.1f, 0.5f, 2.0f}) {
    const double v = psnr(constant_frame(1, 2, 2, e), ref, 1.0);
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(Psnr, Errors) {
  EXPECT_THROW(psnr(scalar(0), scalar(1), 0.0), std::invalid_argument);
  EXPECT_THROW(psnr(constant_frame(1, 2, 2, 0), constant_frame(1, 2, 3, 0), 1.0), std::invalid_argument);
}

TEST(Ssim, IdenticalIsOne) {
  const Frame f = random_frame(2, 16, 13, 1);
  EXPECT_NEAR(ssim(f, f, 4.0), 1.0, 1e-9);
}

TEST(Ssim, ConstantZeroVersusOne) {
  EXPECT_NEAR(ssim(constant_frame(1, 11, 11, 0), constant_frame(1, 11, 11, 1), 1.0), 1e-4 / 1.0001, 1e-7);
  EXPECT_NEAR(ssim(constant_frame(1, 20, 15, 0), constant_frame(1, 20, 15, 1), 1.0), 1e-4 / 1.0001, 1e-7);
}

TEST(Ssim, MatchesReferenceImplementation) {
  // Values from skimage.metrics.structural_similarity(gaussian_weights=True,
  // sigma=1.5, use_sample_covariance=False) on the same float32 frames.
  const auto [a, b] = sinusoid_pair();
  EXPECT_NEAR(ssim(a, b, 1.0), 0.7145642682599426, 1e-6);
  EXPECT_NEAR(ssim(a, b, 2.0), 0.7396356488413609, 1e-6);
}

TEST(Ssim, MatchesDirectWindowSum) {
  const Frame x = random_frame(2, 14, 17, 3);
  Frame y = x;
  const Frame noise = random_frame(2, 14, 17, 4, 0.3f);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += noise[i];
  EXPECT_NEAR(ssim(x, y, 3.0), ssim_oracle(x, y, 3.0), 1e-9);
}

TEST(Ssim, TinyNoiseStaysNearOne) {
  Frame ref = random_frame(1, 32, 32, 5, 0.25f);
  for (auto& v : ref.values()) v += 0.5f;
  Frame pred = ref;
  const Frame noise = random_frame(1, 32, 32, 6, 1e-4f);
  for (std::size_t i = 0; i < pred.size(); ++i) pred[i] += noise[i];
  EXPECT_GT(ssim(pred, ref, 1.0), 0.999);
}

TEST(Ssim, Symmetric) {
  const auto [a, b] = sinusoid_pair();
  EXPECT_DOUBLE_EQ(ssim(a, b, 1.0), ssim(b, a, 1.0));
}

TEST(Ssim, RejectsFramesSmallerThanWindow) {
  try {
    ssim(constant_frame(1, 10, 32, 0), constant_frame(1, 10, 32, 0), 1.0);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("11x11"), std::string::npos);
  }
  EXPECT_THROW(ssim(constant_frame(1, 11, 11, 0), constant_frame(1, 11, 11, 0), 0.0), std::invalid_argument);
}

TEST(ScatterIndex, ClosedForms) {
  // Errors of +-1 on half the pixels: MSE 0.5.
  Frame pred = constant_frame(1, 2, 2, 0.0f);
  pred[0] = 1.0f;
  pred[3] = -1.0f;
  EXPECT_EQ(scatter_index(pred, constant_frame(1, 2, 2, 0.0f), 5.0), 0.1);
  EXPECT_NEAR(scatter_index(constant_frame(1, 3, 3, 0.2f), constant_frame(1, 3, 3, 0.0f), 2.0), 0.02, 1e-9);
  EXPECT_EQ(scatter_index(pred, pred, 1.0), 0.0);
  EXPECT_THROW(scatter_index(pred, pred, 0.0), std::invalid_argument);
  EXPECT_THROW(scatter_index(pred, pred, -1.0), std::invalid_argument);
}

TEST(ScatterIndex, LinearInMse) {
  const Frame ref = constant_frame(1, 2, 2, 0.0f);
  const double a = scatter_index(constant_frame(1, 2, 2, 1.0f), ref, 4.0);
  const double b = scatter_index(constant_frame(1, 2, 2, 2.0f), ref, 4.0);
  EXPECT_DOUBLE_EQ(b, 4.0 * a);
}

TEST(CopyBaseline, ForwardReplication) {
  const QuadrupleSample q{scalar(0), scalar(3), scalar(1), scalar(2), 0};
  const auto fwd = trivial_copy_baseline(q);
  EXPECT_EQ(fwd.f1[0], 0.0f);
  EXPECT_EQ(fwd.f2[0], 0.0f);
  EXPECT_NEAR(std::abs(fwd.f1[0] - q.gt_1[0]), 1.0, 0.0);
  EXPECT_NEAR(std::abs(fwd.f2[0] - q.gt_2[0]), 2.0, 0.0);
  const auto near = trivial_copy_baseline(q, CopyMode::nearest);
  EXPECT_EQ(near.f1[0], 0.0f);
  EXPECT_EQ(near.f2[0], 3.0f);
}

TEST(CopyBaseline, ExactOnConstantSequence) {
  const Frame a = constant_frame(1, 4, 4, 2.0f);
  const auto p = trivial_copy_baseline(a, a);
  EXPECT_EQ(p.f1, a);
  EXPECT_EQ(p.f2, a);
}

TEST(BlendOracle, Thirds) {
  const auto p = linear_blend_oracle(scalar(0), scalar(3));
  EXPECT_EQ(p.f1[0], 1.0f);
  EXPECT_EQ(p.f2[0], 2.0f);
}

TEST(BlendOracle, ExactOnArithmeticProgressions) {
  for (const auto& [a, d] : std::vector<std::pair<float, float>>{{0, 1}, {-4, 2.5f}, {10, -0.25f}}) {
    const auto p = linear_blend_oracle(scalar(a), scalar(a + 3 * d));
    EXPECT_FLOAT_EQ(p.f1[0], a + d);
    EXPECT_FLOAT_EQ(p.f2[0], a + 2 * d);
  }
}

TEST(BlendOracle, SwapSymmetry) {
  const Frame a = random_frame(1, 5, 5, 1), b = random_frame(1, 5, 5, 2);
  const auto fwd = linear_blend_oracle(a, b);
  const auto bwd = linear_blend_oracle(b, a);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(fwd.f1[i], bwd.f2[i], 1e-6);
    EXPECT_NEAR(fwd.f2[i], bwd.f1[i], 1e-6);
  }
}

TEST(Evaluate, ConstantSequenceWithCopy) {
  std::vector<Frame> frames(6, constant_frame(1, 12, 12, 3.0f));
  const auto seq = make_sequence(frames, 3.0f);
  const auto report = evaluate([](const Frame& a, const Frame& b) { return trivial_copy_baseline(a, b); }, seq, 3.0, 3.0);
  ASSERT_EQ(report.per_sample.size(), 6u);
  EXPECT_EQ(report.n_samples, 3u);
  for (const auto& row : report.per_sample) {
    EXPECT_EQ(row.psnr, kPsnrInfinity);
    EXPECT_NEAR(row.ssim, 1.0, 1e-9);
    EXPECT_EQ(row.scatter_index, 0.0);
  }
  EXPECT_EQ(report.mean_psnr, kPsnrInfinity);
}

TEST(Evaluate, BlendExactOnLinearSequence) {
  const auto seq = linear_sequence(10);
  const auto blend = evaluate(linear_blend_oracle, seq, 60.0, 60.0);
  const auto copy = evaluate([](const Frame& a, const Frame& b) { return trivial_copy_baseline(a, b); }, seq, 60.0, 60.0);
  EXPECT_EQ(blend.mean_si, 0.0);
  for (std::size_t i = 0; i < blend.per_sample.size(); ++i) {
    EXPECT_GT(blend.per_sample[i].psnr, copy.per_sample[i].psnr);
  }
}

TEST(Evaluate, BlendBeatsCopyOnMovingSynthetic) {
  SyntheticSpec spec;
  spec.n_frames = 12;
  spec.height = spec.width = 16;
  const auto seq = generate_synthetic(spec);
  const double cap = seq.capacity;
  const auto blend = evaluate(linear_blend_oracle, seq, cap, cap);
  const auto copy = evaluate([](const Frame& a, const Frame& b) { return trivial_copy_baseline(a, b); }, seq, cap, cap);
  EXPECT_GT(blend.mean_psnr, copy.mean_psnr);
}

TEST(Evaluate, RowsMatchQuadruplesAndMeansAreConsistent) {
  SyntheticSpec spec;
  spec.n_frames = 9;
  spec.height = spec.width = 12;
  spec.noise_std = 0.05;
  const auto seq = generate_synthetic(spec);
  const auto report = evaluate(linear_blend_oracle, seq, seq.capacity, seq.capacity, "blend", "synthetic");
  ASSERT_EQ(report.per_sample.size(), 2 * make_quadruples(seq).size());
  EXPECT_EQ(report.n_samples, report.per_sample.size() / 2);
  double p = 0, s = 0, si = 0;
  for (std::size_t k = 0; k < report.per_sample.size(); ++k) {
    const auto& row = report.per_sample[k];
    EXPECT_EQ(row.sample_index, k / 2);
    EXPECT_EQ(row.frame_slot, static_cast<int>(k % 2) + 1);
    p += row.psnr;
    s += row.ssim;
    si += row.scatter_index;
  }
  const double n = static_cast<double>(report.per_sample.size());
  EXPECT_NEAR(report.mean_psnr, p / n, 1e-12);
  EXPECT_NEAR(report.mean_ssim, s / n, 1e-12);
  EXPECT_NEAR(report.mean_si, si / n, 1e-15);
  EXPECT_EQ(report.model_id, "blend");
  EXPECT_EQ(report.dataset_id, "synthetic");

  // Scores use denormalized values.
  const auto normed = evaluate(linear_blend_oracle, normalize(seq), seq.capacity, seq.capacity);
  EXPECT_NEAR(normed.mean_psnr, report.mean_psnr, 1e-3);
  EXPECT_NEAR(normed.mean_si, report.mean_si, 1e-6);
}

TEST(Evaluate, RowScoresMatchDirectMetrics) {
  SyntheticSpec spec;
  spec.n_frames = 5;
  spec.height = spec.width = 12;
  const auto seq = generate_synthetic(spec);
  const auto report = evaluate(linear_blend_oracle, seq, 2.0, 5.0);
  const auto pred = linear_blend_oracle(seq.frame(1), seq.frame(4));
  const auto& row = report.per_sample[3];  // sample 1, second frame
  EXPECT_DOUBLE_EQ(row.psnr, psnr(pred.f2, seq.frame(3), 2.0));
  EXPECT_DOUBLE_EQ(row.ssim, ssim(pred.f2, seq.frame(3), 2.0));
  EXPECT_DOUBLE_EQ(row.scatter_index, scatter_index(pred.f2, seq.frame(3), 5.0));
}

TEST(Evaluate, TooShortSequenceRejected) {
  const auto seq = make_sequence(std::vector<Frame>(3, constant_frame(1, 12, 12, 0)), 1.0f);
  EXPECT_THROW(evaluate(linear_blend_oracle, seq, 1.0, 1.0), std::invalid_argument);
}

TEST(ReportCsv, Format) {
  MetricsReport r;
  r.per_sample = {{0, 1, kPsnrInfinity, 1.0, 0.0}, {0, 2, 20.0, 0.5, 0.25}};
  r.mean_psnr = kPsnrInfinity;
  r.mean_ssim = 0.75;
  r.mean_si = 0.125;
  r.n_samples = 1;
  std::ostringstream os;
  write_report_csv(r, os);
  EXPECT_EQ(os.str(),
            "sample_index,frame_slot,psnr_db,ssim,scatter_index\n"
            "0,1,inf,1,0\n"
            "0,2,20,0.5,0.25\n"
            "MEAN,,inf,0.75,0.125\n");
}

TEST(ReportCsv, NumbersRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 36.98123456789, 1e-12}) EXPECT_EQ(std::stod(format_number(v)), v);
  EXPECT_EQ(format_number(-kPsnrInfinity), "-inf");
}

}  // namespace
}  // namespace stint
