#pragma once

#include <filesystem>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "stint/cycle.hpp"
#include "stint/net.hpp"
#include "stint/seqdata.hpp"

namespace stint {

/// Returned by psnr() when the frames are identical; printed as "inf".
inline constexpr double kPsnrInfinity = std::numeric_limits<double>::infinity();

double mean_squared_error(const Frame& pred, const Frame& ref);

/// 10 log10(range^2 / MSE) in dB.
double psnr(const Frame& pred, const Frame& ref, double data_range);

/// Gaussian-window SSIM (11x11, sigma 1.5, K1 0.01, K2 0.03) averaged over the
/// pixels where the window fits and over channels.
double ssim(const Frame& pred, const Frame& ref, double data_range);

/// MSE / capacity.
double scatter_index(const Frame& pred, const Frame& ref, double capacity);

enum class CopyMode {
  forward,  // (A, A)
  nearest,  // (A, B)
};

FramePair trivial_copy_baseline(const QuadrupleSample& q, CopyMode mode = CopyMode::forward);
FramePair trivial_copy_baseline(const Frame& in_a, const Frame& in_b, CopyMode mode = CopyMode::forward);

/// Frames at one and two thirds of the way from in_a to in_b.
FramePair linear_blend_oracle(const Frame& in_a, const Frame& in_b);

/// Wraps a network as a PairModel on raw values: inputs are z-scored with
/// `stats`, outputs mapped back.
PairModel model_predictor(const InterpolationNetwork<float>& net, const NormStats& stats);

struct MetricsRow {
  std::size_t sample_index = 0;
  int frame_slot = 0;  // 1 or 2
  double psnr = 0.0;
  double ssim = 0.0;
  double scatter_index = 0.0;
};

struct MetricsReport {
  std::vector<MetricsRow> per_sample;
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
  double mean_si = 0.0;
  std::string model_id;
  std::string dataset_id;
  std::size_t n_samples = 0;
};

/// Scores predict(in_a, in_b) against (gt_1, gt_2) for every quadruple of `seq`.
/// A sequence carrying norm_stats is denormalized first.
MetricsReport evaluate(const PairModel& predict, const FrameSequence& seq, double data_range, double capacity,
                       std::string model_id = {}, std::string dataset_id = {});

/// Header `sample_index,frame_slot,psnr_db,ssim,scatter_index`, one row per
/// predicted frame, then a MEAN row.
void write_report_csv(const MetricsReport& report, std::ostream& os);
void write_report_csv(const MetricsReport& report, const std::filesystem::path& path);

/// Shortest text that reads back as the same double; "inf" for infinities.
std::string format_number(double v);

}  // namespace stint
