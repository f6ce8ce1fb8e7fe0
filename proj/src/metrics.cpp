#include "stint/metrics.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace stint {

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kK1 = 0.01;
constexpr double kK2 = 0.03;

const std::array<double, kWindow>& gaussian_taps() {
  static const std::array<double, kWindow> taps = [] {
    std::array<double, kWindow> t{};
    double sum = 0.0;
    for (int i = 0; i < kWindow; ++i) {
      const double x = i - kWindow / 2;
      t[i] = std::exp(-x * x / (2.0 * kSigma * kSigma));
      sum += t[i];
    }
    for (auto& v : t) v /= sum;
    return t;
  }();
  return taps;
}

// Separable 'valid' filtering of one H x W plane.
std::vector<double> filter_valid(const std::vector<double>& plane, std::size_t h, std::size_t w) {
  const auto& g = gaussian_taps();
  const std::size_t ow = w - kWindow + 1, oh = h - kWindow + 1;
  std::vector<double> rows(h * ow, 0.0);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += g[k] * plane[y * w + x + k];
      rows[y * ow + x] = acc;
    }
  }
  std::vector<double> out(oh * ow, 0.0);
  for (std::size_t y = 0; y < oh; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += g[k] * rows[(y + k) * ow + x];
      out[y * ow + x] = acc;
    }
  }
  return out;
}

void require_frame(const Frame& f, const char* what) {
  if (f.rank() != 3) {
    throw std::invalid_argument(std::string(what) + ": expected a (C, H, W) frame, got " + shape_to_string(f.shape()));
  }
}

Frame blend(const Frame& a, const Frame& b, double t) {
  Frame out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = static_cast<float>(static_cast<double>(a[i]) + t * (static_cast<double>(b[i]) - a[i]));
  }
  return out;
}

}  // namespace

double mean_squared_error(const Frame& pred, const Frame& ref) {
  require_same_shape(pred.shape(), ref.shape(), "mean_squared_error");
  if (pred.empty()) throw std::invalid_argument("mean_squared_error: empty frames");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = static_cast<double>(pred[i]) - static_cast<double>(ref[i]);
    acc += d * d;
  }
  return acc / static_cast<double>(pred.size());
}

double psnr(const Frame& pred, const Frame& ref, double data_range) {
  if (!(data_range > 0.0)) throw std::invalid_argument("psnr: data_range must be > 0");
  const double mse = mean_squared_error(pred, ref);
  if (mse == 0.0) return kPsnrInfinity;
  return 10.0 * std::log10(data_range * data_range / mse);
}

double ssim(const Frame& pred, const Frame& ref, double data_range) {
  require_frame(pred, "ssim");
  require_same_shape(pred.shape(), ref.shape(), "ssim");
  if (!(data_range > 0.0)) throw std::invalid_argument("ssim: data_range must be > 0");
  const std::size_t c = pred.dim(0), h = pred.dim(1), w = pred.dim(2);
  if (h < kWindow || w < kWindow) {
    throw std::invalid_argument("ssim: frames of " + std::to_string(h) + "x" + std::to_string(w) +
                                " are smaller than the 11x11 window");
  }
  const double c1 = (kK1 * data_range) * (kK1 * data_range);
  const double c2 = (kK2 * data_range) * (kK2 * data_range);
  const std::size_t plane = h * w;
  double total = 0.0;
  std::size_t count = 0;
  std::vector<double> x(plane), y(plane), xx(plane), yy(plane), xy(plane);
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t i = 0; i < plane; ++i) {
      x[i] = pred[ch * plane + i];
      y[i] = ref[ch * plane + i];
      xx[i] = x[i] * x[i];
      yy[i] = y[i] * y[i];
      xy[i] = x[i] * y[i];
    }
    const auto mx = filter_valid(x, h, w), my = filter_valid(y, h, w);
    const auto mxx = filter_valid(xx, h, w), myy = filter_valid(yy, h, w), mxy = filter_valid(xy, h, w);
    for (std::size_t i = 0; i < mx.size(); ++i) {
      const double vx = mxx[i] - mx[i] * mx[i];
      const double vy = myy[i] - my[i] * my[i];
      const double cov = mxy[i] - mx[i] * my[i];
      total += ((2.0 * mx[i] * my[i] + c1) * (2.0 * cov + c2)) /
               ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
    }
    count += mx.size();
  }
  return total / static_cast<double>(count);
}

double scatter_index(const Frame& pred, const Frame& ref, double capacity) {
  if (!(capacity > 0.0)) throw std::invalid_argument("scatter_index: capacity must be > 0");
  return mean_squared_error(pred, ref) / capacity;
}

FramePair trivial_copy_baseline(const QuadrupleSample& q, CopyMode mode) {
  return trivial_copy_baseline(q.in_a, q.in_b, mode);
}

FramePair trivial_copy_baseline(const Frame& in_a, const Frame& in_b, CopyMode mode) {
  return mode == CopyMode::forward ? FramePair{in_a, in_a} : FramePair{in_a, in_b};
}

FramePair linear_blend_oracle(const Frame& in_a, const Frame& in_b) {
  require_same_shape(in_a.shape(), in_b.shape(), "linear_blend_oracle");
  return {blend(in_a, in_b, 1.0 / 3.0), blend(in_a, in_b, 2.0 / 3.0)};
}

PairModel model_predictor(const InterpolationNetwork<float>& net, const NormStats& stats) {
  return [&net, stats](const Frame& a, const Frame& b) {
    FramePair out = net.interpolate({normalize_frame(a, stats), normalize_frame(b, stats)});
    return FramePair{denormalize_frame(out.f1, stats), denormalize_frame(out.f2, stats)};
  };
}

MetricsReport evaluate(const PairModel& predict, const FrameSequence& seq, double data_range, double capacity,
                       std::string model_id, std::string dataset_id) {
  const FrameSequence raw = seq.norm_stats ? denormalize(seq) : seq;
  const auto quads = make_quadruples(raw, 1);
  if (quads.empty()) throw std::invalid_argument("evaluate: sequence yields no quadruples");
  MetricsReport report;
  report.model_id = std::move(model_id);
  report.dataset_id = std::move(dataset_id);
  for (const auto& q : quads) {
    const FramePair pred = predict(q.in_a, q.in_b);
    const Frame* preds[2] = {&pred.f1, &pred.f2};
    const Frame* refs[2] = {&q.gt_1, &q.gt_2};
    for (int slot = 0; slot < 2; ++slot) {
      MetricsRow row;
      row.sample_index = q.index;
      row.frame_slot = slot + 1;
      row.psnr = psnr(*preds[slot], *refs[slot], data_range);
      row.ssim = ssim(*preds[slot], *refs[slot], data_range);
      row.scatter_index = scatter_index(*preds[slot], *refs[slot], capacity);
      report.per_sample.push_back(row);
    }
  }
  for (const auto& row : report.per_sample) {
    report.mean_psnr += row.psnr;
    report.mean_ssim += row.ssim;
    report.mean_si += row.scatter_index;
  }
  const auto n = static_cast<double>(report.per_sample.size());
  report.mean_psnr /= n;
  report.mean_ssim /= n;
  report.mean_si /= n;
  report.n_samples = quads.size();
  return report;
}

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

void write_report_csv(const MetricsReport& report, std::ostream& os) {
  os << "sample_index,frame_slot,psnr_db,ssim,scatter_index\n";
  for (const auto& row : report.per_sample) {
    os << row.sample_index << ',' << row.frame_slot << ',' << format_number(row.psnr) << ','
       << format_number(row.ssim) << ',' << format_number(row.scatter_index) << '\n';
  }
  os << "MEAN,," << format_number(report.mean_psnr) << ',' << format_number(report.mean_ssim) << ','
     << format_number(report.mean_si) << '\n';
}

void write_report_csv(const MetricsReport& report, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_report_csv(report, os);
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace stint
