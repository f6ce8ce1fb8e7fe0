#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "stint/seqdata.hpp"
#include "stint/tensor.hpp"

namespace stint::testing {

/// 1x1x1 frame holding v.
inline Frame scalar(float v) { return Frame({1, 1, 1}, v); }

inline Frame constant_frame(std::size_t c, std::size_t h, std::size_t w, float v) { return Frame({c, h, w}, v); }

inline Frame random_frame(std::size_t c, std::size_t h, std::size_t w, std::uint64_t seed, float scale = 1.0f) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> nd(0.0f, scale);
  Frame f({c, h, w});
  for (auto& v : f.values()) v = nd(rng);
  return f;
}

/// Sequence whose frame t is filled with start + step * t.
inline FrameSequence ramp_sequence(std::size_t n, float start, float step, std::size_t h = 1, std::size_t w = 1) {
  std::vector<Frame> frames;
  for (std::size_t t = 0; t < n; ++t) frames.push_back(constant_frame(1, h, w, start + step * static_cast<float>(t)));
  return make_sequence(std::move(frames), std::max(start, start + step * static_cast<float>(n - 1)));
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("stint-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace stint::testing
