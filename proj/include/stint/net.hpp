#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "stint/layers.hpp"
#include "stint/tensor.hpp"

namespace stint {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Hyperparameters of the 3D encoder-decoder. Kernels are 3x3x3 throughout.
struct NetConfig {
  std::size_t in_channels = 1;
  std::size_t base_width = 8;
  std::size_t depth = 3;
  std::size_t se_reduction = 4;
  bool use_batchnorm = true;

  std::size_t width_at(std::size_t level) const { return base_width << level; }
  /// Rows and columns must be multiples of this.
  std::size_t spatial_multiple() const { return std::size_t{1} << (depth - 1); }

  /// Small preset for laptop-scale experiments.
  static NetConfig desk();
  /// ~40M parameters.
  static NetConfig paper_scale();

  bool operator==(const NetConfig&) const = default;
};

void validate_config(const NetConfig& config);

/// H and W must be multiples of 2^(depth-1).
void validate_frame_size(const NetConfig& config, std::size_t height, std::size_t width);

/// Names of fields that differ between two configs, e.g. {"base_width"}.
std::vector<std::string> config_mismatches(const NetConfig& expected, const NetConfig& actual);

enum class Mode { train, eval };

/// Two frames of equal (C, H, W) shape; f1 is the earlier one.
struct FramePair {
  Frame f1;
  Frame f2;
};

template <typename Real>
struct Parameter {
  std::string name;
  Tensor<Real> value;
  Tensor<Real> grad;
};

template <typename Real>
struct Buffer {
  std::string name;
  Tensor<Real> value;
};

template <typename Real>
struct ConvTrace {
  Tensor<Real> input;
  layers::BatchNormCache<Real> batchnorm;
  Tensor<Real> output;
};

/// Activations recorded by a train-mode forward pass, consumed by backward().
template <typename Real>
struct ForwardTrace {
  Shape input_shape;
  std::vector<ConvTrace<Real>> down;
  std::vector<std::array<ConvTrace<Real>, 2>> enc;
  std::vector<layers::SqueezeExciteCache<Real>> se;
  std::vector<Tensor<Real>> up_inputs;
  std::vector<std::array<ConvTrace<Real>, 2>> dec;
  ConvTrace<Real> head;
};

/// Maps a pair of frames to the two frames at one and two thirds of the interval.
///
/// Input and output activations are (batch, C, 2, H, W): the two frames sit on
/// the temporal axis so 3x3x3 kernels see both. Each encoder level runs
/// [stride-2 downsampling conv] -> conv -> conv -> squeeze-excite; the decoder
/// upsamples with (1,2,2) transposed convolutions and concatenates the skip.
/// A 1x1x1 convolution produces the linear output.
template <typename Real>
class InterpolationNetwork {
 public:
  InterpolationNetwork(const NetConfig& config, std::uint64_t seed);

  const NetConfig& config() const noexcept { return config_; }
  Mode mode() const noexcept { return mode_; }
  void set_mode(Mode mode) noexcept { mode_ = mode; }

  /// Runs in the current mode. In train mode batch-norm running statistics are
  /// updated and, when `trace` is given, activations are recorded for backward().
  Tensor<Real> forward(const Tensor<Real>& input, ForwardTrace<Real>* trace = nullptr);

  /// Accumulates parameter gradients; returns the gradient w.r.t. the input.
  Tensor<Real> backward(const ForwardTrace<Real>& trace, const Tensor<Real>& grad_output);

  /// Eval-mode forward; never mutates the network.
  Tensor<Real> infer(const Tensor<Real>& input) const;

  /// Eval-mode interpolation of a single pair.
  FramePair interpolate(const FramePair& pair) const;

  std::vector<Parameter<Real>>& parameters() noexcept { return params_; }
  const std::vector<Parameter<Real>>& parameters() const noexcept { return params_; }
  std::vector<Buffer<Real>>& buffers() noexcept { return buffers_; }
  const std::vector<Buffer<Real>>& buffers() const noexcept { return buffers_; }

  void zero_grad();
  std::size_t count_parameters() const;

  /// Throws std::invalid_argument naming expected vs actual dims.
  void check_input(const Shape& input_shape) const;

 private:
  struct ConvUnit {
    layers::ConvGeometry geom;
    std::size_t weight = 0, bias = 0, gamma = 0, beta = 0;
    std::size_t running_mean = 0, running_var = 0;
    bool batchnorm = false;
    bool relu = true;
  };
  struct SEUnit {
    std::size_t reduce_weight = 0, reduce_bias = 0, expand_weight = 0, expand_bias = 0;
  };
  struct UpUnit {
    std::size_t weight = 0, bias = 0;
  };

  std::size_t add_param(std::string name, Shape shape);
  std::size_t add_buffer(std::string name, Shape shape, Real fill);
  ConvUnit make_conv(const std::string& name, std::size_t cin, std::size_t cout, std::array<std::size_t, 3> kernel,
                     std::array<std::size_t, 3> stride, std::array<std::size_t, 3> padding, bool batchnorm,
                     bool relu);
  SEUnit make_se(const std::string& name, std::size_t channels);
  UpUnit make_up(const std::string& name, std::size_t cin, std::size_t cout);
  void initialize(std::uint64_t seed);

  Tensor<Real> conv_train(const ConvUnit& unit, const Tensor<Real>& x, ConvTrace<Real>* trace);
  Tensor<Real> conv_eval(const ConvUnit& unit, const Tensor<Real>& x) const;
  Tensor<Real> conv_backward(const ConvUnit& unit, const ConvTrace<Real>& trace, Tensor<Real> grad);
  Tensor<Real> se_apply(const SEUnit& unit, const Tensor<Real>& x, layers::SqueezeExciteCache<Real>* cache) const;
  Tensor<Real> up_apply(const UpUnit& unit, const Tensor<Real>& x) const;

  NetConfig config_;
  Mode mode_ = Mode::train;
  std::vector<Parameter<Real>> params_;
  std::vector<Buffer<Real>> buffers_;

  std::vector<ConvUnit> down_;                 // depth - 1
  std::vector<std::array<ConvUnit, 2>> enc_;   // depth
  std::vector<SEUnit> se_;                     // depth
  std::vector<UpUnit> up_;                     // depth - 1
  std::vector<std::array<ConvUnit, 2>> dec_;   // depth - 1
  ConvUnit head_;
};

/// Builds a float32 network after validating the configuration.
InterpolationNetwork<float> build_network(const NetConfig& config, std::uint64_t seed);

template <typename Real>
std::size_t count_parameters(const InterpolationNetwork<Real>& net) {
  return net.count_parameters();
}

/// Stacks pairs into a (batch, C, 2, H, W) activation.
template <typename Real>
Tensor<Real> pack_pairs(const std::vector<const Frame*>& first, const std::vector<const Frame*>& second);

/// Splits a (batch, C, 2, H, W) activation into the batch-th pair.
template <typename Real>
FramePair unpack_pair(const Tensor<Real>& output, std::size_t batch);

}  // namespace stint
