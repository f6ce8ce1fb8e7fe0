#pragma once

// Differentiable building blocks over 5-D activations laid out as
// (batch, channels, time, rows, columns). Every forward has a matching
// backward that accumulates parameter gradients and returns the input gradient.

#include <array>
#include <cstddef>

#include "stint/tensor.hpp"

namespace stint::layers {

struct Dims5 {
  std::size_t n, c, t, h, w;
  std::size_t volume() const { return t * h * w; }
  std::size_t size() const { return n * c * t * h * w; }
  Shape shape() const { return {n, c, t, h, w}; }
};

Dims5 dims_of(const Shape& shape);

struct ConvGeometry {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::array<std::size_t, 3> kernel{3, 3, 3};
  std::array<std::size_t, 3> stride{1, 1, 1};
  std::array<std::size_t, 3> padding{1, 1, 1};

  std::size_t patch() const { return in_channels * kernel[0] * kernel[1] * kernel[2]; }
  std::size_t out_extent(std::size_t axis, std::size_t in) const {
    return (in + 2 * padding[axis] - kernel[axis]) / stride[axis] + 1;
  }
  Shape weight_shape() const { return {out_channels, in_channels, kernel[0], kernel[1], kernel[2]}; }
};

/// weight: (out, in, kt, kh, kw); bias may be null.
template <typename Real>
Tensor<Real> conv3d_forward(const Tensor<Real>& x, const Tensor<Real>& weight, const Tensor<Real>* bias,
                            const ConvGeometry& geom);

template <typename Real>
Tensor<Real> conv3d_backward(const Tensor<Real>& x, const Tensor<Real>& weight, const Tensor<Real>& grad_y,
                             const ConvGeometry& geom, Tensor<Real>& grad_weight, Tensor<Real>* grad_bias);

/// Transposed convolution with kernel = stride = (1, 2, 2): doubles rows and columns.
/// weight: (in, out, 1, 2, 2); bias: (out).
template <typename Real>
Tensor<Real> upconv_forward(const Tensor<Real>& x, const Tensor<Real>& weight, const Tensor<Real>& bias);

template <typename Real>
Tensor<Real> upconv_backward(const Tensor<Real>& x, const Tensor<Real>& weight, const Tensor<Real>& grad_y,
                             Tensor<Real>& grad_weight, Tensor<Real>& grad_bias);

inline constexpr double kBatchNormEpsilon = 1e-5;
inline constexpr double kBatchNormMomentum = 0.1;

template <typename Real>
struct BatchNormCache {
  Tensor<Real> normalized;
  std::vector<Real> inv_std;
};

/// Normalizes with batch statistics over (n, t, h, w) and updates the running estimates.
template <typename Real>
Tensor<Real> batchnorm_forward_train(const Tensor<Real>& x, const Tensor<Real>& gamma, const Tensor<Real>& beta,
                                     Tensor<Real>& running_mean, Tensor<Real>& running_var,
                                     BatchNormCache<Real>& cache);

template <typename Real>
Tensor<Real> batchnorm_forward_eval(const Tensor<Real>& x, const Tensor<Real>& gamma, const Tensor<Real>& beta,
                                    const Tensor<Real>& running_mean, const Tensor<Real>& running_var);

template <typename Real>
Tensor<Real> batchnorm_backward(const BatchNormCache<Real>& cache, const Tensor<Real>& gamma,
                                const Tensor<Real>& grad_y, Tensor<Real>& grad_gamma, Tensor<Real>& grad_beta);

template <typename Real>
void relu_inplace(Tensor<Real>& x);

/// grad_y masked by y > 0, where y is the rectifier output.
template <typename Real>
void relu_backward_inplace(const Tensor<Real>& y, Tensor<Real>& grad);

template <typename Real>
struct SqueezeExciteWeights {
  Tensor<Real> reduce_weight;  // (hidden, channels)
  Tensor<Real> reduce_bias;    // (hidden)
  Tensor<Real> expand_weight;  // (channels, hidden)
  Tensor<Real> expand_bias;    // (channels)
};

template <typename Real>
struct SqueezeExciteCache {
  Tensor<Real> input;
  Tensor<Real> squeezed;  // (n, channels)
  Tensor<Real> hidden;    // (n, hidden), after the rectifier
  Tensor<Real> gates;     // (n, channels)
};

/// Global average pool over (t, h, w), bottleneck MLP, logistic gate, channel rescale.
template <typename Real>
Tensor<Real> se_forward_batch(const Tensor<Real>& x, const Tensor<Real>& reduce_weight,
                              const Tensor<Real>& reduce_bias, const Tensor<Real>& expand_weight,
                              const Tensor<Real>& expand_bias, SqueezeExciteCache<Real>* cache);

template <typename Real>
Tensor<Real> se_backward_batch(const SqueezeExciteCache<Real>& cache, const Tensor<Real>& reduce_weight,
                               const Tensor<Real>& expand_weight, const Tensor<Real>& grad_y,
                               Tensor<Real>& grad_reduce_weight, Tensor<Real>& grad_reduce_bias,
                               Tensor<Real>& grad_expand_weight, Tensor<Real>& grad_expand_bias);

/// Single-sample form over (C', T, H', W'). Rejects a reduction that does not divide C'.
/// `gates`, when given, receives the C' gate values.
template <typename Real>
Tensor<Real> se_forward(const Tensor<Real>& features, std::size_t reduction, const SqueezeExciteWeights<Real>& weights,
                        std::vector<Real>* gates = nullptr);

/// Concatenates along channels.
template <typename Real>
Tensor<Real> concat_channels(const Tensor<Real>& a, const Tensor<Real>& b);

template <typename Real>
void split_channels(const Tensor<Real>& g, std::size_t first_channels, Tensor<Real>& ga, Tensor<Real>& gb);

}  // namespace stint::layers
