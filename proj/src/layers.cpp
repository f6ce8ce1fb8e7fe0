#include "stint/layers.hpp"

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>

namespace stint::layers {

namespace {

template <typename Real>
using RowMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Real>
using MatMap = Eigen::Map<RowMatrix<Real>>;
template <typename Real>
using ConstMatMap = Eigen::Map<const RowMatrix<Real>>;

// Output positions o along one axis whose input coordinate o*stride - pad + k lies in [0, in).
struct ValidRange {
  std::size_t begin, end;
};

ValidRange valid_range(std::size_t in, std::size_t out, std::size_t stride, std::size_t pad, std::size_t k) {
  // o*stride + k >= pad  and  o*stride + k - pad < in
  std::size_t begin = 0;
  if (k < pad) begin = (pad - k + stride - 1) / stride;
  std::size_t end = 0;
  if (in + pad > k) end = std::min(out, (in + pad - k - 1) / stride + 1);
  if (end < begin) end = begin;
  return {begin, end};
}

template <typename Real>
void im2col(const Real* x, const Dims5& in, const ConvGeometry& g, const Dims5& out, Real* col) {
  const std::size_t cols = out.volume();
  std::size_t row = 0;
  for (std::size_t ci = 0; ci < in.c; ++ci) {
    const Real* xc = x + ci * in.volume();
    for (std::size_t kt = 0; kt < g.kernel[0]; ++kt) {
      const auto rt = valid_range(in.t, out.t, g.stride[0], g.padding[0], kt);
      for (std::size_t kh = 0; kh < g.kernel[1]; ++kh) {
        const auto rh = valid_range(in.h, out.h, g.stride[1], g.padding[1], kh);
        for (std::size_t kw = 0; kw < g.kernel[2]; ++kw, ++row) {
          const auto rw = valid_range(in.w, out.w, g.stride[2], g.padding[2], kw);
          Real* dst = col + row * cols;
          std::fill(dst, dst + cols, Real(0));
          for (std::size_t to = rt.begin; to < rt.end; ++to) {
            const std::size_t ti = to * g.stride[0] + kt - g.padding[0];
            for (std::size_t ho = rh.begin; ho < rh.end; ++ho) {
              const std::size_t hi = ho * g.stride[1] + kh - g.padding[1];
              const Real* src = xc + (ti * in.h + hi) * in.w;
              Real* d = dst + (to * out.h + ho) * out.w;
              if (g.stride[2] == 1) {
                const std::size_t off = kw - g.padding[2];  // may wrap; only used with wo >= rw.begin
                for (std::size_t wo = rw.begin; wo < rw.end; ++wo) d[wo] = src[wo + off];
              } else {
                for (std::size_t wo = rw.begin; wo < rw.end; ++wo) d[wo] = src[wo * g.stride[2] + kw - g.padding[2]];
              }
            }
          }
        }
      }
    }
  }
}

template <typename Real>
void col2im(const Real* col, const Dims5& in, const ConvGeometry& g, const Dims5& out, Real* gx) {
  const std::size_t cols = out.volume();
  std::size_t row = 0;
  for (std::size_t ci = 0; ci < in.c; ++ci) {
    Real* gc = gx + ci * in.volume();
    for (std::size_t kt = 0; kt < g.kernel[0]; ++kt) {
      const auto rt = valid_range(in.t, out.t, g.stride[0], g.padding[0], kt);
      for (std::size_t kh = 0; kh < g.kernel[1]; ++kh) {
        const auto rh = valid_range(in.h, out.h, g.stride[1], g.padding[1], kh);
        for (std::size_t kw = 0; kw < g.kernel[2]; ++kw, ++row) {
          const auto rw = valid_range(in.w, out.w, g.stride[2], g.padding[2], kw);
          const Real* src = col + row * cols;
          for (std::size_t to = rt.begin; to < rt.end; ++to) {
            const std::size_t ti = to * g.stride[0] + kt - g.padding[0];
            for (std::size_t ho = rh.begin; ho < rh.end; ++ho) {
              const std::size_t hi = ho * g.stride[1] + kh - g.padding[1];
              Real* d = gc + (ti * in.h + hi) * in.w;
              const Real* s = src + (to * out.h + ho) * out.w;
              for (std::size_t wo = rw.begin; wo < rw.end; ++wo) d[wo * g.stride[2] + kw - g.padding[2]] += s[wo];
            }
          }
        }
      }
    }
  }
}

Dims5 conv_out_dims(const Dims5& in, const ConvGeometry& g) {
  if (in.c != g.in_channels) {
    throw std::invalid_argument("conv3d: expected " + std::to_string(g.in_channels) + " input channels, got " +
                                std::to_string(in.c));
  }
  return {in.n, g.out_channels, g.out_extent(0, in.t), g.out_extent(1, in.h), g.out_extent(2, in.w)};
}

}  // namespace

Dims5 dims_of(const Shape& shape) {
  if (shape.size() != 5) throw std::invalid_argument("expected a 5-D activation, got " + shape_to_string(shape));
  return {shape[0], shape[1], shape[2], shape[3], shape[4]};
}

template <typename Real>
Tensor<Real> conv3d_forward(const Tensor<Real>& x, const Tensor<Real>& weight, const Tensor<Real>* bias,
                            const ConvGeometry& geom) {
  const Dims5 in = dims_of(x.shape());
  const Dims5 out = conv_out_dims(in, geom);
  Tensor<Real> y(out.shape());
  const std::size_t k = geom.patch(), p = out.volume();
  AlignedVector<Real> col(k * p);
  ConstMatMap<Real> w(weight.data(), static_cast<Eigen::Index>(geom.out_channels), static_cast<Eigen::Index>(k));
  for (std::size_t b = 0; b < in.n; ++b) {
    im2col(x.data() + b * in.c * in.volume(), in, geom, out, col.data());
    ConstMatMap<Real> c(col.data(), static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(p));
    MatMap<Real> yb(y.data() + b * out.c * p, static_cast<Eigen::Index>(out.c), static_cast<Eigen::Index>(p));
    yb.noalias() = w * c;
    if (bias) {
      for (std::size_t co = 0; co < out.c; ++co) yb.row(static_cast<Eigen::Index>(co)).array() += (*bias)[co];
    }
  }
  return y;
}

template <typename Real>
Tensor<Real> conv3d_backward(const Tensor<Real>& x, const Tensor<Real>& weight, const Tensor<Real>& grad_y,
                             const ConvGeometry& geom, Tensor<Real>& grad_weight, Tensor<Real>* grad_bias) {
  const Dims5 in = dims_of(x.shape());
  const Dims5 out = conv_out_dims(in, geom);
  require_same_shape(out.shape(), grad_y.shape(), "conv3d_backward");
  Tensor<Real> gx(in.shape());
  const std::size_t k = geom.patch(), p = out.volume();
  AlignedVector<Real> col(k * p), gcol(k * p);
  ConstMatMap<Real> w(weight.data(), static_cast<Eigen::Index>(out.c), static_cast<Eigen::Index>(k));
  MatMap<Real> gw(grad_weight.data(), static_cast<Eigen::Index>(out.c), static_cast<Eigen::Index>(k));
  for (std::size_t b = 0; b < in.n; ++b) {
    const Real* xb = x.data() + b * in.c * in.volume();
    im2col(xb, in, geom, out, col.data());
    ConstMatMap<Real> c(col.data(), static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(p));
    ConstMatMap<Real> gyb(grad_y.data() + b * out.c * p, static_cast<Eigen::Index>(out.c),
                          static_cast<Eigen::Index>(p));
    gw.noalias() += gyb * c.transpose();
    if (grad_bias) {
      for (std::size_t co = 0; co < out.c; ++co) (*grad_bias)[co] += gyb.row(static_cast<Eigen::Index>(co)).sum();
    }
    MatMap<Real> gc(gcol.data(), static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(p));
    gc.noalias() = w.transpose() * gyb;
    col2im(gcol.data(), in, geom, out, gx.data() + b * in.c * in.volume());
  }
  return gx;
}

template <typename Real>
Tensor<Real> upconv_forward(const Tensor<Real>& x, const Tensor<Real>& weight, const Tensor<Real>& bias) {
  const Dims5 in = dims_of(x.shape());
  const std::size_t cout = weight.dim(1);
  if (weight.dim(0) != in.c) throw std::invalid_argument("upconv: input channel mismatch");
  const Dims5 out{in.n, cout, in.t, in.h * 2, in.w * 2};
  Tensor<Real> y(out.shape());
  const std::size_t p = in.volume();
  // rows of (cout*4) x cin: entry [(co*4 + k), ci] = weight[ci, co, k]
  RowMatrix<Real> wt(static_cast<Eigen::Index>(cout * 4), static_cast<Eigen::Index>(in.c));
  for (std::size_t ci = 0; ci < in.c; ++ci)
    for (std::size_t co = 0; co < cout; ++co)
      for (std::size_t kk = 0; kk < 4; ++kk)
        wt(static_cast<Eigen::Index>(co * 4 + kk), static_cast<Eigen::Index>(ci)) = weight[(ci * cout + co) * 4 + kk];
  RowMatrix<Real> z(static_cast<Eigen::Index>(cout * 4), static_cast<Eigen::Index>(p));
  for (std::size_t b = 0; b < in.n; ++b) {
    ConstMatMap<Real> xb(x.data() + b * in.c * p, static_cast<Eigen::Index>(in.c), static_cast<Eigen::Index>(p));
    z.noalias() = wt * xb;
    Real* yb = y.data() + b * cout * out.volume();
    for (std::size_t co = 0; co < cout; ++co) {
      Real* yc = yb + co * out.volume();
      for (std::size_t kk = 0; kk < 4; ++kk) {
        const std::size_t di = kk / 2, dj = kk % 2;
        const Real* zr = z.data() + (co * 4 + kk) * p;
        for (std::size_t t = 0; t < in.t; ++t)
          for (std::size_t i = 0; i < in.h; ++i)
            for (std::size_t j = 0; j < in.w; ++j)
              yc[(t * out.h + 2 * i + di) * out.w + 2 * j + dj] = zr[(t * in.h + i) * in.w + j] + bias[co];
      }
    }
  }
  return y;
}

template <typename Real>
Tensor<Real> upconv_backward(const Tensor<Real>& x, const Tensor<Real>& weight, const Tensor<Real>& grad_y,
                             Tensor<Real>& grad_weight, Tensor<Real>& grad_bias) {
  const Dims5 in = dims_of(x.shape());
  const std::size_t cout = weight.dim(1);
  const Dims5 out{in.n, cout, in.t, in.h * 2, in.w * 2};
  require_same_shape(out.shape(), grad_y.shape(), "upconv_backward");
  const std::size_t p = in.volume();
  RowMatrix<Real> wt(static_cast<Eigen::Index>(cout * 4), static_cast<Eigen::Index>(in.c));
  for (std::size_t ci = 0; ci < in.c; ++ci)
    for (std::size_t co = 0; co < cout; ++co)
      for (std::size_t kk = 0; kk < 4; ++kk)
        wt(static_cast<Eigen::Index>(co * 4 + kk), static_cast<Eigen::Index>(ci)) = weight[(ci * cout + co) * 4 + kk];
  RowMatrix<Real> gz(static_cast<Eigen::Index>(cout * 4), static_cast<Eigen::Index>(p));
  RowMatrix<Real> gwt = RowMatrix<Real>::Zero(static_cast<Eigen::Index>(cout * 4), static_cast<Eigen::Index>(in.c));
  Tensor<Real> gx(in.shape());
  for (std::size_t b = 0; b < in.n; ++b) {
    const Real* gyb = grad_y.data() + b * cout * out.volume();
    for (std::size_t co = 0; co < cout; ++co) {
      const Real* gyc = gyb + co * out.volume();
      Real bias_sum = 0;
      for (std::size_t kk = 0; kk < 4; ++kk) {
        const std::size_t di = kk / 2, dj = kk % 2;
        Real* zr = gz.data() + (co * 4 + kk) * p;
        for (std::size_t t = 0; t < in.t; ++t)
          for (std::size_t i = 0; i < in.h; ++i)
            for (std::size_t j = 0; j < in.w; ++j) {
              const Real v = gyc[(t * out.h + 2 * i + di) * out.w + 2 * j + dj];
              zr[(t * in.h + i) * in.w + j] = v;
              bias_sum += v;
            }
      }
      grad_bias[co] += bias_sum;
    }
    ConstMatMap<Real> xb(x.data() + b * in.c * p, static_cast<Eigen::Index>(in.c), static_cast<Eigen::Index>(p));
    gwt.noalias() += gz * xb.transpose();
    MatMap<Real> gxb(gx.data() + b * in.c * p, static_cast<Eigen::Index>(in.c), static_cast<Eigen::Index>(p));
    gxb.noalias() = wt.transpose() * gz;
  }
  for (std::size_t ci = 0; ci < in.c; ++ci)
    for (std::size_t co = 0; co < cout; ++co)
      for (std::size_t kk = 0; kk < 4; ++kk)
        grad_weight[(ci * cout + co) * 4 + kk] += gwt(static_cast<Eigen::Index>(co * 4 + kk), static_cast<Eigen::Index>(ci));
  return gx;
}

template <typename Real>
Tensor<Real> batchnorm_forward_train(const Tensor<Real>& x, const Tensor<Real>& gamma, const Tensor<Real>& beta,
                                     Tensor<Real>& running_mean, Tensor<Real>& running_var,
                                     BatchNormCache<Real>& cache) {
  const Dims5 d = dims_of(x.shape());
  const std::size_t vol = d.volume();
  const std::size_t count = d.n * vol;
  Tensor<Real> y(x.shape());
  cache.normalized = Tensor<Real>(x.shape());
  cache.inv_std.assign(d.c, Real(0));
  for (std::size_t c = 0; c < d.c; ++c) {
    double sum = 0.0;
    for (std::size_t b = 0; b < d.n; ++b) {
      const Real* p = x.data() + (b * d.c + c) * vol;
      for (std::size_t i = 0; i < vol; ++i) sum += p[i];
    }
    const double mean = sum / static_cast<double>(count);
    double sq = 0.0;
    for (std::size_t b = 0; b < d.n; ++b) {
      const Real* p = x.data() + (b * d.c + c) * vol;
      for (std::size_t i = 0; i < vol; ++i) sq += (p[i] - mean) * (p[i] - mean);
    }
    const double var = sq / static_cast<double>(count);
    const Real inv_std = static_cast<Real>(1.0 / std::sqrt(var + kBatchNormEpsilon));
    cache.inv_std[c] = inv_std;
    const Real m = static_cast<Real>(mean);
    for (std::size_t b = 0; b < d.n; ++b) {
      const std::size_t off = (b * d.c + c) * vol;
      for (std::size_t i = 0; i < vol; ++i) {
        const Real xh = (x[off + i] - m) * inv_std;
        cache.normalized[off + i] = xh;
        y[off + i] = gamma[c] * xh + beta[c];
      }
    }
    const double unbiased = count > 1 ? var * static_cast<double>(count) / static_cast<double>(count - 1) : var;
    running_mean[c] = static_cast<Real>((1.0 - kBatchNormMomentum) * running_mean[c] + kBatchNormMomentum * mean);
    running_var[c] = static_cast<Real>((1.0 - kBatchNormMomentum) * running_var[c] + kBatchNormMomentum * unbiased);
  }
  return y;
}

template <typename Real>
Tensor<Real> batchnorm_forward_eval(const Tensor<Real>& x, const Tensor<Real>& gamma, const Tensor<Real>& beta,
                                    const Tensor<Real>& running_mean, const Tensor<Real>& running_var) {
  const Dims5 d = dims_of(x.shape());
  const std::size_t vol = d.volume();
  Tensor<Real> y(x.shape());
  for (std::size_t c = 0; c < d.c; ++c) {
    const Real scale = gamma[c] / static_cast<Real>(std::sqrt(static_cast<double>(running_var[c]) + kBatchNormEpsilon));
    const Real shift = beta[c] - running_mean[c] * scale;
    for (std::size_t b = 0; b < d.n; ++b) {
      const std::size_t off = (b * d.c + c) * vol;
      for (std::size_t i = 0; i < vol; ++i) y[off + i] = x[off + i] * scale + shift;
    }
  }
  return y;
}

template <typename Real>
Tensor<Real> batchnorm_backward(const BatchNormCache<Real>& cache, const Tensor<Real>& gamma,
                                const Tensor<Real>& grad_y, Tensor<Real>& grad_gamma, Tensor<Real>& grad_beta) {
  const Dims5 d = dims_of(grad_y.shape());
  const std::size_t vol = d.volume();
  const Real count = static_cast<Real>(d.n * vol);
  Tensor<Real> gx(grad_y.shape());
  for (std::size_t c = 0; c < d.c; ++c) {
    Real sum_g = 0, sum_gx = 0;
    for (std::size_t b = 0; b < d.n; ++b) {
      const std::size_t off = (b * d.c + c) * vol;
      for (std::size_t i = 0; i < vol; ++i) {
        sum_g += grad_y[off + i];
        sum_gx += grad_y[off + i] * cache.normalized[off + i];
      }
    }
    grad_gamma[c] += sum_gx;
    grad_beta[c] += sum_g;
    const Real k = gamma[c] * cache.inv_std[c] / count;
    for (std::size_t b = 0; b < d.n; ++b) {
      const std::size_t off = (b * d.c + c) * vol;
      for (std::size_t i = 0; i < vol; ++i) {
        gx[off + i] = k * (count * grad_y[off + i] - sum_g - cache.normalized[off + i] * sum_gx);
      }
    }
  }
  return gx;
}

template <typename Real>
void relu_inplace(Tensor<Real>& x) {
  for (Real& v : x.values()) v = v > Real(0) ? v : Real(0);
}

template <typename Real>
void relu_backward_inplace(const Tensor<Real>& y, Tensor<Real>& grad) {
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!(y[i] > Real(0))) grad[i] = Real(0);
  }
}

namespace {

template <typename Real>
Real logistic(Real z) {
  return Real(1) / (Real(1) + std::exp(-z));
}

}  // namespace

template <typename Real>
Tensor<Real> se_forward_batch(const Tensor<Real>& x, const Tensor<Real>& reduce_weight,
                              const Tensor<Real>& reduce_bias, const Tensor<Real>& expand_weight,
                              const Tensor<Real>& expand_bias, SqueezeExciteCache<Real>* cache) {
  const Dims5 d = dims_of(x.shape());
  const std::size_t hidden = reduce_weight.dim(0);
  if (reduce_weight.dim(1) != d.c || expand_weight.dim(0) != d.c || expand_weight.dim(1) != hidden) {
    throw std::invalid_argument("se_forward: weight shapes do not match " + std::to_string(d.c) + " channels");
  }
  const std::size_t vol = d.volume();
  Tensor<Real> squeezed({d.n, d.c}), act({d.n, hidden}), gates({d.n, d.c});
  Tensor<Real> y(x.shape());
  for (std::size_t b = 0; b < d.n; ++b) {
    for (std::size_t c = 0; c < d.c; ++c) {
      const Real* p = x.data() + (b * d.c + c) * vol;
      Real s = 0;
      for (std::size_t i = 0; i < vol; ++i) s += p[i];
      squeezed[b * d.c + c] = s / static_cast<Real>(vol);
    }
    for (std::size_t j = 0; j < hidden; ++j) {
      Real z = reduce_bias[j];
      for (std::size_t c = 0; c < d.c; ++c) z += reduce_weight[j * d.c + c] * squeezed[b * d.c + c];
      act[b * hidden + j] = z > Real(0) ? z : Real(0);
    }
    for (std::size_t c = 0; c < d.c; ++c) {
      Real z = expand_bias[c];
      for (std::size_t j = 0; j < hidden; ++j) z += expand_weight[c * hidden + j] * act[b * hidden + j];
      const Real g = logistic(z);
      gates[b * d.c + c] = g;
      const std::size_t off = (b * d.c + c) * vol;
      for (std::size_t i = 0; i < vol; ++i) y[off + i] = x[off + i] * g;
    }
  }
  if (cache) {
    cache->input = x;
    cache->squeezed = std::move(squeezed);
    cache->hidden = std::move(act);
    cache->gates = std::move(gates);
  }
  return y;
}

template <typename Real>
Tensor<Real> se_backward_batch(const SqueezeExciteCache<Real>& cache, const Tensor<Real>& reduce_weight,
                               const Tensor<Real>& expand_weight, const Tensor<Real>& grad_y,
                               Tensor<Real>& grad_reduce_weight, Tensor<Real>& grad_reduce_bias,
                               Tensor<Real>& grad_expand_weight, Tensor<Real>& grad_expand_bias) {
  const Dims5 d = dims_of(grad_y.shape());
  const std::size_t hidden = reduce_weight.dim(0);
  const std::size_t vol = d.volume();
  const Tensor<Real>& x = cache.input;
  Tensor<Real> gx(x.shape());
  std::vector<Real> g_pre(d.c), g_hidden(hidden), g_squeeze(d.c);
  for (std::size_t b = 0; b < d.n; ++b) {
    for (std::size_t c = 0; c < d.c; ++c) {
      const std::size_t off = (b * d.c + c) * vol;
      Real dg = 0;
      for (std::size_t i = 0; i < vol; ++i) dg += grad_y[off + i] * x[off + i];
      const Real g = cache.gates[b * d.c + c];
      g_pre[c] = dg * g * (Real(1) - g);
      grad_expand_bias[c] += g_pre[c];
    }
    std::fill(g_hidden.begin(), g_hidden.end(), Real(0));
    for (std::size_t c = 0; c < d.c; ++c) {
      for (std::size_t j = 0; j < hidden; ++j) {
        grad_expand_weight[c * hidden + j] += g_pre[c] * cache.hidden[b * hidden + j];
        g_hidden[j] += expand_weight[c * hidden + j] * g_pre[c];
      }
    }
    std::fill(g_squeeze.begin(), g_squeeze.end(), Real(0));
    for (std::size_t j = 0; j < hidden; ++j) {
      if (!(cache.hidden[b * hidden + j] > Real(0))) continue;
      grad_reduce_bias[j] += g_hidden[j];
      for (std::size_t c = 0; c < d.c; ++c) {
        grad_reduce_weight[j * d.c + c] += g_hidden[j] * cache.squeezed[b * d.c + c];
        g_squeeze[c] += reduce_weight[j * d.c + c] * g_hidden[j];
      }
    }
    for (std::size_t c = 0; c < d.c; ++c) {
      const std::size_t off = (b * d.c + c) * vol;
      const Real g = cache.gates[b * d.c + c];
      const Real pooled = g_squeeze[c] / static_cast<Real>(vol);
      for (std::size_t i = 0; i < vol; ++i) gx[off + i] = grad_y[off + i] * g + pooled;
    }
  }
  return gx;
}

template <typename Real>
Tensor<Real> se_forward(const Tensor<Real>& features, std::size_t reduction, const SqueezeExciteWeights<Real>& weights,
                        std::vector<Real>* gates) {
  if (features.rank() != 4) throw std::invalid_argument("se_forward: expected (C, T, H, W) features");
  const std::size_t channels = features.dim(0);
  if (reduction == 0 || channels % reduction != 0) {
    throw std::invalid_argument("se_forward: reduction " + std::to_string(reduction) + " does not divide " +
                                std::to_string(channels) + " channels");
  }
  Shape batched{1};
  batched.insert(batched.end(), features.shape().begin(), features.shape().end());
  Tensor<Real> x(batched, features.storage());
  SqueezeExciteCache<Real> cache;
  Tensor<Real> y = se_forward_batch(x, weights.reduce_weight, weights.reduce_bias, weights.expand_weight,
                                    weights.expand_bias, &cache);
  if (gates) gates->assign(cache.gates.values().begin(), cache.gates.values().end());
  return Tensor<Real>(features.shape(), std::move(y.storage()));
}

template <typename Real>
Tensor<Real> concat_channels(const Tensor<Real>& a, const Tensor<Real>& b) {
  const Dims5 da = dims_of(a.shape()), db = dims_of(b.shape());
  if (da.n != db.n || da.t != db.t || da.h != db.h || da.w != db.w) {
    throw std::invalid_argument("concat_channels: incompatible shapes " + shape_to_string(a.shape()) + " and " +
                                shape_to_string(b.shape()));
  }
  const std::size_t vol = da.volume();
  Tensor<Real> out({da.n, da.c + db.c, da.t, da.h, da.w});
  for (std::size_t n = 0; n < da.n; ++n) {
    Real* dst = out.data() + n * (da.c + db.c) * vol;
    std::copy_n(a.data() + n * da.c * vol, da.c * vol, dst);
    std::copy_n(b.data() + n * db.c * vol, db.c * vol, dst + da.c * vol);
  }
  return out;
}

template <typename Real>
void split_channels(const Tensor<Real>& g, std::size_t first_channels, Tensor<Real>& ga, Tensor<Real>& gb) {
  const Dims5 d = dims_of(g.shape());
  const std::size_t second = d.c - first_channels, vol = d.volume();
  ga = Tensor<Real>({d.n, first_channels, d.t, d.h, d.w});
  gb = Tensor<Real>({d.n, second, d.t, d.h, d.w});
  for (std::size_t n = 0; n < d.n; ++n) {
    const Real* src = g.data() + n * d.c * vol;
    std::copy_n(src, first_channels * vol, ga.data() + n * first_channels * vol);
    std::copy_n(src + first_channels * vol, second * vol, gb.data() + n * second * vol);
  }
}

#define STINT_INSTANTIATE_LAYERS(Real)                                                                              \
  template Tensor<Real> conv3d_forward(const Tensor<Real>&, const Tensor<Real>&, const Tensor<Real>*,               \
                                       const ConvGeometry&);                                                       \
  template Tensor<Real> conv3d_backward(const Tensor<Real>&, const Tensor<Real>&, const Tensor<Real>&,              \
                                        const ConvGeometry&, Tensor<Real>&, Tensor<Real>*);                        \
  template Tensor<Real> upconv_forward(const Tensor<Real>&, const Tensor<Real>&, const Tensor<Real>&);              \
  template Tensor<Real> upconv_backward(const Tensor<Real>&, const Tensor<Real>&, const Tensor<Real>&,              \
                                        Tensor<Real>&, Tensor<Real>&);                                             \
  template Tensor<Real> batchnorm_forward_train(const Tensor<Real>&, const Tensor<Real>&, const Tensor<Real>&,      \
                                                Tensor<Real>&, Tensor<Real>&, BatchNormCache<Real>&);              \
  template Tensor<Real> batchnorm_forward_eval(const Tensor<Real>&, const Tensor<Real>&, const Tensor<Real>&,       \
                                               const Tensor<Real>&, const Tensor<Real>&);                          \
  template Tensor<Real> batchnorm_backward(const BatchNormCache<Real>&, const Tensor<Real>&, const Tensor<Real>&,   \
                                           Tensor<Real>&, Tensor<Real>&);                                          \
  template void relu_inplace(Tensor<Real>&);                                                                        \
  template void relu_backward_inplace(const Tensor<Real>&, Tensor<Real>&);                                          \
  template Tensor<Real> se_forward_batch(const Tensor<Real>&, const Tensor<Real>&, const Tensor<Real>&,             \
                                         const Tensor<Real>&, const Tensor<Real>&, SqueezeExciteCache<Real>*);     \
  template Tensor<Real> se_backward_batch(const SqueezeExciteCache<Real>&, const Tensor<Real>&, const Tensor<Real>&, \
                                          const Tensor<Real>&, Tensor<Real>&, Tensor<Real>&, Tensor<Real>&,        \
                                          Tensor<Real>&);                                                          \
  template Tensor<Real> se_forward(const Tensor<Real>&, std::size_t, const SqueezeExciteWeights<Real>&,             \
                                   std::vector<Real>*);                                                            \
  template Tensor<Real> concat_channels(const Tensor<Real>&, const Tensor<Real>&);                                  \
  template void split_channels(const Tensor<Real>&, std::size_t, Tensor<Real>&, Tensor<Real>&);

STINT_INSTANTIATE_LAYERS(float)
STINT_INSTANTIATE_LAYERS(double)

}  // namespace stint::layers
