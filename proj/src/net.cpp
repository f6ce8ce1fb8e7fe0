#include "stint/net.hpp"

#include <cmath>
#include <random>

namespace stint {

NetConfig NetConfig::desk() { return NetConfig{1, 8, 3, 4, true}; }

NetConfig NetConfig::paper_scale() { return NetConfig{1, 40, 5, 8, true}; }

void validate_frame_size(const NetConfig& config, std::size_t height, std::size_t width) {
  const std::size_t m = config.spatial_multiple();
  if (height % m != 0 || width % m != 0) {
    throw ConfigError("frame size " + std::to_string(height) + "x" + std::to_string(width) +
                      " is not divisible by " + std::to_string(m) + " (2^(depth-1))");
  }
}

void validate_config(const NetConfig& config) {
  if (config.in_channels < 1) throw ConfigError("in_channels must be ≥ 1");
  if (config.base_width < 1) throw ConfigError("base_width must be ≥ 1");
  if (config.depth < 1) throw ConfigError("depth must be ≥ 1");
  if (config.depth > 16) throw ConfigError("depth must be ≤ 16");
  if (config.se_reduction < 1) throw ConfigError("se_reduction must be ≥ 1");
  for (std::size_t level = 0; level < config.depth; ++level) {
    const std::size_t channels = config.width_at(level);
    if (channels % config.se_reduction != 0) {
      throw ConfigError("se_reduction " + std::to_string(config.se_reduction) + " does not divide " +
                        std::to_string(channels) + " channels at level " + std::to_string(level));
    }
  }
}

std::vector<std::string> config_mismatches(const NetConfig& expected, const NetConfig& actual) {
  std::vector<std::string> out;
  if (expected.in_channels != actual.in_channels) out.emplace_back("in_channels");
  if (expected.base_width != actual.base_width) out.emplace_back("base_width");
  if (expected.depth != actual.depth) out.emplace_back("depth");
  if (expected.se_reduction != actual.se_reduction) out.emplace_back("se_reduction");
  if (expected.use_batchnorm != actual.use_batchnorm) out.emplace_back("use_batchnorm");
  return out;
}

template <typename Real>
InterpolationNetwork<Real>::InterpolationNetwork(const NetConfig& config, std::uint64_t seed) : config_(config) {
  validate_config(config);
  const bool bn = config.use_batchnorm;
  const std::array<std::size_t, 3> k3{3, 3, 3}, one{1, 1, 1}, zero{0, 0, 0}, down_stride{1, 2, 2};
  for (std::size_t level = 0; level < config.depth; ++level) {
    const std::string prefix = "enc" + std::to_string(level);
    const std::size_t width = config.width_at(level);
    std::size_t cin = config.in_channels;
    if (level > 0) {
      cin = config.width_at(level - 1);
      down_.push_back(make_conv(prefix + ".down", cin, cin, k3, down_stride, one, bn, true));
    }
    enc_.push_back({make_conv(prefix + ".conv0", cin, width, k3, one, one, bn, true),
                    make_conv(prefix + ".conv1", width, width, k3, one, one, bn, true)});
    se_.push_back(make_se(prefix + ".se", width));
  }
  for (std::size_t level = 0; level + 1 < config.depth; ++level) {
    const std::string prefix = "dec" + std::to_string(level);
    const std::size_t width = config.width_at(level);
    up_.push_back(make_up(prefix + ".up", config.width_at(level + 1), width));
    dec_.push_back({make_conv(prefix + ".conv0", 2 * width, width, k3, one, one, bn, true),
                    make_conv(prefix + ".conv1", width, width, k3, one, one, bn, true)});
  }
  head_ = make_conv("head", config.width_at(0), config.in_channels, one, one, zero, false, false);
  initialize(seed);
}

template <typename Real>
std::size_t InterpolationNetwork<Real>::add_param(std::string name, Shape shape) {
  Tensor<Real> value(shape);
  Tensor<Real> grad(std::move(shape));
  params_.push_back({std::move(name), std::move(value), std::move(grad)});
  return params_.size() - 1;
}

template <typename Real>
std::size_t InterpolationNetwork<Real>::add_buffer(std::string name, Shape shape, Real fill) {
  buffers_.push_back({std::move(name), Tensor<Real>(std::move(shape), fill)});
  return buffers_.size() - 1;
}

template <typename Real>
typename InterpolationNetwork<Real>::ConvUnit InterpolationNetwork<Real>::make_conv(
    const std::string& name, std::size_t cin, std::size_t cout, std::array<std::size_t, 3> kernel,
    std::array<std::size_t, 3> stride, std::array<std::size_t, 3> padding, bool batchnorm, bool relu) {
  ConvUnit unit;
  unit.geom = layers::ConvGeometry{cin, cout, kernel, stride, padding};
  unit.batchnorm = batchnorm;
  unit.relu = relu;
  unit.weight = add_param(name + ".weight", unit.geom.weight_shape());
  if (batchnorm) {
    unit.gamma = add_param(name + ".bn.gamma", {cout});
    unit.beta = add_param(name + ".bn.beta", {cout});
    unit.running_mean = add_buffer(name + ".bn.running_mean", {cout}, Real(0));
    unit.running_var = add_buffer(name + ".bn.running_var", {cout}, Real(1));
  } else {
    unit.bias = add_param(name + ".bias", {cout});
  }
  return unit;
}

template <typename Real>
typename InterpolationNetwork<Real>::SEUnit InterpolationNetwork<Real>::make_se(const std::string& name,
                                                                               std::size_t channels) {
  const std::size_t hidden = channels / config_.se_reduction;
  SEUnit unit;
  unit.reduce_weight = add_param(name + ".reduce.weight", {hidden, channels});
  unit.reduce_bias = add_param(name + ".reduce.bias", {hidden});
  unit.expand_weight = add_param(name + ".expand.weight", {channels, hidden});
  unit.expand_bias = add_param(name + ".expand.bias", {channels});
  return unit;
}

template <typename Real>
typename InterpolationNetwork<Real>::UpUnit InterpolationNetwork<Real>::make_up(const std::string& name,
                                                                               std::size_t cin, std::size_t cout) {
  UpUnit unit;
  unit.weight = add_param(name + ".weight", {cin, cout, 1, 2, 2});
  unit.bias = add_param(name + ".bias", {cout});
  return unit;
}

template <typename Real>
void InterpolationNetwork<Real>::initialize(std::uint64_t seed) {
  // He-normal for convolutions, 1/sqrt(fan_in) for the SE linear maps, unit
  // scale / zero shift for batch norm, zero biases.
  std::mt19937_64 rng(seed);
  for (auto& p : params_) {
    const std::string& n = p.name;
    auto ends_with = [&n](std::string_view suffix) {
      return n.size() >= suffix.size() && n.compare(n.size() - suffix.size(), suffix.size(), suffix) == 0;
    };
    if (ends_with(".bn.gamma")) {
      p.value.fill(Real(1));
    } else if (ends_with(".bias") || ends_with(".bn.beta")) {
      p.value.fill(Real(0));
    } else {
      double stddev = 0.0;
      if (n.find(".se.") != std::string::npos) {
        stddev = 1.0 / std::sqrt(static_cast<double>(p.value.dim(1)));
      } else if (n.find(".up.") != std::string::npos) {
        stddev = std::sqrt(2.0 / static_cast<double>(p.value.dim(0)));
      } else {
        const double fan_in = static_cast<double>(p.value.size() / p.value.dim(0));
        stddev = std::sqrt((ends_with("head.weight") ? 1.0 : 2.0) / fan_in);
      }
      std::normal_distribution<double> dist(0.0, stddev);
      for (Real& v : p.value.values()) v = static_cast<Real>(dist(rng));
    }
  }
}

template <typename Real>
void InterpolationNetwork<Real>::check_input(const Shape& s) const {
  if (s.size() != 5 || s[0] < 1 || s[1] != config_.in_channels || s[2] != 2 || s[3] == 0 || s[4] == 0) {
    throw std::invalid_argument("network input: expected (batch, " + std::to_string(config_.in_channels) +
                                ", 2, H, W), got " + shape_to_string(s));
  }
  validate_frame_size(config_, s[3], s[4]);
}

template <typename Real>
Tensor<Real> InterpolationNetwork<Real>::conv_train(const ConvUnit& unit, const Tensor<Real>& x,
                                                    ConvTrace<Real>* trace) {
  Tensor<Real> y = layers::conv3d_forward(x, params_[unit.weight].value,
                                          unit.batchnorm ? nullptr : &params_[unit.bias].value, unit.geom);
  layers::BatchNormCache<Real> scratch;
  auto& bn_cache = trace ? trace->batchnorm : scratch;
  if (unit.batchnorm) {
    y = layers::batchnorm_forward_train(y, params_[unit.gamma].value, params_[unit.beta].value,
                                        buffers_[unit.running_mean].value, buffers_[unit.running_var].value,
                                        bn_cache);
  }
  if (unit.relu) layers::relu_inplace(y);
  if (trace) {
    trace->input = x;
    trace->output = y;
  }
  return y;
}

template <typename Real>
Tensor<Real> InterpolationNetwork<Real>::conv_eval(const ConvUnit& unit, const Tensor<Real>& x) const {
  Tensor<Real> y = layers::conv3d_forward(x, params_[unit.weight].value,
                                          unit.batchnorm ? nullptr : &params_[unit.bias].value, unit.geom);
  if (unit.batchnorm) {
    y = layers::batchnorm_forward_eval(y, params_[unit.gamma].value, params_[unit.beta].value,
                                       buffers_[unit.running_mean].value, buffers_[unit.running_var].value);
  }
  if (unit.relu) layers::relu_inplace(y);
  return y;
}

template <typename Real>
Tensor<Real> InterpolationNetwork<Real>::conv_backward(const ConvUnit& unit, const ConvTrace<Real>& trace,
                                                       Tensor<Real> grad) {
  if (unit.relu) layers::relu_backward_inplace(trace.output, grad);
  if (unit.batchnorm) {
    grad = layers::batchnorm_backward(trace.batchnorm, params_[unit.gamma].value, grad, params_[unit.gamma].grad,
                                      params_[unit.beta].grad);
  }
  return layers::conv3d_backward(trace.input, params_[unit.weight].value, grad, unit.geom, params_[unit.weight].grad,
                                 unit.batchnorm ? nullptr : &params_[unit.bias].grad);
}

template <typename Real>
Tensor<Real> InterpolationNetwork<Real>::se_apply(const SEUnit& unit, const Tensor<Real>& x,
                                                  layers::SqueezeExciteCache<Real>* cache) const {
  return layers::se_forward_batch(x, params_[unit.reduce_weight].value, params_[unit.reduce_bias].value,
                                  params_[unit.expand_weight].value, params_[unit.expand_bias].value, cache);
}

template <typename Real>
Tensor<Real> InterpolationNetwork<Real>::up_apply(const UpUnit& unit, const Tensor<Real>& x) const {
  return layers::upconv_forward(x, params_[unit.weight].value, params_[unit.bias].value);
}

template <typename Real>
Tensor<Real> InterpolationNetwork<Real>::forward(const Tensor<Real>& input, ForwardTrace<Real>* trace) {
  if (mode_ == Mode::eval) {
    if (trace) throw std::logic_error("forward trace requires train mode");
    return infer(input);
  }
  check_input(input.shape());
  const std::size_t depth = config_.depth;
  if (trace) {
    trace->input_shape = input.shape();
    trace->down.assign(depth - 1, {});
    trace->enc.assign(depth, {});
    trace->se.assign(depth, {});
    trace->up_inputs.assign(depth - 1, {});
    trace->dec.assign(depth - 1, {});
  }
  std::vector<Tensor<Real>> skips(depth);
  Tensor<Real> x = input;
  for (std::size_t level = 0; level < depth; ++level) {
    if (level > 0) x = conv_train(down_[level - 1], x, trace ? &trace->down[level - 1] : nullptr);
    x = conv_train(enc_[level][0], x, trace ? &trace->enc[level][0] : nullptr);
    x = conv_train(enc_[level][1], x, trace ? &trace->enc[level][1] : nullptr);
    x = se_apply(se_[level], x, trace ? &trace->se[level] : nullptr);
    skips[level] = x;
  }
  for (std::size_t level = depth - 1; level-- > 0;) {
    if (trace) trace->up_inputs[level] = x;
    Tensor<Real> up = up_apply(up_[level], x);
    x = layers::concat_channels(skips[level], up);
    x = conv_train(dec_[level][0], x, trace ? &trace->dec[level][0] : nullptr);
    x = conv_train(dec_[level][1], x, trace ? &trace->dec[level][1] : nullptr);
  }
  return conv_train(head_, x, trace ? &trace->head : nullptr);
}

template <typename Real>
Tensor<Real> InterpolationNetwork<Real>::infer(const Tensor<Real>& input) const {
  check_input(input.shape());
  const std::size_t depth = config_.depth;
  std::vector<Tensor<Real>> skips(depth);
  Tensor<Real> x = input;
  for (std::size_t level = 0; level < depth; ++level) {
    if (level > 0) x = conv_eval(down_[level - 1], x);
    x = conv_eval(enc_[level][0], x);
    x = conv_eval(enc_[level][1], x);
    x = se_apply(se_[level], x, nullptr);
    skips[level] = x;
  }
  for (std::size_t level = depth - 1; level-- > 0;) {
    Tensor<Real> up = up_apply(up_[level], x);
    x = layers::concat_channels(skips[level], up);
    x = conv_eval(dec_[level][0], x);
    x = conv_eval(dec_[level][1], x);
  }
  return conv_eval(head_, x);
}

template <typename Real>
Tensor<Real> InterpolationNetwork<Real>::backward(const ForwardTrace<Real>& trace, const Tensor<Real>& grad_output) {
  const std::size_t depth = config_.depth;
  if (trace.enc.size() != depth) throw std::logic_error("backward: trace does not belong to this network");
  Tensor<Real> g = conv_backward(head_, trace.head, grad_output);
  std::vector<Tensor<Real>> skip_grads(depth);
  for (std::size_t level = 0; level + 1 < depth; ++level) {
    g = conv_backward(dec_[level][1], trace.dec[level][1], std::move(g));
    g = conv_backward(dec_[level][0], trace.dec[level][0], std::move(g));
    Tensor<Real> g_up;
    layers::split_channels(g, config_.width_at(level), skip_grads[level], g_up);
    const UpUnit& up = up_[level];
    g = layers::upconv_backward(trace.up_inputs[level], params_[up.weight].value, g_up, params_[up.weight].grad,
                                params_[up.bias].grad);
  }
  for (std::size_t level = depth; level-- > 0;) {
    if (level + 1 < depth) {
      const Tensor<Real>& extra = skip_grads[level];
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += extra[i];
    }
    const SEUnit& se = se_[level];
    g = layers::se_backward_batch(trace.se[level], params_[se.reduce_weight].value, params_[se.expand_weight].value, g,
                                  params_[se.reduce_weight].grad, params_[se.reduce_bias].grad,
                                  params_[se.expand_weight].grad, params_[se.expand_bias].grad);
    g = conv_backward(enc_[level][1], trace.enc[level][1], std::move(g));
    g = conv_backward(enc_[level][0], trace.enc[level][0], std::move(g));
    if (level > 0) g = conv_backward(down_[level - 1], trace.down[level - 1], std::move(g));
  }
  return g;
}

template <typename Real>
FramePair InterpolationNetwork<Real>::interpolate(const FramePair& pair) const {
  require_same_shape(pair.f1.shape(), pair.f2.shape(), "interpolate");
  if (pair.f1.rank() != 3) {
    throw std::invalid_argument("interpolate: expected (C, H, W) frames, got " + shape_to_string(pair.f1.shape()));
  }
  const Shape expected{1, config_.in_channels, 2, pair.f1.dim(1), pair.f1.dim(2)};
  check_input(expected);
  Tensor<Real> input = pack_pairs<Real>({&pair.f1}, {&pair.f2});
  return unpack_pair(infer(input), 0);
}

template <typename Real>
void InterpolationNetwork<Real>::zero_grad() {
  for (auto& p : params_) p.grad.fill(Real(0));
}

template <typename Real>
std::size_t InterpolationNetwork<Real>::count_parameters() const {
  std::size_t total = 0;
  for (const auto& p : params_) total += p.value.size();
  return total;
}

InterpolationNetwork<float> build_network(const NetConfig& config, std::uint64_t seed) {
  return InterpolationNetwork<float>(config, seed);
}

template <typename Real>
Tensor<Real> pack_pairs(const std::vector<const Frame*>& first, const std::vector<const Frame*>& second) {
  if (first.empty() || first.size() != second.size()) throw std::invalid_argument("pack_pairs: bad batch");
  const Shape fshape = first.front()->shape();
  if (fshape.size() != 3) throw std::invalid_argument("pack_pairs: frames must be (C, H, W)");
  const std::size_t c = fshape[0], plane = fshape[1] * fshape[2];
  Tensor<Real> out({first.size(), c, 2, fshape[1], fshape[2]});
  for (std::size_t b = 0; b < first.size(); ++b) {
    require_same_shape(fshape, first[b]->shape(), "pack_pairs");
    require_same_shape(fshape, second[b]->shape(), "pack_pairs");
    for (std::size_t ch = 0; ch < c; ++ch) {
      Real* dst = out.data() + ((b * c + ch) * 2) * plane;
      const float* a = first[b]->data() + ch * plane;
      const float* z = second[b]->data() + ch * plane;
      for (std::size_t i = 0; i < plane; ++i) dst[i] = static_cast<Real>(a[i]);
      for (std::size_t i = 0; i < plane; ++i) dst[plane + i] = static_cast<Real>(z[i]);
    }
  }
  return out;
}

template <typename Real>
FramePair unpack_pair(const Tensor<Real>& output, std::size_t batch) {
  const auto d = layers::dims_of(output.shape());
  if (d.t != 2 || batch >= d.n) throw std::invalid_argument("unpack_pair: bad output shape");
  const std::size_t plane = d.h * d.w;
  FramePair pair{make_frame(d.c, d.h, d.w), make_frame(d.c, d.h, d.w)};
  for (std::size_t ch = 0; ch < d.c; ++ch) {
    const Real* src = output.data() + ((batch * d.c + ch) * 2) * plane;
    for (std::size_t i = 0; i < plane; ++i) pair.f1[ch * plane + i] = static_cast<float>(src[i]);
    for (std::size_t i = 0; i < plane; ++i) pair.f2[ch * plane + i] = static_cast<float>(src[plane + i]);
  }
  return pair;
}

template class InterpolationNetwork<float>;
template class InterpolationNetwork<double>;
template Tensor<float> pack_pairs<float>(const std::vector<const Frame*>&, const std::vector<const Frame*>&);
template Tensor<double> pack_pairs<double>(const std::vector<const Frame*>&, const std::vector<const Frame*>&);
template FramePair unpack_pair<float>(const Tensor<float>&, std::size_t);
template FramePair unpack_pair<double>(const Tensor<double>&, std::size_t);

}  // namespace stint
