#include "stint/cycle.hpp"

#include <cmath>
#include <stdexcept>

namespace stint {

void validate_weights(const LossWeights& w) {
  const std::pair<const char*, double> fields[] = {
      {"lambda_cc1", w.lambda_cc1}, {"lambda_cc2", w.lambda_cc2}, {"gamma_cc1", w.gamma_cc1}, {"gamma_cc2", w.gamma_cc2}};
  for (const auto& [name, value] : fields) {
    if (!(value >= 0.0) || !std::isfinite(value)) {
      throw std::invalid_argument(std::string(name) + " must be finite and ≥ 0");
    }
  }
}

StagePredictions dual_cycle_forward(const PairModel& model, const TripletSample& t) {
  require_same_shape(t.i0.shape(), t.i1.shape(), "dual_cycle_forward");
  require_same_shape(t.i0.shape(), t.i2.shape(), "dual_cycle_forward");
  StagePredictions sp;
  FramePair first = model(t.i0, t.i1);
  FramePair second = model(t.i1, t.i2);
  FramePair third = model(first.f1, second.f1);
  FramePair fourth = model(first.f2, second.f2);
  sp.delta = std::move(first.f1);
  sp.two_delta = std::move(first.f2);
  sp.one_plus_delta = std::move(second.f1);
  sp.one_plus_two_delta = std::move(second.f2);
  sp.two_delta_2 = std::move(third.f1);
  sp.one_left = std::move(third.f2);
  sp.one_right = std::move(fourth.f1);
  sp.one_plus_delta_2 = std::move(fourth.f2);
  return sp;
}

StagePredictions dual_cycle_forward(const InterpolationNetwork<float>& net, const TripletSample& triplet) {
  return dual_cycle_forward([&net](const Frame& a, const Frame& b) { return net.interpolate({a, b}); }, triplet);
}

template <typename T>
double mean_abs_error(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a.shape(), b.shape(), "mean_abs_error");
  if (a.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i]));
  return sum / static_cast<double>(a.size());
}

template <typename T>
void mean_abs_error_grad(const Tensor<T>& a, const Tensor<T>& b, double scale, Tensor<T>& grad) {
  require_same_shape(a.shape(), b.shape(), "mean_abs_error_grad");
  if (grad.shape() != a.shape()) grad = Tensor<T>(a.shape());
  const T step = static_cast<T>(scale / static_cast<double>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) {
      grad[i] += step;
    } else if (a[i] < b[i]) {
      grad[i] -= step;
    }
  }
}

template <typename T>
double cc1_loss(const StageTensors<T>& sp, const Tensor<T>& i1) {
  return mean_abs_error(i1, sp.one_left) + mean_abs_error(i1, sp.one_right);
}

template <typename T>
double cc2_loss(const StageTensors<T>& sp) {
  return 0.5 * (mean_abs_error(sp.two_delta, sp.two_delta_2) + mean_abs_error(sp.one_plus_delta, sp.one_plus_delta_2));
}

template <typename T>
void cc1_loss_grad(const StageTensors<T>& sp, const Tensor<T>& i1, double scale, StageTensors<T>& grad) {
  mean_abs_error_grad(sp.one_left, i1, scale, grad.one_left);
  mean_abs_error_grad(sp.one_right, i1, scale, grad.one_right);
}

template <typename T>
void cc2_loss_grad(const StageTensors<T>& sp, double scale, StageTensors<T>& grad) {
  mean_abs_error_grad(sp.two_delta, sp.two_delta_2, 0.5 * scale, grad.two_delta);
  mean_abs_error_grad(sp.two_delta_2, sp.two_delta, 0.5 * scale, grad.two_delta_2);
  mean_abs_error_grad(sp.one_plus_delta, sp.one_plus_delta_2, 0.5 * scale, grad.one_plus_delta);
  mean_abs_error_grad(sp.one_plus_delta_2, sp.one_plus_delta, 0.5 * scale, grad.one_plus_delta_2);
}

double reconstruction_loss(const FramePair& pred, const FramePair& gt) {
  return 0.5 * (mean_abs_error(pred.f1, gt.f1) + mean_abs_error(pred.f2, gt.f2));
}

double finetune_loss(const FramePair& pred, const FramePair& gt, const StagePredictions& sp, const Frame& i1,
                     const LossWeights& w) {
  return reconstruction_loss(pred, gt) + w.gamma_cc1 * cc1_loss(sp, i1) + w.gamma_cc2 * cc2_loss(sp);
}

template <typename Real>
Tensor<Real> stack_time(const Tensor<Real>& first, const Tensor<Real>& second) {
  require_same_shape(first.shape(), second.shape(), "stack_time");
  if (first.rank() != 4) throw std::invalid_argument("stack_time: expected (B, C, H, W)");
  const std::size_t n = first.dim(0), c = first.dim(1), h = first.dim(2), w = first.dim(3), plane = h * w;
  Tensor<Real> out({n, c, 2, h, w});
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      Real* dst = out.data() + (b * c + ch) * 2 * plane;
      std::copy_n(first.data() + (b * c + ch) * plane, plane, dst);
      std::copy_n(second.data() + (b * c + ch) * plane, plane, dst + plane);
    }
  }
  return out;
}

template <typename Real>
void split_time(const Tensor<Real>& stacked, Tensor<Real>& first, Tensor<Real>& second) {
  const auto d = layers::dims_of(stacked.shape());
  if (d.t != 2) throw std::invalid_argument("split_time: temporal extent must be 2");
  const std::size_t plane = d.h * d.w;
  first = Tensor<Real>({d.n, d.c, d.h, d.w});
  second = Tensor<Real>({d.n, d.c, d.h, d.w});
  for (std::size_t b = 0; b < d.n; ++b) {
    for (std::size_t ch = 0; ch < d.c; ++ch) {
      const Real* src = stacked.data() + (b * d.c + ch) * 2 * plane;
      std::copy_n(src, plane, first.data() + (b * d.c + ch) * plane);
      std::copy_n(src + plane, plane, second.data() + (b * d.c + ch) * plane);
    }
  }
}

namespace {

template <typename Real>
void add_into(Tensor<Real>& dst, const Tensor<Real>& src) {
  if (src.empty()) return;
  if (dst.empty()) {
    dst = src;
    return;
  }
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

template <typename Real>
Tensor<Real> or_zeros(const Tensor<Real>& g, const Shape& shape) {
  return g.empty() ? Tensor<Real>(shape) : g;
}

// Runs the four calls through `apply(stacked_input, call_index)`.
template <typename Real, typename Apply>
StageTensors<Real> compose(const TripletBatch<Real>& batch, Apply&& apply) {
  StageTensors<Real> s;
  split_time(apply(stack_time(batch.i0, batch.i1), 0), s.delta, s.two_delta);
  split_time(apply(stack_time(batch.i1, batch.i2), 1), s.one_plus_delta, s.one_plus_two_delta);
  split_time(apply(stack_time(s.delta, s.one_plus_delta), 2), s.two_delta_2, s.one_left);
  split_time(apply(stack_time(s.two_delta, s.one_plus_two_delta), 3), s.one_right, s.one_plus_delta_2);
  return s;
}

}  // namespace

template <typename Real>
void dual_cycle_train_forward(InterpolationNetwork<Real>& net, const TripletBatch<Real>& batch, CycleTape<Real>& tape) {
  tape.stages = compose(batch, [&](const Tensor<Real>& x, int call) { return net.forward(x, &tape.traces[call]); });
}

template <typename Real>
void dual_cycle_backward(InterpolationNetwork<Real>& net, const CycleTape<Real>& tape,
                         const StageTensors<Real>& stage_grads) {
  const Shape shape = tape.stages.delta.shape();
  StageTensors<Real> g = stage_grads;
  Tensor<Real> ga, gb;

  split_time(net.backward(tape.traces[2], stack_time(or_zeros(g.two_delta_2, shape), or_zeros(g.one_left, shape))), ga,
             gb);
  add_into(g.delta, ga);
  add_into(g.one_plus_delta, gb);

  split_time(net.backward(tape.traces[3],
                          stack_time(or_zeros(g.one_right, shape), or_zeros(g.one_plus_delta_2, shape))),
             ga, gb);
  add_into(g.two_delta, ga);
  add_into(g.one_plus_two_delta, gb);

  net.backward(tape.traces[0], stack_time(or_zeros(g.delta, shape), or_zeros(g.two_delta, shape)));
  net.backward(tape.traces[1], stack_time(or_zeros(g.one_plus_delta, shape), or_zeros(g.one_plus_two_delta, shape)));
}

template <typename Real>
LossTerms pretrain_objective(InterpolationNetwork<Real>& net, const TripletBatch<Real>& batch, const LossWeights& w,
                             bool with_grad) {
  CycleTape<Real> tape;
  dual_cycle_train_forward(net, batch, tape);
  LossTerms terms;
  terms.cc1 = cc1_loss(tape.stages, batch.i1);
  terms.cc2 = cc2_loss(tape.stages);
  terms.total = w.lambda_cc1 * terms.cc1 + w.lambda_cc2 * terms.cc2;
  if (with_grad) {
    StageTensors<Real> g;
    cc1_loss_grad(tape.stages, batch.i1, w.lambda_cc1, g);
    cc2_loss_grad(tape.stages, w.lambda_cc2, g);
    dual_cycle_backward(net, tape, g);
  }
  return terms;
}

template <typename Real>
LossTerms finetune_objective(InterpolationNetwork<Real>& net, const QuadrupleBatch<Real>& batch, const LossWeights& w,
                             bool with_grad) {
  ForwardTrace<Real> direct;
  Tensor<Real> p1, p2;
  split_time(net.forward(stack_time(batch.in_a, batch.in_b), with_grad ? &direct : nullptr), p1, p2);
  CycleTape<Real> tape;
  const bool cycle = w.gamma_cc1 > 0.0 || w.gamma_cc2 > 0.0;
  LossTerms terms;
  terms.reconstruction = 0.5 * (mean_abs_error(p1, batch.gt_1) + mean_abs_error(p2, batch.gt_2));
  if (cycle) {
    dual_cycle_train_forward(net, batch.coarse, tape);
    terms.cc1 = cc1_loss(tape.stages, batch.coarse.i1);
    terms.cc2 = cc2_loss(tape.stages);
  }
  terms.total = terms.reconstruction + w.gamma_cc1 * terms.cc1 + w.gamma_cc2 * terms.cc2;
  if (with_grad) {
    Tensor<Real> g1, g2;
    mean_abs_error_grad(p1, batch.gt_1, 0.5, g1);
    mean_abs_error_grad(p2, batch.gt_2, 0.5, g2);
    net.backward(direct, stack_time(g1, g2));
    if (cycle) {
      StageTensors<Real> g;
      cc1_loss_grad(tape.stages, batch.coarse.i1, w.gamma_cc1, g);
      cc2_loss_grad(tape.stages, w.gamma_cc2, g);
      dual_cycle_backward(net, tape, g);
    }
  }
  return terms;
}

template <typename Real>
LossTerms pretrain_loss_eval(const InterpolationNetwork<Real>& net, const TripletBatch<Real>& batch,
                             const LossWeights& w) {
  const auto s = compose(batch, [&](const Tensor<Real>& x, int) { return net.infer(x); });
  LossTerms terms;
  terms.cc1 = cc1_loss(s, batch.i1);
  terms.cc2 = cc2_loss(s);
  terms.total = w.lambda_cc1 * terms.cc1 + w.lambda_cc2 * terms.cc2;
  return terms;
}

template <typename Real>
LossTerms finetune_loss_eval(const InterpolationNetwork<Real>& net, const QuadrupleBatch<Real>& batch,
                             const LossWeights& w) {
  Tensor<Real> p1, p2;
  split_time(net.infer(stack_time(batch.in_a, batch.in_b)), p1, p2);
  LossTerms terms;
  terms.reconstruction = 0.5 * (mean_abs_error(p1, batch.gt_1) + mean_abs_error(p2, batch.gt_2));
  if (w.gamma_cc1 > 0.0 || w.gamma_cc2 > 0.0) {
    const auto s = compose(batch.coarse, [&](const Tensor<Real>& x, int) { return net.infer(x); });
    terms.cc1 = cc1_loss(s, batch.coarse.i1);
    terms.cc2 = cc2_loss(s);
  }
  terms.total = terms.reconstruction + w.gamma_cc1 * terms.cc1 + w.gamma_cc2 * terms.cc2;
  return terms;
}

#define STINT_INSTANTIATE_LOSSES(T)                                                                      \
  template double mean_abs_error(const Tensor<T>&, const Tensor<T>&);                                    \
  template void mean_abs_error_grad(const Tensor<T>&, const Tensor<T>&, double, Tensor<T>&);             \
  template double cc1_loss(const StageTensors<T>&, const Tensor<T>&);                                    \
  template double cc2_loss(const StageTensors<T>&);                                                      \
  template void cc1_loss_grad(const StageTensors<T>&, const Tensor<T>&, double, StageTensors<T>&);       \
  template void cc2_loss_grad(const StageTensors<T>&, double, StageTensors<T>&);                         \
  template Tensor<T> stack_time(const Tensor<T>&, const Tensor<T>&);                                     \
  template void split_time(const Tensor<T>&, Tensor<T>&, Tensor<T>&);                                    \
  template void dual_cycle_train_forward(InterpolationNetwork<T>&, const TripletBatch<T>&, CycleTape<T>&); \
  template void dual_cycle_backward(InterpolationNetwork<T>&, const CycleTape<T>&, const StageTensors<T>&); \
  template LossTerms pretrain_objective(InterpolationNetwork<T>&, const TripletBatch<T>&, const LossWeights&, bool); \
  template LossTerms finetune_objective(InterpolationNetwork<T>&, const QuadrupleBatch<T>&, const LossWeights&, bool); \
  template LossTerms pretrain_loss_eval(const InterpolationNetwork<T>&, const TripletBatch<T>&, const LossWeights&); \
  template LossTerms finetune_loss_eval(const InterpolationNetwork<T>&, const QuadrupleBatch<T>&, const LossWeights&);

STINT_INSTANTIATE_LOSSES(float)
STINT_INSTANTIATE_LOSSES(double)

}  // namespace stint
