#pragma once

#include <functional>

#include "stint/net.hpp"
#include "stint/seqdata.hpp"
#include "stint/tensor.hpp"

namespace stint {

/// The eight frames of the two-stage composition. With M the interpolation map
/// and a triplet (I0, I1, I2):
///   stage 1: (delta, two_delta)                 = M(I0, I1)
///            (one_plus_delta, one_plus_two_delta) = M(I1, I2)
///   stage 2: (two_delta_2, one_left)            = M(delta, one_plus_delta)
///            (one_right, one_plus_delta_2)        = M(two_delta, one_plus_two_delta)
/// Works over single frames (C, H, W) or batches (B, C, H, W).
template <typename T>
struct StageTensors {
  Tensor<T> delta, two_delta, one_plus_delta, one_plus_two_delta;
  Tensor<T> two_delta_2, one_left, one_right, one_plus_delta_2;
};

using StagePredictions = StageTensors<float>;

struct LossWeights {
  double lambda_cc1 = 0.65;
  double lambda_cc2 = 0.35;
  double gamma_cc1 = 0.5;
  double gamma_cc2 = 0.3;
};

void validate_weights(const LossWeights& w);

/// Any frame-pair map, e.g. a network, a baseline, or an analytic test model.
using PairModel = std::function<FramePair(const Frame&, const Frame&)>;

StagePredictions dual_cycle_forward(const PairModel& model, const TripletSample& triplet);

/// Eval-mode composition through a network.
StagePredictions dual_cycle_forward(const InterpolationNetwork<float>& net, const TripletSample& triplet);

/// Mean absolute error over all elements.
template <typename T>
double mean_abs_error(const Tensor<T>& a, const Tensor<T>& b);

/// Adds scale * d/da mean|a - b| into grad.
template <typename T>
void mean_abs_error_grad(const Tensor<T>& a, const Tensor<T>& b, double scale, Tensor<T>& grad);

/// MAE(I1, one_left) + MAE(I1, one_right).
template <typename T>
double cc1_loss(const StageTensors<T>& sp, const Tensor<T>& i1);

/// (MAE(two_delta, two_delta_2) + MAE(one_plus_delta, one_plus_delta_2)) / 2.
template <typename T>
double cc2_loss(const StageTensors<T>& sp);

template <typename T>
double combined_loss(const StageTensors<T>& sp, const Tensor<T>& i1, const LossWeights& w) {
  return w.lambda_cc1 * cc1_loss(sp, i1) + w.lambda_cc2 * cc2_loss(sp);
}

/// Mean of the two per-frame MAEs.
double reconstruction_loss(const FramePair& pred, const FramePair& gt);

double finetune_loss(const FramePair& pred, const FramePair& gt, const StagePredictions& sp, const Frame& i1,
                     const LossWeights& w);

/// Accumulate scale * gradient of each loss w.r.t. the stage tensors.
template <typename T>
void cc1_loss_grad(const StageTensors<T>& sp, const Tensor<T>& i1, double scale, StageTensors<T>& grad);
template <typename T>
void cc2_loss_grad(const StageTensors<T>& sp, double scale, StageTensors<T>& grad);

struct LossTerms {
  double cc1 = 0.0;
  double cc2 = 0.0;
  double reconstruction = 0.0;
  double total = 0.0;
};

/// (B, C, H, W) batches of frames.
template <typename Real>
struct TripletBatch {
  Tensor<Real> i0, i1, i2;
};

template <typename Real>
struct QuadrupleBatch {
  Tensor<Real> in_a, in_b, gt_1, gt_2;
  // Coarse triplet of input-grid frames feeding the cycle terms.
  TripletBatch<Real> coarse;
};

/// (B, C, H, W) x2 -> (B, C, 2, H, W) and back.
template <typename Real>
Tensor<Real> stack_time(const Tensor<Real>& first, const Tensor<Real>& second);
template <typename Real>
void split_time(const Tensor<Real>& stacked, Tensor<Real>& first, Tensor<Real>& second);

/// Four train-mode network calls sharing weights, with traces for backward.
template <typename Real>
struct CycleTape {
  ForwardTrace<Real> traces[4];
  StageTensors<Real> stages;
};

template <typename Real>
void dual_cycle_train_forward(InterpolationNetwork<Real>& net, const TripletBatch<Real>& batch, CycleTape<Real>& tape);

/// Backpropagates stage gradients through all four calls. Stage-2 input
/// gradients flow back into the stage-1 predictions; nothing is detached.
template <typename Real>
void dual_cycle_backward(InterpolationNetwork<Real>& net, const CycleTape<Real>& tape,
                         const StageTensors<Real>& stage_grads);

/// Combined cycle loss; accumulates parameter gradients when `with_grad`.
template <typename Real>
LossTerms pretrain_objective(InterpolationNetwork<Real>& net, const TripletBatch<Real>& batch, const LossWeights& w,
                             bool with_grad);

/// Supervised reconstruction plus weighted cycle terms.
template <typename Real>
LossTerms finetune_objective(InterpolationNetwork<Real>& net, const QuadrupleBatch<Real>& batch,
                             const LossWeights& w, bool with_grad);

/// Eval-mode loss values (no gradients, running statistics untouched).
template <typename Real>
LossTerms pretrain_loss_eval(const InterpolationNetwork<Real>& net, const TripletBatch<Real>& batch,
                             const LossWeights& w);
template <typename Real>
LossTerms finetune_loss_eval(const InterpolationNetwork<Real>& net, const QuadrupleBatch<Real>& batch,
                             const LossWeights& w);

}  // namespace stint
