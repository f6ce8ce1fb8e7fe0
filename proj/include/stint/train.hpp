#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stint/cycle.hpp"
#include "stint/net.hpp"
#include "stint/seqdata.hpp"

namespace stint {

enum class Phase { pretrain, finetune };

std::string to_string(Phase phase);

struct TrainConfig {
  Phase phase = Phase::pretrain;
  std::int64_t epochs = 400;
  std::int64_t batch_size = 16;
  double lr0 = 3e-4;
  double lr_decay_factor = 2.0;
  std::int64_t lr_decay_every = 400'000;
  std::int64_t plateau_patience = 10;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double weight_decay = 0.05;
  LossWeights loss_weights;
  std::uint64_t seed = 0;
  std::int64_t subsample_factor = 1;
  double reverse_probability = 0.5;
  double validation_fraction = 0.1;

  static TrainConfig pretrain_defaults();
  /// 50 epochs at 2e-3, no weight decay.
  static TrainConfig finetune_defaults();
};

void validate_train_config(const TrainConfig& cfg);

/// lr0 / factor^(floor(step / decay_every) + plateau_count)
double lr_schedule(std::uint64_t step, const TrainConfig& cfg, std::int64_t plateau_count);

/// Adam with L2 weight decay folded into the gradient.
class AdamOptimizer {
 public:
  AdamOptimizer(double beta1, double beta2, double epsilon, double weight_decay);
  void step(std::vector<Parameter<float>>& params, double lr);
  std::uint64_t steps() const noexcept { return t_; }

 private:
  double beta1_, beta2_, epsilon_, weight_decay_;
  std::uint64_t t_ = 0;
  std::vector<std::vector<float>> m_, v_;
};

struct NamedTensor {
  std::string name;
  Tensor<float> value;
  bool operator==(const NamedTensor&) const = default;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  NetConfig net_config;
  /// Structured-text echo of the producing run (JSON).
  std::string config_echo;
  std::uint64_t global_step = 0;
  std::uint32_t format_version = kCheckpointVersion;
  std::vector<NamedTensor> parameters;
  std::vector<NamedTensor> buffers;
};

class CheckpointError : public std::runtime_error {
 public:
  enum class Kind { io, corrupt, unsupported_version, architecture_mismatch };
  CheckpointError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

Checkpoint make_checkpoint(const InterpolationNetwork<float>& net, std::uint64_t global_step,
                           std::string config_echo = {});

/// Copies checkpoint weights into `net`. Verifies architecture and every
/// tensor name/shape before touching any value.
void restore_checkpoint(InterpolationNetwork<float>& net, const Checkpoint& ckpt);

/// Builds a network with the checkpoint's config and weights, in eval mode.
InterpolationNetwork<float> network_from_checkpoint(const Checkpoint& ckpt);

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);
/// Writes to a sibling temporary file and renames it into place.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EpochLog {
  std::int64_t epoch = 0;
  double lr = 0.0;
  double cc1 = 0.0;
  double cc2 = 0.0;
  double reconstruction = 0.0;
  double combined = 0.0;
  double val_combined = 0.0;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<EpochLog> history;
  std::int64_t best_epoch = -1;  // -1: the starting weights were never beaten
  double best_val = 0.0;
};

using EpochCallback = std::function<void(const EpochLog&)>;

/// Coarse triplet plus the quadruple it regularizes, cut from one sequence.
struct FinetuneSample {
  QuadrupleSample quad;
  TripletSample coarse;
};

/// Triplets at spacing `subsample_factor` from every phase offset, ordered by start frame.
std::vector<TripletSample> pretrain_samples(const FrameSequence& seq, std::size_t subsample_factor);

/// Quadruples with a coarse triplet (t, t+3, t+6), or (t-3, t, t+3) near the end.
std::vector<FinetuneSample> finetune_samples(const FrameSequence& seq);

/// Unsupervised dual-cycle training. Sequences without norm_stats are
/// z-scored first. Leaves `net` at the best-validation weights in eval mode.
TrainResult pretrain(InterpolationNetwork<float>& net, const std::vector<FrameSequence>& data, const TrainConfig& cfg,
                     const EpochCallback& on_epoch = {});

/// Supervised fine-tuning starting from `start`.
TrainResult finetune(InterpolationNetwork<float>& net, const Checkpoint& start, const std::vector<FrameSequence>& data,
                     const TrainConfig& cfg, const EpochCallback& on_epoch = {});

/// Same as finetune() but from the network's current weights.
TrainResult finetune_from_current(InterpolationNetwork<float>& net, const std::vector<FrameSequence>& data,
                                  const TrainConfig& cfg, const EpochCallback& on_epoch = {});

}  // namespace stint
