#include "stint/train.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <random>
#include <sstream>

#include "stint/config.hpp"

namespace stint {

std::string to_string(Phase phase) { return phase == Phase::pretrain ? "pretrain" : "finetune"; }

TrainConfig TrainConfig::pretrain_defaults() { return TrainConfig{}; }

TrainConfig TrainConfig::finetune_defaults() {
  TrainConfig cfg;
  cfg.phase = Phase::finetune;
  cfg.epochs = 50;
  cfg.lr0 = 2e-3;
  cfg.weight_decay = 0.0;
  return cfg;
}

void validate_train_config(const TrainConfig& cfg) {
  if (cfg.epochs < 0) throw ConfigError("epochs must be ≥ 0");
  if (cfg.batch_size < 1) throw ConfigError("batch_size must be ≥ 1");
  if (!(cfg.lr0 > 0.0) || !std::isfinite(cfg.lr0)) throw ConfigError("lr0 must be > 0");
  if (!(cfg.lr_decay_factor > 1.0)) throw ConfigError("lr_decay_factor must be > 1");
  if (cfg.lr_decay_every < 1) throw ConfigError("lr_decay_every must be ≥ 1");
  if (cfg.plateau_patience < 1) throw ConfigError("plateau_patience must be ≥ 1");
  if (!(cfg.adam_beta1 >= 0.0 && cfg.adam_beta1 < 1.0)) throw ConfigError("adam_beta1 must lie in [0, 1)");
  if (!(cfg.adam_beta2 >= 0.0 && cfg.adam_beta2 < 1.0)) throw ConfigError("adam_beta2 must lie in [0, 1)");
  if (!(cfg.adam_epsilon > 0.0)) throw ConfigError("adam_epsilon must be > 0");
  if (!(cfg.weight_decay >= 0.0)) throw ConfigError("weight_decay must be ≥ 0");
  if (cfg.subsample_factor < 1) throw ConfigError("subsample_factor must be ≥ 1");
  if (!(cfg.reverse_probability >= 0.0 && cfg.reverse_probability <= 1.0)) {
    throw ConfigError("reverse_probability must lie in [0, 1]");
  }
  if (!(cfg.validation_fraction >= 0.0 && cfg.validation_fraction < 1.0)) {
    throw ConfigError("validation_fraction must lie in [0, 1)");
  }
  try {
    validate_weights(cfg.loss_weights);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

double lr_schedule(std::uint64_t step, const TrainConfig& cfg, std::int64_t plateau_count) {
  const auto periodic = static_cast<double>(step / static_cast<std::uint64_t>(cfg.lr_decay_every));
  return cfg.lr0 / std::pow(cfg.lr_decay_factor, periodic + static_cast<double>(plateau_count));
}

AdamOptimizer::AdamOptimizer(double beta1, double beta2, double epsilon, double weight_decay)
    : beta1_(beta1), beta2_(beta2), epsilon_(epsilon), weight_decay_(weight_decay) {}

void AdamOptimizer::step(std::vector<Parameter<float>>& params, double lr) {
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.emplace_back(p.value.size(), 0.0f);
      v_.emplace_back(p.value.size(), 0.0f);
    }
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  const auto b1 = static_cast<float>(beta1_), b2 = static_cast<float>(beta2_);
  const auto step_size = static_cast<float>(lr / c1);
  const auto inv_sqrt_c2 = static_cast<float>(1.0 / std::sqrt(c2));
  const auto eps = static_cast<float>(epsilon_), wd = static_cast<float>(weight_decay_);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = params[k];
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const float g = p.grad[i] + wd * p.value[i];
      m[i] = b1 * m[i] + (1.0f - b1) * g;
      v[i] = b2 * v[i] + (1.0f - b2) * g * g;
      p.value[i] -= step_size * m[i] / (std::sqrt(v[i]) * inv_sqrt_c2 + eps);
    }
  }
}

// ---------------------------------------------------------------------------
// Checkpoints

Checkpoint make_checkpoint(const InterpolationNetwork<float>& net, std::uint64_t global_step,
                           std::string config_echo) {
  Checkpoint ckpt;
  ckpt.net_config = net.config();
  ckpt.global_step = global_step;
  ckpt.config_echo = config_echo.empty() ? nlohmann::json{{"net", to_json(net.config())}}.dump() : std::move(config_echo);
  for (const auto& p : net.parameters()) ckpt.parameters.push_back({p.name, p.value});
  for (const auto& b : net.buffers()) ckpt.buffers.push_back({b.name, b.value});
  return ckpt;
}

void restore_checkpoint(InterpolationNetwork<float>& net, const Checkpoint& ckpt) {
  using K = CheckpointError::Kind;
  const auto mismatched = config_mismatches(net.config(), ckpt.net_config);
  if (!mismatched.empty()) {
    std::string fields;
    for (const auto& f : mismatched) fields += (fields.empty() ? "" : ", ") + f;
    throw CheckpointError(K::architecture_mismatch, "checkpoint architecture mismatch in fields: " + fields);
  }
  auto check = [](const auto& have, const std::vector<NamedTensor>& want, const char* what) {
    if (have.size() != want.size()) {
      throw CheckpointError(K::architecture_mismatch, std::string("checkpoint ") + what + " count mismatch");
    }
    for (std::size_t i = 0; i < have.size(); ++i) {
      if (have[i].name != want[i].name || have[i].value.shape() != want[i].value.shape()) {
        throw CheckpointError(K::architecture_mismatch,
                              std::string("checkpoint ") + what + " mismatch at '" + want[i].name + "'");
      }
    }
  };
  check(net.parameters(), ckpt.parameters, "parameter");
  check(net.buffers(), ckpt.buffers, "buffer");
  for (std::size_t i = 0; i < ckpt.parameters.size(); ++i) net.parameters()[i].value = ckpt.parameters[i].value;
  for (std::size_t i = 0; i < ckpt.buffers.size(); ++i) net.buffers()[i].value = ckpt.buffers[i].value;
}

InterpolationNetwork<float> network_from_checkpoint(const Checkpoint& ckpt) {
  InterpolationNetwork<float> net(ckpt.net_config, 0);
  restore_checkpoint(net, ckpt);
  net.set_mode(Mode::eval);
  return net;
}

namespace {

// Layout (little-endian):
//   "STCK" | u32 version | u64 global_step | u32 n | n bytes JSON echo
//   | u32 tensor count | per tensor: u8 kind (0 param, 1 buffer), u16 name
//   length, name, u32 rank, rank x u32 dims, f32 values
//   | u32 FNV-1a of everything before it
class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out.insert(out.end(), b, b + n);
  }
  void u8(std::uint8_t v) { out.push_back(v); }
  void u16(std::uint16_t v) { uint(v, 2); }
  void u32(std::uint32_t v) { uint(v, 4); }
  void u64(std::uint64_t v) { uint(v, 8); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  std::vector<std::uint8_t> out;

 private:
  void uint(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
  }
};

class Reader {
 public:
  Reader(const std::vector<std::uint8_t>& b, std::size_t end) : buf(b), limit(end) {}
  const std::uint8_t* take(std::size_t n) {
    if (limit - pos < n) throw CheckpointError(CheckpointError::Kind::corrupt, "corrupt checkpoint: truncated");
    const std::uint8_t* p = buf.data() + pos;
    pos += n;
    return p;
  }
  std::uint64_t uint(int n) {
    const std::uint8_t* p = take(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
  }
  std::size_t remaining() const { return limit - pos; }

 private:
  const std::vector<std::uint8_t>& buf;
  std::size_t limit;
  std::size_t pos = 0;
};

std::uint32_t fnv1a(const std::uint8_t* p, std::size_t n) {
  std::uint32_t h = 2166136261u;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 16777619u;
  }
  return h;
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  Writer w;
  w.bytes("STCK", 4);
  w.u32(ckpt.format_version);
  w.u64(ckpt.global_step);
  const std::string echo = ckpt.config_echo.empty() ? nlohmann::json{{"net", to_json(ckpt.net_config)}}.dump()
                                                    : ckpt.config_echo;
  // The echo must always carry the architecture.
  nlohmann::json j = nlohmann::json::parse(echo);
  j["net"] = to_json(ckpt.net_config);
  const std::string text = j.dump();
  w.u32(static_cast<std::uint32_t>(text.size()));
  w.bytes(text.data(), text.size());
  w.u32(static_cast<std::uint32_t>(ckpt.parameters.size() + ckpt.buffers.size()));
  auto put = [&w](const NamedTensor& t, std::uint8_t kind) {
    w.u8(kind);
    w.u16(static_cast<std::uint16_t>(t.name.size()));
    w.bytes(t.name.data(), t.name.size());
    w.u32(static_cast<std::uint32_t>(t.value.rank()));
    for (std::size_t d : t.value.shape()) w.u32(static_cast<std::uint32_t>(d));
    for (float v : t.value.values()) w.f32(v);
  };
  for (const auto& t : ckpt.parameters) put(t, 0);
  for (const auto& t : ckpt.buffers) put(t, 1);
  w.u32(fnv1a(w.out.data(), w.out.size()));
  return std::move(w.out);
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  using K = CheckpointError::Kind;
  if (bytes.size() < 8 || std::string(bytes.begin(), bytes.begin() + 4) != "STCK") {
    throw CheckpointError(K::corrupt, "corrupt checkpoint: bad magic");
  }
  Reader header(bytes, bytes.size());
  header.take(4);
  const auto version = static_cast<std::uint32_t>(header.uint(4));
  if (version != kCheckpointVersion) {
    throw CheckpointError(K::unsupported_version, "unsupported checkpoint version " + std::to_string(version));
  }
  if (bytes.size() < 4 + 4 + 8 + 4) throw CheckpointError(K::corrupt, "corrupt checkpoint: truncated");
  const std::size_t body = bytes.size() - 4;
  Reader trailer(bytes, bytes.size());
  trailer.take(body);
  if (static_cast<std::uint32_t>(trailer.uint(4)) != fnv1a(bytes.data(), body)) {
    throw CheckpointError(K::corrupt, "corrupt checkpoint: checksum mismatch");
  }

  Reader r(bytes, body);
  r.take(8);
  Checkpoint ckpt;
  ckpt.format_version = version;
  ckpt.global_step = r.uint(8);
  const auto echo_len = static_cast<std::size_t>(r.uint(4));
  const std::uint8_t* echo = r.take(echo_len);
  ckpt.config_echo.assign(reinterpret_cast<const char*>(echo), echo_len);
  try {
    ckpt.net_config = net_config_from_json(nlohmann::json::parse(ckpt.config_echo).at("net"));
  } catch (const std::exception& e) {
    throw CheckpointError(K::corrupt, std::string("corrupt checkpoint: bad config echo: ") + e.what());
  }
  const auto count = static_cast<std::size_t>(r.uint(4));
  for (std::size_t k = 0; k < count; ++k) {
    const auto kind = static_cast<std::uint8_t>(r.uint(1));
    const auto name_len = static_cast<std::size_t>(r.uint(2));
    const std::uint8_t* name = r.take(name_len);
    const auto rank = static_cast<std::size_t>(r.uint(4));
    if (rank > 8) throw CheckpointError(K::corrupt, "corrupt checkpoint: bad tensor rank");
    Shape shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(r.uint(4));
    const std::size_t n = shape_size(shape);
    if (n > r.remaining() / 4) throw CheckpointError(K::corrupt, "corrupt checkpoint: truncated");
    std::vector<float> values(n);
    for (auto& v : values) v = std::bit_cast<float>(static_cast<std::uint32_t>(r.uint(4)));
    NamedTensor t{std::string(reinterpret_cast<const char*>(name), name_len), Tensor<float>(shape, std::move(values))};
    if (kind == 0) {
      ckpt.parameters.push_back(std::move(t));
    } else if (kind == 1) {
      ckpt.buffers.push_back(std::move(t));
    } else {
      throw CheckpointError(K::corrupt, "corrupt checkpoint: bad tensor kind");
    }
  }
  if (r.remaining() != 0) throw CheckpointError(K::corrupt, "corrupt checkpoint: trailing bytes");
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(ckpt);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw CheckpointError(CheckpointError::Kind::io, "cannot open " + tmp.string() + " for writing");
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw CheckpointError(CheckpointError::Kind::io, "failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError(CheckpointError::Kind::io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

// ---------------------------------------------------------------------------
// Sampling

std::vector<TripletSample> pretrain_samples(const FrameSequence& seq, std::size_t subsample_factor) {
  std::vector<TripletSample> out;
  for (std::size_t offset = 0; offset < subsample_factor && offset < seq.n_frames(); ++offset) {
    for (auto& t : make_triplets(subsample(seq, subsample_factor, offset), 1)) {
      t.index = offset + t.index * subsample_factor;
      out.push_back(std::move(t));
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
  return out;
}

std::vector<FinetuneSample> finetune_samples(const FrameSequence& seq) {
  std::vector<FinetuneSample> out;
  const std::size_t n = seq.n_frames();
  for (auto& q : make_quadruples(seq, 1)) {
    const std::size_t t = q.index;
    std::size_t start = 0;
    if (t + 6 < n) {
      start = t;
    } else if (t >= 3) {
      start = t - 3;
    } else {
      continue;
    }
    TripletSample coarse{seq.frame(start), seq.frame(start + 3), seq.frame(start + 6), start};
    out.push_back({std::move(q), std::move(coarse)});
  }
  return out;
}

namespace {

Tensor<float> stack_frames(const std::vector<const Frame*>& frames) {
  const Shape fs = frames.front()->shape();
  const std::size_t size = shape_size(fs);
  Tensor<float> out({frames.size(), fs[0], fs[1], fs[2]});
  for (std::size_t b = 0; b < frames.size(); ++b) {
    require_same_shape(fs, frames[b]->shape(), "batch");
    std::copy_n(frames[b]->data(), size, out.data() + b * size);
  }
  return out;
}

TripletBatch<float> triplet_batch(const std::vector<TripletSample>& samples) {
  std::vector<const Frame*> a, b, c;
  for (const auto& s : samples) {
    a.push_back(&s.i0);
    b.push_back(&s.i1);
    c.push_back(&s.i2);
  }
  return {stack_frames(a), stack_frames(b), stack_frames(c)};
}

QuadrupleBatch<float> quadruple_batch(const std::vector<FinetuneSample>& samples) {
  std::vector<const Frame*> a, b, g1, g2;
  std::vector<TripletSample> coarse;
  for (const auto& s : samples) {
    a.push_back(&s.quad.in_a);
    b.push_back(&s.quad.in_b);
    g1.push_back(&s.quad.gt_1);
    g2.push_back(&s.quad.gt_2);
    coarse.push_back(s.coarse);
  }
  return {stack_frames(a), stack_frames(b), stack_frames(g1), stack_frames(g2), triplet_batch(coarse)};
}

FinetuneSample reversed(const FinetuneSample& s) {
  return {augment_reverse(s.quad, 0.0, 1.0), augment_reverse(s.coarse, 0.0, 1.0)};
}

std::vector<FrameSequence> prepared(const std::vector<FrameSequence>& data) {
  if (data.empty()) throw TrainingError("no training data");
  std::vector<FrameSequence> out;
  for (const auto& seq : data) out.push_back(seq.norm_stats ? seq : normalize(seq));
  return out;
}

template <typename Sample>
void split_validation(std::vector<Sample>& all, double fraction, std::vector<Sample>& train, std::vector<Sample>& val) {
  auto n_val = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(all.size())));
  if (all.size() < 2) n_val = 0;
  n_val = std::min(n_val, all.size() - 1);
  train.assign(all.begin(), all.end() - static_cast<std::ptrdiff_t>(n_val));
  val.assign(all.end() - static_cast<std::ptrdiff_t>(n_val), all.end());
}

std::string echo_for(const InterpolationNetwork<float>& net, const TrainConfig& cfg) {
  return nlohmann::json{{"net", to_json(net.config())}, {"train", to_json(cfg)}}.dump();
}

// Shared epoch loop; `Batch` is TripletBatch or QuadrupleBatch.
template <typename Sample, typename MakeBatch, typename Reverse, typename Objective, typename EvalLoss>
TrainResult run_training(InterpolationNetwork<float>& net, const std::vector<Sample>& samples, const TrainConfig& cfg,
                         const EpochCallback& on_epoch, MakeBatch make_batch, Reverse reverse, Objective objective,
                         EvalLoss eval_loss) {
  if (samples.empty()) throw TrainingError("no training samples could be formed from the data");
  std::vector<Sample> all = samples, train, val;
  split_validation(all, cfg.validation_fraction, train, val);
  const std::vector<Sample>& val_set = val.empty() ? train : val;
  const auto batch_size = static_cast<std::size_t>(cfg.batch_size);

  auto validation_loss = [&]() {
    double total = 0.0;
    for (std::size_t begin = 0; begin < val_set.size(); begin += batch_size) {
      const std::size_t end = std::min(val_set.size(), begin + batch_size);
      std::vector<Sample> chunk(val_set.begin() + static_cast<std::ptrdiff_t>(begin),
                                val_set.begin() + static_cast<std::ptrdiff_t>(end));
      total += eval_loss(net, make_batch(chunk)).total * static_cast<double>(chunk.size());
    }
    return total / static_cast<double>(val_set.size());
  };

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  AdamOptimizer adam(cfg.adam_beta1, cfg.adam_beta2, cfg.adam_epsilon, cfg.weight_decay);

  TrainResult result;
  std::uint64_t step = 0;
  std::int64_t plateaus = 0, stall = 0;
  result.best_val = validation_loss();
  result.checkpoint = make_checkpoint(net, step, echo_for(net, cfg));

  std::vector<std::size_t> order(train.size());
  for (std::int64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    EpochLog log;
    log.epoch = epoch;
    double seen = 0.0;
    net.set_mode(Mode::train);
    for (std::size_t begin = 0; begin < order.size(); begin += batch_size) {
      const std::size_t end = std::min(order.size(), begin + batch_size);
      std::vector<Sample> chunk;
      for (std::size_t k = begin; k < end; ++k) {
        const Sample& s = train[order[k]];
        chunk.push_back(uniform(rng) < cfg.reverse_probability ? reverse(s) : s);
      }
      const double lr = lr_schedule(step, cfg, plateaus);
      net.zero_grad();
      const LossTerms terms = objective(net, make_batch(chunk));
      if (!std::isfinite(terms.total)) {
        std::ostringstream msg;
        msg << "non-finite loss at step " << step << " (epoch " << epoch << ", lr " << lr << "): cc1=" << terms.cc1
            << " cc2=" << terms.cc2 << " reconstruction=" << terms.reconstruction << " total=" << terms.total;
        throw TrainingError(msg.str());
      }
      adam.step(net.parameters(), lr);
      ++step;
      const auto w = static_cast<double>(chunk.size());
      log.cc1 += terms.cc1 * w;
      log.cc2 += terms.cc2 * w;
      log.reconstruction += terms.reconstruction * w;
      log.combined += terms.total * w;
      log.lr = lr;
      seen += w;
    }
    log.cc1 /= seen;
    log.cc2 /= seen;
    log.reconstruction /= seen;
    log.combined /= seen;
    net.set_mode(Mode::eval);
    log.val_combined = validation_loss();
    if (log.val_combined < result.best_val) {
      result.best_val = log.val_combined;
      result.best_epoch = epoch;
      result.checkpoint = make_checkpoint(net, step, echo_for(net, cfg));
      stall = 0;
    } else if (++stall >= cfg.plateau_patience) {
      ++plateaus;
      stall = 0;
    }
    result.history.push_back(log);
    if (on_epoch) on_epoch(log);
  }
  restore_checkpoint(net, result.checkpoint);
  net.set_mode(Mode::eval);
  return result;
}

}  // namespace

TrainResult pretrain(InterpolationNetwork<float>& net, const std::vector<FrameSequence>& data, const TrainConfig& cfg,
                     const EpochCallback& on_epoch) {
  validate_train_config(cfg);
  std::vector<TripletSample> samples;
  for (const auto& seq : prepared(data)) {
    for (auto& s : pretrain_samples(seq, static_cast<std::size_t>(cfg.subsample_factor))) samples.push_back(std::move(s));
  }
  const LossWeights w = cfg.loss_weights;
  return run_training(
      net, samples, cfg, on_epoch, [](const std::vector<TripletSample>& c) { return triplet_batch(c); },
      [](const TripletSample& s) { return augment_reverse(s, 0.0, 1.0); },
      [w](InterpolationNetwork<float>& n, const TripletBatch<float>& b) { return pretrain_objective(n, b, w, true); },
      [w](const InterpolationNetwork<float>& n, const TripletBatch<float>& b) { return pretrain_loss_eval(n, b, w); });
}

TrainResult finetune_from_current(InterpolationNetwork<float>& net, const std::vector<FrameSequence>& data,
                                  const TrainConfig& cfg, const EpochCallback& on_epoch) {
  validate_train_config(cfg);
  std::vector<FinetuneSample> samples;
  for (const auto& seq : prepared(data)) {
    const FrameSequence sub =
        cfg.subsample_factor > 1 ? subsample(seq, static_cast<std::size_t>(cfg.subsample_factor), 0) : seq;
    for (auto& s : finetune_samples(sub)) samples.push_back(std::move(s));
  }
  const LossWeights w = cfg.loss_weights;
  return run_training(
      net, samples, cfg, on_epoch, [](const std::vector<FinetuneSample>& c) { return quadruple_batch(c); },
      [](const FinetuneSample& s) { return reversed(s); },
      [w](InterpolationNetwork<float>& n, const QuadrupleBatch<float>& b) { return finetune_objective(n, b, w, true); },
      [w](const InterpolationNetwork<float>& n, const QuadrupleBatch<float>& b) { return finetune_loss_eval(n, b, w); });
}

TrainResult finetune(InterpolationNetwork<float>& net, const Checkpoint& start, const std::vector<FrameSequence>& data,
                     const TrainConfig& cfg, const EpochCallback& on_epoch) {
  restore_checkpoint(net, start);
  return finetune_from_current(net, data, cfg, on_epoch);
}

}  // namespace stint
