#include "stint/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>

#include "stint/config.hpp"
#include "stint/metrics.hpp"
#include "stint/train.hpp"

namespace stint {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

// Output directory assembled under a sibling temporary name and moved into
// place once complete.
class StagedDir {
 public:
  StagedDir(fs::path target, bool force) : target_(std::move(target)), force_(force) {
    if (fs::exists(target_) && !force_) {
      throw std::runtime_error("output " + target_.string() + " exists; pass --force to replace it");
    }
    std::random_device rd;
    staging_ = target_;
    staging_ += ".partial-" + std::to_string(rd());
    fs::create_directories(staging_);
  }
  ~StagedDir() {
    std::error_code ec;
    if (!committed_) fs::remove_all(staging_, ec);
  }
  StagedDir(const StagedDir&) = delete;
  StagedDir& operator=(const StagedDir&) = delete;

  fs::path path(const std::string& name) const { return staging_ / name; }

  void commit() {
    if (fs::exists(target_)) fs::remove_all(target_);
    fs::rename(staging_, target_);
    committed_ = true;
  }

 private:
  fs::path target_, staging_;
  bool force_;
  bool committed_ = false;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

json stats_to_json(const NormStats& s) { return {{"mean", s.mean}, {"stddev", s.stddev}}; }

NormStats stats_from_json(const json& j) {
  return {j.at("mean").get<std::vector<float>>(), j.at("stddev").get<std::vector<float>>()};
}

std::optional<NormStats> stats_from_checkpoint(const Checkpoint& ckpt) {
  const json echo = json::parse(ckpt.config_echo);
  if (!echo.contains("norm_stats")) return std::nullopt;
  return stats_from_json(echo.at("norm_stats"));
}

NormStats stats_of(const FrameSequence& seq) { return *normalize(seq).norm_stats; }

// Common flags shared by the training verbs.
struct TrainFlags {
  std::string config;
  std::string data;
  std::string out;
  bool force = false;
  std::optional<std::int64_t> epochs, batch_size, subsample;
  std::optional<double> lr;
  std::optional<std::uint64_t> seed;
  std::optional<double> w1, w2;
};

void add_train_flags(CLI::App* cmd, TrainFlags& f, const char* w1, const char* w2) {
  cmd->add_option("--config", f.config, "JSON experiment config")->check(CLI::ExistingFile);
  cmd->add_option("--data", f.data, "FSEQ input (default: generate data.spec)");
  cmd->add_option("--out", f.out, "output directory")->required();
  cmd->add_flag("--force", f.force, "replace an existing output directory");
  cmd->add_option("--epochs", f.epochs);
  cmd->add_option("--batch-size", f.batch_size);
  cmd->add_option("--lr", f.lr, "initial learning rate");
  cmd->add_option("--seed", f.seed);
  cmd->add_option(w1, f.w1);
  cmd->add_option(w2, f.w2);
}

ExperimentConfig resolve_config(const std::string& path) {
  ExperimentConfig cfg = path.empty() ? ExperimentConfig{} : load_experiment_config(path);
  if (const auto seed = seed_from_environment()) {
    cfg.data.spec.seed = *seed;
    cfg.pretrain.seed = *seed;
    cfg.finetune.seed = *seed;
  }
  return cfg;
}

void apply_train_flags(const TrainFlags& f, TrainConfig& t, bool pretraining) {
  if (f.epochs) t.epochs = *f.epochs;
  if (f.batch_size) t.batch_size = *f.batch_size;
  if (f.lr) t.lr0 = *f.lr;
  if (f.seed) t.seed = *f.seed;
  if (f.subsample) t.subsample_factor = *f.subsample;
  if (pretraining) {
    if (f.w1) t.loss_weights.lambda_cc1 = *f.w1;
    if (f.w2) t.loss_weights.lambda_cc2 = *f.w2;
  } else {
    if (f.w1) t.loss_weights.gamma_cc1 = *f.w1;
    if (f.w2) t.loss_weights.gamma_cc2 = *f.w2;
  }
  validate_train_config(t);
}

FrameSequence load_data(const ExperimentConfig& cfg, const std::string& flag_path) {
  const std::string path = !flag_path.empty() ? flag_path : cfg.data.path.value_or("");
  if (!path.empty()) return load_sequence(path);
  try {
    return generate_synthetic(cfg.data.spec);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

// Leading frames used for training; the remainder is never seen by a trainer.
FrameSequence training_portion(const FrameSequence& seq, double fraction) {
  const auto n = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(seq.n_frames())));
  if (n < 3) throw std::runtime_error("training portion has " + std::to_string(n) + " frames; need at least 3");
  return slice_frames(seq, 0, n);
}

std::string echo_with(const Checkpoint& ckpt, const ExperimentConfig& cfg, const NormStats& stats) {
  json echo = json::parse(ckpt.config_echo);
  echo["experiment"] = to_json(cfg);
  echo["norm_stats"] = stats_to_json(stats);
  return echo.dump();
}

std::string format_log_row(const EpochLog& l, bool finetuning) {
  std::ostringstream os;
  os << l.epoch << ',' << format_number(l.lr);
  if (finetuning) os << ',' << format_number(l.reconstruction);
  os << ',' << format_number(l.cc1) << ',' << format_number(l.cc2) << ',' << format_number(l.combined) << ','
     << format_number(l.val_combined);
  return os.str();
}

int cmd_gen_data(const Streams& io, const ExperimentConfig& base, const std::optional<std::string>& kind,
                 const std::optional<std::int64_t>& frames, const std::optional<std::int64_t>& size,
                 const std::optional<std::int64_t>& channels, const std::optional<double>& noise,
                 const std::optional<std::uint64_t>& seed, const std::string& out, bool force) {
  SyntheticSpec spec = base.data.spec;
  try {
    if (kind) spec.kind = parse_synthetic_kind(*kind);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (frames) spec.n_frames = *frames;
  if (size) spec.height = spec.width = *size;
  if (channels) spec.channels = *channels;
  if (noise) spec.noise_std = *noise;
  if (seed) spec.seed = *seed;
  try {
    validate_spec(spec);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (fs::exists(out) && !force) throw std::runtime_error("output " + out + " exists; pass --force to replace it");
  const FrameSequence seq = generate_synthetic(spec);
  const fs::path tmp = out + ".partial";
  save_sequence(seq, tmp);
  fs::rename(tmp, out);
  io.out << "wrote " << seq.n_frames() << " frames (" << to_string(spec.kind) << ", seed " << spec.seed << ") to "
         << out << "\n";
  return kExitOk;
}

int cmd_pretrain(const Streams& io, const TrainFlags& f) {
  ExperimentConfig cfg = resolve_config(f.config);
  if (f.subsample) cfg.data.subsample_factor = *f.subsample;
  apply_train_flags(f, cfg.pretrain, true);
  cfg.data.subsample_factor = cfg.pretrain.subsample_factor;
  if (!f.data.empty()) cfg.data.path = f.data;
  validate_config(cfg.net);

  const FrameSequence train = training_portion(load_data(cfg, f.data), cfg.data.train_fraction);
  validate_frame_size(cfg.net, train.height(), train.width());
  const FrameSequence norm = normalize(train);
  StagedDir dir(f.out, f.force);
  write_text(dir.path("config.json"), to_json(cfg).dump(2) + "\n");

  InterpolationNetwork<float> net = build_network(cfg.net, cfg.pretrain.seed);
  std::ofstream log(dir.path("train_log.csv"));
  log << "epoch,lr,cc1,cc2,combined,val_combined\n";
  TrainResult result = pretrain(net, {norm}, cfg.pretrain, [&](const EpochLog& l) {
    log << format_log_row(l, false) << '\n' << std::flush;
    io.out << "epoch " << l.epoch << "  combined " << format_number(l.combined) << "  val "
           << format_number(l.val_combined) << "\n";
  });
  log.close();
  result.checkpoint.config_echo = echo_with(result.checkpoint, cfg, *norm.norm_stats);
  save_checkpoint(result.checkpoint, dir.path("checkpoint.stck"));
  dir.commit();
  io.out << "best epoch " << result.best_epoch << " (val " << format_number(result.best_val) << "); wrote "
         << f.out << "\n";
  return kExitOk;
}

int cmd_finetune(const Streams& io, const TrainFlags& f, const std::string& from,
                 const std::optional<std::int64_t>& max_quads) {
  ExperimentConfig cfg = resolve_config(f.config);
  apply_train_flags(f, cfg.finetune, false);
  if (!f.data.empty()) cfg.data.path = f.data;

  std::optional<Checkpoint> start;
  if (!from.empty()) {
    start = load_checkpoint(from);
    if (f.config.empty()) cfg.net = start->net_config;
  }
  validate_config(cfg.net);
  FrameSequence train = training_portion(load_data(cfg, f.data), cfg.data.train_fraction);
  if (max_quads) {
    if (*max_quads < 1) throw ConfigError("--max-quadruples must be ≥ 1");
    const auto keep = std::min(train.n_frames(), static_cast<std::size_t>(*max_quads) + 3);
    train = slice_frames(train, 0, keep);
  }
  validate_frame_size(cfg.net, train.height(), train.width());
  std::optional<NormStats> stats = start ? stats_from_checkpoint(*start) : std::nullopt;
  if (!stats) stats = stats_of(train);
  FrameSequence norm = train;
  for (std::size_t i = 0; i < norm.n_frames(); ++i) norm.set_frame(i, normalize_frame(train.frame(i), *stats));
  norm.norm_stats = *stats;

  InterpolationNetwork<float> net = build_network(cfg.net, cfg.finetune.seed);
  if (start) {
    restore_checkpoint(net, *start);
  } else {
    io.err << "warning: no --from checkpoint; fine-tuning from random initialization\n";
  }
  StagedDir dir(f.out, f.force);
  write_text(dir.path("config.json"), to_json(cfg).dump(2) + "\n");
  std::ofstream log(dir.path("train_log.csv"));
  log << "epoch,lr,reconstruction,cc1,cc2,combined,val_combined\n";
  TrainResult result = finetune_from_current(net, {norm}, cfg.finetune, [&](const EpochLog& l) {
    log << format_log_row(l, true) << '\n' << std::flush;
    io.out << "epoch " << l.epoch << "  total " << format_number(l.combined) << "  val "
           << format_number(l.val_combined) << "\n";
  });
  log.close();
  result.checkpoint.config_echo = echo_with(result.checkpoint, cfg, *stats);
  save_checkpoint(result.checkpoint, dir.path("checkpoint.stck"));
  dir.commit();
  io.out << "best epoch " << result.best_epoch << " (val " << format_number(result.best_val) << "); wrote "
         << f.out << "\n";
  return kExitOk;
}

// Channel 0 of each frame, scaled from [0, range] to 0..255.
void write_grid_pgm(const fs::path& path, const std::vector<std::vector<const Frame*>>& rows, double range) {
  const Frame& first = *rows.front().front();
  const std::size_t h = first.dim(1), w = first.dim(2), gap = 2;
  const std::size_t cols = rows.front().size();
  const std::size_t gw = cols * w + (cols - 1) * gap, gh = rows.size() * h + (rows.size() - 1) * gap;
  std::vector<std::uint8_t> pixels(gw * gh, 255);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const Frame& f = *rows[r][c];
      for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
          const double v = std::clamp(static_cast<double>(f[y * w + x]) / range, 0.0, 1.0);
          pixels[(r * (h + gap) + y) * gw + c * (w + gap) + x] = static_cast<std::uint8_t>(std::lround(v * 255.0));
        }
      }
    }
  }
  std::ofstream os(path, std::ios::binary);
  os << "P5\n" << gw << ' ' << gh << "\n255\n";
  os.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

int cmd_eval(const Streams& io, const std::string& config, const std::string& model, const std::string& baseline,
             const std::string& data, const std::string& out, bool save_frames, bool held_out,
             const std::optional<std::string>& data_range, bool force) {
  if (model.empty() == baseline.empty()) throw UsageError("exactly one of --model or --baseline is required");
  ExperimentConfig cfg = resolve_config(config);
  if (save_frames) cfg.eval.save_frames = true;
  if (data_range) cfg.eval.data_range = *data_range;
  if (!data.empty()) cfg.data.path = data;

  FrameSequence seq = load_data(cfg, data);
  if (seq.norm_stats) seq = denormalize(seq);
  if (held_out) {
    const auto begin = static_cast<std::size_t>(std::floor(cfg.data.train_fraction * static_cast<double>(seq.n_frames())));
    seq = slice_frames(seq, begin, seq.n_frames());
  }
  const double capacity = seq.capacity;
  double range = 0.0;
  try {
    range = resolve_data_range(cfg.eval, capacity);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  std::optional<InterpolationNetwork<float>> net;
  PairModel predict;
  std::string model_id;
  if (!model.empty()) {
    const Checkpoint ckpt = load_checkpoint(model);
    net.emplace(network_from_checkpoint(ckpt));
    const NormStats stats = stats_from_checkpoint(ckpt).value_or(stats_of(seq));
    predict = model_predictor(*net, stats);
    model_id = model;
  } else if (baseline == "copy") {
    predict = [](const Frame& a, const Frame& b) { return trivial_copy_baseline(a, b, CopyMode::forward); };
  } else if (baseline == "copy-nearest") {
    predict = [](const Frame& a, const Frame& b) { return trivial_copy_baseline(a, b, CopyMode::nearest); };
  } else if (baseline == "blend") {
    predict = [](const Frame& a, const Frame& b) { return linear_blend_oracle(a, b); };
  } else {
    throw UsageError("unknown baseline '" + baseline + "' (expected copy, copy-nearest or blend)");
  }
  if (model_id.empty()) model_id = "baseline:" + baseline;

  const MetricsReport report = evaluate(predict, seq, range, capacity, model_id, cfg.data.path.value_or("synthetic"));
  StagedDir dir(out, force);
  write_text(dir.path("config.json"), to_json(cfg).dump(2) + "\n");
  write_report_csv(report, dir.path(cfg.eval.report_name));
  if (cfg.eval.save_frames) {
    fs::create_directories(dir.path("frames"));
    for (const auto& q : make_quadruples(seq, 1)) {
      const FramePair pred = predict(q.in_a, q.in_b);
      char name[32];
      std::snprintf(name, sizeof name, "sample_%04zu.pgm", q.index);
      write_grid_pgm(dir.path("frames") / name, {{&q.in_a, &pred.f1, &q.gt_1}, {&q.in_b, &pred.f2, &q.gt_2}}, range);
    }
  }
  dir.commit();
  io.out << model_id << ": " << report.n_samples << " quadruples, PSNR " << format_number(report.mean_psnr)
         << " dB, SSIM " << format_number(report.mean_ssim) << ", SI " << format_number(report.mean_si) << "\n";
  return kExitOk;
}

int cmd_interp(const Streams& io, const std::string& model, const std::string& data, const std::string& out,
               bool force) {
  const Checkpoint ckpt = load_checkpoint(model);
  FrameSequence seq = load_sequence(data);
  if (seq.norm_stats) seq = denormalize(seq);
  if (seq.n_frames() < 2) throw std::runtime_error("interp needs at least 2 frames");
  if (fs::exists(out) && !force) throw std::runtime_error("output " + out + " exists; pass --force to replace it");
  const InterpolationNetwork<float> net = network_from_checkpoint(ckpt);
  const PairModel predict = model_predictor(net, stats_from_checkpoint(ckpt).value_or(stats_of(seq)));

  const std::size_t n = seq.n_frames();
  FrameSequence dense;
  dense.frames = Tensor<float>({3 * n - 2, seq.channels(), seq.height(), seq.width()});
  dense.capacity = seq.capacity;
  dense.dt_label = seq.dt_label + "/3";
  dense.seed = seq.seed;
  for (std::size_t i = 0; i < n; ++i) {
    dense.set_frame(3 * i, seq.frame(i));
    if (i + 1 < n) {
      const FramePair mid = predict(seq.frame(i), seq.frame(i + 1));
      dense.set_frame(3 * i + 1, mid.f1);
      dense.set_frame(3 * i + 2, mid.f2);
    }
  }
  const fs::path tmp = out + ".partial";
  save_sequence(dense, tmp);
  fs::rename(tmp, out);
  io.out << "wrote " << dense.n_frames() << " frames to " << out << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Temporal interpolation with dual cycle consistency", "stint"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen-data", "write a synthetic FSEQ sequence");
  std::string gen_config, gen_out;
  std::optional<std::string> kind;
  std::optional<std::int64_t> frames, size, channels;
  std::optional<double> noise;
  std::optional<std::uint64_t> gen_seed;
  bool gen_force = false;
  gen->add_option("--config", gen_config, "JSON experiment config (data.spec)")->check(CLI::ExistingFile);
  gen->add_option("--kind", kind, "translate_gaussian | rotate_field | diffuse_blob | shear_deform");
  gen->add_option("--frames", frames);
  gen->add_option("--size", size, "height and width");
  gen->add_option("--channels", channels);
  gen->add_option("--noise", noise, "noise standard deviation");
  gen->add_option("--seed", gen_seed);
  gen->add_option("--out", gen_out)->required();
  gen->add_flag("--force", gen_force);

  auto* pre = app.add_subcommand("pretrain", "unsupervised dual-cycle training");
  TrainFlags pre_flags;
  add_train_flags(pre, pre_flags, "--lambda-cc1", "--lambda-cc2");
  pre->add_option("--subsample", pre_flags.subsample, "temporal subsample factor for triplets");

  auto* fine = app.add_subcommand("finetune", "supervised fine-tuning on quadruples");
  TrainFlags fine_flags;
  std::string from;
  std::optional<std::int64_t> max_quads;
  add_train_flags(fine, fine_flags, "--gamma-cc1", "--gamma-cc2");
  fine->add_option("--from", from, "starting checkpoint")->check(CLI::ExistingFile);
  fine->add_option("--max-quadruples", max_quads, "keep only the first N training quadruples");

  auto* ev = app.add_subcommand("eval", "score a model or baseline on quadruples");
  std::string ev_config, ev_model, ev_baseline, ev_data, ev_out;
  std::optional<std::string> ev_range;
  bool save_frames = false, held_out = false, ev_force = false;
  ev->add_option("--config", ev_config)->check(CLI::ExistingFile);
  ev->add_option("--model", ev_model, "checkpoint")->check(CLI::ExistingFile);
  ev->add_option("--baseline", ev_baseline, "copy | copy-nearest | blend");
  ev->add_option("--data", ev_data);
  ev->add_option("--out", ev_out)->required();
  ev->add_option("--data-range", ev_range, "\"capacity\" or a positive number");
  ev->add_flag("--save-frames", save_frames, "write PGM grids per quadruple");
  ev->add_flag("--held-out", held_out, "score only frames after the training fraction");
  ev->add_flag("--force", ev_force);

  auto* interp = app.add_subcommand("interp", "triple the temporal resolution of a sequence");
  std::string in_model, in_data, in_out;
  bool in_force = false;
  interp->add_option("--model", in_model)->required()->check(CLI::ExistingFile);
  interp->add_option("--data", in_data)->required()->check(CLI::ExistingFile);
  interp->add_option("--out", in_out)->required();
  interp->add_flag("--force", in_force);

  std::vector<const char*> argv{"stint"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  const Streams io{out, err};
  try {
    if (gen->parsed()) {
      return cmd_gen_data(io, resolve_config(gen_config), kind, frames, size, channels, noise, gen_seed, gen_out,
                          gen_force);
    }
    if (pre->parsed()) return cmd_pretrain(io, pre_flags);
    if (fine->parsed()) return cmd_finetune(io, fine_flags, from, max_quads);
    if (ev->parsed()) {
      return cmd_eval(io, ev_config, ev_model, ev_baseline, ev_data, ev_out, save_frames, held_out, ev_range,
                      ev_force);
    }
    if (interp->parsed()) return cmd_interp(io, in_model, in_data, in_out, in_force);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace stint
