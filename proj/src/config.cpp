#include "stint/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>

namespace stint {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const std::string& section) {
  if (!j.is_object()) throw ConfigError("section '" + section + "' must be an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& item : j.items()) {
    if (!keys.count(item.key())) throw ConfigError("unknown key '" + item.key() + "' in section '" + section + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& section) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for '" + section + "." + key + "': " + e.what());
  }
}

}  // namespace

json to_json(const NetConfig& cfg) {
  return {{"in_channels", cfg.in_channels},
          {"base_width", cfg.base_width},
          {"depth", cfg.depth},
          {"se_reduction", cfg.se_reduction},
          {"use_batchnorm", cfg.use_batchnorm}};
}

void apply_json(const json& j, NetConfig& cfg) {
  reject_unknown(j, {"in_channels", "base_width", "depth", "se_reduction", "use_batchnorm"}, "net");
  read(j, "in_channels", cfg.in_channels, "net");
  read(j, "base_width", cfg.base_width, "net");
  read(j, "depth", cfg.depth, "net");
  read(j, "se_reduction", cfg.se_reduction, "net");
  read(j, "use_batchnorm", cfg.use_batchnorm, "net");
}

NetConfig net_config_from_json(const json& j) {
  NetConfig cfg;
  apply_json(j, cfg);
  return cfg;
}

json to_json(const TrainConfig& cfg) {
  return {{"phase", to_string(cfg.phase)},
          {"epochs", cfg.epochs},
          {"batch_size", cfg.batch_size},
          {"lr0", cfg.lr0},
          {"lr_decay_factor", cfg.lr_decay_factor},
          {"lr_decay_every", cfg.lr_decay_every},
          {"plateau_patience", cfg.plateau_patience},
          {"adam_beta1", cfg.adam_beta1},
          {"adam_beta2", cfg.adam_beta2},
          {"adam_epsilon", cfg.adam_epsilon},
          {"weight_decay", cfg.weight_decay},
          {"lambda_cc1", cfg.loss_weights.lambda_cc1},
          {"lambda_cc2", cfg.loss_weights.lambda_cc2},
          {"gamma_cc1", cfg.loss_weights.gamma_cc1},
          {"gamma_cc2", cfg.loss_weights.gamma_cc2},
          {"seed", cfg.seed},
          {"subsample_factor", cfg.subsample_factor},
          {"reverse_probability", cfg.reverse_probability},
          {"validation_fraction", cfg.validation_fraction}};
}

void apply_json(const json& j, TrainConfig& cfg) {
  const std::string section = to_string(cfg.phase);
  reject_unknown(j,
                 {"phase", "epochs", "batch_size", "lr0", "lr_decay_factor", "lr_decay_every", "plateau_patience",
                  "adam_beta1", "adam_beta2", "adam_epsilon", "weight_decay", "lambda_cc1", "lambda_cc2",
                  "gamma_cc1", "gamma_cc2", "seed", "subsample_factor", "reverse_probability",
                  "validation_fraction"},
                 section);
  if (j.contains("phase")) {
    std::string phase;
    read(j, "phase", phase, section);
    if (phase == "pretrain") {
      cfg.phase = Phase::pretrain;
    } else if (phase == "finetune") {
      cfg.phase = Phase::finetune;
    } else {
      throw ConfigError("unknown phase '" + phase + "'");
    }
  }
  read(j, "epochs", cfg.epochs, section);
  read(j, "batch_size", cfg.batch_size, section);
  read(j, "lr0", cfg.lr0, section);
  read(j, "lr_decay_factor", cfg.lr_decay_factor, section);
  read(j, "lr_decay_every", cfg.lr_decay_every, section);
  read(j, "plateau_patience", cfg.plateau_patience, section);
  read(j, "adam_beta1", cfg.adam_beta1, section);
  read(j, "adam_beta2", cfg.adam_beta2, section);
  read(j, "adam_epsilon", cfg.adam_epsilon, section);
  read(j, "weight_decay", cfg.weight_decay, section);
  read(j, "lambda_cc1", cfg.loss_weights.lambda_cc1, section);
  read(j, "lambda_cc2", cfg.loss_weights.lambda_cc2, section);
  read(j, "gamma_cc1", cfg.loss_weights.gamma_cc1, section);
  read(j, "gamma_cc2", cfg.loss_weights.gamma_cc2, section);
  read(j, "seed", cfg.seed, section);
  read(j, "subsample_factor", cfg.subsample_factor, section);
  read(j, "reverse_probability", cfg.reverse_probability, section);
  read(j, "validation_fraction", cfg.validation_fraction, section);
}

json to_json(const SyntheticSpec& spec) {
  return {{"kind", to_string(spec.kind)},
          {"n_frames", spec.n_frames},
          {"height", spec.height},
          {"width", spec.width},
          {"channels", spec.channels},
          {"vx", spec.vx},
          {"vy", spec.vy},
          {"angular_rate", spec.angular_rate},
          {"diffusion_rate", spec.diffusion_rate},
          {"shear_rate", spec.shear_rate},
          {"blob_sigma", spec.blob_sigma},
          {"x0", spec.x0},
          {"y0", spec.y0},
          {"noise_std", spec.noise_std},
          {"seed", spec.seed},
          {"dt_label", spec.dt_label}};
}

void apply_json(const json& j, SyntheticSpec& spec) {
  reject_unknown(j,
                 {"kind", "n_frames", "height", "width", "channels", "vx", "vy", "angular_rate", "diffusion_rate",
                  "shear_rate", "blob_sigma", "x0", "y0", "noise_std", "seed", "dt_label"},
                 "data.spec");
  if (j.contains("kind")) {
    std::string kind;
    read(j, "kind", kind, "data.spec");
    try {
      spec.kind = parse_synthetic_kind(kind);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  read(j, "n_frames", spec.n_frames, "data.spec");
  read(j, "height", spec.height, "data.spec");
  read(j, "width", spec.width, "data.spec");
  read(j, "channels", spec.channels, "data.spec");
  read(j, "vx", spec.vx, "data.spec");
  read(j, "vy", spec.vy, "data.spec");
  read(j, "angular_rate", spec.angular_rate, "data.spec");
  read(j, "diffusion_rate", spec.diffusion_rate, "data.spec");
  read(j, "shear_rate", spec.shear_rate, "data.spec");
  read(j, "blob_sigma", spec.blob_sigma, "data.spec");
  read(j, "x0", spec.x0, "data.spec");
  read(j, "y0", spec.y0, "data.spec");
  read(j, "noise_std", spec.noise_std, "data.spec");
  read(j, "seed", spec.seed, "data.spec");
  read(j, "dt_label", spec.dt_label, "data.spec");
}

json to_json(const ExperimentConfig& cfg) {
  json data = {{"spec", to_json(cfg.data.spec)},
               {"subsample_factor", cfg.data.subsample_factor},
               {"train_fraction", cfg.data.train_fraction}};
  data["path"] = cfg.data.path ? json(*cfg.data.path) : json(nullptr);
  return {{"data", data},
          {"net", to_json(cfg.net)},
          {"pretrain", to_json(cfg.pretrain)},
          {"finetune", to_json(cfg.finetune)},
          {"eval",
           {{"data_range", cfg.eval.data_range},
            {"report_name", cfg.eval.report_name},
            {"save_frames", cfg.eval.save_frames}}}};
}

void apply_json(const json& j, ExperimentConfig& cfg) {
  reject_unknown(j, {"data", "net", "pretrain", "finetune", "eval"}, "<root>");
  if (j.contains("data")) {
    const json& d = j.at("data");
    reject_unknown(d, {"path", "spec", "subsample_factor", "train_fraction"}, "data");
    if (d.contains("path")) {
      if (d.at("path").is_null()) {
        cfg.data.path.reset();
      } else {
        std::string path;
        read(d, "path", path, "data");
        cfg.data.path = path;
      }
    }
    if (d.contains("spec")) apply_json(d.at("spec"), cfg.data.spec);
    read(d, "subsample_factor", cfg.data.subsample_factor, "data");
    read(d, "train_fraction", cfg.data.train_fraction, "data");
  }
  if (j.contains("net")) apply_json(j.at("net"), cfg.net);
  if (j.contains("pretrain")) apply_json(j.at("pretrain"), cfg.pretrain);
  if (j.contains("finetune")) apply_json(j.at("finetune"), cfg.finetune);
  if (j.contains("eval")) {
    const json& e = j.at("eval");
    reject_unknown(e, {"data_range", "report_name", "save_frames"}, "eval");
    if (e.contains("data_range")) {
      const json& v = e.at("data_range");
      if (v.is_number()) {
        cfg.eval.data_range = std::to_string(v.get<double>());
      } else {
        read(e, "data_range", cfg.eval.data_range, "eval");
      }
    }
    read(e, "report_name", cfg.eval.report_name, "eval");
    read(e, "save_frames", cfg.eval.save_frames, "eval");
  }
  cfg.pretrain.phase = Phase::pretrain;
  cfg.finetune.phase = Phase::finetune;
  const bool data_sets = j.contains("data") && j.at("data").contains("subsample_factor");
  const bool train_sets = j.contains("pretrain") && j.at("pretrain").contains("subsample_factor");
  if (data_sets && train_sets && cfg.data.subsample_factor != cfg.pretrain.subsample_factor) {
    throw ConfigError("data.subsample_factor and pretrain.subsample_factor disagree");
  }
  if (data_sets) {
    cfg.pretrain.subsample_factor = cfg.data.subsample_factor;
  } else {
    cfg.data.subsample_factor = cfg.pretrain.subsample_factor;
  }
  if (!(cfg.data.train_fraction > 0.0 && cfg.data.train_fraction <= 1.0)) {
    throw ConfigError("data.train_fraction must lie in (0, 1]");
  }
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError("cannot parse config " + path.string() + ": " + e.what());
  }
  ExperimentConfig cfg;
  apply_json(j, cfg);
  return cfg;
}

std::optional<std::uint64_t> seed_from_environment() {
  const char* raw = std::getenv("STINT_SEED");
  if (!raw || !*raw) return std::nullopt;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(raw, &used);
    if (used != std::string(raw).size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string("STINT_SEED must be a non-negative integer, got '") + raw + "'");
  }
}

double resolve_data_range(const EvalSection& eval, double capacity) {
  if (eval.data_range == "capacity") return capacity;
  try {
    std::size_t used = 0;
    const double v = std::stod(eval.data_range, &used);
    if (used == eval.data_range.size() && v > 0.0 && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("eval.data_range must be \"capacity\" or a positive number, got '" + eval.data_range + "'");
}

}  // namespace stint
