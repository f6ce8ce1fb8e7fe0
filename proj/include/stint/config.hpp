#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "stint/net.hpp"
#include "stint/seqdata.hpp"
#include "stint/train.hpp"

namespace stint {

struct DataSection {
  /// FSEQ file; when absent the synthetic spec is generated.
  std::optional<std::string> path;
  SyntheticSpec spec;
  std::int64_t subsample_factor = 1;
  /// Leading fraction of frames used for training; the rest is held out.
  double train_fraction = 0.8;
};

struct EvalSection {
  /// "capacity" or a positive number.
  std::string data_range = "capacity";
  std::string report_name = "report.csv";
  bool save_frames = false;
};

/// Resolved experiment: defaults < config file < STINT_SEED < flags.
struct ExperimentConfig {
  DataSection data;
  NetConfig net = NetConfig::desk();
  TrainConfig pretrain = TrainConfig::pretrain_defaults();
  TrainConfig finetune = TrainConfig::finetune_defaults();
  EvalSection eval;
};

nlohmann::json to_json(const NetConfig& cfg);
nlohmann::json to_json(const TrainConfig& cfg);
nlohmann::json to_json(const SyntheticSpec& spec);
nlohmann::json to_json(const ExperimentConfig& cfg);

/// Overlay `j` onto `cfg`. Unknown keys and ill-typed values raise ConfigError.
void apply_json(const nlohmann::json& j, NetConfig& cfg);
void apply_json(const nlohmann::json& j, TrainConfig& cfg);
void apply_json(const nlohmann::json& j, SyntheticSpec& spec);
void apply_json(const nlohmann::json& j, ExperimentConfig& cfg);

NetConfig net_config_from_json(const nlohmann::json& j);

ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Parses STINT_SEED; nullopt when unset.
std::optional<std::uint64_t> seed_from_environment();

/// "capacity" -> capacity, otherwise the parsed positive number.
double resolve_data_range(const EvalSection& eval, double capacity);

}  // namespace stint
