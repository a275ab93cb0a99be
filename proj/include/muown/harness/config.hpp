#pragma once

#include "muown/harness/schedule.hpp"
#include "muown/models.hpp"
#include "muown/optimizers.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace muown {

inline constexpr std::string_view kPresets[] = {"train", "drift", "rate-check", "noise-compare",
                                                "lr-sweep"};

struct ExperimentConfig {
  std::string preset = "train";
  std::uint64_t seed = 0;
  std::size_t steps = 200;
  std::size_t batch_size = 32; // 0 trains on the full dataset every step
  std::size_t log_every = 1;
  std::size_t checkpoint_every = 0; // 0 disables MWN1 dumps
  ModelSpec model;
  OptimizerKind optimizer = OptimizerKind::Muown;
  HyperParams hp;
  Schedule schedule;

  // rate-check
  std::vector<std::size_t> horizons{100, 400, 1600};
  // noise-compare
  std::size_t noise_checkpoints = 4;
  // lr-sweep: learning rates 2^k for k = log2_lr_min, min + step, ..., log2_lr_max
  int log2_lr_min = -16;
  int log2_lr_max = -5;
  int log2_lr_step = 1;
  std::vector<OptimizerKind> sweep_optimizers; // empty: just `optimizer`

  // Throws ConfigError naming the offending field.
  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig &cfg);

// Unknown keys, wrong types and out-of-range values throw ConfigError with the
// dotted field path.
ExperimentConfig config_from_json(const nlohmann::json &j);

// JSON syntax errors throw ConfigError with "<source>:<line>:<column>".
nlohmann::json parse_config_text(const std::string &text, const std::string &source);
nlohmann::json read_config_file(const std::filesystem::path &path);

// Applies "a.b.c=value". The value is read as JSON when it parses (numbers,
// booleans, arrays), otherwise taken as a string. Intermediate objects are
// created as needed.
void apply_override(nlohmann::json &j, std::string_view assignment);

} // namespace muown
