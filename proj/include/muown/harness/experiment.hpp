#pragma once

#include "muown/harness/config.hpp"
#include "muown/harness/runlog.hpp"

#include <json.hpp>

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace muown {

struct Assertion {
  std::string name;
  bool pass = false;
  nlohmann::json detail;
};

struct Outcome {
  std::string preset;
  std::vector<Assertion> assertions;
  nlohmann::json summary;

  bool pass() const;
  nlohmann::json verdict() const;
};

// Losses above this, or non-finite ones, end a run as diverged.
inline constexpr double kDivergenceLoss = 1e12;

struct TrainSpec {
  std::string tag;
  OptimizerKind kind = OptimizerKind::Muown;
  HyperParams hp;
};

struct TrainResult {
  std::string tag;
  std::size_t completed = 0;
  bool diverged = false;
  std::optional<std::size_t> failed_step;
  std::string error;
  double final_loss = 0.0; // full-dataset loss at the last good iterate; +inf if diverged
  std::vector<Matrix> initial_weights;
  std::vector<Layer> layers;

  nlohmann::json to_json() const;
};

// Called after every completed step with the layers before and after it and
// one LayerMetrics per matrix layer.
using StepObserver = std::function<void(std::size_t step, const std::vector<Layer> &before,
                                        const std::vector<Layer> &after,
                                        const std::vector<LayerMetrics> &metrics)>;

// One training run from `init`. Batches cycle through seeded epochs (or the
// full dataset when batch_size is 0); the schedule scales hp.lr (and a
// positive hp.gamma) per step. Divergence and optimizer errors end the run and
// are recorded in the result rather than thrown.
TrainResult train_run(const Model &model, const Dataset &data, const ParamSet &init,
                      const ExperimentConfig &cfg, const TrainSpec &spec, RunLog &log,
                      const std::filesystem::path &checkpoint_dir = {},
                      const StepObserver &observer = {});

// 4 sqrt(L delta1 / T), the rate-check bound on the average dual gradient norm.
double rate_bound(double L, double delta1, std::size_t horizon);

std::vector<std::string> matrix_layer_names(const ParamSet &params);

// Runs cfg.preset, writing log.csv, summary.json, verdict.json (plus
// preset-specific files) into out_dir. Throws ConfigError for invalid
// configurations.
Outcome run_experiment(const ExperimentConfig &cfg, const std::filesystem::path &out_dir);

Outcome preset_train(const ExperimentConfig &cfg, const std::filesystem::path &out_dir);
Outcome preset_drift(const ExperimentConfig &cfg, const std::filesystem::path &out_dir);
Outcome preset_rate_check(const ExperimentConfig &cfg, const std::filesystem::path &out_dir);
Outcome preset_noise_compare(const ExperimentConfig &cfg, const std::filesystem::path &out_dir);
Outcome preset_lr_sweep(const ExperimentConfig &cfg, const std::filesystem::path &out_dir);

} // namespace muown
