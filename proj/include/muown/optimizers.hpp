#pragma once

#include "muown/matrix.hpp"
#include "muown/orthogonalize.hpp"
#include "muown/param.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace muown {

enum class OptimizerKind {
  Muown,       // direction: Muon with Nesterov; magnitude: Adam
  MuownSignum, // direction: Muon; magnitude: SignSGD with momentum (convergence-analysis variant)
  MuownFixed,  // direction only; magnitudes frozen at initialization
  Muon,
  AdamW,
  Signum,
};

std::string_view to_string(OptimizerKind kind);
// Accepts the to_string spellings; throws InvalidArgument otherwise.
OptimizerKind parse_optimizer_kind(std::string_view name);
bool is_muown_family(OptimizerKind kind);

struct HyperParams {
  double lr = 1e-3;           // eta_t, updated by the schedule each step
  double gamma = 0.0;         // magnitude stepsize of MuownSignum; <= 0 reuses lr
  double weight_decay = 0.0;  // decoupled, lambda
  double beta1 = 0.95;        // direction / Muon / Signum momentum
  double adam_beta1 = 0.9;    // magnitude Adam and AdamW
  double adam_beta2 = 0.95;
  double adam_eps = 1e-8;
  NSConfig ns;
  OrthBackend orth = OrthBackend::NewtonSchulz;
  bool rms_scale = true;      // 0.2 sqrt(max(m, n)) on direction steps

  // Throws InvalidArgument on out-of-range values.
  void validate() const;
  double magnitude_step() const { return gamma > 0.0 ? gamma : lr; }
};

// 0.2 sqrt(max(m, n)) when enabled, else 1.
double direction_scale(const HyperParams &hp, std::size_t rows, std::size_t cols);

struct MuownLayerState {
  Matrix W;     // effective weight
  Vector g;     // signed row magnitudes, ||W||_row = |g|
  Vector r;     // cached ||R||_row
  Matrix M;     // direction momentum
  Vector m_g;   // magnitude first moment (Signum momentum for MuownSignum)
  Vector v_g;   // magnitude second moment
  std::int64_t t = 0;
  bool primed = false; // MuownSignum: momenta seeded with the first gradient
};

struct MuonLayerState {
  Matrix W;
  Matrix M;
  std::int64_t t = 0;
};

struct AdamLayerState {
  Matrix W;
  Matrix m;
  Matrix v;
  std::int64_t t = 0;
};

struct SignumLayerState {
  Matrix W;
  Matrix m;
  std::int64_t t = 0;
};

// Throws ZeroRow if any row of w is (near-)zero.
MuownLayerState init_muown(const Matrix &w);
MuonLayerState init_muon(const Matrix &w);
AdamLayerState init_adam(const Matrix &w);
SignumLayerState init_signum(const Matrix &w);

// Quantities produced inside a Muown-family step, for logging and checks.
struct StepTrace {
  Vector grad_g;
  Matrix grad_R;
  Matrix direction; // the applied unit direction (already negated)
  Matrix R_before;
  Matrix R_after;
  Vector g_before;
  Vector g_after;
};

MuownLayerState muown_step(MuownLayerState s, const Matrix &grad, const HyperParams &hp,
                           StepTrace *trace = nullptr);
MuownLayerState muown_signum_step(MuownLayerState s, const Matrix &grad, const HyperParams &hp,
                                  StepTrace *trace = nullptr);
MuownLayerState muown_fixed_step(MuownLayerState s, const Matrix &grad, const HyperParams &hp,
                                 StepTrace *trace = nullptr);
MuonLayerState muon_step(MuonLayerState s, const Matrix &grad, const HyperParams &hp);
AdamLayerState adamw_step(AdamLayerState s, const Matrix &grad, const HyperParams &hp);
SignumLayerState signum_step(SignumLayerState s, const Matrix &grad, const HyperParams &hp);

using LayerState = std::variant<MuownLayerState, MuonLayerState, AdamLayerState, SignumLayerState>;

struct Layer {
  std::string name;
  OptimizerKind kind = OptimizerKind::Muown;
  LayerState state;

  const Matrix &weight() const;
  std::int64_t steps() const;
};

// Matrix parameters take `matrix_kind`; elementwise ones take AdamW.
Layer make_layer(std::string name, const Matrix &init, ParamKind pkind, OptimizerKind matrix_kind);
std::vector<Layer> make_layers(const ParamSet &params, OptimizerKind matrix_kind);

Layer step_layer(Layer layer, const Matrix &grad, const HyperParams &hp, StepTrace *trace = nullptr);

// Steps every layer in order; failures are collected and rethrown together
// as a StepError naming each failing layer index.
std::vector<Layer> step_all(std::vector<Layer> layers, std::span<const Matrix> grads,
                            const HyperParams &hp);

// Writes <dir>/<name>.mwn (MWN1 records) and <dir>/<name>.json
// ({kind, t, hyperparams, tensors}).
void save_checkpoint(const std::filesystem::path &dir, const Layer &layer, const HyperParams &hp);
Layer load_checkpoint(const std::filesystem::path &dir, const std::string &name);

} // namespace muown
