#include "muown/optimizers.hpp"

#include "muown/error.hpp"
#include "muown/linalg.hpp"
#include "muown/reparam.hpp"

#include <cmath>
#include <string>

namespace muown {
namespace {

enum class Magnitude { Adam, Sign, Frozen };

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

void require_grad(const Matrix &w, const Matrix &grad) {
  if (!w.same_shape(grad)) {
    throw DimensionMismatch("gradient shape " + std::to_string(grad.rows()) + "x" +
                            std::to_string(grad.cols()) + " differs from parameter shape " +
                            std::to_string(w.rows()) + "x" + std::to_string(w.cols()));
  }
  if (!all_finite(grad)) {
    throw NonFinite("gradient contains NaN or Inf");
  }
}

void require_finite(const Matrix &w, const char *who) {
  if (!all_finite(w)) {
    throw NonFinite(std::string(who) + ": update produced NaN or Inf");
  }
}

// Shared body of the three Muown variants. `nesterov` selects the Muown
// look-ahead input beta*M + grad_R versus the plain momentum M.
MuownLayerState muown_common(MuownLayerState s, const Matrix &grad, const HyperParams &hp,
                             Magnitude magnitude, bool nesterov, double dir_scale,
                             StepTrace *trace) {
  hp.validate();
  require_grad(s.W, grad);
  const std::size_t m = s.W.rows();
  s.t += 1;

  // Reconstruct R and its row normalization.
  Vector to_r(m);
  for (std::size_t i = 0; i < m; ++i) {
    to_r[i] = s.r[i] / s.g[i];
  }
  Matrix R = diag_scale_rows(to_r, s.W);
  check_rows(s.r);
  const Matrix D = row_normalize(s.r, R);

  const Vector gg = grad_g(grad, D);
  const Matrix gR = grad_R(grad, s.g, s.r, D);

  if (magnitude == Magnitude::Sign && !s.primed) {
    s.M = gR;
    s.m_g = gg;
    s.primed = true;
  }

  // Direction: steepest descent under the spectral norm.
  s.M *= hp.beta1;
  s.M += gR;
  Matrix direction;
  if (nesterov) {
    Matrix look = hp.beta1 * s.M;
    look += gR;
    direction = orthogonalize(look, hp.orth, hp.ns);
  } else {
    direction = orthogonalize(s.M, hp.orth, hp.ns);
  }
  direction *= -1.0;
  if (trace) {
    trace->R_before = R;
  }
  R += (dir_scale * hp.lr) * direction;

  // Magnitude.
  const Vector g_before = s.g;
  switch (magnitude) {
  case Magnitude::Adam: {
    const double bc1 = 1.0 - std::pow(hp.adam_beta1, static_cast<double>(s.t));
    const double bc2 = 1.0 - std::pow(hp.adam_beta2, static_cast<double>(s.t));
    for (std::size_t i = 0; i < m; ++i) {
      s.m_g[i] = hp.adam_beta1 * s.m_g[i] + (1.0 - hp.adam_beta1) * gg[i];
      s.v_g[i] = hp.adam_beta2 * s.v_g[i] + (1.0 - hp.adam_beta2) * gg[i] * gg[i];
      const double mhat = s.m_g[i] / bc1;
      const double vhat = s.v_g[i] / bc2;
      s.g[i] = s.g[i] - hp.lr * (mhat / (std::sqrt(vhat) + hp.adam_eps));
    }
    break;
  }
  case Magnitude::Sign: {
    const double step = hp.magnitude_step();
    for (std::size_t i = 0; i < m; ++i) {
      s.m_g[i] = hp.beta1 * s.m_g[i] + gg[i];
      s.g[i] = s.g[i] - step * sgn(s.m_g[i]);
    }
    break;
  }
  case Magnitude::Frozen:
    break;
  }

  // Effective weight.
  s.r = row_norms(R);
  check_rows(s.r);
  const Matrix w_old = std::move(s.W);
  s.W = recompose(s.g, s.r, R);
  if (hp.weight_decay > 0.0) {
    s.W -= (hp.lr * hp.weight_decay) * w_old;
    const Vector norms = row_norms(s.W);
    for (std::size_t i = 0; i < m; ++i) {
      s.g[i] = s.g[i] < 0.0 ? -norms[i] : norms[i];
    }
  }
  require_finite(s.W, "muown");
  for (std::size_t i = 0; i < m; ++i) {
    if (s.g[i] == 0.0) {
      throw ZeroRow(i);
    }
  }

  if (trace) {
    trace->grad_g = gg;
    trace->grad_R = gR;
    trace->direction = std::move(direction);
    trace->R_after = std::move(R);
    trace->g_before = g_before;
    trace->g_after = s.g;
  }
  return s;
}

template <class State> const Matrix &weight_of(const State &s) { return s.W; }

} // namespace

std::string_view to_string(OptimizerKind kind) {
  switch (kind) {
  case OptimizerKind::Muown:
    return "muown";
  case OptimizerKind::MuownSignum:
    return "muown-signum";
  case OptimizerKind::MuownFixed:
    return "muown-fixed";
  case OptimizerKind::Muon:
    return "muon";
  case OptimizerKind::AdamW:
    return "adamw";
  case OptimizerKind::Signum:
    return "signum";
  }
  return "unknown";
}

OptimizerKind parse_optimizer_kind(std::string_view name) {
  for (auto k : {OptimizerKind::Muown, OptimizerKind::MuownSignum, OptimizerKind::MuownFixed,
                 OptimizerKind::Muon, OptimizerKind::AdamW, OptimizerKind::Signum}) {
    if (to_string(k) == name) {
      return k;
    }
  }
  throw InvalidArgument("unknown optimizer '" + std::string(name) + "'");
}

bool is_muown_family(OptimizerKind kind) {
  return kind == OptimizerKind::Muown || kind == OptimizerKind::MuownSignum ||
         kind == OptimizerKind::MuownFixed;
}

void HyperParams::validate() const {
  auto fail = [](const std::string &what) { throw InvalidArgument("hyperparameter " + what); };
  // lr = 0 is a legal no-op step (the end of a decay schedule).
  if (!(lr >= 0.0) || !std::isfinite(lr)) {
    fail("lr must be non-negative and finite");
  }
  if (!(weight_decay >= 0.0)) {
    fail("weight_decay must be >= 0");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0)) {
    fail("beta1 must lie in [0, 1)");
  }
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0)) {
    fail("adam_beta1 must lie in [0, 1)");
  }
  if (!(adam_beta2 > adam_beta1 && adam_beta2 < 1.0)) {
    fail("adam_beta2 must lie in (adam_beta1, 1)");
  }
  if (!(adam_eps >= 0.0)) {
    fail("adam_eps must be >= 0");
  }
  if (ns.steps < 1 || !std::isfinite(ns.a) || !std::isfinite(ns.b) || !std::isfinite(ns.c)) {
    fail("ns config must have steps >= 1 and finite coefficients");
  }
}

double direction_scale(const HyperParams &hp, std::size_t rows, std::size_t cols) {
  return hp.rms_scale ? 0.2 * std::sqrt(static_cast<double>(std::max(rows, cols))) : 1.0;
}

MuownLayerState init_muown(const Matrix &w) {
  Vector r = row_norms(w);
  check_rows(r);
  MuownLayerState s;
  s.W = w;
  s.g = r;
  s.r = std::move(r);
  s.M = Matrix(w.rows(), w.cols());
  s.m_g = Vector(w.rows());
  s.v_g = Vector(w.rows());
  return s;
}

MuonLayerState init_muon(const Matrix &w) { return {w, Matrix(w.rows(), w.cols()), 0}; }

AdamLayerState init_adam(const Matrix &w) {
  return {w, Matrix(w.rows(), w.cols()), Matrix(w.rows(), w.cols()), 0};
}

SignumLayerState init_signum(const Matrix &w) { return {w, Matrix(w.rows(), w.cols()), 0}; }

MuownLayerState muown_step(MuownLayerState s, const Matrix &grad, const HyperParams &hp,
                           StepTrace *trace) {
  const double scale = direction_scale(hp, s.W.rows(), s.W.cols());
  return muown_common(std::move(s), grad, hp, Magnitude::Adam, true, scale, trace);
}

MuownLayerState muown_signum_step(MuownLayerState s, const Matrix &grad, const HyperParams &hp,
                                  StepTrace *trace) {
  return muown_common(std::move(s), grad, hp, Magnitude::Sign, false, 1.0, trace);
}

MuownLayerState muown_fixed_step(MuownLayerState s, const Matrix &grad, const HyperParams &hp,
                                 StepTrace *trace) {
  if (hp.weight_decay > 0.0) {
    throw InvalidArgument("muown-fixed freezes g; decoupled weight decay would move it");
  }
  const double scale = direction_scale(hp, s.W.rows(), s.W.cols());
  return muown_common(std::move(s), grad, hp, Magnitude::Frozen, true, scale, trace);
}

MuonLayerState muon_step(MuonLayerState s, const Matrix &grad, const HyperParams &hp) {
  hp.validate();
  require_grad(s.W, grad);
  s.t += 1;
  s.M *= hp.beta1;
  s.M += grad;
  Matrix look = hp.beta1 * s.M;
  look += grad;
  const Matrix o = orthogonalize(look, hp.orth, hp.ns);
  const Matrix w_old = s.W;
  s.W -= (direction_scale(hp, s.W.rows(), s.W.cols()) * hp.lr) * o;
  if (hp.weight_decay > 0.0) {
    s.W -= (hp.lr * hp.weight_decay) * w_old;
  }
  require_finite(s.W, "muon");
  return s;
}

AdamLayerState adamw_step(AdamLayerState s, const Matrix &grad, const HyperParams &hp) {
  hp.validate();
  require_grad(s.W, grad);
  s.t += 1;
  const double bc1 = 1.0 - std::pow(hp.adam_beta1, static_cast<double>(s.t));
  const double bc2 = 1.0 - std::pow(hp.adam_beta2, static_cast<double>(s.t));
  auto w = s.W.span();
  auto m = s.m.span();
  auto v = s.v.span();
  const auto gr = grad.span();
  for (std::size_t k = 0; k < w.size(); ++k) {
    m[k] = hp.adam_beta1 * m[k] + (1.0 - hp.adam_beta1) * gr[k];
    v[k] = hp.adam_beta2 * v[k] + (1.0 - hp.adam_beta2) * gr[k] * gr[k];
    const double mhat = m[k] / bc1;
    const double vhat = v[k] / bc2;
    w[k] = w[k] - hp.lr * hp.weight_decay * w[k] - hp.lr * (mhat / (std::sqrt(vhat) + hp.adam_eps));
  }
  require_finite(s.W, "adamw");
  return s;
}

SignumLayerState signum_step(SignumLayerState s, const Matrix &grad, const HyperParams &hp) {
  hp.validate();
  require_grad(s.W, grad);
  s.t += 1;
  auto w = s.W.span();
  auto m = s.m.span();
  const auto gr = grad.span();
  for (std::size_t k = 0; k < w.size(); ++k) {
    m[k] = hp.beta1 * m[k] + gr[k];
    w[k] = w[k] - hp.lr * hp.weight_decay * w[k] - hp.lr * sgn(m[k]);
  }
  require_finite(s.W, "signum");
  return s;
}

const Matrix &Layer::weight() const {
  return std::visit([](const auto &s) -> const Matrix & { return weight_of(s); }, state);
}

std::int64_t Layer::steps() const {
  return std::visit([](const auto &s) { return s.t; }, state);
}

Layer make_layer(std::string name, const Matrix &init, ParamKind pkind, OptimizerKind matrix_kind) {
  const OptimizerKind kind = pkind == ParamKind::Elementwise ? OptimizerKind::AdamW : matrix_kind;
  Layer layer{std::move(name), kind, {}};
  switch (kind) {
  case OptimizerKind::Muown:
  case OptimizerKind::MuownSignum:
  case OptimizerKind::MuownFixed:
    layer.state = init_muown(init);
    break;
  case OptimizerKind::Muon:
    layer.state = init_muon(init);
    break;
  case OptimizerKind::AdamW:
    layer.state = init_adam(init);
    break;
  case OptimizerKind::Signum:
    layer.state = init_signum(init);
    break;
  }
  return layer;
}

std::vector<Layer> make_layers(const ParamSet &params, OptimizerKind matrix_kind) {
  std::vector<Layer> out;
  out.reserve(params.size());
  for (const auto &p : params) {
    out.push_back(make_layer(p.name, p.value, p.kind, matrix_kind));
  }
  return out;
}

Layer step_layer(Layer layer, const Matrix &grad, const HyperParams &hp, StepTrace *trace) {
  switch (layer.kind) {
  case OptimizerKind::Muown:
    layer.state = muown_step(std::get<MuownLayerState>(std::move(layer.state)), grad, hp, trace);
    break;
  case OptimizerKind::MuownSignum:
    layer.state =
        muown_signum_step(std::get<MuownLayerState>(std::move(layer.state)), grad, hp, trace);
    break;
  case OptimizerKind::MuownFixed:
    layer.state =
        muown_fixed_step(std::get<MuownLayerState>(std::move(layer.state)), grad, hp, trace);
    break;
  case OptimizerKind::Muon:
    layer.state = muon_step(std::get<MuonLayerState>(std::move(layer.state)), grad, hp);
    break;
  case OptimizerKind::AdamW:
    layer.state = adamw_step(std::get<AdamLayerState>(std::move(layer.state)), grad, hp);
    break;
  case OptimizerKind::Signum:
    layer.state = signum_step(std::get<SignumLayerState>(std::move(layer.state)), grad, hp);
    break;
  }
  return layer;
}

std::vector<Layer> step_all(std::vector<Layer> layers, std::span<const Matrix> grads,
                            const HyperParams &hp) {
  if (grads.size() != layers.size()) {
    throw DimensionMismatch("step_all: " + std::to_string(grads.size()) + " gradients for " +
                            std::to_string(layers.size()) + " layers");
  }
  std::vector<StepError::Failure> failures;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    try {
      layers[i] = step_layer(layers[i], grads[i], hp);
    } catch (const Error &e) {
      failures.push_back({i, e.what()});
    }
  }
  if (!failures.empty()) {
    throw StepError(std::move(failures));
  }
  return layers;
}

} // namespace muown
