#include "muown/harness/experiment.hpp"

#include "muown/diagnostics.hpp"
#include "muown/error.hpp"
#include "muown/json_io.hpp"
#include "muown/linalg.hpp"
#include "muown/reparam.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace muown {

using nlohmann::json;

bool Outcome::pass() const {
  for (const auto &a : assertions) {
    if (!a.pass) {
      return false;
    }
  }
  return true;
}

json Outcome::verdict() const {
  json list = json::array();
  for (const auto &a : assertions) {
    list.push_back({{"name", a.name}, {"pass", a.pass}, {"detail", a.detail}});
  }
  return json{{"preset", preset}, {"pass", pass()}, {"assertions", list}};
}

json TrainResult::to_json() const {
  json j{{"run", tag},
         {"completed_steps", completed},
         {"diverged", diverged},
         {"final_loss", format_double(final_loss)}};
  if (failed_step) {
    j["failed_step"] = *failed_step;
    j["error"] = error;
  }
  return j;
}

std::vector<std::string> matrix_layer_names(const ParamSet &params) {
  std::vector<std::string> out;
  for (const auto &p : params) {
    if (p.kind == ParamKind::Matrix) {
      out.push_back(p.name);
    }
  }
  return out;
}

namespace {

ParamSet with_weights(ParamSet params, const std::vector<Layer> &layers) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i].value = layers[i].weight();
  }
  return params;
}

class BatchCycle {
public:
  BatchCycle(const Dataset &data, std::size_t batch_size) : data_(data), batch_size_(batch_size) {
    if (batch_size_ == 0) {
      full_ = full_batch(data_);
    }
  }

  // Batch for step k (counted from 1).
  const Batch &at(std::size_t k) {
    if (batch_size_ == 0) {
      return full_;
    }
    const std::size_t per_epoch = data_.size() / batch_size_;
    const std::size_t epoch = (k - 1) / per_epoch;
    if (epoch != epoch_ || batches_.empty()) {
      batches_ = epoch_batches(data_, batch_size_, epoch);
      epoch_ = epoch;
    }
    return batches_[(k - 1) % per_epoch];
  }

private:
  const Dataset &data_;
  std::size_t batch_size_;
  Batch full_;
  std::size_t epoch_ = 0;
  std::vector<Batch> batches_;
};

HyperParams scheduled(const HyperParams &base, const Schedule &s, std::size_t k, std::size_t total) {
  HyperParams hp = base;
  hp.lr = s.lr(base.lr, k, total);
  if (base.gamma > 0.0) {
    hp.gamma = s.lr(base.gamma, k, total);
  }
  return hp;
}

double full_loss(const Model &model, const ParamSet &params, const Dataset &data) {
  try {
    const double l = model.loss(params, full_batch(data));
    return std::isfinite(l) ? l : std::numeric_limits<double>::infinity();
  } catch (const NonFinite &) {
    return std::numeric_limits<double>::infinity();
  }
}

void write_outputs(const std::filesystem::path &out, const RunLog &log, const Outcome &o) {
  log.write(out / "log.csv");
  write_text(out / "summary.json", o.summary.dump(2) + "\n");
  write_text(out / "verdict.json", o.verdict().dump(2) + "\n");
}

json base_summary(const ExperimentConfig &cfg) {
  return json{{"preset", cfg.preset}, {"config", to_json(cfg)}, {"runs", json::array()}};
}

Assertion runs_completed(const std::vector<TrainResult> &runs) {
  Assertion a{"runs_completed", true, json::array()};
  for (const auto &r : runs) {
    if (r.diverged || r.failed_step) {
      a.pass = false;
      a.detail.push_back(r.to_json());
    }
  }
  return a;
}

} // namespace

TrainResult train_run(const Model &model, const Dataset &data, const ParamSet &init,
                      const ExperimentConfig &cfg, const TrainSpec &spec, RunLog &log,
                      const std::filesystem::path &checkpoint_dir, const StepObserver &observer) {
  TrainResult res;
  res.tag = spec.tag;
  res.layers = make_layers(init, spec.kind);
  for (const auto &l : res.layers) {
    res.initial_weights.push_back(l.weight());
  }
  std::vector<std::size_t> matrix_idx;
  for (std::size_t i = 0; i < init.size(); ++i) {
    if (init[i].kind == ParamKind::Matrix) {
      matrix_idx.push_back(i);
    }
  }

  BatchCycle batches(data, cfg.batch_size);
  const std::size_t total = cfg.steps;
  for (std::size_t k = 1; k <= total; ++k) {
    const HyperParams hp = scheduled(spec.hp, cfg.schedule, k, total);
    const ParamSet params = with_weights(init, res.layers);
    LossGrad lg;
    try {
      lg = model.loss_and_grad(params, batches.at(k));
    } catch (const NonFinite &e) {
      res.diverged = true;
      res.failed_step = k;
      res.error = e.what();
      break;
    }
    if (!(lg.loss <= kDivergenceLoss)) {
      res.diverged = true;
      res.failed_step = k;
      res.error = "loss " + format_double(lg.loss) + " exceeds the divergence threshold";
      break;
    }
    const std::vector<Matrix> grads = lg.grads.values();
    std::vector<Layer> next;
    try {
      next = step_all(res.layers, grads, hp);
    } catch (const Error &e) {
      res.failed_step = k;
      res.error = e.what();
      res.diverged = dynamic_cast<const StepError *>(&e) != nullptr;
      break;
    }

    std::vector<LayerMetrics> metrics;
    metrics.reserve(matrix_idx.size());
    for (std::size_t i : matrix_idx) {
      metrics.push_back(measure_layer(res.layers[i].weight(), grads[i], next[i].weight()));
    }
    if (k % cfg.log_every == 0 || k == total) {
      log.add(spec.tag, k, hp.lr, lg.loss, metrics);
    }
    if (observer) {
      observer(k, res.layers, next, metrics);
    }
    res.layers = std::move(next);
    res.completed = k;

    if (cfg.checkpoint_every > 0 && k % cfg.checkpoint_every == 0 && !checkpoint_dir.empty()) {
      const auto dir = checkpoint_dir / spec.tag / ("step_" + std::to_string(k));
      std::filesystem::create_directories(dir);
      for (const auto &l : res.layers) {
        save_checkpoint(dir, l, hp);
      }
    }
  }
  res.final_loss = res.failed_step ? std::numeric_limits<double>::infinity()
                                   : full_loss(model, with_weights(init, res.layers), data);
  return res;
}

// ---- train ----

Outcome preset_train(const ExperimentConfig &cfg, const std::filesystem::path &out) {
  const auto model = make_model(cfg.model, cfg.seed);
  const Dataset data = synth_data(cfg.model, cfg.seed);
  const ParamSet init = model->init_params(cfg.seed);
  RunLog log(matrix_layer_names(init));
  const TrainResult r = train_run(*model, data, init, cfg,
                                  {std::string(to_string(cfg.optimizer)), cfg.optimizer, cfg.hp},
                                  log, out / "checkpoints");
  Outcome o{cfg.preset, {runs_completed({r})}, base_summary(cfg)};
  o.summary["runs"].push_back(r.to_json());
  write_outputs(out, log, o);
  return o;
}

// ---- drift ----

Outcome preset_drift(const ExperimentConfig &cfg, const std::filesystem::path &out) {
  const auto model = make_model(cfg.model, cfg.seed);
  const Dataset data = synth_data(cfg.model, cfg.seed);
  const ParamSet init = model->init_params(cfg.seed);
  const auto names = matrix_layer_names(init);
  RunLog log(names);

  HyperParams no_decay = cfg.hp;
  no_decay.weight_decay = 0.0;
  const std::vector<TrainSpec> specs{{"muon", OptimizerKind::Muon, no_decay},
                                     {"muown-fixed", OptimizerKind::MuownFixed, no_decay},
                                     {"muown", OptimizerKind::Muown, cfg.hp}};

  std::vector<TrainResult> results;
  double min_coherence = std::numeric_limits<double>::infinity();
  double fixed_row_dev = 0.0;
  json series = json::object();
  for (const auto &spec : specs) {
    // Row norms at the start, per parameter index.
    std::vector<Vector> start_rows;
    for (const auto &p : init) {
      start_rows.push_back(row_norms(p.value));
    }
    std::vector<double> max_row;
    auto obs = [&](std::size_t, const std::vector<Layer> &, const std::vector<Layer> &after,
                   const std::vector<LayerMetrics> &metrics) {
      double mr = 0.0;
      for (const auto &m : metrics) {
        min_coherence = std::min(min_coherence, std::isnan(m.coherence) ? -1.0 : m.coherence);
        mr = std::max(mr, m.g_inf);
      }
      max_row.push_back(mr);
      if (spec.kind != OptimizerKind::MuownFixed) {
        return;
      }
      for (std::size_t i = 0; i < init.size(); ++i) {
        if (init[i].kind != ParamKind::Matrix) {
          continue;
        }
        const Vector now = row_norms(after[i].weight());
        for (std::size_t r = 0; r < now.size(); ++r) {
          fixed_row_dev = std::max(fixed_row_dev, std::abs(now[r] - start_rows[i][r]));
        }
      }
    };
    results.push_back(train_run(*model, data, init, cfg, spec, log, out / "checkpoints", obs));
    series[spec.tag] = {{"max_row_norm", max_row}};
  }

  // Initial max row norm across matrix layers, shared by all three runs.
  double initial_max_row = 0.0;
  for (const auto &p : init) {
    if (p.kind == ParamKind::Matrix) {
      initial_max_row = std::max(initial_max_row, vec_linf(row_norms(p.value)));
    }
  }

  bool identical = true;
  for (const auto &r : results) {
    for (std::size_t i = 0; i < init.size(); ++i) {
      identical = identical && r.initial_weights[i] == init[i].value;
    }
  }

  Outcome o{cfg.preset, {}, base_summary(cfg)};
  o.assertions.push_back(runs_completed(results));
  o.assertions.push_back({"fixed_row_norms_constant", fixed_row_dev <= 1e-10,
                          {{"max_abs_deviation", fixed_row_dev}, {"tolerance", 1e-10}}});
  o.assertions.push_back({"coherence_lower_bound", min_coherence >= 1.0 - 1e-9,
                          {{"min_coherence", min_coherence}, {"tolerance", 1e-9}}});
  o.assertions.push_back({"identical_start", identical, json::object()});
  for (const auto &r : results) {
    json j = r.to_json();
    const auto &mr = series[r.tag]["max_row_norm"];
    j["initial_max_row_norm"] = initial_max_row;
    if (!mr.empty()) {
      j["final_max_row_norm"] = mr.back();
    }
    o.summary["runs"].push_back(j);
  }
  o.summary["series"] = series;
  write_outputs(out, log, o);
  return o;
}

// ---- rate-check ----

namespace {

struct RateResult {
  std::size_t horizon = 0;
  double eta = 0.0;
  double avg_dual = 0.0;
  double bound = 0.0;
  double worst_lemma = -std::numeric_limits<double>::infinity();
  double worst_combined = -std::numeric_limits<double>::infinity();
  std::string error;
};

} // namespace

double rate_bound(double L, double delta1, std::size_t horizon) {
  return 4.0 * std::sqrt(L * delta1 / static_cast<double>(horizon));
}

Outcome preset_rate_check(const ExperimentConfig &cfg, const std::filesystem::path &out) {
  if (cfg.model.kind != ModelKind::Quadratic) {
    throw ConfigError("model.kind", "rate-check requires the quadratic model");
  }
  const auto model = make_model(cfg.model, cfg.seed);
  const auto L_opt = model->smoothness_product();
  if (!L_opt) {
    throw ConfigError("model.random_target",
                      "rate-check needs a known product-norm smoothness constant (zero target)");
  }
  const double L = *L_opt;
  const ParamSet init = model->init_params(cfg.seed);
  const Batch empty{Matrix(1, 1), Matrix(1, 1), cfg.seed, 0, 0};
  const double delta1 = model->loss(init, empty) - *model->optimum();
  if (!(delta1 > 0.0)) {
    throw ConfigError("model", "rate-check needs a starting point above the optimum");
  }
  const auto names = matrix_layer_names(init);
  if (names.size() != 1) {
    throw ConfigError("model", "rate-check expects a single matrix parameter");
  }
  RunLog log(names);
  const Matrix &w0 = init.at("W").value;

  std::vector<RateResult> results;
  for (std::size_t T : cfg.horizons) {
    RateResult rr;
    rr.horizon = T;
    rr.eta = std::sqrt(delta1 / (L * static_cast<double>(T)));
    HyperParams hp = cfg.hp;
    hp.beta1 = 0.0;
    hp.orth = OrthBackend::ExactPolar;
    hp.weight_decay = 0.0;
    hp.rms_scale = false;
    hp.lr = rr.eta;
    hp.gamma = rr.eta;
    const std::string tag = "T=" + std::to_string(T);

    Layer layer = make_layer("W", w0, ParamKind::Matrix, OptimizerKind::MuownSignum);
    double sum = 0.0;
    try {
      for (std::size_t t = 1; t <= T; ++t) {
        ParamSet p = init;
        p.at("W").value = layer.weight();
        const LossGrad lg = model->loss_and_grad(p, empty);
        const Matrix &grad = lg.grads.at("W").value;
        StepTrace tr;
        Layer next = step_layer(layer, grad, hp, &tr);
        p.at("W").value = next.weight();
        const double after = model->loss(p, empty);

        const double gnorm1 = vec_l1(tr.grad_g);
        const double rnuc = nuclear_norm(tr.grad_R);
        sum += gnorm1 + rnuc;

        Vector dg = tr.g_after;
        for (std::size_t i = 0; i < dg.size(); ++i) {
          dg[i] -= tr.g_before[i];
        }
        const Matrix dR = tr.R_after - tr.R_before;
        const double dr_spec = singular_values(dR)[0];
        const double lhs = after - lg.loss;
        const double split = dot(tr.grad_g, dg) + inner(tr.grad_R, dR) +
                             0.5 * L * (vec_linf(dg) * vec_linf(dg) + dr_spec * dr_spec);
        const double combined =
            -hp.gamma * gnorm1 - hp.lr * rnuc + 0.5 * L * (hp.gamma * hp.gamma + hp.lr * hp.lr);
        rr.worst_lemma = std::max(rr.worst_lemma, lhs - split);
        rr.worst_combined = std::max(rr.worst_combined, lhs - combined);

        if (t % cfg.log_every == 0 || t == T) {
          log.add(tag, t, hp.lr, lg.loss, {measure_layer(layer.weight(), grad, next.weight())});
        }
        layer = std::move(next);
      }
    } catch (const Error &e) {
      rr.error = e.what();
    }
    rr.avg_dual = sum / static_cast<double>(T);
    rr.bound = rate_bound(L, delta1, T);
    results.push_back(rr);
  }

  Outcome o{cfg.preset, {}, base_summary(cfg)};
  json per = json::array();
  for (const auto &rr : results) {
    const std::string suffix = "_T=" + std::to_string(rr.horizon);
    const bool ok = rr.error.empty();
    o.assertions.push_back({"bound" + suffix, ok && rr.avg_dual <= rr.bound * (1.0 + 1e-9),
                            {{"avg_dual_norm", rr.avg_dual},
                             {"bound", rr.bound},
                             {"margin", rr.bound - rr.avg_dual},
                             {"error", rr.error}}});
    o.assertions.push_back({"split_descent" + suffix, ok && rr.worst_lemma <= 1e-9,
                            {{"max_violation", rr.worst_lemma}, {"slack", 1e-9}}});
    o.assertions.push_back({"combined_descent" + suffix, ok && rr.worst_combined <= 1e-9,
                            {{"max_violation", rr.worst_combined}, {"slack", 1e-9}}});
    per.push_back({{"horizon", rr.horizon},
                   {"eta", rr.eta},
                   {"avg_dual_norm", rr.avg_dual},
                   {"bound", rr.bound}});
  }
  for (std::size_t a = 0; a < results.size(); ++a) {
    for (std::size_t b = 0; b < results.size(); ++b) {
      if (results[b].horizon == 4 * results[a].horizon) {
        const double ratio = results[b].bound / results[a].bound;
        o.assertions.push_back({"bound_halves_T=" + std::to_string(results[a].horizon),
                                std::abs(ratio - 0.5) <= 1e-12,
                                {{"ratio", ratio}}});
      }
    }
  }
  o.summary["smoothness_L"] = L;
  o.summary["delta1"] = delta1;
  o.summary["horizons"] = per;
  write_outputs(out, log, o);
  return o;
}

// ---- noise-compare ----

Outcome preset_noise_compare(const ExperimentConfig &cfg, const std::filesystem::path &out) {
  if (cfg.batch_size == 0) {
    throw ConfigError("batch_size", "noise-compare needs minibatches (batch_size >= 1)");
  }
  const auto model = make_model(cfg.model, cfg.seed);
  const Dataset data = synth_data(cfg.model, cfg.seed);
  const ParamSet init = model->init_params(cfg.seed);
  RunLog log(matrix_layer_names(init));
  const std::vector<Batch> samples = epoch_batches(data, cfg.batch_size, 0);
  const Batch full = full_batch(data);

  std::vector<std::size_t> checkpoints;
  for (std::size_t j = 1; j <= cfg.noise_checkpoints; ++j) {
    checkpoints.push_back(j * cfg.steps / cfg.noise_checkpoints);
  }

  std::string csv = "#schema=1\nrun,step,layer,sigma_W,sigma_g,sigma_R,zeta_W,zeta_g,zeta_R,"
                    "muon_coeff,muown_coeff\n";
  json reports = json::array();
  bool finite = true;
  std::size_t muown_below = 0;
  std::size_t total_reports = 0;

  std::vector<TrainResult> results;
  for (const auto &spec : {TrainSpec{"muon", OptimizerKind::Muon, cfg.hp},
                           TrainSpec{"muown", OptimizerKind::Muown, cfg.hp}}) {
    auto obs = [&](std::size_t step, const std::vector<Layer> &, const std::vector<Layer> &after,
                   const std::vector<LayerMetrics> &) {
      if (std::find(checkpoints.begin(), checkpoints.end(), step) == checkpoints.end()) {
        return;
      }
      ParamSet p = init;
      for (std::size_t i = 0; i < p.size(); ++i) {
        p[i].value = after[i].weight();
      }
      const LossGrad truth = model->loss_and_grad(p, full);
      std::vector<LossGrad> sampled;
      for (const auto &b : samples) {
        sampled.push_back(model->loss_and_grad(p, b));
      }
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i].kind != ParamKind::Matrix) {
          continue;
        }
        std::vector<Matrix> gs;
        for (const auto &s : sampled) {
          gs.push_back(s.grads[i].value);
        }
        const NoiseReport nr = noise_coefficients(truth.grads[i].value, gs, init_view(p[i].value));
        csv += spec.tag + "," + std::to_string(step) + "," + p[i].name;
        for (double x : {nr.sigma_W, nr.sigma_g, nr.sigma_R, nr.zeta_W, nr.zeta_g, nr.zeta_R,
                         nr.muon_coeff, nr.muown_coeff}) {
          csv += "," + format_double(x);
          finite = finite && std::isfinite(x);
        }
        csv += "\n";
        json j = to_json(nr);
        j["run"] = spec.tag;
        j["step"] = step;
        j["layer"] = p[i].name;
        reports.push_back(j);
        ++total_reports;
        muown_below += nr.muown_coeff < nr.muon_coeff ? 1 : 0;
      }
    };
    results.push_back(train_run(*model, data, init, cfg, spec, log, out / "checkpoints", obs));
  }

  Outcome o{cfg.preset, {runs_completed(results)}, base_summary(cfg)};
  o.assertions.push_back({"reports_finite", finite && total_reports > 0,
                          {{"reports", total_reports}}});
  for (const auto &r : results) {
    o.summary["runs"].push_back(r.to_json());
  }
  o.summary["noise_reports"] = reports;
  o.summary["muown_coeff_below_muon_coeff"] = {{"count", muown_below}, {"of", total_reports}};
  write_text(out / "noise.csv", csv);
  write_outputs(out, log, o);
  return o;
}

// ---- lr-sweep ----

Outcome preset_lr_sweep(const ExperimentConfig &cfg, const std::filesystem::path &out) {
  const auto model = make_model(cfg.model, cfg.seed);
  const Dataset data = synth_data(cfg.model, cfg.seed);
  const ParamSet init = model->init_params(cfg.seed);
  const auto names = matrix_layer_names(init);
  RunLog log(names);

  std::vector<OptimizerKind> opts = cfg.sweep_optimizers;
  if (opts.empty()) {
    opts.push_back(cfg.optimizer);
  }
  std::vector<int> grid;
  for (int e = cfg.log2_lr_min; e <= cfg.log2_lr_max; e += cfg.log2_lr_step) {
    grid.push_back(e);
  }

  std::string csv = "#schema=1\noptimizer,log2_lr,lr,final_loss,diverged\n";
  Outcome o{cfg.preset, {}, base_summary(cfg)};
  std::size_t rows = 0;
  for (auto kind : opts) {
    for (int e : grid) {
      HyperParams hp = cfg.hp;
      hp.lr = std::ldexp(1.0, e);
      const std::string tag = std::string(to_string(kind)) + "@2^" + std::to_string(e);
      RunLog cell(names);
      const TrainResult r = train_run(*model, data, init, cfg, {tag, kind, hp}, cell);
      log.append(cell);
      const bool bad = r.diverged || r.failed_step.has_value();
      csv += std::string(to_string(kind)) + "," + std::to_string(e) + "," + format_double(hp.lr) +
             "," + format_double(bad ? std::numeric_limits<double>::infinity() : r.final_loss) +
             "," + (bad ? "1" : "0") + "\n";
      o.summary["runs"].push_back(r.to_json());
      ++rows;
    }
  }
  o.assertions.push_back({"sweep_rows", rows == grid.size() * opts.size(),
                          {{"rows", rows}, {"grid", grid.size()}, {"optimizers", opts.size()}}});
  write_text(out / "sweep.csv", csv);
  write_outputs(out, log, o);
  return o;
}

Outcome run_experiment(const ExperimentConfig &cfg, const std::filesystem::path &out_dir) {
  cfg.validate();
  std::filesystem::create_directories(out_dir);
  if (cfg.preset == "train") {
    return preset_train(cfg, out_dir);
  }
  if (cfg.preset == "drift") {
    return preset_drift(cfg, out_dir);
  }
  if (cfg.preset == "rate-check") {
    return preset_rate_check(cfg, out_dir);
  }
  if (cfg.preset == "noise-compare") {
    return preset_noise_compare(cfg, out_dir);
  }
  return preset_lr_sweep(cfg, out_dir);
}

} // namespace muown
