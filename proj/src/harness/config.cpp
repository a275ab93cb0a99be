#include "muown/harness/config.hpp"

#include "muown/error.hpp"
#include "muown/json_io.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace muown {
namespace {

using nlohmann::json;

void check_keys(const json &j, const std::string &path, std::initializer_list<const char *> allowed) {
  if (!j.is_object()) {
    throw ConfigError(path, "expected an object");
  }
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto &[key, _] : j.items()) {
    if (!ok.contains(key)) {
      throw ConfigError(path.empty() ? key : path + "." + key, "unknown key");
    }
  }
}

std::string join(const std::string &path, const char *key) {
  return path.empty() ? std::string(key) : path + "." + key;
}

template <class T> void read(const json &j, const char *key, T &out, const std::string &path) {
  if (!j.contains(key)) {
    return;
  }
  const json &v = j.at(key);
  // Reject negative values for unsigned fields instead of letting them wrap.
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) {
      throw ConfigError(join(path, key), "expected true or false");
    }
  } else if constexpr (std::is_unsigned_v<T>) {
    if (!v.is_number_unsigned()) {
      throw ConfigError(join(path, key), "expected a non-negative integer");
    }
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) {
      throw ConfigError(join(path, key), "expected an integer");
    }
  }
  try {
    out = v.get<T>();
  } catch (const json::exception &e) {
    throw ConfigError(join(path, key), std::string("wrong type (") + e.what() + ")");
  }
}

template <class Parse>
auto read_enum(const json &j, const char *key, const std::string &path, Parse parse)
    -> std::optional<decltype(parse(std::string_view{}))> {
  if (!j.contains(key)) {
    return std::nullopt;
  }
  std::string name;
  read(j, key, name, path);
  try {
    return parse(name);
  } catch (const InvalidArgument &e) {
    throw ConfigError(join(path, key), e.what());
  }
}

ModelSpec model_from_json(const json &j) {
  const std::string path = "model";
  check_keys(j, path,
             {"kind", "rows", "cols", "features", "hidden", "outputs", "samples", "label_noise",
              "identity_init", "random_target"});
  ModelSpec m;
  if (auto k = read_enum(j, "kind", path, parse_model_kind)) {
    m.kind = *k;
  }
  read(j, "rows", m.rows, path);
  read(j, "cols", m.cols, path);
  read(j, "features", m.features, path);
  read(j, "hidden", m.hidden, path);
  read(j, "outputs", m.outputs, path);
  read(j, "samples", m.samples, path);
  read(j, "label_noise", m.label_noise, path);
  read(j, "identity_init", m.identity_init, path);
  read(j, "random_target", m.random_target, path);
  return m;
}

Schedule schedule_from_json(const json &j) {
  const std::string path = "schedule";
  check_keys(j, path, {"kind", "warmup_frac", "decay_frac", "floor"});
  Schedule s;
  if (auto k = read_enum(j, "kind", path, parse_schedule_kind)) {
    s.kind = *k;
  }
  read(j, "warmup_frac", s.warmup_frac, path);
  read(j, "decay_frac", s.decay_frac, path);
  read(j, "floor", s.floor, path);
  return s;
}

json model_to_json(const ModelSpec &m) {
  return json{{"kind", to_string(m.kind)},
              {"rows", m.rows},
              {"cols", m.cols},
              {"features", m.features},
              {"hidden", m.hidden},
              {"outputs", m.outputs},
              {"samples", m.samples},
              {"label_noise", m.label_noise},
              {"identity_init", m.identity_init},
              {"random_target", m.random_target}};
}

std::size_t line_of(const std::string &text, std::size_t byte, std::size_t &column) {
  std::size_t line = 1;
  column = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return line;
}

} // namespace

void ExperimentConfig::validate() const {
  if (std::find(std::begin(kPresets), std::end(kPresets), preset) == std::end(kPresets)) {
    throw ConfigError("preset", "unknown preset '" + preset + "'");
  }
  if (steps < 1) {
    throw ConfigError("steps", "must be >= 1");
  }
  if (log_every < 1) {
    throw ConfigError("log_every", "must be >= 1");
  }
  if (batch_size > model.samples) {
    throw ConfigError("batch_size", "exceeds model.samples");
  }
  if (model.rows == 0 || model.cols == 0 || model.features == 0 || model.hidden == 0 ||
      model.outputs == 0 || model.samples == 0) {
    throw ConfigError("model", "dimensions must be >= 1");
  }
  if (!(model.label_noise >= 0.0)) {
    throw ConfigError("model.label_noise", "must be >= 0");
  }
  try {
    hp.validate();
  } catch (const InvalidArgument &e) {
    throw ConfigError("optimizer", e.what());
  }
  if (!(hp.lr > 0.0)) {
    throw ConfigError("optimizer.lr", "must be positive");
  }
  try {
    schedule.validate();
  } catch (const InvalidArgument &e) {
    throw ConfigError("schedule", e.what());
  }
  if (horizons.empty() || std::find(horizons.begin(), horizons.end(), 0) != horizons.end()) {
    throw ConfigError("rate_check.horizons", "expected a non-empty list of positive step counts");
  }
  if (preset == "noise-compare") {
    if (noise_checkpoints < 1 || noise_checkpoints > steps) {
      throw ConfigError("noise.checkpoints", "must lie in [1, steps]");
    }
    // The spread estimate needs at least two minibatch gradients per epoch.
    if (batch_size == 0 || model.samples / batch_size < 2) {
      throw ConfigError("batch_size", "noise-compare needs at least two minibatches per epoch");
    }
  }
  if (log2_lr_step < 1 || log2_lr_min > log2_lr_max) {
    throw ConfigError("sweep", "expected log2_lr_min <= log2_lr_max and log2_lr_step >= 1");
  }
}

json to_json(const ExperimentConfig &cfg) {
  json opt = to_json(cfg.hp);
  opt["kind"] = to_string(cfg.optimizer);
  json sweep_opts = json::array();
  for (auto k : cfg.sweep_optimizers) {
    sweep_opts.push_back(to_string(k));
  }
  return json{
      {"preset", cfg.preset},
      {"seed", cfg.seed},
      {"steps", cfg.steps},
      {"batch_size", cfg.batch_size},
      {"log_every", cfg.log_every},
      {"checkpoint_every", cfg.checkpoint_every},
      {"model", model_to_json(cfg.model)},
      {"optimizer", opt},
      {"schedule",
       {{"kind", to_string(cfg.schedule.kind)},
        {"warmup_frac", cfg.schedule.warmup_frac},
        {"decay_frac", cfg.schedule.decay_frac},
        {"floor", cfg.schedule.floor}}},
      {"rate_check", {{"horizons", cfg.horizons}}},
      {"noise", {{"checkpoints", cfg.noise_checkpoints}}},
      {"sweep",
       {{"log2_lr_min", cfg.log2_lr_min},
        {"log2_lr_max", cfg.log2_lr_max},
        {"log2_lr_step", cfg.log2_lr_step},
        {"optimizers", sweep_opts}}},
  };
}

ExperimentConfig config_from_json(const json &j) {
  check_keys(j, "",
             {"preset", "seed", "steps", "batch_size", "log_every", "checkpoint_every", "model",
              "optimizer", "schedule", "rate_check", "noise", "sweep"});
  ExperimentConfig cfg;
  read(j, "preset", cfg.preset, "");
  read(j, "seed", cfg.seed, "");
  read(j, "steps", cfg.steps, "");
  read(j, "batch_size", cfg.batch_size, "");
  read(j, "log_every", cfg.log_every, "");
  read(j, "checkpoint_every", cfg.checkpoint_every, "");
  if (j.contains("model")) {
    cfg.model = model_from_json(j.at("model"));
  }
  if (j.contains("optimizer")) {
    const json &o = j.at("optimizer");
    check_keys(o, "optimizer",
               {"kind", "lr", "gamma", "weight_decay", "beta1", "adam_beta1", "adam_beta2",
                "adam_eps", "ns_steps", "ns_coeffs", "orth", "rms_scale"});
    if (auto k = read_enum(o, "kind", "optimizer", parse_optimizer_kind)) {
      cfg.optimizer = *k;
    }
    json rest = o;
    rest.erase("kind");
    cfg.hp = hyperparams_from_json(rest, "optimizer");
  }
  if (j.contains("schedule")) {
    cfg.schedule = schedule_from_json(j.at("schedule"));
  }
  if (j.contains("rate_check")) {
    const json &r = j.at("rate_check");
    check_keys(r, "rate_check", {"horizons"});
    read(r, "horizons", cfg.horizons, "rate_check");
  }
  if (j.contains("noise")) {
    const json &n = j.at("noise");
    check_keys(n, "noise", {"checkpoints"});
    read(n, "checkpoints", cfg.noise_checkpoints, "noise");
  }
  if (j.contains("sweep")) {
    const json &s = j.at("sweep");
    check_keys(s, "sweep", {"log2_lr_min", "log2_lr_max", "log2_lr_step", "optimizers"});
    read(s, "log2_lr_min", cfg.log2_lr_min, "sweep");
    read(s, "log2_lr_max", cfg.log2_lr_max, "sweep");
    read(s, "log2_lr_step", cfg.log2_lr_step, "sweep");
    if (s.contains("optimizers")) {
      std::vector<std::string> names;
      read(s, "optimizers", names, "sweep");
      for (std::size_t i = 0; i < names.size(); ++i) {
        try {
          cfg.sweep_optimizers.push_back(parse_optimizer_kind(names[i]));
        } catch (const InvalidArgument &e) {
          throw ConfigError("sweep.optimizers[" + std::to_string(i) + "]", e.what());
        }
      }
    }
  }
  cfg.validate();
  return cfg;
}

json parse_config_text(const std::string &text, const std::string &source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error &e) {
    std::size_t col = 0;
    const std::size_t line = line_of(text, e.byte == 0 ? 0 : e.byte - 1, col);
    throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col),
                      "invalid JSON");
  }
}

json read_config_file(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError(path.string(), "cannot open config file");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path.string());
}

void apply_override(json &j, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("--set", "expected key=value, got '" + std::string(assignment) + "'");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) {
    value = raw;
  }
  json *node = &j;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) {
      throw ConfigError("--set", "empty path component in '" + key + "'");
    }
    if (!node->is_object()) {
      if (!node->is_null()) {
        throw ConfigError(key, "cannot descend into a non-object value");
      }
      *node = json::object();
    }
    if (dot == std::string::npos) {
      (*node)[part] = std::move(value);
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

} // namespace muown
