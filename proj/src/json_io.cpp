#include "muown/json_io.hpp"

#include "muown/error.hpp"

namespace muown {
namespace {

template <class T>
void read_field(const nlohmann::json &j, const char *key, T &out, const std::string &path) {
  if (!j.contains(key)) {
    return;
  }
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError(path + "." + key, std::string("wrong type (") + e.what() + ")");
  }
}

} // namespace

nlohmann::json to_json(const HyperParams &hp) {
  return nlohmann::json{
      {"lr", hp.lr},
      {"gamma", hp.gamma},
      {"weight_decay", hp.weight_decay},
      {"beta1", hp.beta1},
      {"adam_beta1", hp.adam_beta1},
      {"adam_beta2", hp.adam_beta2},
      {"adam_eps", hp.adam_eps},
      {"ns_steps", hp.ns.steps},
      {"ns_coeffs", {hp.ns.a, hp.ns.b, hp.ns.c}},
      {"orth", hp.orth == OrthBackend::ExactPolar ? "polar" : "newton-schulz"},
      {"rms_scale", hp.rms_scale},
  };
}

HyperParams hyperparams_from_json(const nlohmann::json &j, const std::string &path) {
  if (!j.is_object()) {
    throw ConfigError(path, "expected an object");
  }
  HyperParams hp;
  read_field(j, "lr", hp.lr, path);
  read_field(j, "gamma", hp.gamma, path);
  read_field(j, "weight_decay", hp.weight_decay, path);
  read_field(j, "beta1", hp.beta1, path);
  read_field(j, "adam_beta1", hp.adam_beta1, path);
  read_field(j, "adam_beta2", hp.adam_beta2, path);
  read_field(j, "adam_eps", hp.adam_eps, path);
  read_field(j, "ns_steps", hp.ns.steps, path);
  read_field(j, "rms_scale", hp.rms_scale, path);
  if (j.contains("ns_coeffs")) {
    std::vector<double> c;
    read_field(j, "ns_coeffs", c, path);
    if (c.size() != 3) {
      throw ConfigError(path + ".ns_coeffs", "expected three coefficients [a, b, c]");
    }
    hp.ns.a = c[0];
    hp.ns.b = c[1];
    hp.ns.c = c[2];
  }
  if (j.contains("orth")) {
    std::string orth;
    read_field(j, "orth", orth, path);
    if (orth == "polar") {
      hp.orth = OrthBackend::ExactPolar;
    } else if (orth == "newton-schulz") {
      hp.orth = OrthBackend::NewtonSchulz;
    } else {
      throw ConfigError(path + ".orth", "expected \"polar\" or \"newton-schulz\"");
    }
  }
  try {
    hp.validate();
  } catch (const InvalidArgument &e) {
    throw ConfigError(path, e.what());
  }
  return hp;
}

} // namespace muown
