#include "muown/error.hpp"
#include "muown/json_io.hpp"
#include "muown/optimizers.hpp"
#include "muown/serialize.hpp"

#include <fstream>

namespace muown {
namespace {

struct Tensors {
  std::vector<std::string> names;
  std::vector<Matrix> values;
};

Tensors collect(const Layer &layer) {
  Tensors t;
  std::visit(
      [&](const auto &s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, MuownLayerState>) {
          t.names = {"W", "g", "r", "M", "m_g", "v_g"};
          t.values = {s.W, as_row(s.g), as_row(s.r), s.M, as_row(s.m_g), as_row(s.v_g)};
        } else if constexpr (std::is_same_v<S, MuonLayerState>) {
          t.names = {"W", "M"};
          t.values = {s.W, s.M};
        } else if constexpr (std::is_same_v<S, AdamLayerState>) {
          t.names = {"W", "m", "v"};
          t.values = {s.W, s.m, s.v};
        } else {
          t.names = {"W", "m"};
          t.values = {s.W, s.m};
        }
      },
      layer.state);
  return t;
}

} // namespace

void save_checkpoint(const std::filesystem::path &dir, const Layer &layer, const HyperParams &hp) {
  std::filesystem::create_directories(dir);
  const Tensors t = collect(layer);
  save_matrices(dir / (layer.name + ".mwn"), t.values);
  nlohmann::json side{{"kind", std::string(to_string(layer.kind))},
                      {"t", layer.steps()},
                      {"hyperparams", to_json(hp)},
                      {"tensors", t.names}};
  if (const auto *s = std::get_if<MuownLayerState>(&layer.state)) {
    side["primed"] = s->primed;
  }
  std::ofstream out(dir / (layer.name + ".json"));
  out << side.dump(2) << '\n';
  if (!out) {
    throw SerializationError("cannot write checkpoint sidecar for " + layer.name);
  }
}

Layer load_checkpoint(const std::filesystem::path &dir, const std::string &name) {
  std::ifstream in(dir / (name + ".json"));
  if (!in) {
    throw SerializationError("missing checkpoint sidecar for " + name);
  }
  nlohmann::json side;
  try {
    in >> side;
  } catch (const nlohmann::json::exception &e) {
    throw SerializationError("bad checkpoint sidecar for " + name + ": " + e.what());
  }
  auto mats = load_matrices(dir / (name + ".mwn"));
  const OptimizerKind kind = parse_optimizer_kind(side.at("kind").get<std::string>());
  const auto t = side.at("t").get<std::int64_t>();
  auto need = [&](std::size_t n) {
    if (mats.size() != n) {
      throw SerializationError("checkpoint " + name + ": expected " + std::to_string(n) +
                               " tensors, found " + std::to_string(mats.size()));
    }
  };
  Layer layer{name, kind, {}};
  if (is_muown_family(kind)) {
    need(6);
    MuownLayerState s;
    s.W = mats[0];
    s.g = from_row(mats[1]);
    s.r = from_row(mats[2]);
    s.M = mats[3];
    s.m_g = from_row(mats[4]);
    s.v_g = from_row(mats[5]);
    s.t = t;
    s.primed = side.value("primed", false);
    layer.state = std::move(s);
  } else if (kind == OptimizerKind::Muon) {
    need(2);
    layer.state = MuonLayerState{mats[0], mats[1], t};
  } else if (kind == OptimizerKind::AdamW) {
    need(3);
    layer.state = AdamLayerState{mats[0], mats[1], mats[2], t};
  } else {
    need(2);
    layer.state = SignumLayerState{mats[0], mats[1], t};
  }
  return layer;
}

} // namespace muown
