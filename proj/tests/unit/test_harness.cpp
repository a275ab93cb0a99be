#include "muown/error.hpp"
#include "muown/harness/config.hpp"
#include "muown/harness/experiment.hpp"
#include "muown/harness/schedule.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace muown;
using nlohmann::json;

namespace {

std::filesystem::path scratch(const std::string &name) {
  const auto p = std::filesystem::temp_directory_path() / ("muown_harness_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::string slurp(const std::filesystem::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t count_lines(const std::string &s) { return std::count(s.begin(), s.end(), '\n'); }

ExperimentConfig small(const std::string &preset) {
  ExperimentConfig c;
  c.preset = preset;
  c.steps = 12;
  c.batch_size = 16;
  c.model.samples = 64;
  c.model.hidden = 6;
  c.model.features = 5;
  c.model.outputs = 3;
  c.hp.lr = 0.01;
  c.noise_checkpoints = 2;
  c.horizons = {10, 40};
  c.log2_lr_min = -8;
  c.log2_lr_max = -6;
  return c;
}

} // namespace

TEST(Schedule, ConstantAndWsdShape) {
  Schedule c{ScheduleKind::Constant};
  EXPECT_EQ(c.factor(1, 100), 1.0);
  Schedule s; // 2% warmup, 20% decay
  EXPECT_DOUBLE_EQ(s.factor(1, 100), 0.5);
  EXPECT_EQ(s.factor(2, 100), 1.0);
  EXPECT_EQ(s.factor(50, 100), 1.0);
  EXPECT_EQ(s.factor(80, 100), 1.0);
  EXPECT_DOUBLE_EQ(s.factor(90, 100), 0.5);
  EXPECT_EQ(s.factor(100, 100), 0.0);
  s.floor = 0.1;
  EXPECT_DOUBLE_EQ(s.factor(100, 100), 0.1);
  EXPECT_EQ(s.lr(0.5, 50, 100), 0.5);
}

TEST(Schedule, ContinuousAtBreakpoints) {
  const Schedule s{ScheduleKind::WarmupStableDecay, 0.1, 0.3, 0.0};
  const double total = 1000;
  for (double b : {0.1 * total, total - 0.3 * total}) {
    EXPECT_NEAR(s.factor(b, total), s.factor(std::nextafter(b, 0.0), total), 1e-15);
    EXPECT_NEAR(s.factor(b, total), s.factor(std::nextafter(b, 2 * total), total), 1e-15);
  }
  const Schedule none{ScheduleKind::WarmupStableDecay, 0.0, 0.0, 0.0};
  EXPECT_EQ(none.factor(1, 10), 1.0);
  EXPECT_EQ(none.factor(10, 10), 1.0);
}

TEST(Schedule, Validation) {
  EXPECT_THROW((Schedule{ScheduleKind::WarmupStableDecay, 0.7, 0.5, 0}).validate(), InvalidArgument);
  EXPECT_THROW((Schedule{ScheduleKind::WarmupStableDecay, -0.1, 0.5, 0}).validate(), InvalidArgument);
  EXPECT_EQ(parse_schedule_kind("wsd"), ScheduleKind::WarmupStableDecay);
  EXPECT_THROW(parse_schedule_kind("cosine"), InvalidArgument);
}

TEST(Config, DefaultsRoundTrip) {
  const ExperimentConfig c = config_from_json(json::object());
  EXPECT_EQ(c.preset, "train");
  EXPECT_EQ(c.schedule.warmup_frac, 0.02);
  EXPECT_EQ(c.schedule.decay_frac, 0.20);
  EXPECT_EQ(c.log2_lr_min, -16);
  EXPECT_EQ(c.log2_lr_max, -5);
  EXPECT_EQ(to_json(config_from_json(to_json(c))), to_json(c));
}

TEST(Config, FieldErrorsNameThePath) {
  auto field_of = [](const json &j) {
    try {
      config_from_json(j);
    } catch (const ConfigError &e) {
      return e.field();
    }
    return std::string("<none>");
  };
  EXPECT_EQ(field_of({{"steps", 0}}), "steps");
  EXPECT_EQ(field_of({{"steps", -3}}), "steps");
  EXPECT_EQ(field_of({{"stpes", 3}}), "stpes");
  EXPECT_EQ(field_of({{"model", {{"kind", "cnn"}}}}), "model.kind");
  EXPECT_EQ(field_of({{"optimizer", {{"lr", "fast"}}}}), "optimizer.lr");
  EXPECT_EQ(field_of({{"optimizer", {{"kind", "sgd"}}}}), "optimizer.kind");
  EXPECT_EQ(field_of({{"optimizer", {{"momentum", 0.9}}}}), "optimizer.momentum");
  EXPECT_EQ(field_of({{"schedule", {{"warmup_frac", 0.9}, {"decay_frac", 0.9}}}}), "schedule");
  EXPECT_EQ(field_of({{"sweep", {{"optimizers", {"muon", "lion"}}}}}), "sweep.optimizers[1]");
  EXPECT_EQ(field_of({{"preset", "nope"}}), "preset");
}

TEST(Config, JsonSyntaxErrorsCarryLine) {
  try {
    parse_config_text("{\n  \"steps\": 3,\n  \"seed\": ,\n}", "cfg.json");
    FAIL();
  } catch (const ConfigError &e) {
    EXPECT_EQ(e.field().rfind("cfg.json:3:", 0), 0u) << e.field();
  }
}

TEST(Config, Overrides) {
  json j = json::object();
  apply_override(j, "optimizer.lr=0.25");
  apply_override(j, "model.kind=quadratic");
  apply_override(j, "rate_check.horizons=[10,40]");
  apply_override(j, "optimizer.rms_scale=false");
  const ExperimentConfig c = config_from_json(j);
  EXPECT_EQ(c.hp.lr, 0.25);
  EXPECT_EQ(c.model.kind, ModelKind::Quadratic);
  EXPECT_EQ(c.horizons, (std::vector<std::size_t>{10, 40}));
  EXPECT_FALSE(c.hp.rms_scale);
  EXPECT_THROW(apply_override(j, "novalue"), ConfigError);
  EXPECT_THROW(apply_override(j, "optimizer.lr.x=1"), ConfigError);
}

TEST(Train, SingleStepOneRow) {
  ExperimentConfig c = small("train");
  c.steps = 1;
  const auto out = scratch("t1");
  const Outcome o = run_experiment(c, out);
  EXPECT_TRUE(o.pass());
  const std::string log = slurp(out / "log.csv");
  EXPECT_EQ(log.rfind("#schema=1\nrun,step,lr,loss,W1.spectral", 0), 0u);
  EXPECT_EQ(count_lines(log), 3u);
  EXPECT_TRUE(std::filesystem::exists(out / "summary.json"));
  const json v = json::parse(slurp(out / "verdict.json"));
  EXPECT_TRUE(v["pass"].get<bool>());
}

TEST(Train, LogCadenceAndCheckpoints) {
  ExperimentConfig c = small("train");
  c.log_every = 5;
  c.checkpoint_every = 6;
  const auto out = scratch("cad");
  run_experiment(c, out);
  EXPECT_EQ(count_lines(slurp(out / "log.csv")), 2u + 3u); // steps 5, 10, 12
  EXPECT_TRUE(std::filesystem::exists(out / "checkpoints" / "muown" / "step_12" / "W1.mwn"));
  const Layer l = load_checkpoint(out / "checkpoints" / "muown" / "step_12", "W2");
  EXPECT_EQ(l.steps(), 12);
}

TEST(Train, DivergenceIsRecordedNotThrown) {
  ExperimentConfig c = small("train");
  c.optimizer = OptimizerKind::Signum;
  c.hp.lr = 1e9;
  c.schedule.kind = ScheduleKind::Constant;
  const Outcome o = run_experiment(c, scratch("div"));
  EXPECT_FALSE(o.pass());
  EXPECT_TRUE(o.summary["runs"][0]["diverged"].get<bool>());
  EXPECT_EQ(o.summary["runs"][0]["final_loss"], "inf");
  EXPECT_TRUE(o.summary["runs"][0].contains("failed_step"));
}

TEST(Presets, DriftPasses) {
  const Outcome o = run_experiment(small("drift"), scratch("drift"));
  EXPECT_TRUE(o.pass()) << o.verdict().dump(2);
  EXPECT_EQ(o.summary["runs"].size(), 3u);
}

TEST(Presets, RateCheckPasses) {
  ExperimentConfig c = small("rate-check");
  c.model.kind = ModelKind::Quadratic;
  const Outcome o = run_experiment(c, scratch("rate"));
  EXPECT_TRUE(o.pass()) << o.verdict().dump(2);
  EXPECT_EQ(o.summary["smoothness_L"].get<double>(), 4.0);
  ExperimentConfig bad = c;
  bad.model.kind = ModelKind::Mlp2;
  EXPECT_THROW(run_experiment(bad, scratch("rate_bad")), ConfigError);
}

TEST(Presets, NoiseCompareSchema) {
  const auto out = scratch("noise");
  const Outcome o = run_experiment(small("noise-compare"), out);
  EXPECT_TRUE(o.pass());
  // 2 runs x 2 checkpoints x 2 matrix layers
  EXPECT_EQ(o.summary["noise_reports"].size(), 8u);
  for (const auto &r : o.summary["noise_reports"]) {
    EXPECT_TRUE(r.contains("muon_coeff"));
    EXPECT_TRUE(r.contains("muown_coeff"));
  }
  EXPECT_EQ(count_lines(slurp(out / "noise.csv")), 2u + 8u);
}

TEST(Presets, NoiseCompareNeedsTwoBatches) {
  ExperimentConfig c = small("noise-compare");
  c.batch_size = c.model.samples;
  try {
    c.validate();
    FAIL();
  } catch (const ConfigError &e) {
    EXPECT_EQ(e.field(), "batch_size");
  }
  c.preset = "train";
  EXPECT_NO_THROW(c.validate());
}

TEST(Presets, LrSweepGridAndSentinel) {
  ExperimentConfig c = small("lr-sweep");
  c.sweep_optimizers = {OptimizerKind::Muon, OptimizerKind::Signum};
  c.log2_lr_min = -6;
  c.log2_lr_max = 40; // the top cells diverge
  c.log2_lr_step = 23;
  c.schedule.kind = ScheduleKind::Constant;
  const auto out = scratch("sweep");
  const Outcome o = run_experiment(c, out);
  EXPECT_TRUE(o.pass());
  const std::string csv = slurp(out / "sweep.csv");
  EXPECT_EQ(count_lines(csv), 2u + 3u * 2u);
  EXPECT_NE(csv.find("signum,-6,0.015625,"), std::string::npos);
  EXPECT_NE(csv.find("signum,40,1099511627776,inf,1"), std::string::npos);
}

TEST(Presets, Deterministic) {
  for (const char *p : {"train", "drift", "lr-sweep"}) {
    const auto a = scratch(std::string("det_a_") + p);
    const auto b = scratch(std::string("det_b_") + p);
    run_experiment(small(p), a);
    run_experiment(small(p), b);
    EXPECT_EQ(slurp(a / "log.csv"), slurp(b / "log.csv")) << p;
  }
}
