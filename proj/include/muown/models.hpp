#pragma once

#include "muown/matrix.hpp"
#include "muown/param.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

namespace muown {

enum class ModelKind { Quadratic, Logistic, Mlp2 };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

struct ModelSpec {
  ModelKind kind = ModelKind::Mlp2;
  // quadratic: W is rows x cols. logistic: features. mlp2: features -> hidden -> outputs.
  std::size_t rows = 4;
  std::size_t cols = 4;
  std::size_t features = 8;
  std::size_t hidden = 16;
  std::size_t outputs = 4;
  std::size_t samples = 256;
  double label_noise = 0.1;
  // quadratic only: start from the (padded) identity instead of a random draw,
  // and use a random target W* instead of zero.
  bool identity_init = true;
  bool random_target = false;
};

// Target and input matrices hold one sample per row.
struct Batch {
  Matrix inputs;
  Matrix targets;
  std::uint64_t seed = 0; // dataset seed this batch was drawn from
  std::size_t epoch = 0;
  std::size_t index = 0;
};

struct Dataset {
  Matrix inputs;
  Matrix targets;
  std::uint64_t seed = 0;

  std::size_t size() const { return inputs.rows(); }
};

struct LossGrad {
  double loss = 0.0;
  ParamSet grads;
};

class Model {
public:
  explicit Model(ModelSpec spec) : spec_(spec) {}
  virtual ~Model() = default;

  const ModelSpec &spec() const { return spec_; }

  virtual ParamSet init_params(std::uint64_t seed) const = 0;
  virtual double loss(const ParamSet &params, const Batch &batch) const = 0;
  // Analytic gradients; throws DimensionMismatch / NonFinite.
  virtual LossGrad loss_and_grad(const ParamSet &params, const Batch &batch) const = 0;

  // Euclidean smoothness constant (Hessian operator norm) where known.
  virtual std::optional<double> smoothness() const { return std::nullopt; }
  // Smoothness constant of the weight-normalized objective under the product
  // max-norm max(||g||_inf, ||R||_S_inf), where known.
  virtual std::optional<double> smoothness_product() const { return std::nullopt; }
  // Infimum of the loss where known.
  virtual std::optional<double> optimum() const { return std::nullopt; }

private:
  ModelSpec spec_;
};

std::unique_ptr<Model> make_model(const ModelSpec &spec, std::uint64_t seed = 0);

// f(W) = 1/2 ||W - W*||_F^2; ignores the batch.
class QuadraticModel final : public Model {
public:
  QuadraticModel(ModelSpec spec, Matrix target);

  const Matrix &target() const { return target_; }
  ParamSet init_params(std::uint64_t seed) const override;
  double loss(const ParamSet &params, const Batch &batch) const override;
  LossGrad loss_and_grad(const ParamSet &params, const Batch &batch) const override;
  std::optional<double> smoothness() const override { return 1.0; }
  std::optional<double> smoothness_product() const override;
  std::optional<double> optimum() const override { return 0.0; }

private:
  Matrix target_;
};

// Binary logistic regression, mean of log(1 + e^z) - y z with z = x w^T + b.
// Parameters: W (1 x features, matrix), b (1 x 1, elementwise).
class LogisticModel final : public Model {
public:
  using Model::Model;
  ParamSet init_params(std::uint64_t seed) const override;
  double loss(const ParamSet &params, const Batch &batch) const override;
  LossGrad loss_and_grad(const ParamSet &params, const Batch &batch) const override;
};

// Two-layer tanh network with squared error, 1/(2B) sum ||W2 tanh(W1 x + b1) + b2 - y||^2.
// Parameters: W1 (hidden x features), b1, W2 (outputs x hidden), b2.
class Mlp2Model final : public Model {
public:
  using Model::Model;
  ParamSet init_params(std::uint64_t seed) const override;
  double loss(const ParamSet &params, const Batch &batch) const override;
  LossGrad loss_and_grad(const ParamSet &params, const Batch &batch) const override;
};

// Central differences, one coordinate at a time, absolute step h.
ParamSet finite_difference_grad(const Model &model, const ParamSet &params, const Batch &batch,
                                double h);

// Deterministic synthetic dataset (SplitMix64 streams derived from `seed`).
Dataset synth_data(const ModelSpec &spec, std::uint64_t seed);

// One epoch of minibatches drawn without replacement; the permutation is a
// Fisher-Yates shuffle seeded by (dataset seed, epoch). A trailing partial
// batch is dropped so every batch has exactly batch_size rows.
std::vector<Batch> epoch_batches(const Dataset &data, std::size_t batch_size, std::size_t epoch);
Batch full_batch(const Dataset &data);

// Uniform(-a, a) init with a = 1/sqrt(cols); rows are redrawn until their
// norm clears a small fraction of a, so no row starts at zero.
Matrix init_uniform_rows(std::size_t rows, std::size_t cols, std::uint64_t seed);

} // namespace muown
