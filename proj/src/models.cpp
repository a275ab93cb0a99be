#include "muown/models.hpp"

#include "muown/error.hpp"
#include "muown/linalg.hpp"
#include "muown/rng.hpp"

#include <cmath>
#include <numeric>

namespace muown {
namespace {

// Stream tags for derive_seed.
constexpr std::uint64_t kStreamTeacher = 1;
constexpr std::uint64_t kStreamInputs = 2;
constexpr std::uint64_t kStreamNoise = 3;
constexpr std::uint64_t kStreamTarget = 4;
constexpr std::uint64_t kStreamShuffle = 5;

void require_shape(const Matrix &m, std::size_t rows, std::size_t cols, const std::string &what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw DimensionMismatch(what + ": expected " + std::to_string(rows) + "x" +
                            std::to_string(cols) + ", got " + std::to_string(m.rows()) + "x" +
                            std::to_string(m.cols()));
  }
}

void require_finite_loss(double loss) {
  if (!std::isfinite(loss)) {
    throw NonFinite("loss is not finite");
  }
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Matrix normal_matrix(std::size_t rows, std::size_t cols, SplitMix64 &rng, double scale) {
  Matrix out(rows, cols);
  for (double &x : out.span()) {
    x = scale * rng.normal();
  }
  return out;
}

// Affine map X W^T + 1 b for X (B x in), W (out x in), b (1 x out).
Matrix affine(const Matrix &x, const Matrix &w, const Matrix &b) {
  Matrix z = matmul_nt(x, w);
  for (std::size_t i = 0; i < z.rows(); ++i) {
    for (std::size_t j = 0; j < z.cols(); ++j) {
      z(i, j) += b(0, j);
    }
  }
  return z;
}

Matrix column_sums(const Matrix &a) {
  Matrix out(1, a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      out(0, j) += a(i, j);
    }
  }
  return out;
}

// dZ^T X
Matrix weight_grad(const Matrix &dz, const Matrix &x) { return matmul(transpose(dz), x); }

} // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
  case ModelKind::Quadratic:
    return "quadratic";
  case ModelKind::Logistic:
    return "logistic";
  case ModelKind::Mlp2:
    return "mlp2";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  for (auto k : {ModelKind::Quadratic, ModelKind::Logistic, ModelKind::Mlp2}) {
    if (to_string(k) == name) {
      return k;
    }
  }
  throw InvalidArgument("unknown model '" + std::string(name) + "'");
}

Matrix init_uniform_rows(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  SplitMix64 rng(seed);
  const double a = 1.0 / std::sqrt(static_cast<double>(cols));
  Matrix out(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (;;) {
      double sq = 0.0;
      for (double &x : out.row(i)) {
        x = rng.uniform(-a, a);
        sq += x * x;
      }
      if (std::sqrt(sq) > 1e-3 * a) {
        break;
      }
    }
  }
  return out;
}

// ---- quadratic ----

QuadraticModel::QuadraticModel(ModelSpec spec, Matrix target) : Model(spec), target_(std::move(target)) {
  require_shape(target_, spec.rows, spec.cols, "quadratic target");
}

std::optional<double> QuadraticModel::smoothness_product() const {
  // With W* = 0 the reparameterized loss is 1/2 ||g||_2^2, independent of R,
  // and sup_{||dg||_inf <= 1} ||dg||_2^2 = m.
  if (max_abs(target_) == 0.0) {
    return static_cast<double>(spec().rows);
  }
  return std::nullopt;
}

ParamSet QuadraticModel::init_params(std::uint64_t seed) const {
  const auto &s = spec();
  Matrix w;
  if (s.identity_init) {
    w = Matrix(s.rows, s.cols);
    for (std::size_t i = 0; i < std::min(s.rows, s.cols); ++i) {
      w(i, i) = 1.0;
    }
    // Rows past the diagonal would be zero; give them a unit entry in the last column.
    for (std::size_t i = s.cols; i < s.rows; ++i) {
      w(i, s.cols - 1) = 1.0;
    }
  } else {
    w = init_uniform_rows(s.rows, s.cols, seed);
  }
  ParamSet p;
  p.add({"W", ParamKind::Matrix, std::move(w)});
  return p;
}

double QuadraticModel::loss(const ParamSet &params, const Batch &) const {
  const Matrix &w = params.at("W").value;
  require_shape(w, target_.rows(), target_.cols(), "quadratic W");
  const Matrix diff = w - target_;
  const double l = 0.5 * inner(diff, diff);
  require_finite_loss(l);
  return l;
}

LossGrad QuadraticModel::loss_and_grad(const ParamSet &params, const Batch &batch) const {
  LossGrad out{loss(params, batch), params.zeros_like()};
  out.grads.at("W").value = params.at("W").value - target_;
  return out;
}

// ---- logistic ----

ParamSet LogisticModel::init_params(std::uint64_t seed) const {
  ParamSet p;
  p.add({"W", ParamKind::Matrix, init_uniform_rows(1, spec().features, seed)});
  p.add({"b", ParamKind::Elementwise, Matrix(1, 1)});
  return p;
}

double LogisticModel::loss(const ParamSet &params, const Batch &batch) const {
  return loss_and_grad(params, batch).loss;
}

LossGrad LogisticModel::loss_and_grad(const ParamSet &params, const Batch &batch) const {
  const Matrix &w = params.at("W").value;
  const Matrix &b = params.at("b").value;
  const std::size_t n = batch.inputs.rows();
  require_shape(w, 1, spec().features, "logistic W");
  require_shape(b, 1, 1, "logistic b");
  require_shape(batch.inputs, n, spec().features, "logistic inputs");
  require_shape(batch.targets, n, 1, "logistic targets");

  const Matrix z = affine(batch.inputs, w, b);
  const double inv_n = 1.0 / static_cast<double>(n);
  double total = 0.0;
  Matrix dz(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double y = batch.targets(i, 0);
    total += softplus(z(i, 0)) - y * z(i, 0);
    dz(i, 0) = (sigmoid(z(i, 0)) - y) * inv_n;
  }
  LossGrad out{total * inv_n, params.zeros_like()};
  require_finite_loss(out.loss);
  out.grads.at("W").value = weight_grad(dz, batch.inputs);
  out.grads.at("b").value = column_sums(dz);
  return out;
}

// ---- mlp2 ----

ParamSet Mlp2Model::init_params(std::uint64_t seed) const {
  const auto &s = spec();
  ParamSet p;
  p.add({"W1", ParamKind::Matrix, init_uniform_rows(s.hidden, s.features, derive_seed(seed, 1))});
  p.add({"b1", ParamKind::Elementwise, Matrix(1, s.hidden)});
  p.add({"W2", ParamKind::Matrix, init_uniform_rows(s.outputs, s.hidden, derive_seed(seed, 2))});
  p.add({"b2", ParamKind::Elementwise, Matrix(1, s.outputs)});
  return p;
}

double Mlp2Model::loss(const ParamSet &params, const Batch &batch) const {
  return loss_and_grad(params, batch).loss;
}

LossGrad Mlp2Model::loss_and_grad(const ParamSet &params, const Batch &batch) const {
  const auto &s = spec();
  const Matrix &w1 = params.at("W1").value;
  const Matrix &b1 = params.at("b1").value;
  const Matrix &w2 = params.at("W2").value;
  const Matrix &b2 = params.at("b2").value;
  const std::size_t n = batch.inputs.rows();
  require_shape(w1, s.hidden, s.features, "mlp2 W1");
  require_shape(b1, 1, s.hidden, "mlp2 b1");
  require_shape(w2, s.outputs, s.hidden, "mlp2 W2");
  require_shape(b2, 1, s.outputs, "mlp2 b2");
  require_shape(batch.inputs, n, s.features, "mlp2 inputs");
  require_shape(batch.targets, n, s.outputs, "mlp2 targets");

  Matrix h = affine(batch.inputs, w1, b1);
  for (double &x : h.span()) {
    x = std::tanh(x);
  }
  Matrix e = affine(h, w2, b2);
  e -= batch.targets;

  const double inv_n = 1.0 / static_cast<double>(n);
  LossGrad out{0.5 * inner(e, e) * inv_n, params.zeros_like()};
  require_finite_loss(out.loss);

  Matrix dy = e;
  dy *= inv_n;
  Matrix dz = matmul(dy, w2);
  for (std::size_t k = 0; k < dz.size(); ++k) {
    const double t = h.span()[k];
    dz.span()[k] *= 1.0 - t * t;
  }
  out.grads.at("W1").value = weight_grad(dz, batch.inputs);
  out.grads.at("b1").value = column_sums(dz);
  out.grads.at("W2").value = weight_grad(dy, h);
  out.grads.at("b2").value = column_sums(dy);
  return out;
}

// ---- shared ----

std::unique_ptr<Model> make_model(const ModelSpec &spec, std::uint64_t seed) {
  switch (spec.kind) {
  case ModelKind::Quadratic: {
    Matrix target(spec.rows, spec.cols);
    if (spec.random_target) {
      SplitMix64 rng(derive_seed(seed, kStreamTarget));
      target = normal_matrix(spec.rows, spec.cols, rng, 1.0);
    }
    return std::make_unique<QuadraticModel>(spec, std::move(target));
  }
  case ModelKind::Logistic:
    return std::make_unique<LogisticModel>(spec);
  case ModelKind::Mlp2:
    return std::make_unique<Mlp2Model>(spec);
  }
  throw InvalidArgument("unknown model kind");
}

ParamSet finite_difference_grad(const Model &model, const ParamSet &params, const Batch &batch,
                                double h) {
  if (!(h > 0.0)) {
    throw InvalidArgument("finite_difference_grad: h must be positive");
  }
  ParamSet out = params.zeros_like();
  ParamSet probe = params;
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto x = probe[p].value.span();
    auto g = out[p].value.span();
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double orig = x[k];
      x[k] = orig + h;
      const double up = model.loss(probe, batch);
      x[k] = orig - h;
      const double down = model.loss(probe, batch);
      x[k] = orig;
      g[k] = (up - down) / (2.0 * h);
    }
  }
  return out;
}

Dataset synth_data(const ModelSpec &spec, std::uint64_t seed) {
  if (spec.samples == 0) {
    throw InvalidArgument("synth_data: samples must be positive");
  }
  SplitMix64 teacher(derive_seed(seed, kStreamTeacher));
  SplitMix64 inputs(derive_seed(seed, kStreamInputs));
  SplitMix64 noise(derive_seed(seed, kStreamNoise));
  const std::size_t n = spec.samples;
  Dataset d;
  d.seed = seed;
  switch (spec.kind) {
  case ModelKind::Quadratic:
    d.inputs = Matrix(n, 1);
    d.targets = Matrix(n, 1);
    break;
  case ModelKind::Logistic: {
    const double scale = 2.0 / std::sqrt(static_cast<double>(spec.features));
    const Matrix planted = normal_matrix(1, spec.features, teacher, scale);
    d.inputs = normal_matrix(n, spec.features, inputs, 1.0);
    d.targets = Matrix(n, 1);
    const Matrix z = matmul_nt(d.inputs, planted);
    for (std::size_t i = 0; i < n; ++i) {
      d.targets(i, 0) = noise.uniform() < sigmoid(z(i, 0)) ? 1.0 : 0.0;
    }
    break;
  }
  case ModelKind::Mlp2: {
    const Matrix w1 = normal_matrix(spec.hidden, spec.features, teacher,
                                    1.0 / std::sqrt(static_cast<double>(spec.features)));
    const Matrix w2 = normal_matrix(spec.outputs, spec.hidden, teacher,
                                    1.0 / std::sqrt(static_cast<double>(spec.hidden)));
    d.inputs = normal_matrix(n, spec.features, inputs, 1.0);
    Matrix h = matmul_nt(d.inputs, w1);
    for (double &x : h.span()) {
      x = std::tanh(x);
    }
    d.targets = matmul_nt(h, w2);
    for (double &y : d.targets.span()) {
      y += spec.label_noise * noise.normal();
    }
    break;
  }
  }
  return d;
}

std::vector<Batch> epoch_batches(const Dataset &data, std::size_t batch_size, std::size_t epoch) {
  const std::size_t n = data.size();
  if (batch_size == 0 || batch_size > n) {
    throw InvalidArgument("epoch_batches: batch size must lie in [1, " + std::to_string(n) + "]");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  SplitMix64 rng(derive_seed(data.seed ^ kStreamShuffle, epoch));
  for (std::size_t i = n - 1; i > 0; --i) {
    std::swap(order[i], order[rng.below(i + 1)]);
  }
  std::vector<Batch> out;
  for (std::size_t start = 0; start + batch_size <= n; start += batch_size) {
    Batch b{Matrix(batch_size, data.inputs.cols()), Matrix(batch_size, data.targets.cols()),
            data.seed, epoch, out.size()};
    for (std::size_t r = 0; r < batch_size; ++r) {
      const std::size_t src = order[start + r];
      std::copy(data.inputs.row(src).begin(), data.inputs.row(src).end(), b.inputs.row(r).begin());
      std::copy(data.targets.row(src).begin(), data.targets.row(src).end(),
                b.targets.row(r).begin());
    }
    out.push_back(std::move(b));
  }
  return out;
}

Batch full_batch(const Dataset &data) { return Batch{data.inputs, data.targets, data.seed, 0, 0}; }

} // namespace muown
