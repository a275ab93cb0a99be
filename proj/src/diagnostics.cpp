#include "muown/diagnostics.hpp"

#include "muown/error.hpp"
#include "muown/linalg.hpp"

#include <cmath>

namespace muown {

DecompReport spectral_decomposition(const Matrix &w) {
  const Vector g = row_norms(w);
  check_rows(g);
  const Matrix d = row_normalize(g, w);
  const double ginf = vec_linf(g);
  Vector p(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    p[i] = std::abs(g[i]) / ginf;
  }
  const double s_pd = singular_values(diag_scale_rows(p, d))[0];
  const double s_w = singular_values(w)[0];

  DecompReport out;
  out.rowscale_sq = ginf * ginf;
  out.coherence = s_pd * s_pd;
  out.spectral_sq_direct = s_w * s_w;
  out.residual =
      std::abs(out.rowscale_sq * out.coherence - out.spectral_sq_direct) / out.spectral_sq_direct;
  return out;
}

DecompReport spectral_decomposition(const Matrix &w, const Vector &signed_g) {
  if (signed_g.size() != w.rows()) {
    throw DimensionMismatch("spectral_decomposition: g length differs from row count");
  }
  DecompReport out = spectral_decomposition(w);
  for (double x : signed_g) {
    out.negative_g_count += x < 0.0 ? 1 : 0;
  }
  return out;
}

EffectiveRank effective_rank(const Vector &sigma) {
  if (sigma.empty()) {
    throw InvalidArgument("effective_rank: empty spectrum");
  }
  double total = 0.0;
  for (double s : sigma) {
    if (!(s >= 0.0)) {
      throw InvalidArgument("effective_rank: singular values must be >= 0");
    }
    total += s;
  }
  if (total == 0.0) {
    throw InvalidArgument("effective_rank: all singular values are zero");
  }
  double entropy = 0.0;
  for (double s : sigma) {
    if (s > 0.0) {
      const double p = s / total;
      entropy -= p * std::log(p);
    }
  }
  const double erank = std::exp(entropy);
  return {erank, erank / static_cast<double>(sigma.size())};
}

double dual_norm(const Vector &grad_g, const Matrix &grad_r) {
  return vec_l1(grad_g) + nuclear_norm(grad_r);
}

Zeta zeta_constants(std::size_t m, std::size_t n) {
  if (m == 0 || n == 0) {
    throw InvalidArgument("zeta_constants: dimensions must be positive");
  }
  const double k = std::sqrt(static_cast<double>(std::min(m, n)));
  return {k, std::sqrt(static_cast<double>(m)), k};
}

NoiseReport noise_coefficients(const Matrix &true_grad_w, std::span<const Matrix> samples,
                               const ReparamView &view) {
  if (samples.size() < 2) {
    throw InvalidArgument("noise_coefficients: need at least two samples");
  }
  if (!true_grad_w.same_shape(view.R)) {
    throw DimensionMismatch("noise_coefficients: true gradient shape differs from the layer");
  }
  const Vector true_g = grad_g(true_grad_w, view.D);
  const Matrix true_r = grad_R(true_grad_w, view.g, view.r, view.D);

  double acc_w = 0.0;
  double acc_g = 0.0;
  double acc_r = 0.0;
  for (const Matrix &s : samples) {
    if (!s.same_shape(true_grad_w)) {
      throw DimensionMismatch("noise_coefficients: sample shape differs from the layer");
    }
    const double dw = nuclear_norm(true_grad_w - s);
    Vector dg = grad_g(s, view.D);
    for (std::size_t i = 0; i < dg.size(); ++i) {
      dg[i] = true_g[i] - dg[i];
    }
    const double dgn = vec_l1(dg);
    const double dr = nuclear_norm(true_r - grad_R(s, view.g, view.r, view.D));
    acc_w += dw * dw;
    acc_g += dgn * dgn;
    acc_r += dr * dr;
  }
  const double t = static_cast<double>(samples.size());
  const Zeta z = zeta_constants(view.R.rows(), view.R.cols());

  NoiseReport out;
  out.sigma_W = std::sqrt(acc_w / t);
  out.sigma_g = std::sqrt(acc_g / t);
  out.sigma_R = std::sqrt(acc_r / t);
  out.zeta_W = z.w;
  out.zeta_g = z.g;
  out.zeta_R = z.r;
  out.muon_coeff = z.w * out.sigma_W;
  out.muown_coeff = z.g * out.sigma_g + z.r * out.sigma_R;
  return out;
}

nlohmann::json to_json(const DecompReport &r) {
  return {{"rowscale_sq", r.rowscale_sq},
          {"coherence", r.coherence},
          {"spectral_sq_direct", r.spectral_sq_direct},
          {"residual", r.residual},
          {"negative_g_count", r.negative_g_count}};
}

nlohmann::json to_json(const NoiseReport &r) {
  return {{"sigma_W", r.sigma_W},     {"sigma_g", r.sigma_g},       {"sigma_R", r.sigma_R},
          {"zeta_W", r.zeta_W},       {"zeta_g", r.zeta_g},         {"zeta_R", r.zeta_R},
          {"muon_coeff", r.muon_coeff}, {"muown_coeff", r.muown_coeff}};
}

} // namespace muown
