#pragma once

#include "muown/matrix.hpp"
#include "muown/reparam.hpp"

#include <json.hpp>

#include <cstddef>
#include <span>

namespace muown {

// ||W||^2 = ||g||_inf^2 * lambda_max(P C P) with g = ||W||_row,
// D = Diag(1/g) W, C = D D^T, P = Diag(|g| / ||g||_inf).
struct DecompReport {
  double rowscale_sq = 0.0;        // ||g||_inf^2
  double coherence = 0.0;          // lambda_max(P C P), via sigma_1(P D)^2
  double spectral_sq_direct = 0.0; // sigma_1(W)^2 from the SVD
  double residual = 0.0;           // |rowscale_sq * coherence - spectral_sq_direct| / spectral_sq_direct
  int negative_g_count = 0;
};

// Throws ZeroRow if a row of W is (near-)zero.
DecompReport spectral_decomposition(const Matrix &w);
// As above, additionally counting negative entries of a signed magnitude vector.
DecompReport spectral_decomposition(const Matrix &w, const Vector &signed_g);

struct EffectiveRank {
  double erank = 0.0;
  double normalized = 0.0; // erank / len(sigma)
};

// exp of the Shannon entropy of sigma / ||sigma||_1, with 0 log 0 = 0.
EffectiveRank effective_rank(const Vector &sigma);

// ||grad_g||_1 + ||grad_R||_S1
double dual_norm(const Vector &grad_g, const Matrix &grad_r);

struct Zeta {
  double w = 0.0; // sqrt(min(m, n))
  double g = 0.0; // sqrt(m)
  double r = 0.0; // sqrt(min(m, n))
};
Zeta zeta_constants(std::size_t m, std::size_t n);

struct NoiseReport {
  double sigma_W = 0.0;
  double sigma_g = 0.0;
  double sigma_R = 0.0;
  double zeta_W = 0.0;
  double zeta_g = 0.0;
  double zeta_R = 0.0;
  double muon_coeff = 0.0;  // zeta_W sigma_W
  double muown_coeff = 0.0; // zeta_g sigma_g + zeta_R sigma_R
};

// Root-mean-square deviations (population form, 1/T) of sampled gradients
// from the true gradient: nuclear norm for W, l1 for grad_g and nuclear norm
// for grad_R, the latter two through the reparameterized oracles at `view`.
NoiseReport noise_coefficients(const Matrix &true_grad_w, std::span<const Matrix> samples,
                               const ReparamView &view);

nlohmann::json to_json(const DecompReport &r);
nlohmann::json to_json(const NoiseReport &r);

} // namespace muown
