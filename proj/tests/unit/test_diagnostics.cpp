#include "muown/diagnostics.hpp"
#include "muown/error.hpp"
#include "muown/linalg.hpp"
#include "muown/models.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace muown;
using namespace muown::testing;

TEST(SpectralDecomposition, OrthonormalRowsScaled) {
  const Matrix q = naive_transpose(orthonormal_columns(5, 2, 3));
  Matrix w = q;
  for (std::size_t j = 0; j < 5; ++j) {
    w(0, j) *= 3.0;
    w(1, j) *= 4.0;
  }
  const DecompReport d = spectral_decomposition(w);
  EXPECT_NEAR(d.coherence, 1.0, 1e-12);
  EXPECT_NEAR(d.rowscale_sq, 16.0, 1e-12);
  EXPECT_NEAR(std::sqrt(d.spectral_sq_direct), 4.0, 1e-12);
  EXPECT_LE(d.residual, 1e-12);
}

TEST(SpectralDecomposition, AllOnes) {
  const DecompReport d = spectral_decomposition(Matrix(2, 2, 1.0));
  EXPECT_NEAR(d.rowscale_sq, 2.0, 1e-15);
  EXPECT_NEAR(d.coherence, 2.0, 1e-14);
  EXPECT_NEAR(d.spectral_sq_direct, 4.0, 1e-14);
  EXPECT_NEAR(oracle_singular_values(Matrix(2, 2, 1.0))[0], 2.0, 1e-14);
}

TEST(SpectralDecomposition, RandomResidualAndLowerBound) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const DecompReport d = spectral_decomposition(random_matrix(8, 5, seed));
    EXPECT_LE(d.residual, 1e-8);
    EXPECT_GE(d.coherence, 1.0 - 1e-9);
  }
}

TEST(SpectralDecomposition, CoherenceMatchesExplicitPcp) {
  const Matrix w = random_matrix(4, 6, 12);
  const Vector g = row_norms(w);
  const double ginf = vec_linf(g);
  Matrix pd(4, 6);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      pd(i, j) = (g[i] / ginf) * (w(i, j) / g[i]);
    }
  }
  const double want = jacobi_eigenvalues(naive_matmul(pd, naive_transpose(pd)))[0];
  EXPECT_NEAR(spectral_decomposition(w).coherence, want, 1e-12 * want);
}

TEST(SpectralDecomposition, UniformScaleInvariance) {
  const Matrix w = random_matrix(6, 3, 7);
  const double c0 = spectral_decomposition(w).coherence;
  for (double s : {1e-3, 0.5, 7.0, 1e4}) {
    EXPECT_NEAR(spectral_decomposition(s * w).coherence, c0, 1e-10);
  }
}

TEST(SpectralDecomposition, NegativeGCountAndErrors) {
  const Matrix w = random_matrix(3, 3, 1);
  EXPECT_EQ(spectral_decomposition(w, Vector{1, -1, -2}).negative_g_count, 2);
  EXPECT_THROW(spectral_decomposition(Matrix::from_rows({{1, 0}, {0, 0}})), ZeroRow);
  EXPECT_THROW(spectral_decomposition(w, Vector{1, 1}), DimensionMismatch);
}

TEST(EffectiveRank, Examples) {
  const EffectiveRank u = effective_rank(Vector{1, 1, 1, 1});
  EXPECT_EQ(u.erank, 4.0);
  EXPECT_EQ(u.normalized, 1.0);
  EXPECT_EQ(effective_rank(Vector{1, 0, 0, 0}).erank, 1.0);
  // exp(1.5 ln 2) to 40 digits: 2.828427124746190097603377448419396157139
  EXPECT_NEAR(effective_rank(Vector{2, 1, 1}).erank, 2.8284271247461903, 1e-15);
  EXPECT_NEAR(effective_rank(Vector{3, 2, 1}).erank, 2.7494592739972053, 1e-15);
}

TEST(EffectiveRank, Errors) {
  EXPECT_THROW(effective_rank(Vector{}), InvalidArgument);
  EXPECT_THROW(effective_rank(Vector{0, 0}), InvalidArgument);
  EXPECT_THROW(effective_rank(Vector{1, -1}), InvalidArgument);
}

TEST(EffectiveRank, ScaleAndPermutationInvariant) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Vector s = random_vector(7, seed);
    for (double &x : s) {
      x = std::abs(x);
    }
    const double e = effective_rank(s).erank;
    EXPECT_GE(e, 1.0);
    EXPECT_LE(e, 7.0);
    Vector scaled = s;
    for (double &x : scaled) {
      x *= 123.456;
    }
    EXPECT_NEAR(effective_rank(scaled).erank, e, 1e-12);
    Vector perm(std::vector<double>(s.values().rbegin(), s.values().rend()));
    EXPECT_NEAR(effective_rank(perm).erank, e, 1e-12);
  }
}

TEST(DualNorm, Examples) {
  EXPECT_NEAR(dual_norm(Vector{1, -2}, Matrix::diagonal(Vector{3, 4})), 10.0, 1e-14);
  EXPECT_EQ(dual_norm(Vector{0, 0}, Matrix(2, 2)), 0.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Vector g = random_vector(4, seed);
    const Matrix r = random_matrix(4, 5, seed + 50);
    EXPECT_GE(dual_norm(g, r), vec_l2(g) + frobenius_norm(r) * (1 - 1e-12));
  }
}

TEST(DualNorm, IsANorm) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Vector g1 = random_vector(3, seed), g2 = random_vector(3, seed + 1);
    const Matrix r1 = random_matrix(3, 4, seed + 2), r2 = random_matrix(3, 4, seed + 3);
    Vector gs(3);
    for (std::size_t i = 0; i < 3; ++i) {
      gs[i] = g1[i] + g2[i];
    }
    EXPECT_LE(dual_norm(gs, r1 + r2), dual_norm(g1, r1) + dual_norm(g2, r2) + 1e-10);
    Vector gneg = g1;
    for (double &x : gneg) {
      x *= -2.5;
    }
    EXPECT_NEAR(dual_norm(gneg, -2.5 * r1), 2.5 * dual_norm(g1, r1), 1e-10);
  }
}

TEST(Zeta, Constants) {
  const Zeta z = zeta_constants(4, 9);
  EXPECT_EQ(z.w, 2.0);
  EXPECT_EQ(z.g, 2.0);
  EXPECT_EQ(z.r, 2.0);
  const Zeta one = zeta_constants(1, 1);
  EXPECT_EQ(one.w, 1.0);
  EXPECT_EQ(one.g, 1.0);
  EXPECT_EQ(one.r, 1.0);
  EXPECT_THROW(zeta_constants(0, 3), InvalidArgument);
}

TEST(Zeta, L1OverL2BoundedBySqrtM) {
  const std::size_t m = 7;
  const double zg = zeta_constants(m, 3).g;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const Vector v = random_vector(m, seed);
    EXPECT_LE(vec_l1(v) / vec_l2(v), zg * (1 + 1e-15));
  }
  EXPECT_NEAR(vec_l1(Vector(m, 1.0)) / vec_l2(Vector(m, 1.0)), zg, 1e-15);
}

TEST(Noise, ZeroVariance) {
  const Matrix w = random_matrix(3, 4, 1);
  const Matrix g = random_matrix(3, 4, 2);
  const std::vector<Matrix> samples(4, g);
  const NoiseReport r = noise_coefficients(g, samples, init_view(w));
  EXPECT_EQ(r.sigma_W, 0.0);
  EXPECT_EQ(r.sigma_g, 0.0);
  EXPECT_EQ(r.sigma_R, 0.0);
  EXPECT_EQ(r.muon_coeff, 0.0);
}

TEST(Noise, TwoPointVariance) {
  const Matrix w = random_matrix(3, 4, 1);
  const Matrix g = random_matrix(3, 4, 2);
  const Matrix e = random_matrix(3, 4, 3);
  const std::vector<Matrix> samples{g + e, g - e};
  const NoiseReport r = noise_coefficients(g, samples, init_view(w));
  EXPECT_NEAR(r.sigma_W, oracle_nuclear(e), 1e-12);
  EXPECT_EQ(r.zeta_W, std::sqrt(3.0));
  EXPECT_EQ(r.zeta_g, std::sqrt(3.0));
  EXPECT_NEAR(r.muon_coeff, r.zeta_W * r.sigma_W, 1e-15);
  EXPECT_NEAR(r.muown_coeff, r.zeta_g * r.sigma_g + r.zeta_R * r.sigma_R, 1e-15);
}

TEST(Noise, Errors) {
  const ReparamView v = init_view(random_matrix(2, 2, 1));
  const std::vector<Matrix> one{Matrix(2, 2)};
  EXPECT_THROW(noise_coefficients(Matrix(2, 2), one, v), InvalidArgument);
  const std::vector<Matrix> bad{Matrix(2, 2), Matrix(2, 3)};
  EXPECT_THROW(noise_coefficients(Matrix(2, 2), bad, v), DimensionMismatch);
  const std::vector<Matrix> two{Matrix(2, 2), Matrix(2, 2)};
  EXPECT_THROW(noise_coefficients(Matrix(3, 2), two, v), DimensionMismatch);
}

TEST(Noise, Json) {
  const nlohmann::json j = to_json(NoiseReport{});
  for (const char *k : {"sigma_W", "sigma_g", "sigma_R", "zeta_W", "zeta_g", "zeta_R",
                        "muon_coeff", "muown_coeff"}) {
    EXPECT_TRUE(j.contains(k)) << k;
  }
  const nlohmann::json d = to_json(DecompReport{});
  for (const char *k : {"rowscale_sq", "coherence", "spectral_sq_direct", "residual",
                        "negative_g_count"}) {
    EXPECT_TRUE(d.contains(k)) << k;
  }
}
