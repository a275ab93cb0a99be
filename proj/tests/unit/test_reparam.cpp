#include "muown/diagnostics.hpp"
#include "muown/error.hpp"
#include "muown/linalg.hpp"
#include "muown/reparam.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace muown;
using namespace muown::testing;

namespace {

// Smooth test loss on W: sum c sin(a W + b) + 1/2 ||W k||^2.
struct TestLoss {
  Matrix a, b, c;
  Vector k;

  TestLoss(std::size_t m, std::size_t n, std::uint64_t seed)
      : a(random_matrix(m, n, derive_seed(seed, 1))), b(random_matrix(m, n, derive_seed(seed, 2))),
        c(random_matrix(m, n, derive_seed(seed, 3))), k(random_vector(n, derive_seed(seed, 4))) {}

  double value(const Matrix &w) const {
    double s = 0.0;
    for (std::size_t i = 0; i < w.rows(); ++i) {
      double wk = 0.0;
      for (std::size_t j = 0; j < w.cols(); ++j) {
        s += c(i, j) * std::sin(a(i, j) * w(i, j) + b(i, j));
        wk += w(i, j) * k[j];
      }
      s += 0.5 * wk * wk;
    }
    return s;
  }

  Matrix grad(const Matrix &w) const {
    Matrix out(w.rows(), w.cols());
    for (std::size_t i = 0; i < w.rows(); ++i) {
      double wk = 0.0;
      for (std::size_t j = 0; j < w.cols(); ++j) {
        wk += w(i, j) * k[j];
      }
      for (std::size_t j = 0; j < w.cols(); ++j) {
        out(i, j) = c(i, j) * a(i, j) * std::cos(a(i, j) * w(i, j) + b(i, j)) + wk * k[j];
      }
    }
    return out;
  }

  // L(g, R) = L(Diag(g / ||R||_row) R), evaluated without the library.
  double reparam_value(const Vector &g, const Matrix &r_mat) const {
    Matrix w = r_mat;
    for (std::size_t i = 0; i < w.rows(); ++i) {
      double n = 0.0;
      for (double x : r_mat.row(i)) {
        n += x * x;
      }
      n = std::sqrt(n);
      for (double &x : w.row(i)) {
        x *= g[i] / n;
      }
    }
    return value(w);
  }
};

} // namespace

TEST(InitView, Example) {
  const ReparamView v = init_view(Matrix::from_rows({{3, 0}, {0, 4}}));
  EXPECT_EQ(v.g, (Vector{3, 4}));
  EXPECT_EQ(v.D, Matrix::identity(2));
  EXPECT_EQ(v.r, v.g);
}

TEST(InitView, ZeroRowRejected) {
  try {
    init_view(Matrix::from_rows({{1, 2}, {0, 0}, {3, 4}}));
    FAIL() << "expected ZeroRow";
  } catch (const ZeroRow &e) {
    EXPECT_EQ(e.row(), 1u);
  }
  EXPECT_THROW(init_view(Matrix::from_rows({{1e-31, 0}})), ZeroRow);
}

TEST(InitView, RoundTripIsBitwise) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Matrix w = random_matrix(4, 6, seed, std::exp(static_cast<double>(seed % 7) - 3.0));
    const ReparamView v = init_view(w);
    EXPECT_EQ(recompose(v), w);
    for (std::size_t i = 0; i < 4; ++i) {
      double n = 0.0;
      for (double x : v.D.row(i)) {
        n += x * x;
      }
      EXPECT_NEAR(std::sqrt(n), 1.0, 1e-12);
    }
  }
}

TEST(Recompose, Examples) {
  const Matrix r = random_matrix(3, 5, 2);
  const Vector rn = row_norms(r);
  EXPECT_LE(max_abs_diff(recompose(rn, r), r), 1e-15);
  Vector twice = rn;
  for (double &x : twice) {
    x *= 2.0;
  }
  EXPECT_LE(max_abs_diff(recompose(twice, r), 2.0 * r), 1e-14);
  EXPECT_THROW(recompose(Vector{1, 1}, Matrix::from_rows({{1, 0}, {0, 0}})), ZeroRow);
  EXPECT_THROW(recompose(Vector{1}, r), DimensionMismatch);
}

TEST(Recompose, RowNormsEqualAbsG) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Vector g = random_vector(5, seed);
    const Matrix r = random_matrix(5, 4, seed + 100, 10.0);
    const Vector got = row_norms(recompose(g, r));
    for (std::size_t i = 0; i < 5; ++i) {
      EXPECT_NEAR(got[i], std::abs(g[i]), 1e-12 * std::abs(g[i]));
    }
  }
}

TEST(Recompose, UniformRescaleScalesRowsAndKeepsCoherence) {
  const Matrix r = random_matrix(4, 7, 3);
  const Vector g = row_norms(random_matrix(4, 7, 4));
  const Matrix w = recompose(g, r);
  Vector cg = g;
  for (double &x : cg) {
    x *= 3.5;
  }
  const Matrix w2 = recompose(cg, r);
  EXPECT_LE(max_abs_diff(w2, 3.5 * w), 1e-13);
  EXPECT_NEAR(spectral_decomposition(w2).coherence, spectral_decomposition(w).coherence, 1e-10);
}

TEST(GradG, Examples) {
  const ReparamView v = init_view(random_matrix(3, 4, 5));
  const Vector ones = grad_g(v.D, v.D);
  for (double x : ones) {
    EXPECT_NEAR(x, 1.0, 1e-15);
  }
  Matrix orth = proj_radial(random_matrix(3, 4, 6), v.D);
  EXPECT_NEAR(grad_g(orth, v.D)[1], 0.0, 1e-15);
  // 1x1: D = 1 so grad_g = grad_W.
  const ReparamView s = init_view(Matrix::from_rows({{2.5}}));
  EXPECT_EQ(grad_g(Matrix::from_rows({{-0.75}}), s.D)[0], -0.75);
}

TEST(GradR, Examples) {
  const ReparamView v = init_view(random_matrix(3, 4, 7));
  EXPECT_EQ(max_abs(grad_R(v.D, v.g, v.r, v.D)), 0.0);
  const Matrix gw = random_matrix(3, 4, 8);
  EXPECT_LE(max_abs_diff(grad_R(gw, v.r, v.r, v.D), proj_radial(gw, v.D)), 1e-15);
  EXPECT_THROW(grad_R(gw, v.g, Vector{1, 0, 1}, v.D), ZeroRow);
}

TEST(GradR, RowsOrthogonalToD) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Vector g = random_vector(5, seed);
    const ReparamView v = make_view(g, random_matrix(5, 3, seed + 40));
    const Matrix gr = grad_R(random_matrix(5, 3, seed + 80), v.g, v.r, v.D);
    for (std::size_t i = 0; i < 5; ++i) {
      double ip = 0.0;
      for (std::size_t j = 0; j < 3; ++j) {
        ip += gr(i, j) * v.D(i, j);
      }
      EXPECT_LE(std::abs(ip), 1e-12 * (1.0 + frobenius_norm(gr)));
    }
  }
}

TEST(GradR, MatchesFiniteDifferencesOn3x2) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const TestLoss loss(3, 2, seed);
    const Vector g = random_vector(3, seed + 10);
    const Matrix r = random_matrix(3, 2, seed + 20);
    const ReparamView v = make_view(g, r);
    const Matrix gw = loss.grad(recompose(v));
    const Matrix analytic = grad_R(gw, v.g, v.r, v.D);
    const Vector analytic_g = grad_g(gw, v.D);
    Matrix fd(3, 2);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 2; ++j) {
        const double h = 1e-5 * std::max(1.0, std::abs(r(i, j)));
        Matrix up = r;
        Matrix dn = r;
        up(i, j) += h;
        dn(i, j) -= h;
        fd(i, j) = (loss.reparam_value(g, up) - loss.reparam_value(g, dn)) / (2 * h);
      }
    }
    EXPECT_LE(naive_frobenius(fd - analytic), 1e-6 * naive_frobenius(analytic));
    for (std::size_t i = 0; i < 3; ++i) {
      const double h = 1e-5 * std::max(1.0, std::abs(g[i]));
      Vector up = g;
      Vector dn = g;
      up[i] += h;
      dn[i] -= h;
      const double want = (loss.reparam_value(up, r) - loss.reparam_value(dn, r)) / (2 * h);
      EXPECT_NEAR(analytic_g[i], want, 1e-6 * std::max(1.0, std::abs(want)));
    }
  }
}

TEST(ChainRule, DirectionalDerivativesAgree) {
  constexpr double h = 1e-5;
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    SplitMix64 rng(seed);
    const std::size_t m = 1 + rng.below(5);
    const std::size_t n = 1 + rng.below(5);
    const TestLoss loss(m, n, seed + 500);
    const Vector g = random_vector(m, seed + 600);
    const Matrix r = random_matrix(m, n, seed + 700);
    const Vector dg = random_vector(m, seed + 800);
    const Matrix dr = random_matrix(m, n, seed + 900);

    const ReparamView v = make_view(g, r);
    const Matrix gw = loss.grad(recompose(v));
    const double analytic = dot(grad_g(gw, v.D), dg) + inner(grad_R(gw, v.g, v.r, v.D), dr);

    Vector gp = g, gm = g;
    Matrix rp = r, rm = r;
    for (std::size_t i = 0; i < m; ++i) {
      gp[i] += h * dg[i];
      gm[i] -= h * dg[i];
    }
    rp += h * dr;
    rm -= h * dr;
    const double fd = (loss.reparam_value(gp, rp) - loss.reparam_value(gm, rm)) / (2 * h);
    EXPECT_LE(std::abs(fd - analytic), 1e-5 * std::max(std::abs(analytic), 1e-3))
        << "seed " << seed << " fd " << fd << " analytic " << analytic;
    ++checked;
  }
  EXPECT_EQ(checked, 50);
}
