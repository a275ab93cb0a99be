#include "muown/orthogonalize.hpp"

#include "muown/error.hpp"
#include "muown/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace muown {

Matrix newton_schulz(const Matrix &g, const NSConfig &cfg) {
  if (cfg.steps < 1) {
    throw InvalidArgument("newton_schulz: steps must be >= 1");
  }
  const double norm = frobenius_norm(g);
  if (norm == 0.0) {
    return Matrix(g.rows(), g.cols());
  }
  if (!std::isfinite(norm)) {
    throw NonFinite("newton_schulz: input is not finite");
  }
  const bool transposed = g.rows() > g.cols();
  Matrix x = transposed ? transpose(g) : g;
  x *= 1.0 / norm;
  for (int step = 0; step < cfg.steps; ++step) {
    const Matrix a = matmul_nt(x, x);
    Matrix poly = matmul(a, a);
    poly *= cfg.c;
    poly += cfg.b * a;
    Matrix next = matmul(poly, x);
    next += cfg.a * x;
    x = std::move(next);
  }
  if (!all_finite(x)) {
    throw NonFinite("newton_schulz: iteration produced NaN/Inf");
  }
  return transposed ? transpose(x) : x;
}

Matrix polar_exact(const Matrix &g) {
  if (max_abs(g) == 0.0) {
    return Matrix(g.rows(), g.cols());
  }
  // Directions with numerically zero singular value get the zero completion,
  // so a rank-r input maps to U_r V_r^T.
  Svd s = svd(g);
  const double tol = static_cast<double>(std::max(g.rows(), g.cols())) *
                     std::numeric_limits<double>::epsilon() * s.sigma[0];
  for (std::size_t k = 0; k < s.sigma.size(); ++k) {
    if (s.sigma[k] <= tol) {
      for (std::size_t i = 0; i < s.u.rows(); ++i) {
        s.u(i, k) = 0.0;
      }
    }
  }
  return matmul_nt(s.u, s.v);
}

Matrix orthogonalize(const Matrix &g, OrthBackend backend, const NSConfig &cfg) {
  return backend == OrthBackend::ExactPolar ? polar_exact(g) : newton_schulz(g, cfg);
}

} // namespace muown
