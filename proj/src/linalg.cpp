#include "muown/linalg.hpp"

#include "muown/error.hpp"
#include "muown/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace muown {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMaxJacobiSweeps = 100;
constexpr std::uint64_t kPowerSeed = 0x4D574E31A5A5C3C3ULL;

void require_same_shape(const Matrix &a, const Matrix &b, const char *what) {
  if (!a.same_shape(b)) {
    throw DimensionMismatch(std::string(what) + ": shape mismatch");
  }
}

// Column-major working copy used by the Jacobi sweeps.
using Columns = std::vector<std::vector<double>>;

double col_dot(const std::vector<double> &x, const std::vector<double> &y) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    s += x[k] * y[k];
  }
  return s;
}

// Fill columns whose singular value is zero with unit vectors orthogonal to
// every other column (modified Gram-Schmidt over the standard basis).
void complete_orthonormal(Columns &cols, const std::vector<bool> &filled) {
  const std::size_t m = cols.empty() ? 0 : cols[0].size();
  std::size_t basis = 0;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (filled[j]) {
      continue;
    }
    std::vector<bool> done(filled);
    for (std::size_t k = 0; k < j; ++k) {
      done[k] = true;
    }
    while (basis < m) {
      std::vector<double> e(m, 0.0);
      e[basis++] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t k = 0; k < cols.size(); ++k) {
          if (!done[k]) {
            continue;
          }
          const double p = col_dot(e, cols[k]);
          for (std::size_t r = 0; r < m; ++r) {
            e[r] -= p * cols[k][r];
          }
        }
      }
      const double nrm = std::sqrt(col_dot(e, e));
      if (nrm > 0.5) {
        for (double &x : e) {
          x /= nrm;
        }
        cols[j] = std::move(e);
        break;
      }
    }
  }
}

// One-sided Jacobi for m >= n.
Svd svd_tall(const Matrix &a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  Columns w(n, std::vector<double>(m));
  Columns v(n, std::vector<double>(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < m; ++i) {
      w[j][i] = a(i, j);
    }
    v[j][j] = 1.0;
  }

  for (int sweep = 0; sweep < kMaxJacobiSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double alpha = col_dot(w[p], w[p]);
        const double beta = col_dot(w[q], w[q]);
        const double gamma = col_dot(w[p], w[q]);
        if (gamma == 0.0 || std::abs(gamma) <= kEps * std::sqrt(alpha * beta)) {
          continue;
        }
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        double t;
        if (std::abs(zeta) > 1e150) {
          t = 0.5 / zeta;
        } else {
          t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        }
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t k = 0; k < m; ++k) {
          const double wp = w[p][k];
          const double wq = w[q][k];
          w[p][k] = c * wp - s * wq;
          w[q][k] = s * wp + c * wq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vp = v[p][k];
          const double vq = v[q][k];
          v[p][k] = c * vp - s * vq;
          v[q][k] = s * vp + c * vq;
        }
      }
    }
    if (!rotated) {
      break;
    }
  }

  std::vector<double> sig(n);
  for (std::size_t j = 0; j < n; ++j) {
    sig[j] = std::sqrt(col_dot(w[j], w[j]));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sig[x] > sig[y]; });

  Columns ucols(n, std::vector<double>(m, 0.0));
  std::vector<bool> filled(n, false);
  Svd out{Matrix(m, n), Vector(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    out.sigma[k] = sig[j];
    if (sig[j] > 0.0) {
      for (std::size_t i = 0; i < m; ++i) {
        ucols[k][i] = w[j][i] / sig[j];
      }
      filled[k] = true;
    }
    for (std::size_t i = 0; i < n; ++i) {
      out.v(i, k) = v[j][i];
    }
  }
  complete_orthonormal(ucols, filled);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < m; ++i) {
      out.u(i, k) = ucols[k][i];
    }
  }
  return out;
}

std::vector<double> start_vector(std::size_t dim, std::size_t m, std::size_t n) {
  SplitMix64 rng(kPowerSeed ^ (static_cast<std::uint64_t>(m) << 32) ^ static_cast<std::uint64_t>(n));
  std::vector<double> x(dim);
  for (double &e : x) {
    e = rng.uniform(-1.0, 1.0);
  }
  return x;
}

std::vector<double> symv(const Matrix &b, const std::vector<double> &x) {
  std::vector<double> y(b.rows(), 0.0);
  for (std::size_t i = 0; i < b.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < b.cols(); ++j) {
      s += b(i, j) * x[j];
    }
    y[i] = s;
  }
  return y;
}

double norm2(const std::vector<double> &x) { return std::sqrt(col_dot(x, x)); }

// Power iteration on a symmetric matrix `s`, optionally shifted by `shift`
// (iterates on s + shift*I). Returns the Rayleigh quotient of `s`.
double power_iterate(const Matrix &s, double shift, std::vector<double> x, double tol,
                     int max_iters) {
  double nx = norm2(x);
  for (double &e : x) {
    e /= nx;
  }
  const double scale = frobenius_norm(s);
  for (int it = 0; it < max_iters; ++it) {
    std::vector<double> y = symv(s, x);
    const double lambda = col_dot(x, y);
    double res = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double r = y[k] - lambda * x[k];
      res += r * r;
    }
    res = std::sqrt(res);
    if (res <= tol * std::max(std::abs(lambda), tol * scale)) {
      return lambda;
    }
    for (std::size_t k = 0; k < x.size(); ++k) {
      y[k] += shift * x[k];
    }
    const double ny = norm2(y);
    if (ny == 0.0) {
      return lambda;
    }
    for (std::size_t k = 0; k < x.size(); ++k) {
      x[k] = y[k] / ny;
    }
  }
  throw ConvergenceError("power iteration did not converge in " + std::to_string(max_iters) +
                         " iterations");
}

} // namespace

Matrix transpose(const Matrix &a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      t(j, i) = a(i, j);
    }
  }
  return t;
}

Matrix matmul(const Matrix &a, const Matrix &b) {
  if (a.cols() != b.rows()) {
    throw DimensionMismatch("matmul: inner dimensions differ");
  }
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) {
        s += a(i, k) * b(k, j);
      }
      c(i, j) = s;
    }
  }
  return c;
}

Matrix matmul_nt(const Matrix &a, const Matrix &b) {
  if (a.cols() != b.cols()) {
    throw DimensionMismatch("matmul_nt: inner dimensions differ");
  }
  Matrix c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto ai = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const auto bj = b.row(j);
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) {
        s += ai[k] * bj[k];
      }
      c(i, j) = s;
    }
  }
  return c;
}

double inner(const Matrix &a, const Matrix &b) {
  require_same_shape(a, b, "inner");
  const auto x = a.span();
  const auto y = b.span();
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    s += x[k] * y[k];
  }
  return s;
}

double dot(const Vector &a, const Vector &b) {
  if (a.size() != b.size()) {
    throw DimensionMismatch("dot: length mismatch");
  }
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    s += a[k] * b[k];
  }
  return s;
}

Vector row_norms(const Matrix &a) {
  Vector out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (double x : a.row(i)) {
      s += x * x;
    }
    out[i] = std::sqrt(s);
  }
  return out;
}

Matrix diag_scale_rows(const Vector &v, const Matrix &a) {
  if (v.size() != a.rows()) {
    throw DimensionMismatch("diag_scale_rows: vector length differs from row count");
  }
  Matrix out(a);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (double &x : out.row(i)) {
      x = v[i] * x;
    }
  }
  return out;
}

Matrix proj_radial(const Matrix &a, const Matrix &x) {
  require_same_shape(a, x, "proj_radial");
  Matrix out(a);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto ai = a.row(i);
    const auto xi = x.row(i);
    double c = 0.0;
    for (std::size_t j = 0; j < ai.size(); ++j) {
      c += ai[j] * xi[j];
    }
    auto oi = out.row(i);
    for (std::size_t j = 0; j < ai.size(); ++j) {
      oi[j] = ai[j] - c * xi[j];
    }
  }
  return out;
}

double frobenius_norm(const Matrix &a) {
  double s = 0.0;
  for (double x : a.span()) {
    s += x * x;
  }
  return std::sqrt(s);
}

double nuclear_norm(const Matrix &a) {
  const Vector s = singular_values(a);
  double total = 0.0;
  for (double x : s) {
    total += x;
  }
  return total;
}

double vec_l1(const Vector &v) {
  double s = 0.0;
  for (double x : v) {
    s += std::abs(x);
  }
  return s;
}

double vec_l2(const Vector &v) {
  double s = 0.0;
  for (double x : v) {
    s += x * x;
  }
  return std::sqrt(s);
}

double vec_linf(const Vector &v) {
  double s = 0.0;
  for (double x : v) {
    s = std::max(s, std::abs(x));
  }
  return s;
}

double max_abs(const Matrix &a) {
  double s = 0.0;
  for (double x : a.span()) {
    s = std::max(s, std::abs(x));
  }
  return s;
}

bool all_finite(const Matrix &a) {
  return std::all_of(a.span().begin(), a.span().end(), [](double x) { return std::isfinite(x); });
}

bool all_finite(const Vector &v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

Svd svd(const Matrix &a) {
  if (a.empty()) {
    throw InvalidArgument("svd of an empty matrix");
  }
  if (!all_finite(a)) {
    throw NonFinite("svd input contains NaN or Inf");
  }
  if (a.rows() >= a.cols()) {
    return svd_tall(a);
  }
  Svd t = svd_tall(transpose(a));
  return Svd{std::move(t.v), std::move(t.sigma), std::move(t.u)};
}

Vector singular_values(const Matrix &a) { return svd(a).sigma; }

double spectral_norm(const Matrix &a, double tol, int max_iters) {
  if (!(tol > 0.0)) {
    throw InvalidArgument("spectral_norm: tol must be positive");
  }
  if (max_abs(a) == 0.0) {
    return 0.0;
  }
  const Matrix gram = a.rows() <= a.cols() ? matmul_nt(a, a) : matmul_nt(transpose(a), transpose(a));
  const double lambda =
      power_iterate(gram, 0.0, start_vector(gram.rows(), a.rows(), a.cols()), tol, max_iters);
  return std::sqrt(std::max(lambda, 0.0));
}

double lambda_max_sym(const Matrix &m, double tol, int max_iters) {
  if (m.rows() != m.cols()) {
    throw DimensionMismatch("lambda_max_sym: matrix is not square");
  }
  if (!(tol > 0.0)) {
    throw InvalidArgument("lambda_max_sym: tol must be positive");
  }
  const double scale = max_abs(m);
  if (scale == 0.0) {
    return 0.0;
  }
  const std::size_t n = m.rows();
  Matrix s(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(m(i, j) - m(j, i)) > 1e-12 * scale) {
        throw InvalidArgument("lambda_max_sym: matrix is not symmetric");
      }
      s(i, j) = 0.5 * (m(i, j) + m(j, i));
    }
  }
  // Gershgorin bound on |lambda_min| makes s + shift*I positive semidefinite,
  // so the dominant eigenvalue of the shifted matrix is the largest one.
  double shift = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      r += std::abs(s(i, j));
    }
    shift = std::max(shift, r);
  }
  return power_iterate(s, shift, start_vector(n, n, n), tol, max_iters);
}

} // namespace muown
