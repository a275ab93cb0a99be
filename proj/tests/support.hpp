#pragma once

// Shared fixtures and independent reference computations for the tests.
// Nothing here calls into the library's linear algebra.

#include "muown/matrix.hpp"
#include "muown/rng.hpp"

#include <algorithm>
#include <vector>
#include <cmath>
#include <cstdint>

namespace muown::testing {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed,
                            double scale = 1.0) {
  SplitMix64 rng(seed);
  Matrix out(rows, cols);
  for (double &x : out.span()) {
    x = scale * rng.normal();
  }
  return out;
}

inline Vector random_vector(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  SplitMix64 rng(seed);
  Vector out(n);
  for (double &x : out) {
    x = scale * rng.normal();
  }
  return out;
}

inline Matrix naive_matmul(const Matrix &a, const Matrix &b) {
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) {
        s += a(i, k) * b(k, j);
      }
      out(i, j) = s;
    }
  }
  return out;
}

inline Matrix naive_transpose(const Matrix &a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      out(j, i) = a(i, j);
    }
  }
  return out;
}

inline Matrix explicit_diag(const Vector &v) {
  Matrix out(v.size(), v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out(i, i) = v[i];
  }
  return out;
}

inline double naive_frobenius(const Matrix &a) {
  double s = 0.0;
  for (double x : a.span()) {
    s += x * x;
  }
  return std::sqrt(s);
}

inline double max_abs_diff(const Matrix &a, const Matrix &b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    m = std::max(m, std::abs(a.span()[k] - b.span()[k]));
  }
  return m;
}

inline double rel_err(double got, double want) {
  const double denom = std::max(std::abs(want), 1e-300);
  return std::abs(got - want) / denom;
}

// Random matrix with prescribed singular values: Q1 Diag(s) Q2^T with Q1, Q2
// orthonormal from modified Gram-Schmidt on Gaussian draws.
inline Matrix orthonormal_columns(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Matrix q = random_matrix(rows, cols, seed);
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t k = 0; k < j; ++k) {
      double d = 0.0;
      for (std::size_t i = 0; i < rows; ++i) {
        d += q(i, j) * q(i, k);
      }
      for (std::size_t i = 0; i < rows; ++i) {
        q(i, j) -= d * q(i, k);
      }
    }
    double n = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      n += q(i, j) * q(i, j);
    }
    n = std::sqrt(n);
    for (std::size_t i = 0; i < rows; ++i) {
      q(i, j) /= n;
    }
  }
  return q;
}

inline Matrix with_singular_values(std::size_t rows, std::size_t cols, const Vector &s,
                                   std::uint64_t seed) {
  const std::size_t k = s.size();
  const Matrix u = orthonormal_columns(rows, k, derive_seed(seed, 1));
  const Matrix v = orthonormal_columns(cols, k, derive_seed(seed, 2));
  Matrix us = u;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      us(i, j) *= s[j];
    }
  }
  return naive_matmul(us, naive_transpose(v));
}

} // namespace muown::testing

namespace muown::testing {

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
inline std::vector<double> jacobi_eigenvalues(Matrix a) {
  const std::size_t n = a.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        off += a(p, q) * a(p, q);
      }
    }
    if (off < 1e-34) {
      break;
    }
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) {
          continue;
        }
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = a(i, i);
  }
  std::sort(out.rbegin(), out.rend());
  return out;
}

// Singular values through the eigenvalues of the smaller Gram matrix.
inline std::vector<double> oracle_singular_values(const Matrix &a) {
  const Matrix gram = a.rows() <= a.cols() ? naive_matmul(a, naive_transpose(a))
                                           : naive_matmul(naive_transpose(a), a);
  std::vector<double> ev = jacobi_eigenvalues(gram);
  for (double &x : ev) {
    x = std::sqrt(std::max(x, 0.0));
  }
  return ev;
}

inline double oracle_nuclear(const Matrix &a) {
  double s = 0.0;
  for (double x : oracle_singular_values(a)) {
    s += x;
  }
  return s;
}

} // namespace muown::testing

namespace muown::testing {

// |a - b| / max(|a|, |b|, 1e-8)
inline double coord_rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

} // namespace muown::testing
