#pragma once

#include "muown/matrix.hpp"

#include <cstddef>

namespace muown {

// Every routine below accumulates in plain left-to-right order so results are
// reproducible bit-for-bit on a given platform.

Matrix transpose(const Matrix &a);
Matrix matmul(const Matrix &a, const Matrix &b);
// a * b^T
Matrix matmul_nt(const Matrix &a, const Matrix &b);

// Frobenius inner product <A, B> = tr(A^T B).
double inner(const Matrix &a, const Matrix &b);
double dot(const Vector &a, const Vector &b);

Vector row_norms(const Matrix &a);
// Diag(v) * A
Matrix diag_scale_rows(const Vector &v, const Matrix &a);
// A - Diag(diag(A X^T)) X
Matrix proj_radial(const Matrix &a, const Matrix &x);

double frobenius_norm(const Matrix &a);
double nuclear_norm(const Matrix &a);
double vec_l1(const Vector &v);
double vec_l2(const Vector &v);
double vec_linf(const Vector &v);
double max_abs(const Matrix &a);

bool all_finite(const Matrix &a);
bool all_finite(const Vector &v);

struct Svd {
  Matrix u;     // rows x k, orthonormal columns
  Vector sigma; // k = min(rows, cols), nonincreasing
  Matrix v;     // cols x k, orthonormal columns
};

// Thin SVD by one-sided (Hestenes) Jacobi rotations.
Svd svd(const Matrix &a);
Vector singular_values(const Matrix &a);

// Largest singular value by power iteration on the smaller Gram matrix.
// Throws ConvergenceError when the residual test is not met in max_iters.
double spectral_norm(const Matrix &a, double tol = 1e-12, int max_iters = 20000);

// Largest eigenvalue of a symmetric matrix (symmetry checked to 1e-12 relative).
double lambda_max_sym(const Matrix &m, double tol = 1e-12, int max_iters = 20000);

} // namespace muown
