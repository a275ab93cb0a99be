#pragma once

#include "muown/matrix.hpp"

namespace muown {

// Quintic Newton-Schulz iterate X <- a X + b (X X^T) X + c (X X^T)^2 X.
// Defaults are the constants of the public Muon reference implementation.
struct NSConfig {
  int steps = 5;
  double a = 3.4445;
  double b = -4.7750;
  double c = 2.0315;
};

// Singular-value band the default configuration is expected to land in.
inline constexpr double kNsBandLo = 0.68;
inline constexpr double kNsBandHi = 1.16;

enum class OrthBackend { NewtonSchulz, ExactPolar };

// Approximate polar factor. G is prenormalized by its Frobenius norm and the
// iteration runs on the side with the smaller Gram matrix. The zero matrix
// maps to zero. Throws NonFinite if the iterate blows up.
Matrix newton_schulz(const Matrix &g, const NSConfig &cfg = {});

// U V^T from the thin SVD of G; the zero matrix maps to zero.
Matrix polar_exact(const Matrix &g);

Matrix orthogonalize(const Matrix &g, OrthBackend backend, const NSConfig &cfg = {});

} // namespace muown
