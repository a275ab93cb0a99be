#pragma once

#include "muown/matrix.hpp"

namespace muown {

// Rows with norm at or below this are rejected rather than regularized.
inline constexpr double kEpsRow = 1e-30;

// Weight-normalized view of one layer: W = Diag(g / r) R with r = ||R||_row
// and D = Diag(1 / r) R the unit-row direction.
struct ReparamView {
  Vector g;
  Vector r;
  Matrix R;
  Matrix D;
};

// R = W, g = r = ||W||_row. recompose(view) reproduces W bitwise.
ReparamView init_view(const Matrix &w);

// Builds a view from explicit (g, R); r and D are derived from R.
ReparamView make_view(Vector g, Matrix r_mat);

// Throws ZeroRow(i) for the first row with norm <= kEpsRow.
void check_rows(const Vector &r);

// Diag(g / r) R with r = ||R||_row. Negative g entries flip the row.
Matrix recompose(const Vector &g, const Matrix &r_mat);
// Same, with the row norms of R already known.
Matrix recompose(const Vector &g, const Vector &r, const Matrix &r_mat);
Matrix recompose(const ReparamView &view);

// Diag(1 / r) R
Matrix row_normalize(const Vector &r, const Matrix &r_mat);

// grad_g[i] = <gradW_i, D_i>
Vector grad_g(const Matrix &grad_w, const Matrix &d);

// Diag(g / r) Proj_D(gradW). Rows whose tangential part is at rounding level
// relative to the radial part are returned as exact zeros.
Matrix grad_R(const Matrix &grad_w, const Vector &g, const Vector &r, const Matrix &d);

} // namespace muown
