#include "muown/reparam.hpp"

#include "muown/error.hpp"
#include "muown/linalg.hpp"

#include <cmath>
#include <limits>

namespace muown {
namespace {

// Relative size, per unit of row length, below which the tangential residual
// of Proj_D is indistinguishable from cancellation error.
constexpr double kRoundingFloor = 8.0 * std::numeric_limits<double>::epsilon();

} // namespace

void check_rows(const Vector &r) {
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!(r[i] > kEpsRow)) {
      throw ZeroRow(i);
    }
  }
}

Matrix row_normalize(const Vector &r, const Matrix &r_mat) {
  if (r.size() != r_mat.rows()) {
    throw DimensionMismatch("row_normalize: norm vector length differs from row count");
  }
  Vector inv(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    inv[i] = 1.0 / r[i];
  }
  return diag_scale_rows(inv, r_mat);
}

ReparamView init_view(const Matrix &w) {
  Vector r = row_norms(w);
  check_rows(r);
  ReparamView view;
  view.D = row_normalize(r, w);
  view.g = r;
  view.r = std::move(r);
  view.R = w;
  return view;
}

ReparamView make_view(Vector g, Matrix r_mat) {
  if (g.size() != r_mat.rows()) {
    throw DimensionMismatch("make_view: g length differs from row count");
  }
  Vector r = row_norms(r_mat);
  check_rows(r);
  ReparamView view;
  view.D = row_normalize(r, r_mat);
  view.g = std::move(g);
  view.r = std::move(r);
  view.R = std::move(r_mat);
  return view;
}

Matrix recompose(const Vector &g, const Vector &r, const Matrix &r_mat) {
  if (g.size() != r_mat.rows() || r.size() != r_mat.rows()) {
    throw DimensionMismatch("recompose: vector length differs from row count");
  }
  check_rows(r);
  Vector scale(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    scale[i] = g[i] / r[i];
  }
  return diag_scale_rows(scale, r_mat);
}

Matrix recompose(const Vector &g, const Matrix &r_mat) { return recompose(g, row_norms(r_mat), r_mat); }

Matrix recompose(const ReparamView &view) { return recompose(view.g, view.r, view.R); }

Vector grad_g(const Matrix &grad_w, const Matrix &d) {
  if (!grad_w.same_shape(d)) {
    throw DimensionMismatch("grad_g: gradient and direction shapes differ");
  }
  Vector out(d.rows());
  for (std::size_t i = 0; i < d.rows(); ++i) {
    const auto a = grad_w.row(i);
    const auto x = d.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
      s += a[j] * x[j];
    }
    out[i] = s;
  }
  return out;
}

Matrix grad_R(const Matrix &grad_w, const Vector &g, const Vector &r, const Matrix &d) {
  if (!grad_w.same_shape(d) || g.size() != d.rows() || r.size() != d.rows()) {
    throw DimensionMismatch("grad_R: operand shapes differ");
  }
  check_rows(r);
  Matrix p = proj_radial(grad_w, d);
  const double floor = kRoundingFloor * static_cast<double>(d.cols());
  for (std::size_t i = 0; i < p.rows(); ++i) {
    double pn = 0.0;
    for (double x : p.row(i)) {
      pn += x * x;
    }
    double an = 0.0;
    for (double x : grad_w.row(i)) {
      an += x * x;
    }
    if (std::sqrt(pn) <= floor * std::sqrt(an)) {
      for (double &x : p.row(i)) {
        x = 0.0;
      }
    }
  }
  Vector scale(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    scale[i] = g[i] / r[i];
  }
  return diag_scale_rows(scale, p);
}

} // namespace muown
