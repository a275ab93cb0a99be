#include "muown/matrix.hpp"

#include "muown/error.hpp"

#include <string>

namespace muown {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
  if (rows == 0 || cols == 0) {
    throw InvalidArgument("matrix dimensions must be positive");
  }
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows == 0 || cols == 0) {
    throw InvalidArgument("matrix dimensions must be positive");
  }
  if (data_.size() != rows * cols) {
    throw DimensionMismatch("matrix data has " + std::to_string(data_.size()) +
                            " entries, expected " + std::to_string(rows * cols));
  }
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t m = rows.size();
  const std::size_t n = m ? rows.begin()->size() : 0;
  std::vector<double> data;
  data.reserve(m * n);
  for (const auto &r : rows) {
    if (r.size() != n) {
      throw DimensionMismatch("ragged row list");
    }
    data.insert(data.end(), r.begin(), r.end());
  }
  return Matrix(m, n, std::move(data));
}

Matrix Matrix::identity(std::size_t n) {
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    out(i, i) = 1.0;
  }
  return out;
}

Matrix Matrix::diagonal(const Vector &v) { return diagonal(v, v.size(), v.size()); }

Matrix Matrix::diagonal(const Vector &v, std::size_t rows, std::size_t cols) {
  if (v.size() > rows || v.size() > cols) {
    throw DimensionMismatch("diagonal does not fit the requested shape");
  }
  Matrix out(rows, cols);
  for (std::size_t i = 0; i < v.size(); ++i) {
    out(i, i) = v[i];
  }
  return out;
}

Matrix &Matrix::operator+=(const Matrix &o) {
  if (!same_shape(o)) {
    throw DimensionMismatch("matrix addition shape mismatch");
  }
  for (std::size_t k = 0; k < data_.size(); ++k) {
    data_[k] += o.data_[k];
  }
  return *this;
}

Matrix &Matrix::operator-=(const Matrix &o) {
  if (!same_shape(o)) {
    throw DimensionMismatch("matrix subtraction shape mismatch");
  }
  for (std::size_t k = 0; k < data_.size(); ++k) {
    data_[k] -= o.data_[k];
  }
  return *this;
}

Matrix &Matrix::operator*=(double s) {
  for (double &x : data_) {
    x *= s;
  }
  return *this;
}

Matrix operator+(Matrix a, const Matrix &b) { return a += b; }
Matrix operator-(Matrix a, const Matrix &b) { return a -= b; }
Matrix operator*(double s, Matrix a) { return a *= s; }
Matrix operator*(Matrix a, double s) { return a *= s; }

} // namespace muown
