#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace muown {

// Dense vector of doubles.
class Vector {
public:
  Vector() = default;
  explicit Vector(std::size_t n, double fill = 0.0) : data_(n, fill) {}
  explicit Vector(std::vector<double> data) : data_(std::move(data)) {}
  Vector(std::initializer_list<double> init) : data_(init) {}

  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double &operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> span() noexcept { return data_; }
  std::span<const double> span() const noexcept { return data_; }
  const std::vector<double> &values() const noexcept { return data_; }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  friend bool operator==(const Vector &, const Vector &) = default;

private:
  std::vector<double> data_;
};

// Dense row-major matrix of doubles. The shape is fixed at construction;
// a default-constructed Matrix is the empty 0x0 placeholder.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix identity(std::size_t n);
  // Diag(v) as an n x n matrix, or embedded in rows x cols when given.
  static Matrix diagonal(const Vector &v);
  static Matrix diagonal(const Vector &v, std::size_t rows, std::size_t cols);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  bool same_shape(const Matrix &o) const noexcept { return rows_ == o.rows_ && cols_ == o.cols_; }

  double &operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::span<double> span() noexcept { return data_; }
  std::span<const double> span() const noexcept { return data_; }

  Matrix &operator+=(const Matrix &o);
  Matrix &operator-=(const Matrix &o);
  Matrix &operator*=(double s);

  friend bool operator==(const Matrix &, const Matrix &) = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix &b);
Matrix operator-(Matrix a, const Matrix &b);
Matrix operator*(double s, Matrix a);
Matrix operator*(Matrix a, double s);

} // namespace muown
