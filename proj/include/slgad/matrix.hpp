#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace slgad {

// Dense row-major matrix of doubles. Deliberately small: the model only needs
// row access, element access and a handful of products.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> init);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  void fill(double v);
  bool all_finite() const;
  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  Matrix transposed() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

std::string shape_string(const Matrix& m);

// a * b. Skips zero entries of `a`, which keeps sparse bag-of-words features cheap.
Matrix matmul(const Matrix& a, const Matrix& b);

// x (as a row vector) * m.
std::vector<double> vec_matmul(std::span<const double> x, const Matrix& m);

// m * x (x as a column vector).
std::vector<double> matvec(const Matrix& m, std::span<const double> x);

double dot(std::span<const double> a, std::span<const double> b);

double squared_distance(std::span<const double> a, std::span<const double> b);

// y += scale * x
void axpy(double scale, std::span<const double> x, std::span<double> y);

// m += scale * (u outer v)
void add_outer(Matrix& m, double scale, std::span<const double> u, std::span<const double> v);

void require_shape(const Matrix& m, std::size_t rows, std::size_t cols, const char* what);

}  // namespace slgad
