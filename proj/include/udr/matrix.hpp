#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace udr {

/// Dense row-major matrix of doubles.
///
/// Samples are stored one observation per row; layer weights are stored
/// (fan_out x fan_in) so that row i of a weight matrix feeds output unit i.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix column(std::span<const double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double> col(std::size_t c) const;

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool all_finite() const;
  std::string shape_string() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// a * b. Throws std::invalid_argument on a shape mismatch and
/// std::domain_error if the product overflows to a non-finite value.
Matrix matmul(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);

/// Rows [begin, begin + count) of `a`, or the rows listed in `index`.
Matrix take_rows(const Matrix& a, std::size_t begin, std::size_t count);
Matrix take_rows(const Matrix& a, std::span<const std::size_t> index);

/// Stack `top` above `bottom`; column counts must agree.
Matrix vstack(const Matrix& top, const Matrix& bottom);

/// Frobenius norm.
double frobenius_norm(const Matrix& a);

namespace kernels {

// Unchecked kernels used by the training loops. Shapes are the caller's
// responsibility; results are written into `out`, which is resized.

// out = a * b
void gemm(const Matrix& a, const Matrix& b, Matrix& out);
// out = a * w^T + bias (broadcast over rows); w is (out_dim x in_dim)
void affine(const Matrix& a, const Matrix& w, std::span<const double> bias, Matrix& out);
// out += g^T * a, with g (n x out_dim) and a (n x in_dim)
void accumulate_outer(const Matrix& g, const Matrix& a, Matrix& out);

}  // namespace kernels

}  // namespace udr
