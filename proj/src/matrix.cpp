#include "udr/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace udr {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    std::ostringstream msg;
    msg << "Matrix: " << data_.size() << " values cannot fill a " << rows_ << "x" << cols_
        << " matrix";
    throw std::invalid_argument(msg.str());
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) {
      throw std::invalid_argument("Matrix: ragged initializer list");
    }
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::column(std::span<const double> values) {
  return Matrix(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

std::vector<double> Matrix::col(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::string Matrix::shape_string() const {
  return "(" + std::to_string(rows_) + "x" + std::to_string(cols_) + ")";
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("matmul: shape mismatch " + a.shape_string() + " * " +
                                b.shape_string());
  }
  Matrix out;
  kernels::gemm(a, b, out);
  if (!out.all_finite()) {
    throw std::domain_error("matmul: non-finite entry in product " + out.shape_string());
  }
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Matrix take_rows(const Matrix& a, std::size_t begin, std::size_t count) {
  if (begin + count > a.rows()) {
    throw std::out_of_range("take_rows: range exceeds " + a.shape_string());
  }
  auto src = a.data().subspan(begin * a.cols(), count * a.cols());
  return Matrix(count, a.cols(), std::vector<double>(src.begin(), src.end()));
}

Matrix take_rows(const Matrix& a, std::span<const std::size_t> index) {
  Matrix out(index.size(), a.cols());
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= a.rows()) throw std::out_of_range("take_rows: row index out of range");
    std::copy_n(a.row(index[i]).begin(), a.cols(), out.row(i).begin());
  }
  return out;
}

Matrix vstack(const Matrix& top, const Matrix& bottom) {
  if (top.cols() != bottom.cols()) {
    throw std::invalid_argument("vstack: column mismatch " + top.shape_string() + " / " +
                                bottom.shape_string());
  }
  std::vector<double> data(top.data().begin(), top.data().end());
  data.insert(data.end(), bottom.data().begin(), bottom.data().end());
  return Matrix(top.rows() + bottom.rows(), top.cols(), std::move(data));
}

double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

namespace kernels {

void gemm(const Matrix& a, const Matrix& b, Matrix& out) {
  const std::size_t n = a.rows(), k_dim = a.cols(), m = b.cols();
  out = Matrix(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    double* __restrict o = out.row(i).data();
    const double* ai = a.row(i).data();
    for (std::size_t k = 0; k < k_dim; ++k) {
      const double s = ai[k];
      const double* __restrict bk = b.row(k).data();
      for (std::size_t j = 0; j < m; ++j) o[j] += s * bk[j];
    }
  }
}

void affine(const Matrix& a, const Matrix& w, std::span<const double> bias, Matrix& out) {
  const std::size_t n = a.rows(), in = a.cols(), od = w.rows();
  // w^T laid out (in x out) so the inner loop is a contiguous axpy.
  std::vector<double> wt(in * od);
  for (std::size_t o = 0; o < od; ++o)
    for (std::size_t k = 0; k < in; ++k) wt[k * od + o] = w(o, k);
  out = Matrix(n, od);
  for (std::size_t i = 0; i < n; ++i) {
    double* __restrict z = out.row(i).data();
    std::copy(bias.begin(), bias.end(), z);
    const double* ai = a.row(i).data();
    for (std::size_t k = 0; k < in; ++k) {
      const double s = ai[k];
      if (s == 0.0) continue;
      const double* __restrict wk = wt.data() + k * od;
      for (std::size_t o = 0; o < od; ++o) z[o] += s * wk[o];
    }
  }
}

void accumulate_outer(const Matrix& g, const Matrix& a, Matrix& out) {
  const std::size_t n = g.rows(), od = g.cols(), in = a.cols();
  for (std::size_t i = 0; i < n; ++i) {
    const double* gi = g.row(i).data();
    const double* __restrict ai = a.row(i).data();
    for (std::size_t o = 0; o < od; ++o) {
      const double s = gi[o];
      if (s == 0.0) continue;
      double* __restrict wo = out.row(o).data();
      for (std::size_t k = 0; k < in; ++k) wo[k] += s * ai[k];
    }
  }
}

}  // namespace kernels

}  // namespace udr
