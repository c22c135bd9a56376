#include "sta/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sta/error.hpp"

namespace sta {

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  Matrix m(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != c) throw validation_error("Matrix::from_rows: ragged rows");
    std::copy(row.begin(), row.end(), m.row(i).begin());
    ++i;
  }
  return m;
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::column(std::span<const double> values) {
  Matrix m(values.size(), 1);
  std::copy(values.begin(), values.end(), m.data());
  return m;
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

std::string Matrix::shape_string() const {
  std::ostringstream os;
  os << rows_ << "x" << cols_;
  return os.str();
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw validation_error("matmul: inner dimensions differ (" + a.shape_string() + " * " +
                           b.shape_string() + ")");
  }
  Matrix out(a.rows(), b.cols());
  const std::size_t inner = a.cols();
  const std::size_t m = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* dst = out.data() + i * m;
    const double* arow = a.data() + i * inner;
    for (std::size_t k = 0; k < inner; ++k) {
      const double s = arow[k];
      if (s == 0.0) continue;
      const double* brow = b.data() + k * m;
      for (std::size_t j = 0; j < m; ++j) dst[j] += s * brow[j];
    }
  }
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Matrix add(const Matrix& a, const Matrix& b) {
  Matrix out = a;
  add_inplace(out, b);
  return out;
}

void add_inplace(Matrix& dst, const Matrix& src, double scale) {
  if (!dst.same_shape(src)) {
    throw validation_error("add: shape mismatch (" + dst.shape_string() + " vs " +
                           src.shape_string() + ")");
  }
  double* d = dst.data();
  const double* s = src.data();
  for (std::size_t i = 0; i < dst.size(); ++i) d[i] += scale * s[i];
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) {
    throw validation_error("max_abs_diff: shape mismatch (" + a.shape_string() + " vs " +
                           b.shape_string() + ")");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  return worst;
}

double max_abs(const Matrix& a) {
  double worst = 0.0;
  for (double x : a.values()) worst = std::max(worst, std::abs(x));
  return worst;
}

Matrix slice_cols(const Matrix& a, std::size_t begin, std::size_t count) {
  if (begin + count > a.cols()) throw validation_error("slice_cols: range outside matrix");
  Matrix out(a.rows(), count);
  for (std::size_t i = 0; i < a.rows(); ++i)
    std::copy_n(a.data() + i * a.cols() + begin, count, out.data() + i * count);
  return out;
}

Matrix concat_cols(std::span<const Matrix> parts) {
  if (parts.empty()) return {};
  const std::size_t rows = parts.front().rows();
  std::size_t cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) throw validation_error("concat_cols: row counts differ");
    cols += p.cols();
  }
  Matrix out(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    double* dst = out.data() + i * cols;
    for (const auto& p : parts) {
      dst = std::copy_n(p.data() + i * p.cols(), p.cols(), dst);
    }
  }
  return out;
}

}  // namespace sta
