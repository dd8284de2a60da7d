#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace heisosc {

/// Small dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), fill) {}

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
  std::span<const double> row(int i) const {
    return std::span<const double>(data_).subspan(static_cast<std::size_t>(i) * cols_, cols_);
  }
  const std::vector<double>& data() const noexcept { return data_; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

/// Determinant by LU with partial pivoting. Exactly singular pivots give 0.
double determinant(Matrix m);

/// RowNorms: det(m) / prod_i |row_i|_2, in [-1, 1] by Hadamard; blind to
/// rows that shrink as a whole. Frobenius: det(m) / |m|_F^d, which also
/// sees such rows. A zero matrix or zero row gives 0 in both modes.
enum class DetNormalization { RowNorms, Frobenius };

double normalized_determinant(const Matrix& m, DetNormalization mode = DetNormalization::RowNorms);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  ///< root-mean-square residual
};

/// Ordinary least squares y = slope*x + intercept; needs two distinct x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace heisosc
