#pragma once

#include <cstddef>
#include <vector>

namespace footrank {

/// Dense row-major matrix. Rating systems here stay below a few hundred
/// unknowns, so a direct dense factorization is all that is needed.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  double& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Solves A x = b by LU factorization with partial pivoting. Throws Error if
/// the matrix is numerically singular.
std::vector<double> lu_solve(Matrix a, std::vector<double> b);

/// Max-norm residual ||A x - b||_inf.
double residual_inf_norm(const Matrix& a, const std::vector<double>& x,
                         const std::vector<double>& b);

}  // namespace footrank
