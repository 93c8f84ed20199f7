#include "cssp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cssp/errors.hpp"

namespace cssp {

namespace {

Index count_above(const Vector& s, double rank_tol) {
  if (s.size() == 0 || !(s(0) > 0.0)) return 0;
  const double cutoff = rank_tol * s(0);
  Index r = 0;
  while (r < s.size() && s(r) > cutoff) ++r;
  return r;
}

}  // namespace

void require_finite(const Matrix& A, const char* what) {
  if (A.rows() < 1 || A.cols() < 1) {
    throw ParameterError(std::string(what) + " must have at least one row and one column");
  }
  if (!A.allFinite()) {
    throw ParameterError(std::string(what) + " contains non-finite entries");
  }
}

Matrix SvdFactors::reconstruct() const {
  return U * sigma.asDiagonal() * V.transpose();
}

SvdFactors svd(const Matrix& A, double rank_tol) {
  require_finite(A, "svd input");
  if (rank_tol < 0.0) throw ParameterError("rank_tol must be non-negative");

  Eigen::BDCSVD<Matrix> dec(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (dec.info() != Eigen::Success) {
    throw ConvergenceError("SVD failed to converge on a " + std::to_string(A.rows()) + "x" +
                           std::to_string(A.cols()) + " matrix");
  }
  const Vector& s = dec.singularValues();
  const Index r = count_above(s, rank_tol);

  SvdFactors f;
  f.U = dec.matrixU().leftCols(r);
  f.sigma = s.head(r);
  f.V = dec.matrixV().leftCols(r);
  return f;
}

Vector singular_values(const Matrix& A) {
  require_finite(A, "singular_values input");
  Eigen::BDCSVD<Matrix> dec(A);
  if (dec.info() != Eigen::Success) throw ConvergenceError("SVD failed to converge");
  return dec.singularValues();
}

Matrix best_rank_k(const SvdFactors& f, Index k) {
  if (k < 1) throw ParameterError("best_rank_k requires k >= 1");
  const Index r = std::min(k, f.rank());
  return f.U.leftCols(r) * f.sigma.head(r).asDiagonal() * f.V.leftCols(r).transpose();
}

Matrix best_rank_k(const Matrix& A, Index k) {
  if (k < 1) throw ParameterError("best_rank_k requires k >= 1");
  return best_rank_k(svd(A), k);
}

Matrix pseudoinverse(const Matrix& A, double rank_tol) {
  const SvdFactors f = svd(A, rank_tol);
  return f.V * f.sigma.cwiseInverse().asDiagonal() * f.U.transpose();
}

Matrix orthonormal_basis(const Matrix& C, double rank_tol) {
  if (C.cols() == 0) return Matrix(C.rows(), 0);
  return svd(C, rank_tol).U;
}

double frobenius_tail(const Vector& sigma, Index k) {
  if (k < 0) throw ParameterError("frobenius_tail requires k >= 0");
  double sum = 0.0;
  // Smallest first, so the tail is not swamped by rounding.
  for (Index i = sigma.size() - 1; i >= k; --i) sum += sigma(i) * sigma(i);
  return sum;
}

Matrix gather_columns(const Matrix& A, std::span<const Index> indices) {
  Matrix C(A.rows(), static_cast<Index>(indices.size()));
  for (std::size_t j = 0; j < indices.size(); ++j) {
    const Index idx = indices[j];
    if (idx < 0 || idx >= A.cols()) {
      throw ParameterError("column index " + std::to_string(idx) + " out of range");
    }
    C.col(static_cast<Index>(j)) = A.col(idx);
  }
  return C;
}

ColumnSpaceProjection::ColumnSpaceProjection(const Matrix& A, const Matrix& C, double rank_tol) {
  require_finite(A, "A");
  if (C.rows() != A.rows()) {
    throw ParameterError("C must have the same number of rows as A");
  }
  if (C.cols() > 0 && !C.allFinite()) throw ParameterError("C contains non-finite entries");

  basis_ = orthonormal_basis(C, rank_tol);
  if (basis_.cols() == 0) {
    residual_ = A;
  } else {
    const Matrix coeffs = basis_.transpose() * A;
    // Coefficients are kept at full numerical rank (zero tolerance beyond
    // exact zeros) so truncation below rank is exact.
    coeff_ = svd(coeffs, 0.0);
    residual_ = A - basis_ * coeffs;
  }
  full_error_sq_ = residual_.squaredNorm();
}

double ColumnSpaceProjection::error_sq(Index j) const {
  if (j < 0) throw ParameterError("rank must be non-negative");
  return full_error_sq_ + frobenius_tail(coeff_.sigma, j);
}

Matrix ColumnSpaceProjection::project(Index j) const {
  if (j < 1) throw ParameterError("projection rank must be >= 1");
  if (basis_.cols() == 0) return Matrix::Zero(residual_.rows(), residual_.cols());
  return basis_ * best_rank_k(coeff_, j);
}

Matrix ColumnSpaceProjection::project_full() const {
  if (basis_.cols() == 0) return Matrix::Zero(residual_.rows(), residual_.cols());
  return basis_ * coeff_.reconstruct();
}

Matrix rank_k_column_projection(const Matrix& A, const Matrix& C, Index k, double rank_tol) {
  if (k < 1) throw ParameterError("rank_k_column_projection requires k >= 1");
  return ColumnSpaceProjection(A, C, rank_tol).project(k);
}

double relative_error_ratio(const Matrix& A, const Matrix& C, Index k) {
  if (k < 1) throw ParameterError("relative_error_ratio requires k >= 1");
  const double denom_sq = frobenius_tail(svd(A).sigma, k);
  if (!(denom_sq > 0.0)) {
    throw DegenerateInputError("exact-rank denominator: ||A - A_k||_F = 0 for k = " +
                               std::to_string(k));
  }
  const double num_sq = ColumnSpaceProjection(A, C).error_sq(k);
  return std::sqrt(num_sq / denom_sq);
}

bool ColumnSet::add(Index idx, int round) {
  if (idx < 0 || idx >= n_cols_) {
    throw ParameterError("column index " + std::to_string(idx) + " outside [0, " +
                         std::to_string(n_cols_) + ")");
  }
  if (!round_of_.empty() && round < round_of_.back()) {
    throw ParameterError("ColumnSet rounds must be non-decreasing");
  }
  if (member_.empty()) member_.assign(static_cast<std::size_t>(n_cols_), false);
  if (member_[static_cast<std::size_t>(idx)]) return false;
  member_[static_cast<std::size_t>(idx)] = true;
  indices_.push_back(idx);
  round_of_.push_back(round);
  return true;
}

bool ColumnSet::contains(Index idx) const {
  if (idx < 0 || idx >= n_cols_ || member_.empty()) return false;
  return member_[static_cast<std::size_t>(idx)];
}

}  // namespace cssp
