#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace cssp {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Singular values at or below rank_tol * sigma_1 are treated as zero.
inline constexpr double kDefaultRankTol = 1e-12;

/// Throws ParameterError unless A is non-empty and every entry is finite.
void require_finite(const Matrix& A, const char* what = "matrix");

/// Economy SVD truncated to numerical rank.
///
/// U is m x rank, V is n x rank, sigma is strictly positive and
/// non-increasing. A zero matrix yields rank 0 and empty factors.
struct SvdFactors {
  Matrix U;
  Vector sigma;
  Matrix V;

  Index rank() const { return sigma.size(); }
  Matrix reconstruct() const;
};

SvdFactors svd(const Matrix& A, double rank_tol = kDefaultRankTol);

/// All min(m, n) singular values, including zeros, non-increasing.
Vector singular_values(const Matrix& A);

/// A_k = sum_{i <= min(k, rank)} sigma_i u_i v_i^T.
Matrix best_rank_k(const Matrix& A, Index k);
Matrix best_rank_k(const SvdFactors& f, Index k);

/// Moore-Penrose pseudoinverse V Sigma^-1 U^T over the numerical rank.
Matrix pseudoinverse(const Matrix& A, double rank_tol = kDefaultRankTol);

/// Column-orthonormal basis of range(C), rank-revealing at rank_tol.
/// Returns an m x 0 matrix when C is numerically zero.
Matrix orthonormal_basis(const Matrix& C, double rank_tol = kDefaultRankTol);

/// sum_{i > k} sigma_i^2 (1-based i); zero when k >= sigma.size().
double frobenius_tail(const Vector& sigma, Index k);

/// Columns of A at the given indices, in order.
Matrix gather_columns(const Matrix& A, std::span<const Index> indices);

/// Best rank-k approximations of A inside range(C).
///
/// Orthonormalizes C once (Q), factors Q^T A once, and answers
/// (C C^+ A)_j for any j. Errors are kept squared; by matrix Pythagoras
///   ||A - Q Psi||_F^2 = ||A - Q Q^T A||_F^2 + ||Q^T A - Psi||_F^2,
/// so the rank-j error is the full-projection error plus the tail of
/// sigma(Q^T A) beyond j.
class ColumnSpaceProjection {
 public:
  ColumnSpaceProjection(const Matrix& A, const Matrix& C, double rank_tol = kDefaultRankTol);

  /// rank(C); zero when C is numerically zero.
  Index basis_rank() const { return basis_.cols(); }
  const Matrix& basis() const { return basis_; }

  /// ||A - C C^+ A||_F^2.
  double full_error_sq() const { return full_error_sq_; }
  /// ||A - (C C^+ A)_j||_F^2.
  double error_sq(Index j) const;

  /// (C C^+ A)_j as a dense m x n matrix.
  Matrix project(Index j) const;
  /// C C^+ A.
  Matrix project_full() const;
  /// A - C C^+ A, computed once at construction.
  const Matrix& full_residual() const { return residual_; }

 private:
  Matrix basis_;
  SvdFactors coeff_;  // SVD of Q^T A
  Matrix residual_;
  double full_error_sq_ = 0.0;
};

/// (C C^+ A)_k computed as Q (Q^T A)_k.
Matrix rank_k_column_projection(const Matrix& A, const Matrix& C, Index k,
                                double rank_tol = kDefaultRankTol);

/// ||A - (C C^+ A)_k||_F / ||A - A_k||_F. Throws DegenerateInputError when
/// rank(A) <= k.
double relative_error_ratio(const Matrix& A, const Matrix& C, Index k);

/// Ordered, duplicate-free list of selected column indices, each tagged
/// with the (1-based) round that chose it.
class ColumnSet {
 public:
  ColumnSet() = default;
  explicit ColumnSet(Index n_cols) : n_cols_(n_cols) {}

  /// Appends idx unless already present. Returns false on a duplicate.
  /// Throws ParameterError when idx is out of range or round decreases.
  bool add(Index idx, int round);
  bool contains(Index idx) const;

  const std::vector<Index>& indices() const { return indices_; }
  const std::vector<int>& round_of() const { return round_of_; }
  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  Index column_count() const { return n_cols_; }

  friend bool operator==(const ColumnSet&, const ColumnSet&) = default;

 private:
  Index n_cols_ = 0;
  std::vector<Index> indices_;
  std::vector<int> round_of_;
  std::vector<bool> member_;
};

}  // namespace cssp
