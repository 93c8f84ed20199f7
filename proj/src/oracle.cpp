#include "cssp/oracle.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "cssp/errors.hpp"

namespace cssp {

std::uint64_t binomial(std::uint64_t n, std::uint64_t c) {
  if (c > n) return 0;
  c = std::min(c, n - c);
  std::uint64_t result = 1;
  for (std::uint64_t i = 1; i <= c; ++i) {
    const std::uint64_t num = n - c + i;
    // result * num / i is exact at every step; guard the multiply.
    const std::uint64_t g = std::gcd(result, i);
    const std::uint64_t r = result / g;
    const std::uint64_t d = i / g;
    if (r > std::numeric_limits<std::uint64_t>::max() / num) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    result = r * (num / d);
  }
  return result;
}

SubsetSearchResult exhaustive_best_subset(const Matrix& A, Index c, Index k, std::uint64_t limit) {
  require_finite(A, "A");
  const Index n = A.cols();
  if (c < 1 || c > n) throw ParameterError("subset size must lie in [1, n]");
  if (k < 1) throw ParameterError("k must be >= 1");
  const std::uint64_t total = binomial(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(c));
  if (total > limit) {
    throw ParameterError("exhaustive search over " + std::to_string(total) +
                         " subsets exceeds the limit of " + std::to_string(limit));
  }

  SubsetSearchResult out;
  double best_sq = std::numeric_limits<double>::infinity();
  std::vector<Index> subset(static_cast<std::size_t>(c));
  std::iota(subset.begin(), subset.end(), Index{0});
  while (true) {
    const double err_sq = ColumnSpaceProjection(A, gather_columns(A, subset)).error_sq(k);
    ++out.examined;
    if (err_sq < best_sq) {
      best_sq = err_sq;
      out.best = subset;
    }
    // next combination in lexicographic order
    Index i = c - 1;
    while (i >= 0 && subset[static_cast<std::size_t>(i)] == n - c + i) --i;
    if (i < 0) break;
    ++subset[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < c; ++j) {
      subset[static_cast<std::size_t>(j)] = subset[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  out.best_error = std::sqrt(std::max(0.0, best_sq));
  return out;
}

bool lemma1_holds(const Matrix& X, const Matrix& Y, Index r, double tol) {
  if (X.rows() != Y.rows() || X.cols() != Y.cols()) {
    throw ParameterError("X and Y must have the same shape");
  }
  const Vector sx = singular_values(X);
  const Vector sd = singular_values(X - Y);
  for (Index i = 0; i < sd.size(); ++i) {
    const Index j = r + i;  // sigma_{r+i+1} in 1-based terms
    const double rhs = j < sx.size() ? sx(j) : 0.0;
    if (sd(i) < rhs - tol) return false;
  }
  return true;
}

bool lemma1_check(const Matrix& X, Index r, RngStream& rng, double tol) {
  require_finite(X, "X");
  if (r < 0 || r >= std::min(X.rows(), X.cols())) {
    throw ParameterError("lemma1_check needs 0 <= r < min(m, n)");
  }
  if (r == 0) return lemma1_holds(X, Matrix::Zero(X.rows(), X.cols()), 0, tol);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix G1(X.rows(), r);
  Matrix G2(r, X.cols());
  for (Index j = 0; j < G1.cols(); ++j)
    for (Index i = 0; i < G1.rows(); ++i) G1(i, j) = normal(rng.engine());
  for (Index j = 0; j < G2.cols(); ++j)
    for (Index i = 0; i < G2.rows(); ++i) G2(i, j) = normal(rng.engine());
  return lemma1_holds(X, G1 * G2, r, tol);
}

}  // namespace cssp
