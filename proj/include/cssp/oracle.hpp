#pragma once

#include <cstdint>
#include <vector>

#include "cssp/linalg.hpp"
#include "cssp/rng.hpp"

namespace cssp {

// Brute-force references. Slow on purpose; they share nothing with the
// samplers beyond the projection primitive they are meant to score.

struct SubsetSearchResult {
  std::vector<Index> best;
  /// ||A - (C C^+ A)_k||_F for the best subset.
  double best_error = 0.0;
  std::uint64_t examined = 0;
};

/// Number of c-subsets of n items, saturating at UINT64_MAX.
std::uint64_t binomial(std::uint64_t n, std::uint64_t c);

/// Scores every c-subset of A's columns by ||A - (C C^+ A)_k||_F and returns
/// the lexicographically first minimizer. Throws ParameterError when
/// C(n, c) exceeds `limit`.
SubsetSearchResult exhaustive_best_subset(const Matrix& A, Index c, Index k,
                                          std::uint64_t limit = 1'000'000);

/// True iff sigma_i(X - Y) >= sigma_{r+i}(X) - tol for every i, where missing
/// singular values count as zero.
bool lemma1_holds(const Matrix& X, const Matrix& Y, Index r, double tol = 1e-8);

/// Draws Y = G1 * G2 with G1 (m x r), G2 (r x n) standard Gaussian and checks
/// lemma1_holds(X, Y, r). r = 0 compares X with itself.
bool lemma1_check(const Matrix& X, Index r, RngStream& rng, double tol = 1e-8);

}  // namespace cssp
