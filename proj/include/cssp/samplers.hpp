#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cssp/linalg.hpp"
#include "cssp/rng.hpp"

namespace cssp {

enum class SamplerKind { AdditiveError, LeverageScore, DualSetDeterministic, NearOptimal };

std::string to_string(SamplerKind kind);

/// Which column-selection algorithm to run, with its kind-specific knobs.
struct SamplerSpec {
  SamplerKind kind = SamplerKind::NearOptimal;
  /// Columns taken by the deterministic dual-set stage of NearOptimal.
  /// Unset means the default split (see near_optimal_stage_split).
  std::optional<Index> dual_set_columns;

  static SamplerSpec additive_error() { return {SamplerKind::AdditiveError, std::nullopt}; }
  static SamplerSpec leverage_score() { return {SamplerKind::LeverageScore, std::nullopt}; }
  static SamplerSpec dual_set() { return {SamplerKind::DualSetDeterministic, std::nullopt}; }
  static SamplerSpec near_optimal(std::optional<Index> r = std::nullopt) {
    return {SamplerKind::NearOptimal, r};
  }

  /// Checks the parameters that do not depend on the data matrix.
  void validate(Index k, Index c) const;
  /// True when the sampler uses randomness.
  bool randomized() const { return kind != SamplerKind::DualSetDeterministic; }
};

/// Output of one sampler invocation.
struct Selection {
  /// Distinct column indices, in order of first draw.
  std::vector<Index> indices;
  /// Columns requested (i.i.d. draws may collapse to fewer distinct ones).
  Index requested = 0;
  /// Columns chosen by a deterministic stage (NearOptimal stage 1, DualSet).
  Index deterministic_count = 0;
  /// Rank parameter actually used (0 for samplers that ignore k).
  Index rank_used = 0;
  /// NearOptimal only: the stage-2 residual was numerically zero, so only
  /// the deterministic columns were returned.
  bool residual_exhausted = false;
};

/// How the rank parameter is checked against the input's numerical rank.
enum class RankPolicy {
  /// k < rank(A), as for a standalone relative-error sampler.
  Strict,
  /// 1 <= k, clamped to rank(A). Used by the adaptive drivers, whose
  /// residuals may legitimately have rank exactly k or less.
  ClampToRank,
};

/// p_i = ||a_i||^2 / ||A||_F^2. Throws DegenerateInputError for a zero matrix.
std::vector<double> column_norm_distribution(const Matrix& A);

/// p_i = ||(V_k)_{i,:}||^2 / k.
std::vector<double> leverage_distribution(const Matrix& A, Index k,
                                          RankPolicy policy = RankPolicy::Strict);
/// Same, reusing a precomputed SVD of A; also returns the rank used.
std::pair<std::vector<double>, Index> leverage_distribution(const Matrix& A, const SvdFactors& f,
                                                            Index k, RankPolicy policy);

/// c i.i.d. draws from p, duplicates collapsed, order of first draw kept.
std::vector<Index> draw_distinct(std::span<const double> p, Index c, RngStream& rng);

Selection additive_error_sample(const Matrix& A, Index c, RngStream& rng);

Selection leverage_score_sample(const Matrix& A, Index k, Index c, RngStream& rng,
                                RankPolicy policy = RankPolicy::Strict);

/// Split (r deterministic, s = c - r random) used by NearOptimal.
struct StageSplit {
  Index deterministic;
  Index random;
};
StageSplit near_optimal_stage_split(Index k, Index c, Index n, std::optional<Index> requested);

Selection near_optimal_select(const Matrix& A, Index k, Index c, RngStream& rng,
                              std::optional<Index> dual_set_columns = std::nullopt,
                              RankPolicy policy = RankPolicy::Strict);

/// Deterministic dual-set selection of c columns from (V_k, (A - A_k)^T).
Selection dual_set_select(const Matrix& A, Index k, Index c,
                          RankPolicy policy = RankPolicy::Strict);

/// Dispatch on spec.kind.
Selection sample_columns(const SamplerSpec& spec, const Matrix& A, Index k, Index c,
                         RngStream& rng, RankPolicy policy = RankPolicy::Strict);

// ---------------------------------------------------------------------------
// Dual-set spectral-Frobenius sparsification.
//
// Given the rows v_i of V (n x k, V^T V = I_k) and rows x_i of X (n x l),
// picks at most r weighted indices so that
//   lambda_k(sum s_i v_i v_i^T) >= (1 - sqrt(k/r))^2
//   sum s_i ||x_i||^2          <= ||X||_F^2.
// The lower side is driven by the barrier potential
//   phi(L, B) = sum_j 1 / (lambda_j(B) - L)
// with L_tau = tau - sqrt(r k); the upper side by the Frobenius budget.
// ---------------------------------------------------------------------------

/// Running state of the sparsifier after tau steps.
struct DualSetState {
  Matrix gram;                  ///< B_tau, k x k, symmetric PSD
  double barrier = 0.0;         ///< L_tau
  std::vector<double> weights;  ///< unscaled accumulated t per index
  Index step = 0;               ///< tau
};

class DualSetSparsifier {
 public:
  /// x_sq_norms[i] = ||x_i||^2. tie_norms (optional, length n) orders
  /// indices whose test values tie; defaults to x_sq_norms.
  DualSetSparsifier(const Matrix& V, std::vector<double> x_sq_norms, Index r,
                    std::vector<double> tie_norms = {});

  bool done() const { return state_.step >= r_; }
  /// Runs one step; returns the chosen index. Throws InvariantViolation when
  /// no index satisfies the step inequality.
  Index step();
  void run() {
    while (!done()) step();
  }

  const DualSetState& state() const { return state_; }
  /// Smallest eigenvalue of the current B_tau.
  double min_eigenvalue() const;
  /// Indices chosen so far, one per step (may repeat).
  const std::vector<Index>& picks() const { return picks_; }
  /// Final weights s_i = (1 - sqrt(k/r)) / r * (accumulated t_i).
  std::vector<double> scaled_weights() const;

 private:
  Matrix V_;
  std::vector<double> x_sq_;
  std::vector<double> tie_;
  double x_total_ = 0.0;
  Index r_;
  Index k_;
  DualSetState state_;
  std::vector<Index> picks_;
  std::vector<bool> chosen_;
};

struct DualSetResult {
  std::vector<double> weights;  ///< length n, at most r nonzero
  std::vector<Index> picks;     ///< chosen index per step
  /// Distinct picked indices in order of first pick.
  std::vector<Index> support() const;
};

/// Runs the sparsifier to completion. Requires k < r < n.
DualSetResult dual_set_sparsify(const Matrix& V, const Matrix& X, Index r,
                                std::span<const double> tie_norms = {});

}  // namespace cssp
