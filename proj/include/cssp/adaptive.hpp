#pragma once

#include <vector>

#include "cssp/linalg.hpp"
#include "cssp/rng.hpp"
#include "cssp/samplers.hpp"

namespace cssp {

/// Residual handed to the sampler between rounds.
enum class ResidualMode {
  /// E^l = A - (C C^+ A)_{l k}: rank-truncated projection.
  TruncatedRank,
  /// E^l = A - C C^+ A: full projection.
  FullProjection,
  /// Every round samples from A itself.
  None,
};

struct AdaptiveConfig {
  Index k = 5;
  Index rounds = 1;
  Index columns_per_round = 10;
  /// Optional per-round column counts; when non-empty it must have `rounds`
  /// entries and overrides columns_per_round.
  std::vector<Index> schedule;
  SamplerSpec sampler;
  ResidualMode mode = ResidualMode::TruncatedRank;
  /// When non-empty, used verbatim as the round-1 selection instead of
  /// invoking the sampler.
  std::vector<Index> initial_columns;
  double rank_tol = kDefaultRankTol;

  Index columns_in_round(Index round) const;
  /// Data-independent checks.
  void validate() const;
  /// Checks against A: k < rank(A) and rounds * k <= rank(A).
  void validate(Index rank_of_a) const;
};

struct RoundTrace {
  Index round = 0;
  /// Newly added columns this round.
  std::vector<Index> selected;
  Index requested = 0;
  /// Draws that hit a column already in S and were dropped.
  Index collisions = 0;
  /// Rank parameter passed to the sampler (k, or less for a low-rank residual).
  Index sampler_rank = 0;
  bool sampled = false;
  /// NearOptimal stage 2 found nothing left to sample.
  bool residual_exhausted = false;
  Index total_columns = 0;
  /// ||E^l||_F^2 for the driver's residual mode.
  double residual_norm_sq = 0.0;
  /// ||A - C C^+ A||_F^2.
  double projection_error_sq = 0.0;
  /// ||A - (C C^+ A)_{l k}||_F^2.
  double rank_lk_error_sq = 0.0;
  /// ||A - (C C^+ A)_k||_F^2.
  double rank_k_error_sq = 0.0;
  /// ||A - (C C^+ A)_k||_F / ||A - A_k||_F.
  double error_ratio = 0.0;
  double wall_seconds = 0.0;
};

struct AdaptiveResult {
  ColumnSet columns;
  std::vector<RoundTrace> traces;
  /// A - C C^+ A vanished; later rounds did not sample.
  bool exact_capture = false;
  /// Round after which exact capture was detected (0 if never).
  Index capture_round = 0;

  /// ||A - (C C^+ A)_{t k}||_F^2 after the last round.
  double final_error_sq() const { return traces.empty() ? 0.0 : traces.back().rank_lk_error_sq; }
};

/// Rank-truncated adaptive sampling: requires cfg.mode == TruncatedRank.
AdaptiveResult adaptive_select(const Matrix& A, const AdaptiveConfig& cfg, RngStream& rng);

/// Full-projection adaptive sampling: requires cfg.mode == FullProjection.
AdaptiveResult dv06_adaptive_select(const Matrix& A, const AdaptiveConfig& cfg, RngStream& rng);

/// Runs whichever residual mode cfg names.
AdaptiveResult run_adaptive(const Matrix& A, const AdaptiveConfig& cfg, RngStream& rng);

/// One sampler call for total_c columns of A. total_c >= n selects every
/// column.
Selection continued_select(const Matrix& A, Index k, Index total_c, const SamplerSpec& sampler,
                           RngStream& rng);

struct BoostConfig {
  double delta = 0.5;
  /// ceil(log2(1/delta)), at least 1.
  Index repeats() const;
};

/// Best of boost.repeats() adaptive runs, ranked by final_error_sq().
/// Repeat 0 uses rng itself; repeat i > 0 uses rng.derive(i).
AdaptiveResult boost_best_of(const Matrix& A, const AdaptiveConfig& cfg, const BoostConfig& boost,
                             RngStream& rng);

/// Expected-error bound after t rounds, in squared-norm units:
///   (1+eps) ||A - A_{tk}||^2 + eps * sum_{i=1}^{t-1} (1+eps)^{t-i} ||A - A_{ik}||^2.
/// sigma is the spectrum of A (entries past its length count as zero).
double theorem1_bound(const Vector& sigma, Index k, Index t, double epsilon);

}  // namespace cssp
