#include "cssp/adaptive.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "cssp/errors.hpp"

namespace cssp {

namespace {

// A - C C^+ A below this fraction of ||A||_F counts as exact capture.
constexpr double kCaptureTol = 1e-8;

AdaptiveResult drive(const Matrix& A, const AdaptiveConfig& cfg, RngStream& rng) {
  cfg.validate();
  require_finite(A, "A");
  const SvdFactors fa = svd(A, cfg.rank_tol);
  cfg.validate(fa.rank());

  const double tail_k_sq = frobenius_tail(fa.sigma, cfg.k);
  const double a_sq = A.squaredNorm();
  const double capture_floor_sq = kCaptureTol * kCaptureTol * a_sq;

  AdaptiveResult result;
  result.columns = ColumnSet(A.cols());
  Matrix residual = A;

  for (Index round = 1; round <= cfg.rounds; ++round) {
    const auto start = std::chrono::steady_clock::now();
    RoundTrace tr;
    tr.round = round;

    if (!result.exact_capture) {
      const Index c = cfg.columns_in_round(round);
      std::vector<Index> drawn;
      if (round == 1 && !cfg.initial_columns.empty()) {
        drawn = cfg.initial_columns;
        tr.requested = static_cast<Index>(drawn.size());
      } else {
        Selection sel = sample_columns(cfg.sampler, residual, cfg.k, c, rng, RankPolicy::ClampToRank);
        tr.requested = c;
        tr.sampler_rank = sel.rank_used;
        tr.residual_exhausted = sel.residual_exhausted;
        drawn = std::move(sel.indices);
      }
      for (Index idx : drawn) {
        if (result.columns.add(idx, static_cast<int>(round))) {
          tr.selected.push_back(idx);
        } else {
          ++tr.collisions;
        }
      }
      tr.sampled = true;
    }

    const ColumnSpaceProjection proj(A, gather_columns(A, result.columns.indices()), cfg.rank_tol);
    const Index lk = round * cfg.k;
    tr.total_columns = static_cast<Index>(result.columns.size());
    tr.projection_error_sq = proj.full_error_sq();
    tr.rank_lk_error_sq = proj.error_sq(lk);
    tr.rank_k_error_sq = proj.error_sq(cfg.k);
    tr.error_ratio = std::sqrt(tr.rank_k_error_sq / tail_k_sq);

    switch (cfg.mode) {
      case ResidualMode::TruncatedRank:
        tr.residual_norm_sq = tr.rank_lk_error_sq;
        if (round < cfg.rounds) residual = A - proj.project(lk);
        break;
      case ResidualMode::FullProjection:
        tr.residual_norm_sq = tr.projection_error_sq;
        if (round < cfg.rounds) residual = proj.full_residual();
        break;
      case ResidualMode::None:
        tr.residual_norm_sq = a_sq;
        break;
    }

    if (!result.exact_capture && tr.projection_error_sq <= capture_floor_sq) {
      result.exact_capture = true;
      result.capture_round = round;
    }
    tr.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.traces.push_back(std::move(tr));
  }
  return result;
}

}  // namespace

Index AdaptiveConfig::columns_in_round(Index round) const {
  if (schedule.empty()) return columns_per_round;
  return schedule.at(static_cast<std::size_t>(round - 1));
}

void AdaptiveConfig::validate() const {
  if (k < 1) throw ParameterError("target rank k must be >= 1");
  if (rounds < 1) throw ParameterError("number of rounds must be >= 1");
  if (!schedule.empty() && static_cast<Index>(schedule.size()) != rounds) {
    throw ParameterError("column schedule must have one entry per round");
  }
  for (Index round = 1; round <= rounds; ++round) {
    if (round == 1 && !initial_columns.empty()) continue;
    sampler.validate(k, columns_in_round(round));
  }
}

void AdaptiveConfig::validate(Index rank_of_a) const {
  if (k >= rank_of_a) {
    throw ParameterError("target rank k = " + std::to_string(k) + " must be below rank(A) = " +
                         std::to_string(rank_of_a));
  }
  if (rounds * k > rank_of_a) {
    throw ParameterError("rounds * k = " + std::to_string(rounds * k) + " exceeds rank(A) = " +
                         std::to_string(rank_of_a));
  }
}

AdaptiveResult adaptive_select(const Matrix& A, const AdaptiveConfig& cfg, RngStream& rng) {
  if (cfg.mode != ResidualMode::TruncatedRank) {
    throw ParameterError("adaptive_select needs the rank-truncated residual mode");
  }
  return drive(A, cfg, rng);
}

AdaptiveResult dv06_adaptive_select(const Matrix& A, const AdaptiveConfig& cfg, RngStream& rng) {
  if (cfg.mode != ResidualMode::FullProjection) {
    throw ParameterError("dv06_adaptive_select needs the full-projection residual mode");
  }
  return drive(A, cfg, rng);
}

AdaptiveResult run_adaptive(const Matrix& A, const AdaptiveConfig& cfg, RngStream& rng) {
  return drive(A, cfg, rng);
}

Selection continued_select(const Matrix& A, Index k, Index total_c, const SamplerSpec& sampler,
                           RngStream& rng) {
  if (total_c < 1) throw ParameterError("continued sampling needs total_c >= 1");
  require_finite(A, "A");
  if (total_c >= A.cols()) {
    Selection all;
    all.requested = total_c;
    all.indices.resize(static_cast<std::size_t>(A.cols()));
    std::iota(all.indices.begin(), all.indices.end(), Index{0});
    return all;
  }
  return sample_columns(sampler, A, k, total_c, rng, RankPolicy::Strict);
}

Index BoostConfig::repeats() const {
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("boost delta must lie in (0, 1)");
  const double r = std::ceil(std::log2(1.0 / delta) - 1e-12);
  return std::max<Index>(1, static_cast<Index>(r));
}

AdaptiveResult boost_best_of(const Matrix& A, const AdaptiveConfig& cfg, const BoostConfig& boost,
                             RngStream& rng) {
  const Index repeats = boost.repeats();
  AdaptiveResult best = run_adaptive(A, cfg, rng);
  for (Index rep = 1; rep < repeats; ++rep) {
    RngStream sub = rng.derive(static_cast<std::uint64_t>(rep));
    AdaptiveResult candidate = run_adaptive(A, cfg, sub);
    if (candidate.final_error_sq() < best.final_error_sq()) best = std::move(candidate);
  }
  return best;
}

double theorem1_bound(const Vector& sigma, Index k, Index t, double epsilon) {
  if (k < 1 || t < 1) throw ParameterError("theorem1_bound needs k >= 1 and t >= 1");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ParameterError("epsilon must lie in (0, 1)");
  for (Index i = 0; i < sigma.size(); ++i) {
    if (!(sigma(i) >= 0.0) || (i > 0 && sigma(i) > sigma(i - 1))) {
      throw ParameterError("spectrum must be non-negative and non-increasing");
    }
  }
  double bound = (1.0 + epsilon) * frobenius_tail(sigma, t * k);
  for (Index i = 1; i < t; ++i) {
    bound += epsilon * std::pow(1.0 + epsilon, static_cast<double>(t - i)) *
             frobenius_tail(sigma, i * k);
  }
  return bound;
}

}  // namespace cssp
