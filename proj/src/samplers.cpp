#include "cssp/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cssp/errors.hpp"

namespace cssp {

namespace {

// Below this relative Frobenius norm the stage-2 residual is treated as zero.
constexpr double kResidualFloor = 1e-10;

Index effective_rank(const SvdFactors& f, Index k, RankPolicy policy, const char* who) {
  if (k < 1) throw ParameterError(std::string(who) + ": k must be >= 1");
  if (f.rank() == 0) throw DegenerateInputError(std::string(who) + ": input matrix is zero");
  if (policy == RankPolicy::Strict) {
    if (k >= f.rank()) {
      throw ParameterError(std::string(who) + ": k = " + std::to_string(k) +
                           " must be below rank(A) = " + std::to_string(f.rank()));
    }
    return k;
  }
  return std::min(k, f.rank());
}

std::vector<double> column_sq_norms(const Matrix& A) {
  std::vector<double> out(static_cast<std::size_t>(A.cols()));
  for (Index j = 0; j < A.cols(); ++j) out[static_cast<std::size_t>(j)] = A.col(j).squaredNorm();
  return out;
}

// Deterministic dual-set stage on (V_k, rows of (A - A_k)^T); ties go to the
// unselected column of largest norm in A.
std::vector<Index> dual_set_stage(const Matrix& A, const SvdFactors& f, Index k, Index r) {
  const Matrix Vk = f.V.leftCols(k);
  const Matrix tail = A - f.U.leftCols(k) * f.sigma.head(k).asDiagonal() * Vk.transpose();
  DualSetSparsifier sparsifier(Vk, column_sq_norms(tail), r, column_sq_norms(A));
  sparsifier.run();
  return DualSetResult{{}, sparsifier.picks()}.support();
}

}  // namespace

std::string to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::AdditiveError: return "AE";
    case SamplerKind::LeverageScore: return "LVG";
    case SamplerKind::DualSetDeterministic: return "DS";
    case SamplerKind::NearOptimal: return "Nopt";
  }
  return "?";
}

void SamplerSpec::validate(Index k, Index c) const {
  if (k < 1) throw ParameterError("k must be >= 1");
  if (c < 1) throw ParameterError("c must be >= 1");
  switch (kind) {
    case SamplerKind::AdditiveError:
    case SamplerKind::LeverageScore:
      break;
    case SamplerKind::DualSetDeterministic:
      if (c <= k) throw ParameterError("dual-set selection needs c > k");
      break;
    case SamplerKind::NearOptimal:
      if (c <= k) throw ParameterError("near-optimal selection needs c > k");
      if (dual_set_columns && !(*dual_set_columns > k && *dual_set_columns < c)) {
        throw ParameterError("near-optimal stage split needs k < r < c");
      }
      break;
  }
}

std::vector<double> column_norm_distribution(const Matrix& A) {
  require_finite(A, "A");
  std::vector<double> p = column_sq_norms(A);
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  if (!(total > 0.0)) throw DegenerateInputError("degenerate distribution: A is all zero");
  for (double& x : p) x /= total;
  return p;
}

std::vector<double> leverage_distribution(const Matrix& A, Index k, RankPolicy policy) {
  return leverage_distribution(A, svd(A), k, policy).first;
}

std::pair<std::vector<double>, Index> leverage_distribution(const Matrix& A, const SvdFactors& f,
                                                            Index k, RankPolicy policy) {
  const Index keff = effective_rank(f, k, policy, "leverage_score_sample");
  std::vector<double> p(static_cast<std::size_t>(A.cols()));
  for (Index i = 0; i < A.cols(); ++i) {
    p[static_cast<std::size_t>(i)] = f.V.row(i).head(keff).squaredNorm();
  }
  // Row norms of V_k sum to k; dividing by the computed sum keeps the
  // distribution normalized to rounding.
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  for (double& x : p) x /= total;
  return {p, keff};
}

std::vector<Index> draw_distinct(std::span<const double> p, Index c, RngStream& rng) {
  if (c < 1) throw ParameterError("number of draws must be >= 1");
  std::vector<double> cumulative(p.size());
  std::partial_sum(p.begin(), p.end(), cumulative.begin());
  const double total = cumulative.empty() ? 0.0 : cumulative.back();
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw DegenerateInputError("degenerate distribution: no positive probability");
  }

  std::vector<Index> out;
  std::vector<bool> seen(p.size(), false);
  for (Index d = 0; d < c; ++d) {
    const double u = rng.uniform() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) {
      // u rounded up to total; take the last index with positive mass
      it = std::prev(cumulative.end());
      while (it != cumulative.begin() && p[static_cast<std::size_t>(it - cumulative.begin())] <= 0.0)
        --it;
    }
    const auto idx = static_cast<std::size_t>(it - cumulative.begin());
    if (!seen[idx]) {
      seen[idx] = true;
      out.push_back(static_cast<Index>(idx));
    }
  }
  return out;
}

Selection additive_error_sample(const Matrix& A, Index c, RngStream& rng) {
  const std::vector<double> p = column_norm_distribution(A);
  Selection sel;
  sel.requested = c;
  sel.indices = draw_distinct(p, c, rng);
  return sel;
}

Selection leverage_score_sample(const Matrix& A, Index k, Index c, RngStream& rng,
                                RankPolicy policy) {
  require_finite(A, "A");
  const auto [p, keff] = leverage_distribution(A, svd(A), k, policy);
  Selection sel;
  sel.requested = c;
  sel.rank_used = keff;
  sel.indices = draw_distinct(p, c, rng);
  return sel;
}

StageSplit near_optimal_stage_split(Index k, Index c, Index n, std::optional<Index> requested) {
  if (k < 1) throw ParameterError("k must be >= 1");
  if (c <= k) throw ParameterError("near-optimal selection needs c > k");
  Index r = 0;
  if (requested) {
    r = *requested;
    if (r <= k) throw ParameterError("near-optimal stage split needs r > k");
    if (c - r <= 0) throw ParameterError("near-optimal stage split needs c - r > 0");
  } else if (c == k + 1) {
    r = c;
  } else {
    r = std::min(std::max(k + 1, std::min(2 * k, c - k)), c - 1);
  }
  r = std::min(r, n - 1);
  if (r <= k) {
    throw ParameterError("near-optimal selection needs more than k + 1 columns in A");
  }
  return {r, c - r};
}

Selection near_optimal_select(const Matrix& A, Index k, Index c, RngStream& rng,
                              std::optional<Index> dual_set_columns, RankPolicy policy) {
  require_finite(A, "A");
  const SvdFactors f = svd(A);
  const Index keff = effective_rank(f, k, policy, "near_optimal_select");
  const StageSplit split = near_optimal_stage_split(keff, c, A.cols(), dual_set_columns);

  Selection sel;
  sel.requested = c;
  sel.rank_used = keff;
  sel.indices = dual_set_stage(A, f, keff, split.deterministic);
  sel.deterministic_count = static_cast<Index>(sel.indices.size());
  if (split.random == 0) return sel;

  const Matrix Q = orthonormal_basis(gather_columns(A, sel.indices));
  const Matrix B = A - Q * (Q.transpose() * A);
  if (B.norm() <= kResidualFloor * A.norm()) {
    sel.residual_exhausted = true;
    return sel;
  }
  for (Index idx : draw_distinct(column_norm_distribution(B), split.random, rng)) {
    if (std::find(sel.indices.begin(), sel.indices.end(), idx) == sel.indices.end()) {
      sel.indices.push_back(idx);
    }
  }
  return sel;
}

Selection dual_set_select(const Matrix& A, Index k, Index c, RankPolicy policy) {
  require_finite(A, "A");
  const SvdFactors f = svd(A);
  const Index keff = effective_rank(f, k, policy, "dual_set_select");
  if (c <= keff) throw ParameterError("dual-set selection needs c > k");
  if (c >= A.cols()) throw ParameterError("dual-set selection needs c < n");
  Selection sel;
  sel.requested = c;
  sel.rank_used = keff;
  sel.indices = dual_set_stage(A, f, keff, c);
  sel.deterministic_count = static_cast<Index>(sel.indices.size());
  return sel;
}

Selection sample_columns(const SamplerSpec& spec, const Matrix& A, Index k, Index c,
                         RngStream& rng, RankPolicy policy) {
  spec.validate(k, c);
  switch (spec.kind) {
    case SamplerKind::AdditiveError:
      return additive_error_sample(A, c, rng);
    case SamplerKind::LeverageScore:
      return leverage_score_sample(A, k, c, rng, policy);
    case SamplerKind::DualSetDeterministic:
      return dual_set_select(A, k, c, policy);
    case SamplerKind::NearOptimal:
      return near_optimal_select(A, k, c, rng, spec.dual_set_columns, policy);
  }
  throw ParameterError("unknown sampler kind");
}

}  // namespace cssp
