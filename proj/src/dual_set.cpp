#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cssp/errors.hpp"
#include "cssp/samplers.hpp"

namespace cssp {

namespace {

constexpr double kTieTol = 1e-12;

}  // namespace

DualSetSparsifier::DualSetSparsifier(const Matrix& V, std::vector<double> x_sq_norms, Index r,
                                     std::vector<double> tie_norms)
    : V_(V), x_sq_(std::move(x_sq_norms)), tie_(std::move(tie_norms)), r_(r), k_(V.cols()) {
  const auto n = static_cast<std::size_t>(V_.rows());
  if (k_ < 1) throw ParameterError("dual-set sparsification needs k >= 1");
  if (x_sq_.size() != n) throw ParameterError("V and X must have the same number of rows");
  if (r <= k_) throw ParameterError("dual-set sparsification needs r > k");
  if (tie_.empty()) tie_ = x_sq_;
  if (tie_.size() != n) throw ParameterError("tie_norms must have one entry per row of V");
  for (double x : x_sq_) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw ParameterError("invalid squared norm of x_i");
    x_total_ += x;
  }

  state_.gram = Matrix::Zero(k_, k_);
  state_.barrier = -std::sqrt(static_cast<double>(r_ * k_));
  state_.weights.assign(n, 0.0);
  chosen_.assign(n, false);
}

double DualSetSparsifier::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(state_.gram, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

Index DualSetSparsifier::step() {
  if (done()) throw ParameterError("dual-set sparsifier already finished");

  const double k = static_cast<double>(k_);
  const double r = static_cast<double>(r_);
  const double L = static_cast<double>(state_.step) - std::sqrt(r * k);
  state_.barrier = L;
  const double shifted = L + 1.0;

  Eigen::SelfAdjointEigenSolver<Matrix> eig(state_.gram);
  if (eig.info() != Eigen::Success) throw ConvergenceError("eigensolver failed on B_tau");
  const Vector& lambda = eig.eigenvalues();
  if (!(lambda(0) > shifted)) {
    throw InvariantViolation("dual-set barrier infeasible: lambda_min(B) = " +
                             std::to_string(lambda(0)) + " <= L + 1 = " + std::to_string(shifted));
  }

  const Vector inv_gap_lo = (lambda.array() - L).inverse().matrix();
  const Vector inv_gap_hi = (lambda.array() - shifted).inverse().matrix();
  const double phi_delta = inv_gap_hi.sum() - inv_gap_lo.sum();

  // Coordinates of every v_i in B's eigenbasis, squared.
  const Matrix coords_sq = (V_ * eig.eigenvectors()).array().square().matrix();
  const Vector quad1 = coords_sq * inv_gap_hi;
  const Vector quad2 = coords_sq * inv_gap_hi.cwiseAbs2();

  const double upper_scale = x_total_ > 0.0 ? (1.0 - std::sqrt(k / r)) / x_total_ : 0.0;

  Index best = -1;
  double best_gap = -std::numeric_limits<double>::infinity();
  double best_lower = 0.0;
  double best_upper = 0.0;
  for (Index i = 0; i < V_.rows(); ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const double lower = quad2(i) / phi_delta - quad1(i);
    const double upper = upper_scale * x_sq_[ui];
    const double gap = lower - upper;

    bool take = false;
    if (best < 0 || gap > best_gap + kTieTol) {
      take = true;
    } else if (gap >= best_gap - kTieTol) {
      const auto ub = static_cast<std::size_t>(best);
      if (chosen_[ui] != chosen_[ub]) {
        take = !chosen_[ui];
      } else {
        take = tie_[ui] > tie_[ub];
      }
    }
    if (take) {
      best = i;
      best_gap = gap;
      best_lower = lower;
      best_upper = upper;
    }
  }

  const double inv_t = 0.5 * (best_lower + best_upper);
  if (best_gap < -kTieTol || !(inv_t > 0.0)) {
    throw InvariantViolation("dual-set step " + std::to_string(state_.step) +
                             ": no index satisfies the two-sided step inequality");
  }
  const double t = 1.0 / inv_t;

  const auto ub = static_cast<std::size_t>(best);
  state_.gram.noalias() += t * V_.row(best).transpose() * V_.row(best);
  state_.weights[ub] += t;
  chosen_[ub] = true;
  picks_.push_back(best);
  ++state_.step;
  state_.barrier = static_cast<double>(state_.step) - std::sqrt(r * k);
  return best;
}

std::vector<double> DualSetSparsifier::scaled_weights() const {
  const double scale =
      (1.0 - std::sqrt(static_cast<double>(k_) / static_cast<double>(r_))) / static_cast<double>(r_);
  std::vector<double> w = state_.weights;
  for (double& x : w) x *= scale;
  return w;
}

std::vector<Index> DualSetResult::support() const {
  std::vector<Index> out;
  for (Index i : picks) {
    if (std::find(out.begin(), out.end(), i) == out.end()) out.push_back(i);
  }
  return out;
}

DualSetResult dual_set_sparsify(const Matrix& V, const Matrix& X, Index r,
                                std::span<const double> tie_norms) {
  require_finite(V, "V");
  require_finite(X, "X");
  const Index n = V.rows();
  const Index k = V.cols();
  if (X.rows() != n) throw ParameterError("V and X must have the same number of rows");
  if (!(k < r && r < n)) {
    throw ParameterError("dual-set sparsification needs k < r < n (k=" + std::to_string(k) +
                         ", r=" + std::to_string(r) + ", n=" + std::to_string(n) + ")");
  }
  const double ortho_err =
      (V.transpose() * V - Matrix::Identity(k, k)).cwiseAbs().maxCoeff();
  if (ortho_err > 1e-8) throw ParameterError("V must have orthonormal columns");

  std::vector<double> x_sq(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) x_sq[static_cast<std::size_t>(i)] = X.row(i).squaredNorm();

  DualSetSparsifier sparsifier(V, std::move(x_sq), r,
                               std::vector<double>(tie_norms.begin(), tie_norms.end()));
  sparsifier.run();
  return {sparsifier.scaled_weights(), sparsifier.picks()};
}

}  // namespace cssp
