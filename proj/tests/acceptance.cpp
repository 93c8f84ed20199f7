// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cssp/adaptive.hpp"
#include "cssp/data_io.hpp"
#include "cssp/experiment.hpp"
#include "cssp/oracle.hpp"
#include "cssp/samplers.hpp"

using namespace cssp;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

Matrix gaussian(Index m, Index n, RngStream& rng) {
  std::normal_distribution<double> normal;
  Matrix G(m, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i) G(i, j) = normal(rng.engine());
  return G;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

Outcome lemma1_suite() {
  RngStream rng(101);
  int failures = 0;
  for (int inst = 0; inst < 1000; ++inst) {
    const Matrix X = gaussian(8, 10, rng);
    if (!lemma1_check(X, 1 + inst % 3, rng, 1e-8)) ++failures;
  }
  return {failures == 0, "1000 instances, " + std::to_string(failures) + " violations"};
}

Outcome dual_set_suite() {
  RngStream rng(202);
  std::uniform_int_distribution<int> pick_k(2, 3);
  int failures = 0;
  double worst_lower = 1e300;
  double worst_upper = -1e300;
  for (int inst = 0; inst < 500; ++inst) {
    const Index k = pick_k(rng.engine());
    std::uniform_int_distribution<Index> pick_r(k + 1, 10);
    const Index r = pick_r(rng.engine());
    Eigen::HouseholderQR<Matrix> qr(gaussian(40, k, rng));
    const Matrix V = qr.householderQ() * Matrix::Identity(40, k);
    const Matrix X = gaussian(40, 10, rng);
    const DualSetResult res = dual_set_sparsify(V, X, r);

    Matrix VS = V.transpose();
    Matrix XS = X.transpose();
    Index nnz = 0;
    for (Index i = 0; i < 40; ++i) {
      const double s = res.weights[static_cast<std::size_t>(i)];
      nnz += s > 0.0;
      VS.col(i) *= std::sqrt(s);
      XS.col(i) *= std::sqrt(s);
    }
    const double lower = singular_values(VS)(k - 1) - (1.0 - std::sqrt(double(k) / double(r)));
    const double upper = XS.norm() - X.norm();
    worst_lower = std::min(worst_lower, lower);
    worst_upper = std::max(worst_upper, upper);
    if (nnz > r || lower < -1e-8 || upper > 1e-8) ++failures;
  }
  return {failures == 0, "500 instances, " + std::to_string(failures) + " violations; min spectral slack " +
                             fmt(worst_lower) + ", max Frobenius excess " + fmt(worst_upper)};
}

Outcome theorem1_suite() {
  const Index k = 2, c = 8, t = 3;
  const double eps = 2.0 * k / c;
  const std::vector<std::vector<double>> spectra = {
      {10, 8, 6, 5, 4, 3.5, 3, 2.5, 2, 1.5, 1, 0.8, 0.6, 0.4, 0.2},
      {1, 0.9, 0.8, 0.7, 0.6, 0.5, 0.45, 0.4, 0.35, 0.3, 0.25, 0.2, 0.18, 0.16, 0.14, 0.12, 0.1,
       0.08, 0.06, 0.05},
      {5, 5, 4, 4, 3, 3, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1},
  };
  bool pass = true;
  std::string detail;
  for (std::size_t s = 0; s < spectra.size(); ++s) {
    SyntheticSpec spec{30, 120, ExplicitSpectrum{spectra[s]}, 300 + s};
    const Matrix A = generate_synthetic(spec);
    AdaptiveConfig cfg;
    cfg.k = k;
    cfg.rounds = t;
    cfg.columns_per_round = c;
    cfg.sampler = SamplerSpec::near_optimal();
    double mean = 0.0;
    const RngStream master(303);
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
      RngStream rng = master.derive(trial);
      mean += adaptive_select(A, cfg, rng).final_error_sq();
    }
    mean /= 100.0;
    const double bound = theorem1_bound(spec.singular_values(), k, t, eps);
    pass = pass && mean <= bound * 1.05;
    detail += (s ? "; " : "") + std::string("spectrum ") + std::to_string(s) + ": mean " + fmt(mean) +
              " vs bound " + fmt(bound);
  }
  return {pass, detail};
}

Outcome exact_rank_suite() {
  const Index k = 3, t = 2, c = 12;
  const double eps = 2.0 * k / c;
  SyntheticSpec spec{30, 120, ExplicitSpectrum{{6, 5, 4, 3, 2, 1}}, 404};
  const Matrix A = generate_synthetic(spec);
  const double tail_k = frobenius_tail(spec.singular_values(), k);
  AdaptiveConfig cfg;
  cfg.k = k;
  cfg.rounds = t;
  cfg.columns_per_round = c;
  cfg.sampler = SamplerSpec::near_optimal();
  double adaptive = 0.0;
  double continued = 0.0;
  const RngStream master(405);
  for (std::uint64_t trial = 0; trial < 50; ++trial) {
    RngStream a = master.derive(trial);
    RngStream b = master.derive(trial);
    adaptive += adaptive_select(A, cfg, a).final_error_sq();
    const Selection s = continued_select(A, k, t * c, cfg.sampler, b);
    continued += ColumnSpaceProjection(A, gather_columns(A, s.indices)).error_sq(t * k);
  }
  adaptive /= 50.0;
  continued /= 50.0;
  const double target = eps * (1.0 + eps) * tail_k * 1.05;
  return {adaptive <= target && adaptive <= continued,
          "adaptive mean " + fmt(adaptive) + ", limit " + fmt(target) + ", continued mean " + fmt(continued)};
}

ExperimentConfig exponential_config(Index rounds, std::vector<std::string> algs) {
  ExperimentConfig cfg;
  cfg.dataset.synthetic = SyntheticSpec{200, 2000, Exponential{0.1}, 505};
  cfg.k = 5;
  cfg.c = 10;
  cfg.rounds = rounds;
  cfg.trials = 5;
  cfg.algorithms = std::move(algs);
  cfg.seed = 506;
  return cfg;
}

double mean_at(const RunReport& r, const std::string& alg, Index round) {
  for (const auto& p : r.curves)
    if (p.algorithm == alg && p.round == round) return p.mean_ratio;
  throw std::runtime_error("missing curve point");
}

Outcome exponential_suite() {
  const RunReport r = run_experiment(exponential_config(10, {"ADP-Nopt", "ADP-LVG", "ADP-AE"}));
  bool monotone = true;
  for (Index t = 2; t <= 10; ++t) monotone = monotone && mean_at(r, "ADP-Nopt", t) <= mean_at(r, "ADP-Nopt", t - 1) + 0.005;
  const double nopt = mean_at(r, "ADP-Nopt", 10);
  const double lvg = mean_at(r, "ADP-LVG", 10);
  const double ae = mean_at(r, "ADP-AE", 10);
  // Ratios at t = 10 agree to ~1e-8; the first link uses the same 1e-8
  // numerical floor as the ratio >= 1 invariant.
  const bool ordered = nopt <= lvg + 1e-8 && lvg <= ae + 0.01;
  std::ostringstream d;
  d.precision(12);
  d << "(a) monotone " << (monotone ? "yes" : "no") << "; (b) t=10 ratio " << nopt << "; (c) Nopt " << nopt
    << " LVG " << lvg << " AE " << ae << "; t=1 ratios " << mean_at(r, "ADP-Nopt", 1) << "/"
    << mean_at(r, "ADP-LVG", 1) << "/" << mean_at(r, "ADP-AE", 1);
  return {monotone && nopt <= 1.05 && ordered, d.str()};
}

Outcome continued_suite() {
  const RunReport r = run_experiment(exponential_config(5, {"ADP-Nopt", "SEQ-Nopt"}));
  const double adp = mean_at(r, "ADP-Nopt", 5);
  const double seq = mean_at(r, "SEQ-Nopt", 5);
  std::ostringstream d;
  d.precision(12);
  d << "ADP-Nopt " << adp << " vs SEQ-Nopt " << seq << " at t=5";
  return {adp <= seq + 0.01, d.str()};
}

Outcome oracle_suite() {
  RngStream rng(707);
  int sampler_failures = 0;
  int projection_failures = 0;
  const std::vector<SamplerSpec> samplers = {SamplerSpec::additive_error(), SamplerSpec::leverage_score(),
                                             SamplerSpec::near_optimal(), SamplerSpec::dual_set()};
  for (int inst = 0; inst < 50; ++inst) {
    const Matrix A = gaussian(5, 8, rng);
    const double best = exhaustive_best_subset(A, 2, 1).best_error;
    for (const auto& spec : samplers) {
      const Selection s = sample_columns(spec, A, 1, 2, rng);
      const double err = (A - rank_k_column_projection(A, gather_columns(A, s.indices), 1)).norm();
      if (err < best - 1e-10) ++sampler_failures;
    }
    // min over rank-1 X of ||A - C X||_F against random rank-1 candidates
    const std::vector<Index> cols{static_cast<Index>(inst % 8), static_cast<Index>((inst + 3) % 8)};
    const Matrix C = gather_columns(A, cols);
    const double opt = (A - rank_k_column_projection(A, C, 1)).norm();
    for (int cand = 0; cand < 1000; ++cand) {
      const Matrix X = gaussian(2, 1, rng) * gaussian(1, 8, rng);
      if ((A - C * X).norm() < opt - 1e-10) ++projection_failures;
    }
  }
  return {sampler_failures == 0 && projection_failures == 0,
          std::to_string(sampler_failures) + " sampler violations, " + std::to_string(projection_failures) +
              " candidates beating the projection"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism_suite() {
  ExperimentConfig cfg;
  cfg.dataset.synthetic = SyntheticSpec{30, 90, Exponential{0.2}, 808};
  cfg.k = 3;
  cfg.c = 6;
  cfg.rounds = 3;
  cfg.trials = 3;
  cfg.algorithms = {"ADP-Nopt", "ADP-LVG", "ADP-AE", "SEQ-Nopt", "DV06-Nopt"};
  cfg.seed = 809;
  const fs::path dir = fs::temp_directory_path() / "cssp_acceptance";
  fs::remove_all(dir);
  write_report(run_experiment(cfg), dir / "a");
  cfg.threads = 1;
  write_report(run_experiment(cfg), dir / "b");
  const bool same_report = slurp(dir / "a" / "report.json") == slurp(dir / "b" / "report.json") &&
                           slurp(dir / "a" / "curves.csv") == slurp(dir / "b" / "curves.csv");

  RngStream rng(810);
  Matrix A = gaussian(7, 5, rng);
  A(0, 0) = 1.0 / 3.0;
  A(1, 1) = -1e-300;
  save_matrix(A, dir / "m.csv");
  save_matrix(A, dir / "m.bin");
  const bool csv_exact = load_matrix(dir / "m.csv") == A;
  const bool bin_exact = load_matrix(dir / "m.bin") == A;
  fs::remove_all(dir);
  return {same_report && csv_exact && bin_exact, std::string("report identical: ") + (same_report ? "yes" : "no") +
                                                     ", csv exact: " + (csv_exact ? "yes" : "no") +
                                                     ", binary exact: " + (bin_exact ? "yes" : "no")};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double limit_seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"AC1 lemma-1 spectra", 10, lemma1_suite},
      {"AC2 dual-set guarantees", 60, dual_set_suite},
      {"AC3 theorem-1 bound", 120, theorem1_suite},
      {"AC4 exact rank 2k", 60, exact_rank_suite},
      {"AC5 exponential error curves", 300, exponential_suite},
      {"AC6 adaptive vs continued", 180, continued_suite},
      {"AC7 oracle dominance", 60, oracle_suite},
      {"AC8 determinism and I/O", 10, determinism_suite},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.limit_seconds;
    const bool pass = out.pass && in_time;
    failed += !pass;
    std::printf("%s %s [%.1fs / %.0fs%s] %s\n", pass ? "PASS" : "FAIL", c.name, secs, c.limit_seconds,
                in_time ? "" : " exceeded", out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
