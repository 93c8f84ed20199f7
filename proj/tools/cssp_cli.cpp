#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "cssp/adaptive.hpp"
#include "cssp/data_io.hpp"
#include "cssp/errors.hpp"
#include "cssp/experiment.hpp"
#include "cssp/oracle.hpp"
#include "cssp/samplers.hpp"

namespace {

struct SyntheticFlags {
  cssp::Index m = 200;
  cssp::Index n = 2000;
  std::string spectrum = "exponential";
  double rate = 0.1;
  double exponent = 0.3;
  std::vector<double> sigma;

  void add_to(CLI::App& app) {
    app.add_option("--m", m, "Rows of the synthetic matrix");
    app.add_option("--n", n, "Columns of the synthetic matrix");
    app.add_option("--spectrum", spectrum, "exponential | powerlaw | explicit")
        ->check(CLI::IsMember({"exponential", "powerlaw", "explicit"}));
    app.add_option("--rate", rate, "Exponential decay rate");
    app.add_option("--exponent", exponent, "Power-law exponent");
    app.add_option("--sigma", sigma, "Explicit singular values")->delimiter(',');
  }

  cssp::SyntheticSpec build(std::uint64_t seed) const {
    cssp::SyntheticSpec spec;
    spec.m = m;
    spec.n = n;
    spec.seed = seed;
    if (spectrum == "powerlaw") {
      spec.spectrum = cssp::PowerLaw{exponent};
    } else if (spectrum == "explicit") {
      spec.spectrum = cssp::ExplicitSpectrum{sigma};
    } else {
      spec.spectrum = cssp::Exponential{rate};
    }
    return spec;
  }
};

std::vector<double> flatten(const cssp::Matrix& A) {
  std::vector<double> out;
  for (cssp::Index i = 0; i < A.rows(); ++i)
    for (cssp::Index j = 0; j < A.cols(); ++j) out.push_back(A(i, j));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive column subset selection experiments"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Write a synthetic matrix with a prescribed spectrum");
  SyntheticFlags gen_flags;
  gen_flags.add_to(*gen);
  std::uint64_t gen_seed = 0;
  std::filesystem::path gen_out;
  gen->add_option("--seed", gen_seed, "Seed for the random singular vectors");
  gen->add_option("--out", gen_out, "Output file (.csv or .bin)")->required();

  // run
  auto* run = app.add_subcommand("run", "Run an experiment and write report.json and CSVs");
  // The config file lives on the parent so a [run] section can fill the
  // subcommand's options; fallthrough lets it be given after `run`.
  app.set_config("--config", "", "TOML/INI config file with a [run] section; flags override it");
  run->fallthrough();
  SyntheticFlags run_flags;
  run_flags.add_to(*run);
  cssp::ExperimentConfig cfg;
  std::filesystem::path run_out = "out";
  std::filesystem::path data_path;
  std::optional<std::uint64_t> data_seed;
  std::optional<double> epsilon;
  run->add_option("--seed", cfg.seed, "Master seed");
  run->add_option("--out", run_out, "Output directory");
  run->add_option("--threads", cfg.threads, "Worker threads (0 = all cores)");
  run->add_option("--k", cfg.k, "Target rank");
  run->add_option("--c", cfg.c, "Columns per round");
  run->add_option("--rounds", cfg.rounds, "Adaptive rounds t");
  run->add_option("--trials", cfg.trials, "Trials per algorithm");
  run->add_option("--algs", cfg.algorithms, "Algorithms, e.g. ADP-Nopt,SEQ-Nopt")->delimiter(',');
  run->add_option("--data", data_path, "CSV or .bin matrix instead of synthetic data");
  run->add_flag("--fill-missing", cfg.dataset.fill_missing, "Fill NA cells with random {-1,0,1}");
  run->add_option("--data-seed", data_seed, "Seed for synthetic data (default: --seed)");
  run->add_flag("--same-initial", cfg.same_initial, "Seed round 1 of every algorithm with NearOptimal");
  run->add_option("--epsilon", epsilon, "epsilon for the bound of non-NearOptimal samplers");

  // bound
  auto* bound = app.add_subcommand("bound", "Evaluate the adaptive error bound from a spectrum file");
  std::filesystem::path spectrum_path;
  cssp::Index bound_k = 1;
  cssp::Index bound_rounds = 1;
  double bound_eps = 0.5;
  bound->add_option("spectrum", spectrum_path, "File of singular values (CSV, any shape)")->required();
  bound->add_option("--k", bound_k, "Target rank");
  bound->add_option("--rounds", bound_rounds, "Largest t to evaluate");
  bound->add_option("--epsilon", bound_eps, "Per-round relative error epsilon");

  // oracle
  auto* oracle = app.add_subcommand("oracle", "Brute-force reference checks");
  oracle->require_subcommand(1);
  auto* subset = oracle->add_subcommand("subset", "Exhaustive best c-subset");
  std::filesystem::path oracle_data;
  cssp::Index oracle_c = 1;
  cssp::Index oracle_k = 1;
  subset->add_option("matrix", oracle_data, "CSV or .bin matrix")->required();
  subset->add_option("--c", oracle_c, "Subset size");
  subset->add_option("--k", oracle_k, "Target rank");
  auto* lemma = oracle->add_subcommand("lemma1", "Random rank-r perturbation spectrum check");
  cssp::Index lemma_r = 1;
  cssp::Index lemma_trials = 100;
  std::uint64_t lemma_seed = 0;
  lemma->add_option("matrix", oracle_data, "CSV or .bin matrix")->required();
  lemma->add_option("--r", lemma_r, "Rank of the perturbation");
  lemma->add_option("--trials", lemma_trials, "Number of random perturbations");
  lemma->add_option("--seed", lemma_seed, "Seed");
  auto* dual = oracle->add_subcommand("dualset", "Deterministic dual-set selection and its guarantees");
  cssp::Index dual_k = 1;
  cssp::Index dual_c = 2;
  dual->add_option("matrix", oracle_data, "CSV or .bin matrix")->required();
  dual->add_option("--k", dual_k, "Target rank");
  dual->add_option("--c", dual_c, "Columns to select");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const cssp::Matrix A = cssp::generate_synthetic(gen_flags.build(gen_seed));
      cssp::save_matrix(A, gen_out);
      std::cout << "wrote " << A.rows() << "x" << A.cols() << " matrix to " << gen_out.string() << "\n";
    } else if (*run) {
      if (data_path.empty()) {
        cfg.dataset.synthetic = run_flags.build(data_seed.value_or(cfg.seed));
      } else {
        cfg.dataset.path = data_path;
      }
      cfg.epsilon = epsilon;
      const cssp::RunReport report = cssp::run_experiment(cfg);
      cssp::write_report(report, run_out);
      for (const auto& p : report.curves) {
        if (p.round == cfg.rounds) {
          std::cout << p.algorithm << " round " << p.round << ": mean ratio " << p.mean_ratio
                    << " (std " << p.std_ratio << ")\n";
        }
      }
      std::cout << "report written to " << run_out.string() << "\n";
    } else if (*bound) {
      std::vector<double> s = flatten(cssp::load_matrix(spectrum_path));
      std::sort(s.begin(), s.end(), std::greater<>());
      const cssp::Vector sigma = Eigen::Map<const cssp::Vector>(s.data(), static_cast<cssp::Index>(s.size()));
      std::cout << "round,bound\n";
      for (cssp::Index t = 1; t <= bound_rounds; ++t) {
        std::cout << t << "," << cssp::theorem1_bound(sigma, bound_k, t, bound_eps) << "\n";
      }
    } else if (*subset) {
      const cssp::Matrix A = cssp::load_matrix(oracle_data);
      const auto res = cssp::exhaustive_best_subset(A, oracle_c, oracle_k);
      nlohmann::json out{{"best", res.best}, {"best_error", res.best_error}, {"examined", res.examined}};
      std::cout << out.dump(2) << "\n";
    } else if (*lemma) {
      const cssp::Matrix A = cssp::load_matrix(oracle_data);
      cssp::RngStream rng(lemma_seed);
      cssp::Index passed = 0;
      for (cssp::Index i = 0; i < lemma_trials; ++i) {
        cssp::RngStream sub = rng.derive(static_cast<std::uint64_t>(i));
        if (cssp::lemma1_check(A, lemma_r, sub)) ++passed;
      }
      nlohmann::json out{{"trials", lemma_trials}, {"passed", passed}};
      std::cout << out.dump(2) << "\n";
      if (passed != lemma_trials) return 1;
    } else if (*dual) {
      const cssp::Matrix A = cssp::load_matrix(oracle_data);
      const cssp::Selection sel = cssp::dual_set_select(A, dual_k, dual_c);
      const double ratio = cssp::relative_error_ratio(A, cssp::gather_columns(A, sel.indices), dual_k);
      nlohmann::json out{{"selected", sel.indices}, {"error_ratio", ratio}};
      std::cout << out.dump(2) << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
