#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cssp/adaptive.hpp"
#include "cssp/data_io.hpp"
#include "cssp/samplers.hpp"

namespace cssp {

enum class DriverKind {
  Adaptive,        ///< ADP-*: rank-truncated residual (ADP-AE excepted, see below)
  FullProjection,  ///< DV06-*, and ADP-AE
  Continued,       ///< SEQ-*: all l*c columns in one sampler call
};

struct AlgorithmSpec {
  std::string name;
  DriverKind driver = DriverKind::Adaptive;
  SamplerSpec sampler;
};

/// Accepts ADP-Nopt, ADP-LVG, ADP-AE, ADP-DS and SEQ-/DV06- prefixed forms
/// of Nopt, LVG, AE, DS. ADP-AE is the full-projection driver with
/// additive-error sampling, matching the legend it reproduces.
AlgorithmSpec parse_algorithm(std::string_view name);

struct DatasetSpec {
  std::optional<SyntheticSpec> synthetic;
  std::filesystem::path path;
  /// Fill NaN cells of a loaded file with uniform {-1, 0, +1}.
  bool fill_missing = false;
};

struct ExperimentConfig {
  DatasetSpec dataset;
  Index k = 5;
  Index c = 10;
  Index rounds = 10;
  Index trials = 5;
  std::vector<std::string> algorithms{"ADP-Nopt"};
  std::uint64_t seed = 0;
  /// Round 1 of every adaptive algorithm reuses one NearOptimal selection
  /// per trial.
  bool same_initial = false;
  /// epsilon used for the bound comparison of samplers other than
  /// NearOptimal (which uses 2k/c).
  std::optional<double> epsilon;
  /// Worker threads; 0 means hardware concurrency.
  unsigned threads = 0;

  void validate() const;
};

struct TrialRound {
  std::string algorithm;
  Index trial = 0;
  Index round = 0;
  double error_ratio = 0.0;
  double residual_norm = 0.0;     ///< ||E^l||_F (SEQ: ||A - C C^+ A||_F)
  double projection_error = 0.0;  ///< ||A - C C^+ A||_F
  double rank_lk_error_sq = 0.0;  ///< ||A - (C C^+ A)_{l k}||_F^2
  Index distinct_columns = 0;
  Index requested_columns = 0;
  double wall_seconds = 0.0;
};

struct TrialStream {
  std::string algorithm;
  Index trial = 0;
  std::uint64_t stream_id = 0;
};

struct CurvePoint {
  std::string algorithm;
  Index round = 0;
  Index trials = 0;
  double mean_ratio = 0.0;
  double std_ratio = 0.0;  ///< sample standard deviation; 0 for one trial
  double mean_rank_lk_error_sq = 0.0;
};

struct BoundPoint {
  std::string algorithm;
  Index round = 0;
  double epsilon = 0.0;
  double bound = 0.0;
  double empirical_mean_sq = 0.0;
  bool exceeds = false;  ///< empirical_mean_sq > bound * kBoundSlack
};

inline constexpr double kBoundSlack = 1.05;

struct DatasetSummary {
  std::string source;
  Index m = 0;
  Index n = 0;
  Index rank = 0;
  double frobenius_norm = 0.0;
  double tail_k = 0.0;  ///< ||A - A_k||_F
  std::size_t filled_missing = 0;
};

struct RunReport {
  ExperimentConfig config;
  DatasetSummary dataset;
  std::vector<TrialStream> streams;
  std::vector<TrialRound> rows;  ///< sorted by (algorithm order, trial, round)
  std::vector<CurvePoint> curves;
  std::vector<BoundPoint> bounds;
};

/// Loads or generates the dataset named by cfg.
Matrix load_dataset(const ExperimentConfig& cfg, std::size_t* filled_missing = nullptr);

RunReport run_experiment(const ExperimentConfig& cfg);
/// Same, on an already materialized matrix.
RunReport run_experiment(const ExperimentConfig& cfg, const Matrix& A);

/// Per-round mean and sample standard deviation of the rows.
std::vector<CurvePoint> aggregate_curves(const ExperimentConfig& cfg,
                                         std::span<const TrialRound> rows);

/// Bound rows for every rank-truncated adaptive algorithm with an epsilon in
/// (0, 1): 2k/c for NearOptimal, cfg.epsilon otherwise.
std::vector<BoundPoint> compare_bound(const ExperimentConfig& cfg, const Vector& sigma,
                                      std::span<const CurvePoint> curves);

nlohmann::json to_json(const ExperimentConfig& cfg);
nlohmann::json to_json(const RunReport& report);

/// Throws ParseError naming the first missing or mistyped field.
void validate_report_schema(const nlohmann::json& report);

/// Writes report.json, curves.csv and timings.csv into dir. Nothing is
/// left behind in dir if any write fails.
void write_report(const RunReport& report, const std::filesystem::path& dir);

}  // namespace cssp
