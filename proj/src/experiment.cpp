#include "cssp/experiment.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <thread>

#include "cssp/errors.hpp"

namespace cssp {

using nlohmann::json;

namespace {

constexpr const char* kSchema = "cssp-report/1";

SamplerSpec parse_sampler(std::string_view name) {
  if (name == "Nopt") return SamplerSpec::near_optimal();
  if (name == "LVG") return SamplerSpec::leverage_score();
  if (name == "AE") return SamplerSpec::additive_error();
  if (name == "DS") return SamplerSpec::dual_set();
  throw ParameterError("unknown sampler '" + std::string(name) + "'");
}

std::string fmt17(double v) {
  std::array<char, 64> buf{};
  const auto res =
      std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

// Converts the squared errors of one selection into a report row.
TrialRound score_selection(const Matrix& A, std::span<const Index> indices, const ExperimentConfig& cfg,
                           Index round, double tail_k_sq) {
  const ColumnSpaceProjection proj(A, gather_columns(A, indices));
  TrialRound row;
  row.round = round;
  row.error_ratio = std::sqrt(proj.error_sq(cfg.k) / tail_k_sq);
  row.projection_error = std::sqrt(proj.full_error_sq());
  row.residual_norm = row.projection_error;
  row.rank_lk_error_sq = proj.error_sq(round * cfg.k);
  row.distinct_columns = static_cast<Index>(indices.size());
  return row;
}

std::vector<TrialRound> run_trial(const Matrix& A, const ExperimentConfig& cfg,
                                  const AlgorithmSpec& alg, Index trial, RngStream rng,
                                  const std::vector<Index>& initial, double tail_k_sq) {
  std::vector<TrialRound> rows;
  if (alg.driver == DriverKind::Continued) {
    for (Index round = 1; round <= cfg.rounds; ++round) {
      const auto start = std::chrono::steady_clock::now();
      RngStream sub = rng.derive(static_cast<std::uint64_t>(round));
      const Selection sel = continued_select(A, cfg.k, round * cfg.c, alg.sampler, sub);
      TrialRound row = score_selection(A, sel.indices, cfg, round, tail_k_sq);
      row.requested_columns = round * cfg.c;
      row.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      rows.push_back(std::move(row));
    }
  } else {
    AdaptiveConfig acfg;
    acfg.k = cfg.k;
    acfg.rounds = cfg.rounds;
    acfg.columns_per_round = cfg.c;
    acfg.sampler = alg.sampler;
    acfg.mode = alg.driver == DriverKind::Adaptive ? ResidualMode::TruncatedRank
                                                   : ResidualMode::FullProjection;
    acfg.initial_columns = initial;
    const AdaptiveResult res = run_adaptive(A, acfg, rng);
    Index requested = 0;
    for (const RoundTrace& tr : res.traces) {
      requested += tr.requested;
      TrialRound row;
      row.round = tr.round;
      row.error_ratio = tr.error_ratio;
      row.residual_norm = std::sqrt(tr.residual_norm_sq);
      row.projection_error = std::sqrt(tr.projection_error_sq);
      row.rank_lk_error_sq = tr.rank_lk_error_sq;
      row.distinct_columns = tr.total_columns;
      row.requested_columns = requested;
      row.wall_seconds = tr.wall_seconds;
      rows.push_back(std::move(row));
    }
  }
  for (TrialRound& row : rows) {
    row.algorithm = alg.name;
    row.trial = trial;
  }
  return rows;
}

json dataset_json(const ExperimentConfig& cfg) {
  const DatasetSpec& d = cfg.dataset;
  if (!d.synthetic) {
    return {{"source", "file"}, {"path", d.path.generic_string()}, {"fill_missing", d.fill_missing}};
  }
  const SyntheticSpec& s = *d.synthetic;
  json spectrum;
  if (const auto* pl = std::get_if<PowerLaw>(&s.spectrum)) {
    spectrum = {{"kind", "powerlaw"}, {"exponent", pl->exponent}};
  } else if (const auto* ex = std::get_if<Exponential>(&s.spectrum)) {
    spectrum = {{"kind", "exponential"}, {"rate", ex->rate}};
  } else {
    spectrum = {{"kind", "explicit"}, {"sigma", std::get<ExplicitSpectrum>(s.spectrum).sigma}};
  }
  return {{"source", "synthetic"}, {"m", s.m}, {"n", s.n}, {"seed", s.seed}, {"spectrum", spectrum}};
}

void require_field(const json& obj, const char* key, json::value_t type, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ParseError("report schema: missing '" + std::string(key) + "' in " + where);
  }
  const json& v = obj.at(key);
  const bool ok = type == json::value_t::number_float ? v.is_number() : v.type() == type ||
      (type == json::value_t::number_integer && v.is_number_integer());
  if (!ok) throw ParseError("report schema: '" + std::string(key) + "' in " + where + " has wrong type");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !out.write(text.data(), static_cast<std::streamsize>(text.size()))) {
    throw Error("failed writing " + path.string());
  }
}

}  // namespace

AlgorithmSpec parse_algorithm(std::string_view name) {
  const auto dash = name.find('-');
  if (dash == std::string_view::npos) {
    throw ParameterError("unknown algorithm '" + std::string(name) + "'");
  }
  const std::string_view prefix = name.substr(0, dash);
  AlgorithmSpec spec;
  spec.name = std::string(name);
  try {
    spec.sampler = parse_sampler(name.substr(dash + 1));
  } catch (const ParameterError&) {
    throw ParameterError("unknown algorithm '" + std::string(name) + "'");
  }
  if (prefix == "ADP") {
    spec.driver = spec.sampler.kind == SamplerKind::AdditiveError ? DriverKind::FullProjection
                                                                  : DriverKind::Adaptive;
  } else if (prefix == "DV06") {
    spec.driver = DriverKind::FullProjection;
  } else if (prefix == "SEQ") {
    spec.driver = DriverKind::Continued;
  } else {
    throw ParameterError("unknown algorithm '" + std::string(name) + "'");
  }
  return spec;
}

void ExperimentConfig::validate() const {
  if (k < 1) throw ParameterError("k must be >= 1");
  if (c < 1) throw ParameterError("c must be >= 1");
  if (rounds < 1) throw ParameterError("rounds must be >= 1");
  if (trials < 1) throw ParameterError("trials must be >= 1");
  if (algorithms.empty()) throw ParameterError("at least one algorithm is required");
  for (const auto& name : algorithms) parse_algorithm(name).sampler.validate(k, c);
  if (dataset.synthetic) {
    dataset.synthetic->validate();
  } else if (dataset.path.empty()) {
    throw ParameterError("dataset needs either a synthetic spec or a file path");
  }
  if (epsilon && !(*epsilon > 0.0 && *epsilon < 1.0)) {
    throw ParameterError("epsilon must lie in (0, 1)");
  }
}

Matrix load_dataset(const ExperimentConfig& cfg, std::size_t* filled_missing) {
  if (cfg.dataset.synthetic) return generate_synthetic(*cfg.dataset.synthetic);
  Matrix A = load_matrix(cfg.dataset.path);
  if (cfg.dataset.fill_missing) {
    RngStream rng(cfg.seed, hash_label("fill-missing"));
    TernaryFill fill = fill_missing_ternary(A, rng);
    if (filled_missing) *filled_missing = fill.filled;
    A = std::move(fill.matrix);
  }
  require_finite(A, "dataset");
  return A;
}

RunReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::size_t filled = 0;
  const Matrix A = load_dataset(cfg, &filled);
  RunReport report = run_experiment(cfg, A);
  report.dataset.filled_missing = filled;
  return report;
}

RunReport run_experiment(const ExperimentConfig& cfg, const Matrix& A) {
  cfg.validate();
  require_finite(A, "dataset");
  if (cfg.k >= std::min(A.rows(), A.cols())) {
    throw ParameterError("k must be below min(m, n)");
  }

  std::vector<AlgorithmSpec> algs;
  for (const auto& name : cfg.algorithms) algs.push_back(parse_algorithm(name));

  const SvdFactors fa = svd(A);
  const double tail_k_sq = frobenius_tail(fa.sigma, cfg.k);
  if (!(tail_k_sq > 0.0)) {
    throw DegenerateInputError("exact-rank denominator: rank(A) <= k");
  }

  RunReport report;
  report.config = cfg;
  report.dataset.source = cfg.dataset.synthetic ? "synthetic" : cfg.dataset.path.generic_string();
  report.dataset.m = A.rows();
  report.dataset.n = A.cols();
  report.dataset.rank = fa.rank();
  report.dataset.frobenius_norm = A.norm();
  report.dataset.tail_k = std::sqrt(tail_k_sq);

  const RngStream master(cfg.seed);
  const auto trials = static_cast<std::size_t>(cfg.trials);

  std::vector<std::vector<Index>> initial(trials);
  if (cfg.same_initial) {
    const RngStream base = master.derive("initial");
    for (std::size_t t = 0; t < trials; ++t) {
      RngStream rng = base.derive(static_cast<std::uint64_t>(t));
      initial[t] = near_optimal_select(A, cfg.k, cfg.c, rng).indices;
    }
  }

  const std::size_t jobs = algs.size() * trials;
  std::vector<RngStream> streams;
  for (const auto& alg : algs) {
    const RngStream per_alg = master.derive(alg.name);
    for (std::size_t t = 0; t < trials; ++t) {
      streams.push_back(per_alg.derive(static_cast<std::uint64_t>(t)));
      report.streams.push_back({alg.name, static_cast<Index>(t), streams.back().stream_id()});
    }
  }

  std::vector<std::vector<TrialRound>> results(jobs);
  std::vector<std::exception_ptr> errors(jobs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs; j = next++) {
      const AlgorithmSpec& alg = algs[j / trials];
      const std::size_t t = j % trials;
      try {
        const std::vector<Index> none;
        const bool seeded = cfg.same_initial && alg.driver != DriverKind::Continued;
        results[j] = run_trial(A, cfg, alg, static_cast<Index>(t), streams[j],
                               seeded ? initial[t] : none, tail_k_sq);
      } catch (...) {
        errors[j] = std::current_exception();
      }
    }
  };
  unsigned n_threads = cfg.threads != 0 ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, jobs));
  {
    std::vector<std::jthread> pool;
    for (unsigned i = 1; i < n_threads; ++i) pool.emplace_back(worker);
    worker();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  for (auto& r : results) {
    for (auto& row : r) report.rows.push_back(std::move(row));
  }
  report.curves = aggregate_curves(cfg, report.rows);
  report.bounds = compare_bound(cfg, fa.sigma, report.curves);
  return report;
}

std::vector<CurvePoint> aggregate_curves(const ExperimentConfig& cfg,
                                         std::span<const TrialRound> rows) {
  std::vector<CurvePoint> curves;
  for (const auto& name : cfg.algorithms) {
    for (Index round = 1; round <= cfg.rounds; ++round) {
      std::vector<const TrialRound*> sel;
      for (const auto& row : rows) {
        if (row.algorithm == name && row.round == round) sel.push_back(&row);
      }
      if (sel.empty()) continue;
      CurvePoint p;
      p.algorithm = name;
      p.round = round;
      p.trials = static_cast<Index>(sel.size());
      const double count = static_cast<double>(sel.size());
      for (const auto* row : sel) {
        p.mean_ratio += row->error_ratio;
        p.mean_rank_lk_error_sq += row->rank_lk_error_sq;
      }
      p.mean_ratio /= count;
      p.mean_rank_lk_error_sq /= count;
      if (sel.size() > 1) {
        double ss = 0.0;
        for (const auto* row : sel) ss += (row->error_ratio - p.mean_ratio) * (row->error_ratio - p.mean_ratio);
        p.std_ratio = std::sqrt(ss / (count - 1.0));
      }
      curves.push_back(std::move(p));
    }
  }
  return curves;
}

std::vector<BoundPoint> compare_bound(const ExperimentConfig& cfg, const Vector& sigma,
                                      std::span<const CurvePoint> curves) {
  std::vector<BoundPoint> out;
  for (const auto& name : cfg.algorithms) {
    const AlgorithmSpec alg = parse_algorithm(name);
    if (alg.driver != DriverKind::Adaptive) continue;
    const double eps = alg.sampler.kind == SamplerKind::NearOptimal
                           ? 2.0 * static_cast<double>(cfg.k) / static_cast<double>(cfg.c)
                           : cfg.epsilon.value_or(0.0);
    if (!(eps > 0.0 && eps < 1.0)) continue;
    for (const auto& p : curves) {
      if (p.algorithm != name) continue;
      BoundPoint b;
      b.algorithm = name;
      b.round = p.round;
      b.epsilon = eps;
      b.bound = theorem1_bound(sigma, cfg.k, p.round, eps);
      b.empirical_mean_sq = p.mean_rank_lk_error_sq;
      b.exceeds = b.empirical_mean_sq > b.bound * kBoundSlack;
      out.push_back(std::move(b));
    }
  }
  return out;
}

json to_json(const ExperimentConfig& cfg) {
  return {{"k", cfg.k},
          {"c", cfg.c},
          {"rounds", cfg.rounds},
          {"trials", cfg.trials},
          {"algorithms", cfg.algorithms},
          {"seed", cfg.seed},
          {"same_initial", cfg.same_initial},
          {"epsilon", cfg.epsilon ? json(*cfg.epsilon) : json(nullptr)},
          {"dataset", dataset_json(cfg)}};
}

json to_json(const RunReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"algorithm", r.algorithm},
                    {"trial", r.trial},
                    {"round", r.round},
                    {"error_ratio", r.error_ratio},
                    {"residual_norm", r.residual_norm},
                    {"projection_error", r.projection_error},
                    {"rank_lk_error_sq", r.rank_lk_error_sq},
                    {"distinct_columns", r.distinct_columns},
                    {"requested_columns", r.requested_columns}});
  }
  json curves = json::array();
  for (const auto& p : report.curves) {
    curves.push_back({{"algorithm", p.algorithm},
                      {"round", p.round},
                      {"trials", p.trials},
                      {"mean_ratio", p.mean_ratio},
                      {"std_ratio", p.std_ratio},
                      {"mean_rank_lk_error_sq", p.mean_rank_lk_error_sq}});
  }
  json bounds = json::array();
  for (const auto& b : report.bounds) {
    bounds.push_back({{"algorithm", b.algorithm},
                      {"round", b.round},
                      {"epsilon", b.epsilon},
                      {"bound", b.bound},
                      {"empirical_mean_sq", b.empirical_mean_sq},
                      {"exceeds", b.exceeds}});
  }
  json streams = json::array();
  for (const auto& s : report.streams) {
    streams.push_back({{"algorithm", s.algorithm}, {"trial", s.trial}, {"stream_id", s.stream_id}});
  }
  const DatasetSummary& d = report.dataset;
  return {{"schema", kSchema},
          {"config", to_json(report.config)},
          {"dataset",
           {{"source", d.source},
            {"m", d.m},
            {"n", d.n},
            {"rank", d.rank},
            {"frobenius_norm", d.frobenius_norm},
            {"tail_k", d.tail_k},
            {"filled_missing", d.filled_missing}}},
          {"streams", streams},
          {"rows", rows},
          {"curves", curves},
          {"bounds", bounds}};
}

void validate_report_schema(const json& report) {
  using T = json::value_t;
  constexpr T kStr = T::string;
  constexpr T kInt = T::number_integer;
  constexpr T kNum = T::number_float;
  constexpr T kArr = T::array;
  constexpr T kObj = T::object;
  constexpr T kBool = T::boolean;

  require_field(report, "schema", kStr, "report");
  if (report.at("schema") != kSchema) throw ParseError("report schema: unsupported schema version");
  for (const auto& [key, type] : std::vector<std::pair<const char*, T>>{
           {"config", kObj}, {"dataset", kObj}, {"streams", kArr},
           {"rows", kArr}, {"curves", kArr}, {"bounds", kArr}}) {
    require_field(report, key, type, "report");
  }

  const json& cfg = report.at("config");
  for (const char* key : {"k", "c", "rounds", "trials", "seed"}) require_field(cfg, key, kInt, "config");
  require_field(cfg, "algorithms", kArr, "config");
  require_field(cfg, "same_initial", kBool, "config");
  require_field(cfg, "dataset", kObj, "config");
  if (!cfg.contains("epsilon")) throw ParseError("report schema: missing 'epsilon' in config");

  const json& ds = report.at("dataset");
  require_field(ds, "source", kStr, "dataset");
  for (const char* key : {"m", "n", "rank", "filled_missing"}) require_field(ds, key, kInt, "dataset");
  for (const char* key : {"frobenius_norm", "tail_k"}) require_field(ds, key, kNum, "dataset");

  for (const json& s : report.at("streams")) {
    require_field(s, "algorithm", kStr, "streams[]");
    require_field(s, "trial", kInt, "streams[]");
    require_field(s, "stream_id", kInt, "streams[]");
  }
  for (const json& r : report.at("rows")) {
    require_field(r, "algorithm", kStr, "rows[]");
    for (const char* key : {"trial", "round", "distinct_columns", "requested_columns"})
      require_field(r, key, kInt, "rows[]");
    for (const char* key : {"error_ratio", "residual_norm", "projection_error", "rank_lk_error_sq"})
      require_field(r, key, kNum, "rows[]");
  }
  for (const json& p : report.at("curves")) {
    require_field(p, "algorithm", kStr, "curves[]");
    for (const char* key : {"round", "trials"}) require_field(p, key, kInt, "curves[]");
    for (const char* key : {"mean_ratio", "std_ratio", "mean_rank_lk_error_sq"})
      require_field(p, key, kNum, "curves[]");
  }
  for (const json& b : report.at("bounds")) {
    require_field(b, "algorithm", kStr, "bounds[]");
    require_field(b, "round", kInt, "bounds[]");
    require_field(b, "exceeds", kBool, "bounds[]");
    for (const char* key : {"epsilon", "bound", "empirical_mean_sq"}) require_field(b, key, kNum, "bounds[]");
  }
}

void write_report(const RunReport& report, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  std::string curves = "algorithm,round,mean_ratio,std_ratio\n";
  for (const auto& p : report.curves) {
    curves += p.algorithm + "," + std::to_string(p.round) + "," + fmt17(p.mean_ratio) + "," +
              fmt17(p.std_ratio) + "\n";
  }
  std::string timings = "algorithm,trial,round,wall_seconds\n";
  for (const auto& r : report.rows) {
    timings += r.algorithm + "," + std::to_string(r.trial) + "," + std::to_string(r.round) + "," +
               fmt17(r.wall_seconds) + "\n";
  }
  const std::map<std::string, std::string> files{
      {"report.json", to_json(report).dump(2) + "\n"},
      {"curves.csv", curves},
      {"timings.csv", timings},
  };

  std::vector<fs::path> staged;
  try {
    for (const auto& [name, text] : files) {
      staged.push_back(dir / ("." + name + ".tmp"));
      write_text(staged.back(), text);
    }
    for (const auto& [name, text] : files) fs::rename(dir / ("." + name + ".tmp"), dir / name);
  } catch (...) {
    std::error_code ec;
    for (const auto& p : staged) fs::remove(p, ec);
    throw;
  }
}

}  // namespace cssp
