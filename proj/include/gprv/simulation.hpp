#pragma once

// Monte Carlo study: samples from simple-structure populations, PCA, GPR
// multi-start and pairwise Varimax rotation, aggregation into cells, and the
// stationarity and benchmark scans over the start schedule.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "gprv/metrics.hpp"
#include "gprv/multistart.hpp"
#include "gprv/normalization.hpp"
#include "gprv/pairwise_varimax.hpp"
#include "gprv/popgen.hpp"

namespace gprv {

enum class Method { gpr, pairwise };
enum class StartType { identity, random, none };

inline const char* to_string(Method m) { return m == Method::gpr ? "gpr" : "pairwise"; }
inline const char* to_string(StartType s) {
  switch (s) {
    case StartType::identity: return "identity";
    case StartType::random: return "random";
    case StartType::none: return "none";
  }
  return "none";
}

/// One cell of the design. Pairwise cells use start_type none and q = 0;
/// identity cells use q = 1.
struct Condition {
  int k = 3;
  int n = 100;
  bool kaiser = false;
  Method method = Method::gpr;
  StartType start_type = StartType::random;
  int q = 1;

  auto key() const { return std::tuple(k, n, kaiser, method, start_type, q); }
  bool operator==(const Condition& o) const { return key() == o.key(); }
  bool operator<(const Condition& o) const { return key() < o.key(); }
};

struct CellResult {
  Condition condition;
  int replications = 0;
  double mean_c = 0.0, se_c = 0.0;
  double mean_v = 0.0, se_v = 0.0;
  double mean_rmse = 0.0, se_rmse = 0.0;
};

struct StudyConfig {
  std::vector<int> k_list{3, 6, 9, 12};
  std::vector<int> n_list{100, 300};
  std::vector<bool> kaiser_list{false, true};
  bool identity_start = true;
  bool random_start = true;
  bool pairwise = true;
  std::vector<int> q_schedule{1, 10, 50, 100, 500, 1000};
  int replications = 100;
  std::uint64_t base_seed = 20181913;
  double main_loading = 0.5;
  /// Population size for every n; 0 selects 1000 * n (100,000 for n = 100).
  std::int64_t population_cases = 50'000;
  int threads = 1;
  GprParams gpr;
  PairwiseParams pairwise_params;
  std::string output_dir = "results";
  std::string population_cache_dir;

  void validate() const {
    if (k_list.empty() || n_list.empty() || kaiser_list.empty())
      throw Error(ErrorKind::invalid_input, "k_list, n_list and kaiser_list must be non-empty");
    for (int k : k_list)
      if (k < 1) throw Error(ErrorKind::invalid_input, "k must be >= 1");
    for (int n : n_list)
      if (n < 2) throw Error(ErrorKind::invalid_input, "n must be >= 2");
    validate_schedule(q_schedule);
    if (replications < 2) throw Error(ErrorKind::invalid_input, "replications must be >= 2");
    if (!identity_start && !random_start && !pairwise)
      throw Error(ErrorKind::invalid_input, "no rotation method selected");
    if (threads < 1) throw Error(ErrorKind::invalid_input, "threads must be >= 1");
    if (population_cases < 0) throw Error(ErrorKind::invalid_input, "population_cases must be >= 0");
    gpr.validate();
    if (pairwise_params.max_cycles < 1) throw Error(ErrorKind::invalid_input, "max_cycles must be >= 1");
  }

  std::int64_t cases_for(int n) const { return population_cases > 0 ? population_cases : 1000LL * n; }

  /// Full-scale settings: 1,000 replications, 1,000 * n population cases.
  void apply_full_scale() {
    replications = 1000;
    population_cases = 0;
  }
};

/// Performance of one rotated sample against the population.
struct Outcome {
  double c = 0.0;
  double v = 0.0;
  double rmse = 0.0;
};

inline std::uint64_t sample_seed(const StudyConfig& cfg, int k, int n, int r) {
  return derive_seed(cfg.base_seed, {0x73616d70ULL, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(n),
                                     static_cast<std::uint64_t>(r)});
}

inline std::uint64_t start_seed(const StudyConfig& cfg, int k, int n, int r) {
  return derive_seed(cfg.base_seed, {0x73747274ULL, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(n),
                                     static_cast<std::uint64_t>(r)});
}

/// Sample of replication r. Independent of kaiser, method and q so that all
/// of them are compared on identical data.
inline DataMatrix replication_sample(const PopulationModel& pop, const StudyConfig& cfg, int n, int r) {
  Rng rng(sample_seed(cfg, pop.spec.k, n, r));
  return draw_sample(pop, n, rng);
}

/// Unrotated loadings prepared for rotation. With Kaiser normalization the
/// rotation sees row-normalized loadings and results are scaled back.
struct PreparedLoadings {
  LoadingMatrix unrotated;
  LoadingMatrix rotation_input;
  std::optional<RowScales> scales;

  LoadingMatrix to_original(const LoadingMatrix& rotated) const {
    return scales ? kaiser_denormalize(rotated, *scales) : rotated;
  }
};

inline PreparedLoadings prepare_loadings(const DataMatrix& sample, int k, bool kaiser) {
  PreparedLoadings p;
  p.unrotated = pca_loadings(correlation_matrix(sample), k);
  if (kaiser) {
    auto [normalized, scales] = kaiser_normalize(p.unrotated);
    p.rotation_input = std::move(normalized);
    p.scales = std::move(scales);
  } else {
    p.rotation_input = p.unrotated;
  }
  return p;
}

/// c and RMSE after matching to the population; v of the loadings on the
/// original scale.
inline Outcome evaluate(const PreparedLoadings& prep, const LoadingMatrix& rotated, const LoadingMatrix& pop_loadings) {
  const LoadingMatrix original = prep.to_original(rotated);
  const Matching matching = match_components(original, pop_loadings);
  return {mean_congruence(matching), varimax_criterion(original), rmse_loadings(original, pop_loadings, matching)};
}

/// Outcomes of one replication for every method/start/q requested by cfg for
/// a fixed (k, n, kaiser). Keys follow Condition ordering.
inline std::map<Condition, Outcome> run_replication(const PopulationModel& pop, const StudyConfig& cfg, int n,
                                                    bool kaiser, int r) {
  const int k = pop.spec.k;
  const PreparedLoadings prep = prepare_loadings(replication_sample(pop, cfg, n, r), k, kaiser);
  const LoadingMatrix& target = pop.pop_component_loadings;
  std::map<Condition, Outcome> out;
  if (cfg.identity_start) {
    const RotationSolution sol = gpr_rotate(prep.rotation_input, Matrix::Identity(k, k), cfg.gpr);
    out[{k, n, kaiser, Method::gpr, StartType::identity, 1}] = evaluate(prep, sol.lambda, target);
  }
  if (cfg.random_start) {
    Rng rng(start_seed(cfg, k, n, r));
    const auto results = multi_start_schedule(prep.rotation_input, cfg.q_schedule, cfg.gpr, rng);
    for (std::size_t i = 0; i < results.size(); ++i)
      out[{k, n, kaiser, Method::gpr, StartType::random, cfg.q_schedule[i]}] =
          evaluate(prep, results[i].best.lambda, target);
  }
  if (cfg.pairwise) {
    const RotationSolution sol = pairwise_varimax(prep.rotation_input, cfg.pairwise_params);
    out[{k, n, kaiser, Method::pairwise, StartType::none, 0}] = evaluate(prep, sol.lambda, target);
  }
  return out;
}

/// Mean and standard error (sample SD / sqrt(count)) of a series.
inline std::pair<double, double> mean_and_se(const std::vector<double>& xs) {
  if (xs.size() < 2) throw Error(ErrorKind::invalid_input, "need at least two values");
  const auto n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

inline CellResult aggregate(const Condition& condition, const std::vector<Outcome>& outcomes) {
  std::vector<double> c, v, e;
  for (const Outcome& o : outcomes) {
    c.push_back(o.c);
    v.push_back(o.v);
    e.push_back(o.rmse);
  }
  CellResult cell;
  cell.condition = condition;
  cell.replications = static_cast<int>(outcomes.size());
  std::tie(cell.mean_c, cell.se_c) = mean_and_se(c);
  std::tie(cell.mean_v, cell.se_v) = mean_and_se(v);
  std::tie(cell.mean_rmse, cell.se_rmse) = mean_and_se(e);
  return cell;
}

/// Runs body(r) for r in [0, count) on up to `threads` workers. Each index is
/// handled exactly once; callers store results by index.
inline void parallel_for(int count, int threads, const std::function<void(int)>& body) {
  if (threads <= 1 || count <= 1) {
    for (int r = 0; r < count; ++r) body(r);
    return;
  }
  std::mutex mutex;
  int next = 0;
  std::exception_ptr failure;
  auto worker = [&] {
    for (;;) {
      int r;
      {
        std::lock_guard lock(mutex);
        if (failure || next >= count) return;
        r = next++;
      }
      try {
        body(r);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  for (int t = 0; t < std::min(threads, count); ++t) pool.emplace_back(worker);
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

/// Per-replication outcomes of every cell of one (k, n, kaiser) condition.
using ReplicationTable = std::map<Condition, std::vector<Outcome>>;

inline ReplicationTable run_condition_outcomes(const PopulationModel& pop, const StudyConfig& cfg, int n, bool kaiser) {
  std::vector<std::map<Condition, Outcome>> per_rep(static_cast<std::size_t>(cfg.replications));
  parallel_for(cfg.replications, cfg.threads,
               [&](int r) { per_rep[static_cast<std::size_t>(r)] = run_replication(pop, cfg, n, kaiser, r); });
  ReplicationTable table;
  for (const auto& rep : per_rep)
    for (const auto& [cond, outcome] : rep) table[cond].push_back(outcome);
  return table;
}

/// All cells of one (k, n, kaiser) condition, sharing samples and starts.
inline std::vector<CellResult> run_condition(const PopulationModel& pop, const StudyConfig& cfg, int n, bool kaiser) {
  std::vector<CellResult> cells;
  for (const auto& [cond, outcomes] : run_condition_outcomes(pop, cfg, n, kaiser)) cells.push_back(aggregate(cond, outcomes));
  return cells;
}

/// A single cell computed on its own; equals the matching cell of run_condition.
inline CellResult run_cell(const Condition& cond, const PopulationModel& pop, const StudyConfig& cfg) {
  cfg.validate();
  if (pop.spec.k != cond.k) throw Error(ErrorKind::invalid_input, "population does not match the condition's k");
  const int k = cond.k;
  std::vector<Outcome> outcomes(static_cast<std::size_t>(cfg.replications));
  parallel_for(cfg.replications, cfg.threads, [&](int r) {
    const PreparedLoadings prep = prepare_loadings(replication_sample(pop, cfg, cond.n, r), k, cond.kaiser);
    LoadingMatrix rotated;
    if (cond.method == Method::pairwise) {
      rotated = pairwise_varimax(prep.rotation_input, cfg.pairwise_params).lambda;
    } else if (cond.start_type == StartType::identity) {
      rotated = gpr_rotate(prep.rotation_input, Matrix::Identity(k, k), cfg.gpr).lambda;
    } else {
      Rng rng(start_seed(cfg, k, cond.n, r));
      rotated = multi_start_rotate(prep.rotation_input, {StartKind::random, cond.q}, cfg.gpr, rng).best.lambda;
    }
    outcomes[static_cast<std::size_t>(r)] = evaluate(prep, rotated, pop.pop_component_loadings);
  });
  return aggregate(cond, outcomes);
}

/// Population shared by all conditions with the same k and population size.
inline PopulationModel population_for(const StudyConfig& cfg, int k, int n) {
  PopulationSpec spec;
  spec.k = k;
  spec.main_loading = cfg.main_loading;
  spec.cases = cfg.cases_for(n);
  spec.seed = cfg.base_seed;
  if (cfg.population_cache_dir.empty()) return generate_population(spec);
  namespace fs = std::filesystem;
  const fs::path path = fs::path(cfg.population_cache_dir) / ("population_" + std::to_string(population_key(spec)) + ".bin");
  if (fs::exists(path)) {
    PopulationModel pop = load_population(path.string());
    if (pop.spec.k == spec.k && pop.spec.cases == spec.cases && pop.spec.main_loading == spec.main_loading &&
        pop.spec.seed == spec.seed)
      return pop;
  }
  PopulationModel pop = generate_population(spec);
  std::error_code ec;
  fs::create_directories(cfg.population_cache_dir, ec);
  save_population(pop, path.string());
  return pop;
}

using ProgressFn = std::function<void(const std::string&)>;

/// The whole grid. Cells are ordered by (k, n, kaiser, method, start, q).
inline std::vector<CellResult> run_study(const StudyConfig& cfg, const ProgressFn& progress = {}) {
  cfg.validate();
  std::vector<CellResult> cells;
  for (int k : cfg.k_list) {
    std::optional<PopulationModel> pop;
    for (int n : cfg.n_list) {
      if (!pop || pop->spec.cases != cfg.cases_for(n)) pop = population_for(cfg, k, n);
      for (bool kaiser : cfg.kaiser_list) {
        if (progress)
          progress("k=" + std::to_string(k) + " n=" + std::to_string(n) + " kaiser=" + (kaiser ? "on" : "off"));
        auto part = run_condition(*pop, cfg, n, kaiser);
        cells.insert(cells.end(), part.begin(), part.end());
      }
    }
  }
  std::sort(cells.begin(), cells.end(), [](const CellResult& a, const CellResult& b) { return a.condition < b.condition; });
  return cells;
}

// ---------------------------------------------------------------------------
// Scans

struct Cutoffs {
  double c = 0.001;
  double v = 0.0001;
};

inline bool equal_performance(const CellResult& a, const CellResult& b, const Cutoffs& cut) {
  return std::abs(a.mean_c - b.mean_c) <= cut.c && std::abs(a.mean_v - b.mean_v) <= cut.v;
}

/// Smallest schedule value that suffices, or none ("greater than max"). When
/// none, `reference_q` is the largest q that was judged.
struct ScanResult {
  std::optional<int> min_q;
  int reference_q = 0;

  std::string label() const {
    return min_q ? std::to_string(*min_q) : "> " + std::to_string(reference_q);
  }
};

/// Random-start GPR cells of one (k, n, kaiser) condition ordered by q.
inline std::vector<CellResult> random_series(const std::vector<CellResult>& cells, int k, int n, bool kaiser) {
  std::vector<CellResult> out;
  for (const CellResult& c : cells) {
    const Condition& d = c.condition;
    if (d.k == k && d.n == n && d.kaiser == kaiser && d.method == Method::gpr && d.start_type == StartType::random)
      out.push_back(c);
  }
  std::sort(out.begin(), out.end(), [](const CellResult& a, const CellResult& b) { return a.condition.q < b.condition.q; });
  return out;
}

inline void require_single_condition(const std::vector<CellResult>& series) {
  for (const CellResult& c : series) {
    const Condition& d = c.condition;
    const Condition& f = series.front().condition;
    if (d.k != f.k || d.n != f.n || d.kaiser != f.kaiser || d.method != Method::gpr || d.start_type != StartType::random)
      throw Error(ErrorKind::invalid_input, "scan mixes conditions");
  }
  for (std::size_t i = 1; i < series.size(); ++i)
    if (series[i].condition.q <= series[i - 1].condition.q)
      throw Error(ErrorKind::invalid_input, "scan needs strictly increasing q");
}

/// First q whose successor in the schedule performs equally.
inline ScanResult stationarity_scan(const std::vector<CellResult>& series, const Cutoffs& cut = {}) {
  if (series.size() < 2) throw Error(ErrorKind::invalid_input, "stationarity needs at least two q points");
  require_single_condition(series);
  for (std::size_t i = 0; i + 1 < series.size(); ++i)
    if (equal_performance(series[i], series[i + 1], cut)) return {series[i].condition.q, series[i].condition.q};
  return {std::nullopt, series[series.size() - 2].condition.q};
}

/// First q at which GPR performs equally to the pairwise benchmark.
inline ScanResult benchmark_scan(const std::vector<CellResult>& series, const CellResult& benchmark,
                                 const Cutoffs& cut = {}) {
  if (series.empty()) throw Error(ErrorKind::invalid_input, "benchmark scan needs GPR cells");
  require_single_condition(series);
  const Condition& g = series.front().condition;
  const Condition& b = benchmark.condition;
  if (b.method != Method::pairwise || b.k != g.k || b.n != g.n || b.kaiser != g.kaiser)
    throw Error(ErrorKind::invalid_input, "benchmark cell does not match the GPR condition");
  for (const CellResult& c : series)
    if (equal_performance(c, benchmark, cut)) return {c.condition.q, c.condition.q};
  return {std::nullopt, series.back().condition.q};
}

struct TableRow {
  int k = 0;
  int n = 0;
  bool kaiser = false;
  ScanResult stationarity;
  std::optional<ScanResult> benchmark;
};

/// Stationarity and benchmark rows for every (k, n, kaiser) present in cells.
inline std::vector<TableRow> scan_tables(const std::vector<CellResult>& cells, const Cutoffs& cut = {}) {
  std::vector<std::tuple<int, int, bool>> keys;
  for (const CellResult& c : cells) {
    const auto key = std::tuple(c.condition.k, c.condition.n, c.condition.kaiser);
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  std::sort(keys.begin(), keys.end());
  std::vector<TableRow> rows;
  for (const auto& [k, n, kaiser] : keys) {
    const auto series = random_series(cells, k, n, kaiser);
    if (series.size() < 2) continue;
    TableRow row{k, n, kaiser, stationarity_scan(series, cut), std::nullopt};
    for (const CellResult& c : cells) {
      const Condition& d = c.condition;
      if (d.method == Method::pairwise && d.k == k && d.n == n && d.kaiser == kaiser)
        row.benchmark = benchmark_scan(series, c, cut);
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace gprv
