#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dsgraph/graph.hpp"
#include "dsgraph/mse.hpp"
#include "dsgraph/solvers.hpp"
#include "dsgraph/spectral.hpp"

namespace dsgraph {

inline constexpr const char* kCsvSchema = "# dsgraph-bench-csv v1";
inline constexpr const char* kCsvHeader = "trial,algorithm,d,s,pw_dim,objective,wall_time_s,iterations,seed,excluded";

enum class GraphFamily { Random, Clustered, Path, Circulant };

inline std::string to_string(GraphFamily f) {
  switch (f) {
    case GraphFamily::Random: return "random";
    case GraphFamily::Clustered: return "clustered";
    case GraphFamily::Path: return "path";
    case GraphFamily::Circulant: return "circulant";
  }
  return "unknown";
}

inline GraphFamily parse_graph_family(std::string_view name) {
  if (name == "random" || name == "random_connected") return GraphFamily::Random;
  if (name == "clustered") return GraphFamily::Clustered;
  if (name == "path") return GraphFamily::Path;
  if (name == "circulant") return GraphFamily::Circulant;
  throw Error(ErrorKind::InvalidArgument, "unknown graph family '" + std::string(name) + "'");
}

/// One grid point of an experiment.
struct ExperimentCase {
  GraphFamily family = GraphFamily::Random;
  int d = 15;
  int edges = 45;                 // random family only
  ClusteredSpec clustered{};      // clustered family only; d = size_a + size_b
  std::vector<int> offsets{1, 2}; // circulant family only
  EigDistribution distribution = EigDistribution::Uniform01;
  int budget = 6;
  int pw_dim = 5;

  std::string label() const {
    std::ostringstream out;
    out << "family=" << to_string(family) << " dist=" << to_string(distribution) << " d=" << d;
    if (family == GraphFamily::Random) out << " edges=" << edges;
    out << " s=" << budget << " pw_dim=" << pw_dim;
    return out.str();
  }

  GraphSpec graph_spec(std::uint64_t seed) const {
    switch (family) {
      case GraphFamily::Random: return {RandomConnectedSpec{d, edges}, seed};
      case GraphFamily::Clustered: return {clustered, seed};
      case GraphFamily::Path: return {PathSpec{d}, seed};
      case GraphFamily::Circulant: return {CirculantSpec{d, offsets}, seed};
    }
    return {};
  }
};

struct ExperimentConfig {
  std::vector<ExperimentCase> cases;
  std::vector<std::string> algorithms;
  int trials = 1;
  std::uint64_t base_seed = 0;
  TimeMode time_mode = TimeMode::Infinite();
  double report_cap = 100.0;
  SolverConfig solver{};
  int threads = 1;
};

struct TrialRecord {
  int case_index = 0;
  int trial = 0;
  std::string algorithm;
  int d = 0;
  int s = 0;
  int pw_dim = 0;
  double objective = kInfinity;
  double wall_time_s = 0.0;
  int iterations = 0;
  std::uint64_t seed = 0;
  bool excluded = false;
  std::string error;  // non-empty when the algorithm threw
};

struct AlgorithmSummary {
  int case_index = 0;
  std::string algorithm;
  int rows = 0;
  int excluded = 0;
  int errors = 0;
  double mean_objective = kInfinity;  // over non-excluded rows
  double median_objective = kInfinity;
  double mean_time_s = 0.0;
};

struct ExperimentResult {
  std::vector<TrialRecord> rows;  // case, then trial, then algorithm order
  std::vector<AlgorithmSummary> summary;
};

/// Seed of trial `t` in case `c`: derive_seed(derive_seed(base, c), t).
/// Within a trial, stream 0 draws the graph, 1 the operator spectrum and 2
/// the random Wo-Bi start.
inline std::uint64_t trial_seed(std::uint64_t base, int case_index, int trial) {
  return derive_seed(derive_seed(base, static_cast<std::uint64_t>(case_index)), static_cast<std::uint64_t>(trial));
}

/// Builds the shared inputs of one trial.
inline PlacementProblem make_trial_problem(const ExperimentCase& c, std::uint64_t seed, const TimeMode& mode) {
  const Graph g = generate_graph(c.graph_spec(derive_seed(seed, 0)));
  SpectralBasis basis = eig_sym(laplacian(g));
  const int d = g.num_vertices();
  Eigen::VectorXd lambda = sample_eigenvalues(c.distribution, d, derive_seed(seed, 1));
  GraphOperator op = make_operator(std::move(basis), assign_eigenvalues(lambda));
  PWSpace pw = pw_space_by_dimension(op, c.pw_dim);
  return PlacementProblem{std::move(op), std::move(pw), c.budget, mode};
}

namespace detail {

inline std::vector<TrialRecord> run_trial(const ExperimentConfig& config, int case_index, int trial) {
  const ExperimentCase& c = config.cases[static_cast<std::size_t>(case_index)];
  const std::uint64_t seed = trial_seed(config.base_seed, case_index, trial);
  std::vector<TrialRecord> rows;
  std::optional<PlacementProblem> problem;
  std::optional<AtomCache> cache;
  std::string setup_error;
  try {
    problem = make_trial_problem(c, seed, config.time_mode);
    cache = build_atoms(*problem);
  } catch (const std::exception& e) {
    setup_error = e.what();
  }
  for (const auto& name : config.algorithms) {
    TrialRecord row;
    row.case_index = case_index;
    row.trial = trial;
    row.algorithm = name;
    row.d = problem ? problem->dim() : c.d;
    row.s = c.budget;
    row.pw_dim = c.pw_dim;
    row.seed = seed;
    if (!setup_error.empty()) {
      row.error = setup_error;
    } else {
      SolverConfig solver = config.solver;
      solver.seed = derive_seed(seed, 2);
      try {
        const PlacementResult r = run_algorithm(name, *problem, *cache, solver);
        row.objective = r.objective;
        row.wall_time_s = r.wall_time;
        row.iterations = r.iterations;
      } catch (const std::exception& e) {
        row.error = e.what();
      }
    }
    row.excluded = !row.error.empty() || !std::isfinite(row.objective) || row.objective > config.report_cap;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

inline std::vector<AlgorithmSummary> summarize(const ExperimentConfig& config, const std::vector<TrialRecord>& rows) {
  std::vector<AlgorithmSummary> out;
  for (std::size_t ci = 0; ci < config.cases.size(); ++ci) {
    for (const auto& name : config.algorithms) {
      AlgorithmSummary s;
      s.case_index = static_cast<int>(ci);
      s.algorithm = name;
      std::vector<double> kept;
      double time_sum = 0.0;
      for (const auto& r : rows) {
        if (r.case_index != static_cast<int>(ci) || r.algorithm != name) continue;
        ++s.rows;
        time_sum += r.wall_time_s;
        if (!r.error.empty()) ++s.errors;
        if (r.excluded) {
          ++s.excluded;
        } else {
          kept.push_back(r.objective);
        }
      }
      if (s.rows > 0) s.mean_time_s = time_sum / s.rows;
      if (!kept.empty()) {
        double sum = 0.0;
        for (double v : kept) sum += v;
        s.mean_objective = sum / static_cast<double>(kept.size());
        std::sort(kept.begin(), kept.end());
        const std::size_t n = kept.size();
        s.median_objective = n % 2 ? kept[n / 2] : 0.5 * (kept[n / 2 - 1] + kept[n / 2]);
      }
      out.push_back(std::move(s));
    }
  }
  return out;
}

/// Runs every (case, trial) on its own derived inputs; all algorithms of a
/// trial share the same graph and spectrum. Trials may run on several
/// threads; rows are stored by index so output order never depends on
/// scheduling.
inline ExperimentResult run_experiment(const ExperimentConfig& config) {
  if (config.trials < 1) throw Error(ErrorKind::InvalidArgument, "trials must be >= 1");
  if (config.cases.empty() || config.algorithms.empty()) {
    throw Error(ErrorKind::InvalidArgument, "experiment needs at least one case and one algorithm");
  }
  for (const auto& c : config.cases) {
    if (c.pw_dim < 1 || c.pw_dim > c.d || c.budget < 1 || c.budget > c.d) {
      throw Error(ErrorKind::InvalidArgument, "invalid case: " + c.label());
    }
  }
  const int total = static_cast<int>(config.cases.size()) * config.trials;
  std::vector<std::vector<TrialRecord>> slots(static_cast<std::size_t>(total));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int job = next++; job < total; job = next++) {
      slots[static_cast<std::size_t>(job)] = detail::run_trial(config, job / config.trials, job % config.trials);
    }
  };
  const int threads = std::clamp(config.threads, 1, std::max(1, total));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  ExperimentResult result;
  for (auto& slot : slots)
    for (auto& row : slot) result.rows.push_back(std::move(row));
  result.summary = summarize(config, result.rows);
  return result;
}

// ---------------------------------------------------------------------------
// Presets

/// Graph families x eigenvalue distributions at 45 vertices, s = 12, m = 10.
inline ExperimentConfig preset_distribution_test() {
  ExperimentConfig config;
  const EigDistribution dists[] = {EigDistribution::Uniform01, EigDistribution::Triangular, EigDistribution::Beta,
                                   EigDistribution::Exp1Mapped};
  const GraphFamily families[] = {GraphFamily::Random, GraphFamily::Clustered, GraphFamily::Path,
                                  GraphFamily::Circulant};
  for (GraphFamily f : families) {
    for (EigDistribution dist : dists) {
      ExperimentCase c;
      c.family = f;
      c.d = 45;
      c.edges = 90;
      c.clustered = ClusteredSpec{38, 7, 2, 2};
      c.distribution = dist;
      c.budget = 12;
      c.pw_dim = 10;
      config.cases.push_back(c);
    }
  }
  config.algorithms = {"exp", "dc", "wobi"};
  config.trials = 10;
  return config;
}

/// Small random graphs where the exhaustive optimum is affordable.
inline ExperimentConfig preset_brute_compare() {
  ExperimentConfig config;
  for (auto [d, edges] : {std::pair{15, 45}, std::pair{20, 50}}) {
    ExperimentCase c;
    c.d = d;
    c.edges = edges;
    c.budget = 6;
    c.pw_dim = 5;
    config.cases.push_back(c);
  }
  config.algorithms = {"brute", "exp", "dc", "wobi"};
  config.trials = 10;
  return config;
}

/// Budget used by the accuracy sweep at each graph size.
inline int accuracy_sweep_budget(int d) {
  if (d <= 15) return 6;
  if (d <= 45) return 8;
  return 12;
}

/// Random graphs of 15..100 vertices with 3d edges; pw_dim = s - 2.
inline ExperimentConfig preset_accuracy_sweep() {
  ExperimentConfig config;
  for (int d : {15, 30, 45, 60, 75, 100}) {
    ExperimentCase c;
    c.d = d;
    c.edges = 3 * d;
    c.budget = accuracy_sweep_budget(d);
    c.pw_dim = c.budget - 2;
    config.cases.push_back(c);
  }
  config.algorithms = {"relax", "greedy", "exp", "dc", "frac", "wobi", "relax+wobi", "exp+wobi", "dc+wobi", "frac+wobi"};
  config.trials = 100;
  return config;
}

inline ExperimentConfig experiment_preset(std::string_view name) {
  if (name == "distribution-test") return preset_distribution_test();
  if (name == "brute-compare") return preset_brute_compare();
  if (name == "accuracy-sweep") return preset_accuracy_sweep();
  throw Error(ErrorKind::InvalidArgument, "unknown preset '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Output

inline std::string format_double(double v, const char* fmt = "%.17g") {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

/// Schema comment, one "# case" comment per grid point, header, rows.
inline std::string format_csv(const ExperimentConfig& config, const ExperimentResult& result) {
  std::ostringstream out;
  out << kCsvSchema << '\n';
  for (std::size_t ci = 0; ci < config.cases.size(); ++ci) {
    out << "# case " << ci << ": " << config.cases[ci].label() << " time_mode=" << config.time_mode.to_string() << '\n';
  }
  out << kCsvHeader << '\n';
  for (const auto& r : result.rows) {
    out << r.trial << ',' << r.algorithm << ',' << r.d << ',' << r.s << ',' << r.pw_dim << ','
        << format_double(r.objective) << ',' << format_double(r.wall_time_s, "%.6f") << ',' << r.iterations << ','
        << r.seed << ',' << (r.excluded ? 1 : 0) << '\n';
  }
  return out.str();
}

inline std::string format_summary(const ExperimentConfig& config, const ExperimentResult& result) {
  std::ostringstream out;
  int last_case = -1;
  char line[256];
  for (const auto& s : result.summary) {
    if (s.case_index != last_case) {
      last_case = s.case_index;
      out << "case " << s.case_index << ": " << config.cases[static_cast<std::size_t>(s.case_index)].label() << '\n';
      std::snprintf(line, sizeof line, "  %-12s %6s %8s %14s %14s %12s\n", "algorithm", "rows", "excluded",
                    "mean", "median", "mean_time_s");
      out << line;
    }
    std::snprintf(line, sizeof line, "  %-12s %6d %8d %14s %14s %12s\n", s.algorithm.c_str(), s.rows, s.excluded,
                  format_double(s.mean_objective, "%.6g").c_str(), format_double(s.median_objective, "%.6g").c_str(),
                  format_double(s.mean_time_s, "%.6f").c_str());
    out << line;
  }
  return out.str();
}

}  // namespace dsgraph
