#pragma once

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dsgraph/bench.hpp"
#include "dsgraph/graph.hpp"
#include "dsgraph/mse.hpp"
#include "dsgraph/recovery.hpp"
#include "dsgraph/solvers.hpp"
#include "dsgraph/spectral.hpp"

namespace dsgraph {

namespace cli {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write '" + path + "'");
  out << content;
  if (!out) throw Error(ErrorKind::InvalidArgument, "failed writing '" + path + "'");
}

inline std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    long long v = 0;
    if (!detail::parse_int(detail::trim(token), v)) throw Error(ErrorKind::InvalidArgument, "invalid integer '" + token + "'");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

inline std::vector<std::string> split_names(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (const auto t = detail::trim(token); !t.empty()) out.emplace_back(t);
  }
  return out;
}

/// Graph source: an edge-list file or a generator description.
struct GraphFlags {
  std::string file;
  std::string variant = "random";
  int d = 15;
  int edges = -1;
  int size_a = 38;
  int size_b = 7;
  int removals = 2;
  int bridges = 2;
  std::string offsets = "1,2";

  void add(CLI::App* app, bool allow_file) {
    if (allow_file) app->add_option("--graph", file, "edge-list file");
    app->add_option("--variant", variant, "random|clustered|path|circulant")
        ->check(CLI::IsMember({"random", "clustered", "path", "circulant"}));
    app->add_option("--d", d, "vertex count")->check(CLI::PositiveNumber);
    app->add_option("--edges", edges, "edge count (random; default 3d capped at complete)");
    app->add_option("--size-a", size_a, "first clique size (clustered)");
    app->add_option("--size-b", size_b, "second clique size (clustered)");
    app->add_option("--removals", removals, "edges removed per clique (clustered)");
    app->add_option("--bridges", bridges, "bridge edges (clustered)");
    app->add_option("--offsets", offsets, "comma-separated circulant offsets");
  }

  Graph build(std::uint64_t seed) const {
    if (!file.empty()) return parse_edge_list(read_file(file));
    GraphSpec spec;
    spec.seed = seed;
    if (variant == "random") {
      const int e = edges >= 0 ? edges : std::min(3 * d, d * (d - 1) / 2);
      spec.variant = RandomConnectedSpec{d, e};
    } else if (variant == "clustered") {
      spec.variant = ClusteredSpec{size_a, size_b, removals, bridges};
    } else if (variant == "path") {
      spec.variant = PathSpec{d};
    } else {
      spec.variant = CirculantSpec{d, parse_int_list(offsets)};
    }
    return generate_graph(spec);
  }
};

/// Operator: Laplacian eigenbasis with sampled (or file-provided) eigenvalues.
struct OperatorFlags {
  std::string eig_dist = "uniform01";
  std::string operator_file;
  std::uint64_t seed = 0;
  int pw_dim = 1;

  void add(CLI::App* app) {
    app->add_option("--eig-dist", eig_dist, "uniform01|triangular|beta|exp1")
        ->check(CLI::IsMember({"uniform01", "triangular", "beta", "exp1"}));
    app->add_option("--operator", operator_file, "file of lambda_op[i]=<float> lines");
    app->add_option("--seed", seed, "RNG seed");
    app->add_option("--pw-dim", pw_dim, "Paley-Wiener dimension")->check(CLI::PositiveNumber);
  }

  GraphOperator build(const Graph& g) const {
    SpectralBasis basis = eig_sym(laplacian(g));
    const int d = g.num_vertices();
    Eigen::VectorXd lambda = operator_file.empty()
                                 ? assign_eigenvalues(sample_eigenvalues(parse_eig_distribution(eig_dist), d, derive_seed(seed, 1)))
                                 : parse_operator_spec(read_file(operator_file), d);
    return make_operator(std::move(basis), std::move(lambda));
  }
};

inline int run_gen_graph(const GraphFlags& flags, std::uint64_t seed, const std::string& out_path, std::ostream& out) {
  const Graph g = flags.build(seed);
  const std::string text = format_edge_list(g);
  if (out_path.empty()) {
    out << text;
  } else {
    write_file(out_path, text);
    out << "wrote " << g.num_edges() << " edges on " << g.num_vertices() << " vertices to " << out_path << '\n';
  }
  return 0;
}

inline std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

}  // namespace cli

/// Entry point of the `dsgraph` tool. Returns 0 on success, 1 on usage
/// errors and 2 on runtime errors.
inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Space-time sampling and sensor placement on graphs"};
  app.require_subcommand(1);

  // gen-graph
  cli::GraphFlags gen_graph;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen-graph", "generate a graph and write it as an edge list");
  gen_graph.add(gen, false);
  gen->add_option("--seed", gen_seed, "RNG seed");
  gen->add_option("--out", gen_out, "output path (stdout when omitted)");

  // place
  cli::GraphFlags place_graph;
  cli::OperatorFlags place_op;
  std::string place_alg = "exp+wobi";
  int place_s = 1;
  std::string place_time = "infinite";
  std::optional<double> lambda_dc;
  double delta_exp = 0.01;
  auto* place = app.add_subcommand("place", "choose s sampling vertices minimizing tr(C^-1)");
  place_graph.add(place, true);
  place_op.add(place);
  place->add_option("--alg", place_alg, "algorithm")->check(CLI::IsMember(algorithm_names()));
  place->add_option("--s", place_s, "number of sampled vertices")->check(CLI::PositiveNumber);
  place->add_option("--time-mode", place_time, "infinite | finite:<L>");
  place->add_option("--lambda-dc", lambda_dc, "norm-penalty weight (default s)");
  place->add_option("--delta-exp", delta_exp, "exponential-penalty scale")->check(CLI::PositiveNumber);

  // recover-check
  cli::GraphFlags rec_graph;
  cli::OperatorFlags rec_op;
  std::string rec_omega;
  std::string rec_out;
  auto* rec = app.add_subcommand("recover-check", "decide recoverability of PW signals from space-time samples");
  rec_graph.add(rec, true);
  rec_op.add(rec);
  rec->add_option("--omega", rec_omega, "comma-separated sampled vertices")->required();
  rec->add_option("--out", rec_out, "also write the report as key=value lines");

  // bench
  std::string bench_preset;
  std::string bench_family = "random";
  std::string bench_sizes = "15:45";
  int bench_s = 6;
  int bench_pw = 5;
  std::string bench_algs = "brute,exp,dc,wobi";
  std::string bench_dist = "uniform01";
  int bench_trials = -1;
  std::uint64_t bench_seed = 0;
  std::string bench_out;
  std::string bench_time = "infinite";
  double bench_cap = 100.0;
  int bench_threads = 1;
  auto* bench = app.add_subcommand("bench", "run seeded trials and write a CSV");
  auto* preset_opt = bench->add_option("--preset", bench_preset, "distribution-test|brute-compare|accuracy-sweep")
                         ->check(CLI::IsMember({"distribution-test", "brute-compare", "accuracy-sweep"}));
  bench->add_option("--family", bench_family, "graph family for an explicit grid")->excludes(preset_opt);
  bench->add_option("--sizes", bench_sizes, "comma-separated d:edges pairs")->excludes(preset_opt);
  bench->add_option("--s", bench_s, "budget")->excludes(preset_opt);
  bench->add_option("--pw-dim", bench_pw, "Paley-Wiener dimension")->excludes(preset_opt);
  bench->add_option("--algs", bench_algs, "comma-separated algorithms");
  bench->add_option("--eig-dist", bench_dist, "uniform01|triangular|beta|exp1")->excludes(preset_opt);
  bench->add_option("--trials", bench_trials, "trials per case")->check(CLI::PositiveNumber);
  bench->add_option("--seed", bench_seed, "base seed");
  bench->add_option("--out", bench_out, "CSV output path")->required();
  bench->add_option("--time-mode", bench_time, "infinite | finite:<L>");
  bench->add_option("--report-cap", bench_cap, "objectives above this are excluded from averages");
  bench->add_option("--threads", bench_threads, "worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*gen) return cli::run_gen_graph(gen_graph, gen_seed, gen_out, out);

    if (*place) {
      const Graph g = place_graph.build(derive_seed(place_op.seed, 0));
      GraphOperator op = place_op.build(g);
      PWSpace pw = pw_space_by_dimension(op, place_op.pw_dim);
      PlacementProblem problem{std::move(op), std::move(pw), place_s, parse_time_mode(place_time)};
      const AtomCache cache = build_atoms(problem);
      SolverConfig config;
      config.lambda_dc = lambda_dc;
      config.delta_exp = delta_exp;
      config.seed = derive_seed(place_op.seed, 2);
      const PlacementResult r = run_algorithm(place_alg, problem, cache, config);
      out << "algorithm   " << r.algorithm << '\n'
          << "d           " << g.num_vertices() << '\n'
          << "s           " << place_s << '\n'
          << "pw_dim      " << place_op.pw_dim << '\n'
          << "omega       " << cli::join(r.omega.vertices) << '\n'
          << "objective   " << format_double(r.objective) << '\n'
          << "iterations  " << r.iterations << '\n'
          << "wall_time_s " << format_double(r.wall_time, "%.6f") << '\n';
      return 0;
    }

    if (*rec) {
      const Graph g = rec_graph.build(derive_seed(rec_op.seed, 0));
      const GraphOperator op = rec_op.build(g);
      const PWSpace pw = pw_space_by_dimension(op, rec_op.pw_dim);
      const SampleSet omega = parse_sample_set(rec_omega, g.num_vertices());
      const RecoverabilityReport report = check_recoverable(op, pw, omega);
      std::vector<int> ranks;
      std::vector<int> dims;
      for (const auto& gr : report.group_ranks) {
        ranks.push_back(gr.rank);
        dims.push_back(gr.dim);
      }
      std::ostringstream kv;
      kv << "recoverable=" << (report.recoverable ? "true" : "false") << '\n'
         << "d=" << g.num_vertices() << '\n'
         << "pw_dim=" << report.pw_dim << '\n'
         << "omega=" << cli::join(omega.vertices) << '\n'
         << "group_ranks=" << cli::join(ranks) << '\n'
         << "group_dims=" << cli::join(dims) << '\n'
         << "band_degrees=" << cli::join(report.band_degrees) << '\n'
         << "full_degrees=" << cli::join(report.full_degrees) << '\n'
         << "time_steps=" << report.time_steps << '\n'
         << "stacked_rank=" << report.stacked_rank << '\n';
      if (!rec_out.empty()) cli::write_file(rec_out, kv.str());
      std::istringstream lines(kv.str());
      std::string line;
      while (std::getline(lines, line)) {
        const auto eq = line.find('=');
        char buf[256];
        std::snprintf(buf, sizeof buf, "%-13s %s\n", line.substr(0, eq).c_str(), line.substr(eq + 1).c_str());
        out << buf;
      }
      return 0;
    }

    if (*bench) {
      ExperimentConfig config;
      if (!bench_preset.empty()) {
        config = experiment_preset(bench_preset);
      } else {
        for (const auto& pair : cli::split_names(bench_sizes)) {
          const auto colon = pair.find(':');
          ExperimentCase c;
          c.family = parse_graph_family(bench_family);
          long long d = 0;
          long long edges = 0;
          if (!detail::parse_int(pair.substr(0, colon), d) ||
              (colon != std::string::npos && !detail::parse_int(pair.substr(colon + 1), edges))) {
            throw Error(ErrorKind::InvalidArgument, "invalid size '" + pair + "'");
          }
          c.d = static_cast<int>(d);
          c.edges = colon == std::string::npos ? std::min(3 * c.d, c.d * (c.d - 1) / 2) : static_cast<int>(edges);
          if (c.family == GraphFamily::Clustered) c.d = c.clustered.size_a + c.clustered.size_b;
          c.distribution = parse_eig_distribution(bench_dist);
          c.budget = bench_s;
          c.pw_dim = bench_pw;
          config.cases.push_back(c);
        }
        config.algorithms = cli::split_names(bench_algs);
      }
      if (bench->count("--algs") > 0) config.algorithms = cli::split_names(bench_algs);
      for (const auto& a : config.algorithms) {
        if (std::find(algorithm_names().begin(), algorithm_names().end(), a) == algorithm_names().end()) {
          err << "unknown algorithm '" << a << "'\n";
          return 1;
        }
      }
      if (bench_trials > 0) config.trials = bench_trials;
      config.base_seed = bench_seed;
      config.time_mode = parse_time_mode(bench_time);
      config.report_cap = bench_cap;
      config.threads = bench_threads;
      const ExperimentResult result = run_experiment(config);
      cli::write_file(bench_out, format_csv(config, result));
      out << format_summary(config, result);
      out << "wrote " << result.rows.size() << " rows to " << bench_out << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace dsgraph
