#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dsgraph/error.hpp"
#include "dsgraph/mse.hpp"
#include "dsgraph/random.hpp"
#include "dsgraph/recovery.hpp"

namespace dsgraph {

struct SolverConfig {
  std::optional<double> lambda_dc;  // norm-penalty weight; defaults to the budget s
  double delta_exp = 0.01;
  double outer_tol = 1e-6;
  int outer_max_iter = 100;
  double pg_tol = 1e-8;
  int pg_max_iter = 5000;
  double improvement_tol = 1e-12;
  double tie_tol = 1e-12;  // objectives this close (relatively) are ties
  double enumeration_cap = 1e7;
  std::uint64_t seed = 0;

  double dc_weight(int budget) const { return lambda_dc.value_or(static_cast<double>(budget)); }
};

struct PlacementResult {
  SampleSet omega;
  double objective = kInfinity;
  std::string algorithm;
  int iterations = 0;
  std::optional<Eigen::VectorXd> relaxed_x;
  double wall_time = 0.0;
};

// ---------------------------------------------------------------------------
// Combinatorial solvers

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double out = 1.0;
  for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
  return out;
}

namespace detail {

inline bool improves(double candidate, double incumbent, double rel_tol) {
  if (!std::isfinite(incumbent)) return std::isfinite(candidate);
  return candidate < incumbent - rel_tol * (1.0 + std::abs(incumbent));
}

inline Eigen::VectorXd packed_sum(const AtomCache& cache, const std::vector<int>& vertices) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(AtomCache::packed_size(cache.band_dim()));
  for (int v : vertices) p += cache.packed().col(v);
  return p;
}

}  // namespace detail

/// Exhaustive search over all s-subsets in lexicographic order; the first
/// minimizer (within tie tolerance) wins, so ties go to the lexicographically
/// smallest set.
inline PlacementResult brute_force(const PlacementProblem& problem, const AtomCache& cache, const SolverConfig& config = {}) {
  const int d = cache.dim();
  const int s = problem.budget;
  const double count = binomial(d, s);
  if (count > config.enumeration_cap) {
    throw Error(ErrorKind::TooLarge, "C(" + std::to_string(d) + "," + std::to_string(s) + ") = " +
                                         std::to_string(count) + " exceeds enumeration cap");
  }
  const int m = cache.band_dim();
  const Eigen::Index psize = AtomCache::packed_size(m);
  const double* atoms = cache.packed().data();

  // partial[k] holds the packed sum of the first k chosen atoms.
  std::vector<double> partial(static_cast<std::size_t>((s + 1) * psize), 0.0);
  std::vector<int> chosen(static_cast<std::size_t>(s));
  std::vector<int> best_set;
  double best = kInfinity;
  long long evaluated = 0;
  TraceInverseKernel kernel(m);

  // Iterative lexicographic enumeration of combinations.
  int depth = 0;
  chosen[0] = 0;
  while (depth >= 0) {
    const int v = chosen[static_cast<std::size_t>(depth)];
    if (v > d - (s - depth)) {
      --depth;
      if (depth >= 0) ++chosen[static_cast<std::size_t>(depth)];
      continue;
    }
    const double* src = partial.data() + depth * psize;
    double* dst = partial.data() + (depth + 1) * psize;
    const double* atom = atoms + static_cast<Eigen::Index>(v) * psize;
    for (Eigen::Index i = 0; i < psize; ++i) dst[i] = src[i] + atom[i];
    if (depth + 1 == s) {
      const double value = kernel.evaluate(dst);
      ++evaluated;
      if (best_set.empty() || detail::improves(value, best, config.tie_tol)) {
        best = value;
        best_set = chosen;
      }
      ++chosen[static_cast<std::size_t>(depth)];
    } else {
      ++depth;
      chosen[static_cast<std::size_t>(depth)] = v + 1;
    }
  }
  PlacementResult out;
  out.omega = SampleSet{best_set};
  out.objective = mse_objective(cache, out.omega);
  out.algorithm = "brute";
  out.iterations = static_cast<int>(std::min<long long>(evaluated, INT32_MAX));
  return out;
}

/// Standard greedy from the empty set. Candidates are ranked with
/// `ranked_score`, which coincides with the objective once C is invertible.
inline PlacementResult greedy_best_in(const PlacementProblem& problem, const AtomCache& cache, const SolverConfig& config = {}) {
  const int d = cache.dim();
  TraceInverseKernel kernel(cache.band_dim());
  Eigen::VectorXd current = Eigen::VectorXd::Zero(AtomCache::packed_size(cache.band_dim()));
  std::vector<char> selected(static_cast<std::size_t>(d), 0);
  std::vector<int> chosen;
  for (int step = 0; step < problem.budget; ++step) {
    int best_v = -1;
    RankedScore best;
    for (int v = 0; v < d; ++v) {
      if (selected[static_cast<std::size_t>(v)]) continue;
      const RankedScore score = ranked_score(cache, current + cache.packed().col(v), kernel);
      if (best_v < 0 || score.better_than(best, config.tie_tol)) {
        best = score;
        best_v = v;
      }
    }
    selected[static_cast<std::size_t>(best_v)] = 1;
    chosen.push_back(best_v);
    current += cache.packed().col(best_v);
  }
  std::sort(chosen.begin(), chosen.end());
  PlacementResult out;
  out.omega = SampleSet{chosen};
  out.objective = mse_objective(cache, out.omega);
  out.algorithm = "greedy";
  out.iterations = problem.budget;
  return out;
}

/// Worst-out best-in local search. Each pass drops the vertex whose removal
/// hurts least, then adds the vertex that helps most (smallest index on
/// ties). Stops when the set repeats or the score fails to improve by more
/// than `improvement_tol`. Singular sets are compared by `ranked_score`.
inline PlacementResult wobi(const PlacementProblem& problem, const AtomCache& cache, const SampleSet& start,
                            const SolverConfig& config = {}) {
  const int d = cache.dim();
  if (static_cast<int>(start.size()) != problem.budget) {
    throw Error(ErrorKind::InvalidArgument, "initial set must have exactly s vertices");
  }
  TraceInverseKernel kernel(cache.band_dim());
  std::vector<char> in_set(static_cast<std::size_t>(d), 0);
  for (int v : start.vertices) in_set[static_cast<std::size_t>(v)] = 1;
  Eigen::VectorXd current = detail::packed_sum(cache, start.vertices);
  RankedScore current_score = ranked_score(cache, current, kernel);

  int passes = 0;
  while (true) {
    ++passes;
    int v_out = -1;
    RankedScore best_out;
    for (int v = 0; v < d; ++v) {
      if (!in_set[static_cast<std::size_t>(v)]) continue;
      const RankedScore score = ranked_score(cache, current - cache.packed().col(v), kernel);
      if (v_out < 0 || score.better_than(best_out, config.tie_tol)) {
        best_out = score;
        v_out = v;
      }
    }
    const Eigen::VectorXd reduced = current - cache.packed().col(v_out);
    int v_in = -1;
    RankedScore best_in;
    for (int v = 0; v < d; ++v) {
      if (in_set[static_cast<std::size_t>(v)] && v != v_out) continue;
      const RankedScore score = ranked_score(cache, reduced + cache.packed().col(v), kernel);
      if (v_in < 0 || score.better_than(best_in, config.tie_tol)) {
        best_in = score;
        v_in = v;
      }
    }
    if (v_in == v_out || !best_in.better_than(current_score, config.improvement_tol)) break;
    in_set[static_cast<std::size_t>(v_out)] = 0;
    in_set[static_cast<std::size_t>(v_in)] = 1;
    current = reduced + cache.packed().col(v_in);
    current_score = best_in;
  }
  std::vector<int> chosen;
  for (int v = 0; v < d; ++v)
    if (in_set[static_cast<std::size_t>(v)]) chosen.push_back(v);
  PlacementResult out;
  out.omega = SampleSet{chosen};
  out.objective = mse_objective(cache, out.omega);
  out.algorithm = "wobi";
  out.iterations = passes;
  return out;
}

/// s distinct vertices drawn uniformly from `seed`.
inline SampleSet random_subset(int d, int s, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> all(static_cast<std::size_t>(d));
  std::iota(all.begin(), all.end(), 0);
  rng.shuffle(all.begin(), all.end());
  all.resize(static_cast<std::size_t>(s));
  std::sort(all.begin(), all.end());
  return SampleSet{all};
}

// ---------------------------------------------------------------------------
// Relaxations

/// Euclidean projection onto {x in [0,1]^d : sum x = s}: x = clip(y - tau, 0, 1)
/// with tau located exactly on the piecewise-linear breakpoint path.
inline Eigen::VectorXd project_capped_simplex(const Eigen::VectorXd& y, double s) {
  const Eigen::Index d = y.size();
  if (s < 0.0 || s > static_cast<double>(d)) throw Error(ErrorKind::InvalidArgument, "budget outside [0, d]");
  auto mass = [&](double tau) { return (y.array() - tau).min(1.0).max(0.0).sum(); };

  std::vector<double> breaks;
  breaks.reserve(static_cast<std::size_t>(2 * d));
  for (Eigen::Index i = 0; i < d; ++i) {
    breaks.push_back(y(i) - 1.0);
    breaks.push_back(y(i));
  }
  std::sort(breaks.begin(), breaks.end());
  // mass() is nonincreasing in tau: d at breaks.front(), 0 at breaks.back().
  double tau = breaks.front();
  if (s <= 0.0) {
    tau = breaks.back();
  } else if (s < static_cast<double>(d)) {
    std::size_t lo = 0;
    std::size_t hi = breaks.size() - 1;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      if (mass(breaks[mid]) >= s) lo = mid; else hi = mid;
    }
    const double m_lo = mass(breaks[lo]);
    const double m_hi = mass(breaks[hi]);
    tau = m_lo == m_hi ? breaks[lo] : breaks[lo] + (m_lo - s) / (m_lo - m_hi) * (breaks[hi] - breaks[lo]);
  }
  return (y.array() - tau).min(1.0).max(0.0).matrix();
}

struct RelaxedSolution {
  Eigen::VectorXd x;
  double value = kInfinity;  // full penalized objective at x
  int iterations = 0;
};

struct RelaxedTerms {
  std::optional<Eigen::VectorXd> linear;  // adds <linear, x>
  std::optional<double> exp_delta;        // adds sum_v exp(-x_v / delta)
};

namespace detail {

struct PenalizedObjective {
  const AtomCache& cache;
  const RelaxedTerms& terms;
  TraceInverseKernel kernel;

  double value(const Eigen::VectorXd& x) {
    const double trace = kernel.evaluate(cache.packed() * x);
    if (!std::isfinite(trace)) return kInfinity;
    return trace + extra(x);
  }

  double extra(const Eigen::VectorXd& x) const {
    double out = 0.0;
    if (terms.linear) out += terms.linear->dot(x);
    if (terms.exp_delta) out += (-x.array() / *terms.exp_delta).exp().sum();
    return out;
  }

  ValueGradient value_gradient(const Eigen::VectorXd& x) {
    ValueGradient vg = mse_value_gradient(cache, x, kernel);
    if (!std::isfinite(vg.value)) return vg;
    vg.value += extra(x);
    if (terms.linear) vg.gradient += *terms.linear;
    if (terms.exp_delta) {
      const double delta = *terms.exp_delta;
      vg.gradient.array() -= (-x.array() / delta).exp() / delta;
    }
    return vg;
  }
};

}  // namespace detail

/// Projected gradient over the capped simplex with Armijo backtracking
/// (constant 1e-4, step halving). Trial steps start from the
/// Barzilai-Borwein estimate. Starts at (s/d) 1 unless `start` is given.
inline RelaxedSolution solve_relaxed(const PlacementProblem& problem, const AtomCache& cache, const SolverConfig& config,
                                     const RelaxedTerms& terms = {},
                                     const std::optional<Eigen::VectorXd>& start = std::nullopt) {
  const int d = cache.dim();
  const double s = problem.budget;
  if (!std::isfinite(mse_objective(cache, Eigen::VectorXd::Ones(d)))) {
    throw Error(ErrorKind::RelaxationInfeasible, "C_W(1) is singular; no feasible interior point");
  }
  detail::PenalizedObjective objective{cache, terms, TraceInverseKernel(cache.band_dim())};
  Eigen::VectorXd x = start ? project_capped_simplex(*start, s) : Eigen::VectorXd::Constant(d, s / d);
  ValueGradient current = objective.value_gradient(x);
  if (!std::isfinite(current.value)) {
    x = Eigen::VectorXd::Constant(d, s / d);
    current = objective.value_gradient(x);
  }

  constexpr double kArmijo = 1e-4;
  double step = 1.0 / std::max(1e-12, current.gradient.lpNorm<Eigen::Infinity>());
  int iter = 0;
  while (iter < config.pg_max_iter) {
    ++iter;
    Eigen::VectorXd next;
    double next_value = kInfinity;
    double t = step;
    bool accepted = false;
    for (int halvings = 0; halvings < 80; ++halvings, t *= 0.5) {
      next = project_capped_simplex(x - t * current.gradient, s);
      next_value = objective.value(next);
      if (std::isfinite(next_value) && next_value <= current.value + kArmijo * current.gradient.dot(next - x)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    const double moved = (next - x).lpNorm<Eigen::Infinity>();
    ValueGradient next_vg = objective.value_gradient(next);
    const Eigen::VectorXd dx = next - x;
    const Eigen::VectorXd dg = next_vg.gradient - current.gradient;
    const double curvature = dx.dot(dg);
    step = curvature > 0.0 ? dx.squaredNorm() / curvature : 2.0 * t;
    x = std::move(next);
    current = std::move(next_vg);
    if (moved <= config.pg_tol) break;
  }
  return {x, current.value, iter};
}

/// Outer iterations of the linearized-concave-part scheme
///   x_{n+1} = argmin tr(C_W(x)^{-1}) - 2 weight_n <x, x_n>
/// shared by the norm penalty (constant weight) and the fractional penalty
/// (weight_n = F(x_n) / ||x_n||^2).
struct PenaltyTrace {
  Eigen::VectorXd x;
  int outer_iterations = 0;
  int inner_iterations = 0;
  std::vector<Eigen::VectorXd> iterates;  // x_0, x_1, ...
  std::vector<double> weights;            // weight used to produce x_{n+1}
};

using WeightRule = std::function<double(const Eigen::VectorXd& x, double trace_inverse)>;

inline PenaltyTrace penalty_iterations(const PlacementProblem& problem, const AtomCache& cache, const SolverConfig& config,
                                       const WeightRule& weight_rule) {
  const int d = cache.dim();
  PenaltyTrace trace;
  Eigen::VectorXd x = Eigen::VectorXd::Constant(d, static_cast<double>(problem.budget) / d);
  if (!std::isfinite(mse_objective(cache, Eigen::VectorXd::Ones(d)))) {
    throw Error(ErrorKind::RelaxationInfeasible, "C_W(1) is singular; no feasible interior point");
  }
  trace.iterates.push_back(x);
  for (int n = 0; n < config.outer_max_iter; ++n) {
    const double weight = weight_rule(x, mse_objective(cache, x));
    RelaxedTerms terms;
    terms.linear = Eigen::VectorXd(-2.0 * weight * x);
    RelaxedSolution inner = solve_relaxed(problem, cache, config, terms, x);
    trace.inner_iterations += inner.iterations;
    trace.weights.push_back(weight);
    ++trace.outer_iterations;
    const double moved = (inner.x - x).lpNorm<Eigen::Infinity>();
    x = std::move(inner.x);
    trace.iterates.push_back(x);
    if (moved <= config.outer_tol) break;
  }
  trace.x = x;
  return trace;
}

/// G_lambda(x) = tr(C_W(x)^{-1}) + lambda (||x||_1 - ||x||_2^2).
inline double norm_penalty_objective(const AtomCache& cache, const Eigen::VectorXd& x, double lambda) {
  return mse_objective(cache, x) + lambda * (x.lpNorm<1>() - x.squaredNorm());
}

/// G_2(x) = ||x||_2^2 / (||x||_1 tr(C_W(x)^{-1})), maximized by the fractional scheme.
inline double fractional_ratio(const AtomCache& cache, const Eigen::VectorXd& x) {
  return x.squaredNorm() / (x.lpNorm<1>() * mse_objective(cache, x));
}

inline PenaltyTrace cccp_norm_penalty(const PlacementProblem& problem, const AtomCache& cache, const SolverConfig& config) {
  const double lambda = config.dc_weight(problem.budget);
  return penalty_iterations(problem, cache, config, [lambda](const Eigen::VectorXd&, double) { return lambda; });
}

inline PenaltyTrace fractional_penalty(const PlacementProblem& problem, const AtomCache& cache, const SolverConfig& config) {
  return penalty_iterations(problem, cache, config,
                            [](const Eigen::VectorXd& x, double f) { return f / x.squaredNorm(); });
}

inline RelaxedSolution exp_penalty(const PlacementProblem& problem, const AtomCache& cache, const SolverConfig& config) {
  RelaxedTerms terms;
  terms.exp_delta = config.delta_exp;
  return solve_relaxed(problem, cache, config, terms);
}

/// Indices of the s largest coordinates, ties to the smaller index.
inline SampleSet round_to_support(const Eigen::VectorXd& x, int s) {
  if (s < 0 || s > x.size()) throw Error(ErrorKind::InvalidArgument, "budget outside [0, d]");
  std::vector<int> order(static_cast<std::size_t>(x.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return x(a) > x(b); });
  order.resize(static_cast<std::size_t>(s));
  std::sort(order.begin(), order.end());
  return SampleSet{order};
}

// ---------------------------------------------------------------------------
// Named algorithms

inline const std::vector<std::string>& algorithm_names() {
  static const std::vector<std::string> names{"brute", "greedy", "wobi", "relax", "dc", "frac",
                                              "exp", "dc+wobi", "frac+wobi", "exp+wobi", "relax+wobi"};
  return names;
}

/// Runs a named algorithm and times it with a monotonic clock. `wobi` starts
/// from a random s-subset drawn from `config.seed`; "<relax>+wobi" starts
/// Wo-Bi from the rounded relaxation.
inline PlacementResult run_algorithm(std::string_view name, const PlacementProblem& problem, const AtomCache& cache,
                                     const SolverConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  const int s = problem.budget;
  PlacementResult out;

  std::string_view base = name;
  bool then_wobi = false;
  if (const auto plus = name.find('+'); plus != std::string_view::npos) {
    if (name.substr(plus) != "+wobi") throw Error(ErrorKind::InvalidArgument, "unknown algorithm '" + std::string(name) + "'");
    base = name.substr(0, plus);
    then_wobi = true;
  }

  if (base == "brute" && !then_wobi) {
    out = brute_force(problem, cache, config);
  } else if (base == "greedy" && !then_wobi) {
    out = greedy_best_in(problem, cache, config);
  } else if (base == "wobi" && !then_wobi) {
    out = wobi(problem, cache, random_subset(cache.dim(), s, config.seed), config);
  } else if (base == "relax" || base == "dc" || base == "frac" || base == "exp") {
    Eigen::VectorXd x;
    int iterations = 0;
    if (base == "relax") {
      auto sol = solve_relaxed(problem, cache, config);
      x = sol.x;
      iterations = sol.iterations;
    } else if (base == "exp") {
      auto sol = exp_penalty(problem, cache, config);
      x = sol.x;
      iterations = sol.iterations;
    } else {
      auto tr = base == "dc" ? cccp_norm_penalty(problem, cache, config) : fractional_penalty(problem, cache, config);
      x = tr.x;
      iterations = tr.outer_iterations;
    }
    out.omega = round_to_support(x, s);
    out.objective = mse_objective(cache, out.omega);
    out.iterations = iterations;
    out.relaxed_x = x;
    if (then_wobi) {
      PlacementResult refined = wobi(problem, cache, out.omega, config);
      out.omega = refined.omega;
      out.objective = refined.objective;
      out.iterations += refined.iterations;
    }
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown algorithm '" + std::string(name) + "'");
  }
  out.algorithm = std::string(name);
  out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace dsgraph
