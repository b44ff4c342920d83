#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dsgraph/error.hpp"
#include "dsgraph/recovery.hpp"
#include "dsgraph/spectral.hpp"

namespace dsgraph {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Number of uniformly spaced time samples: `steps` (finite) or unbounded.
struct TimeMode {
  bool infinite = true;
  int steps = 0;

  static TimeMode Infinite() { return {true, 0}; }
  static TimeMode Finite(int steps) {
    if (steps < 1) throw Error(ErrorKind::InvalidArgument, "finite time mode needs L >= 1");
    return {false, steps};
  }

  std::string to_string() const { return infinite ? "infinite" : "finite:" + std::to_string(steps); }
};

/// Accepts "infinite" or "finite:<L>".
inline TimeMode parse_time_mode(std::string_view text) {
  if (text == "infinite") return TimeMode::Infinite();
  constexpr std::string_view prefix = "finite:";
  long long steps = 0;
  if (text.substr(0, prefix.size()) == prefix && detail::parse_int(text.substr(prefix.size()), steps) && steps >= 1 &&
      steps <= 1'000'000) {
    return TimeMode::Finite(static_cast<int>(steps));
  }
  throw Error(ErrorKind::InvalidArgument, "time mode must be 'infinite' or 'finite:<L>'");
}

struct PlacementProblem {
  GraphOperator op;
  PWSpace pw;
  int budget = 1;
  TimeMode time_mode = TimeMode::Infinite();

  int dim() const { return op.dim(); }
};

/// Per-vertex frame-matrix atoms in Paley-Wiener eigen-coordinates:
///   M_v(i, j) = coeff(lambda_i, lambda_j) * b_vi * b_vj,
/// so that C_W(x) = sum_v x_v M_v. The atoms are also kept packed (upper
/// triangle, column-major) as the columns of `packed` for fast summation.
class AtomCache {
 public:
  int dim() const noexcept { return d_; }
  int band_dim() const noexcept { return m_; }
  const Eigen::MatrixXd& atom(int v) const { return atoms_.at(static_cast<std::size_t>(v)); }
  const Eigen::MatrixXd& packed() const noexcept { return packed_; }
  const Eigen::MatrixXd& coefficients() const noexcept { return coeff_; }

  static Eigen::Index packed_size(int m) { return static_cast<Eigen::Index>(m) * (m + 1) / 2; }
  static Eigen::Index packed_index(int i, int j) {  // requires i <= j
    return static_cast<Eigen::Index>(j) * (j + 1) / 2 + i;
  }

  Eigen::MatrixXd unpack(const Eigen::VectorXd& p) const {
    Eigen::MatrixXd c(m_, m_);
    for (int j = 0; j < m_; ++j)
      for (int i = 0; i <= j; ++i) c(i, j) = c(j, i) = p(packed_index(i, j));
    return c;
  }

 private:
  friend AtomCache build_atoms(const PlacementProblem& problem);
  int d_ = 0;
  int m_ = 0;
  std::vector<Eigen::MatrixXd> atoms_;
  Eigen::MatrixXd packed_;
  Eigen::MatrixXd coeff_;
};

/// Time-summed weight of the (i, j) eigen-pair: sum_{n<L} (l_i l_j)^n, or
/// 1 / (1 - l_i l_j) for infinitely many samples.
inline double time_coefficient(double lambda_i, double lambda_j, const TimeMode& mode) {
  const double p = lambda_i * lambda_j;
  if (mode.infinite) return 1.0 / (1.0 - p);
  if (p == 1.0) return static_cast<double>(mode.steps);
  if (p == 0.0) return 1.0;
  return std::expm1(mode.steps * std::log(p)) / (p - 1.0);
}

inline AtomCache build_atoms(const PlacementProblem& problem) {
  const auto& op = problem.op;
  const int d = op.dim();
  const int m = problem.pw.dim();
  if (m < 1 || m > d) throw Error(ErrorKind::InvalidArgument, "Paley-Wiener dimension out of range");
  if (problem.budget < 1 || problem.budget > d) throw Error(ErrorKind::InvalidArgument, "budget s must lie in [1, d]");
  if (problem.time_mode.infinite) {
    for (Eigen::Index i = 0; i < op.lambda.size(); ++i) {
      if (!(op.lambda(i) > 0.0 && op.lambda(i) < 1.0)) {
        throw Error(ErrorKind::SpectrumOutOfRange,
                    "infinite time mode needs every eigenvalue in (0,1); lambda[" + std::to_string(i) +
                        "] = " + std::to_string(op.lambda(i)));
      }
    }
  }

  AtomCache cache;
  cache.d_ = d;
  cache.m_ = m;
  cache.coeff_.resize(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      cache.coeff_(i, j) = time_coefficient(op.lambda(problem.pw.indices[static_cast<std::size_t>(i)]),
                                            op.lambda(problem.pw.indices[static_cast<std::size_t>(j)]),
                                            problem.time_mode);
    }
  }
  const Eigen::MatrixXd rows = pw_rows(op, problem.pw);
  cache.atoms_.reserve(static_cast<std::size_t>(d));
  cache.packed_.resize(AtomCache::packed_size(m), d);
  for (int v = 0; v < d; ++v) {
    const Eigen::VectorXd b = rows.col(v);
    Eigen::MatrixXd atom = cache.coeff_.cwiseProduct(b * b.transpose());
    for (int j = 0; j < m; ++j)
      for (int i = 0; i <= j; ++i) cache.packed_(AtomCache::packed_index(i, j), v) = atom(i, j);
    cache.atoms_.push_back(std::move(atom));
  }
  return cache;
}

/// C_W(x) = sum_v x_v M_v.
inline Eigen::MatrixXd c_matrix(const AtomCache& cache, const Eigen::VectorXd& x) {
  if (x.size() != cache.dim()) throw Error(ErrorKind::InvalidArgument, "x has wrong dimension");
  return cache.unpack(cache.packed() * x);
}

inline Eigen::MatrixXd c_matrix(const AtomCache& cache, const SampleSet& omega) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(AtomCache::packed_size(cache.band_dim()));
  for (int v : omega.vertices) p += cache.packed().col(v);
  return cache.unpack(p);
}

/// Scratch space for repeated trace-inverse evaluations of m x m SPD matrices.
/// One instance per thread.
class TraceInverseKernel {
 public:
  explicit TraceInverseKernel(int m) : m_(m), factor_(static_cast<std::size_t>(m) * m), inverse_(static_cast<std::size_t>(m) * m) {}

  /// tr(C^{-1}) for C given packed (upper, column-major), or +inf when
  /// the smallest eigenvalue falls below 1e-10 * (1 + tr C).
  double evaluate(const double* packed) {
    if (!factorize(packed)) return kInfinity;
    return finish(packed);
  }

  double evaluate(const Eigen::VectorXd& packed) { return evaluate(packed.data()); }

  /// Explicit inverse from the last successful `evaluate`.
  Eigen::MatrixXd last_inverse() const {
    Eigen::MatrixXd inv = Eigen::MatrixXd::Zero(m_, m_);
    // C^{-1} = X^T X with X = L^{-1} lower triangular.
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j <= i; ++j) {
        double acc = 0.0;
        for (int k = i; k < m_; ++k) acc += x(k, i) * x(k, j);
        inv(i, j) = inv(j, i) = acc;
      }
    return inv;
  }

 private:
  double& l(int i, int j) { return factor_[static_cast<std::size_t>(i) * m_ + j]; }
  double& x(int i, int j) { return inverse_[static_cast<std::size_t>(i) * m_ + j]; }
  double x(int i, int j) const { return inverse_[static_cast<std::size_t>(i) * m_ + j]; }

  bool factorize(const double* packed) {
    for (int j = 0; j < m_; ++j) {
      double diag = packed[AtomCache::packed_index(j, j)];
      for (int k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
      if (!(diag > 0.0)) return false;
      const double ljj = std::sqrt(diag);
      l(j, j) = ljj;
      for (int i = j + 1; i < m_; ++i) {
        double acc = packed[AtomCache::packed_index(j, i)];
        for (int k = 0; k < j; ++k) acc -= l(i, k) * l(j, k);
        l(i, j) = acc / ljj;
      }
    }
    return true;
  }

  double finish(const double* packed) {
    double trace_inv = 0.0;
    for (int c = 0; c < m_; ++c) {
      // Column c of L^{-1} by forward substitution.
      for (int i = 0; i < c; ++i) x(i, c) = 0.0;
      x(c, c) = 1.0 / l(c, c);
      trace_inv += x(c, c) * x(c, c);
      for (int i = c + 1; i < m_; ++i) {
        double acc = 0.0;
        for (int k = c; k < i; ++k) acc -= l(i, k) * x(k, c);
        x(i, c) = acc / l(i, i);
        trace_inv += x(i, c) * x(i, c);
      }
    }
    double trace = 0.0;
    for (int j = 0; j < m_; ++j) trace += packed[AtomCache::packed_index(j, j)];
    const double threshold = 1e-10 * (1.0 + trace);
    // lambda_min lies in [1/tr(C^-1), m/tr(C^-1)].
    if (1.0 / trace_inv >= threshold) return trace_inv;
    if (m_ / trace_inv < threshold) return kInfinity;
    Eigen::MatrixXd c(m_, m_);
    for (int j = 0; j < m_; ++j)
      for (int i = 0; i <= j; ++i) c(i, j) = c(j, i) = packed[AtomCache::packed_index(i, j)];
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c, Eigen::EigenvaluesOnly);
    return eig.eigenvalues()(0) < threshold ? kInfinity : trace_inv;
  }

  int m_;
  std::vector<double> factor_;
  std::vector<double> inverse_;
};

/// tr(C_W(x)^{-1}) with sigma^2 = 1; +inf off the invertible set.
inline double mse_objective(const AtomCache& cache, const Eigen::VectorXd& x) {
  if (x.size() != cache.dim()) throw Error(ErrorKind::InvalidArgument, "x has wrong dimension");
  const Eigen::VectorXd p = cache.packed() * x;
  TraceInverseKernel kernel(cache.band_dim());
  return kernel.evaluate(p);
}

inline double mse_objective(const AtomCache& cache, const SampleSet& omega) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(AtomCache::packed_size(cache.band_dim()));
  for (int v : omega.vertices) p += cache.packed().col(v);
  TraceInverseKernel kernel(cache.band_dim());
  return kernel.evaluate(p);
}

/// Objective and gradient together; g_v = -tr(C^{-1} M_v C^{-1}).
struct ValueGradient {
  double value = kInfinity;
  Eigen::VectorXd gradient;
};

inline ValueGradient mse_value_gradient(const AtomCache& cache, const Eigen::VectorXd& x, TraceInverseKernel& kernel) {
  const Eigen::VectorXd p = cache.packed() * x;
  ValueGradient out;
  out.value = kernel.evaluate(p);
  if (!std::isfinite(out.value)) return out;
  const Eigen::MatrixXd inv = kernel.last_inverse();
  const Eigen::MatrixXd inv2 = inv * inv;
  const int m = cache.band_dim();
  Eigen::VectorXd w(AtomCache::packed_size(m));
  for (int j = 0; j < m; ++j)
    for (int i = 0; i <= j; ++i) w(AtomCache::packed_index(i, j)) = (i == j ? 1.0 : 2.0) * inv2(i, j);
  out.gradient = -(cache.packed().transpose() * w);
  return out;
}

inline Eigen::VectorXd mse_gradient(const AtomCache& cache, const Eigen::VectorXd& x) {
  if (x.size() != cache.dim()) throw Error(ErrorKind::InvalidArgument, "x has wrong dimension");
  TraceInverseKernel kernel(cache.band_dim());
  auto vg = mse_value_gradient(cache, x, kernel);
  if (!std::isfinite(vg.value)) throw Error(ErrorKind::SingularPoint, "C_W(x) is singular");
  return vg.gradient;
}

/// Ordering key that extends the objective to singular frame matrices:
/// higher rank first, then smaller trace of the pseudo-inverse on the range.
/// For invertible C this is (m, tr C^{-1}).
struct RankedScore {
  int rank = 0;
  double pinv_trace = kInfinity;

  bool better_than(const RankedScore& other, double rel_tol) const {
    if (rank != other.rank) return rank > other.rank;
    if (!std::isfinite(other.pinv_trace)) return std::isfinite(pinv_trace);
    return pinv_trace < other.pinv_trace - rel_tol * (1.0 + std::abs(other.pinv_trace));
  }
};

inline RankedScore ranked_score(const AtomCache& cache, const Eigen::VectorXd& packed, TraceInverseKernel& kernel) {
  const int m = cache.band_dim();
  const double value = kernel.evaluate(packed);
  if (std::isfinite(value)) return {m, value};
  const Eigen::MatrixXd c = cache.unpack(packed);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c, Eigen::EigenvaluesOnly);
  const double threshold = 1e-10 * (1.0 + c.trace());
  RankedScore score{0, 0.0};
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
    const double mu = eig.eigenvalues()(i);
    if (mu >= threshold) {
      ++score.rank;
      score.pinv_trace += 1.0 / mu;
    }
  }
  if (score.rank == m) score.rank = m - 1;  // below-threshold but factorizable edge case
  return score;
}

}  // namespace dsgraph
