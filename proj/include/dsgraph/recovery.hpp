#pragma once

#include <algorithm>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dsgraph/error.hpp"
#include "dsgraph/spectral.hpp"

namespace dsgraph {

/// Sorted, deduplicated set of sampled vertices.
struct SampleSet {
  std::vector<int> vertices;

  std::size_t size() const noexcept { return vertices.size(); }
  bool empty() const noexcept { return vertices.empty(); }
  bool contains(int v) const { return std::binary_search(vertices.begin(), vertices.end(), v); }

  friend bool operator==(const SampleSet&, const SampleSet&) = default;
};

inline SampleSet make_sample_set(std::vector<int> vertices, int d) {
  for (int v : vertices) {
    if (v < 0 || v >= d) throw Error(ErrorKind::IndexOutOfRange, "sample vertex " + std::to_string(v));
  }
  std::sort(vertices.begin(), vertices.end());
  vertices.erase(std::unique(vertices.begin(), vertices.end()), vertices.end());
  return SampleSet{std::move(vertices)};
}

/// Parses a comma-separated vertex list such as "0,4,7".
inline SampleSet parse_sample_set(std::string_view text, int d) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto token = detail::trim(text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    long long v = 0;
    if (!detail::parse_int(token, v)) throw Error(ErrorKind::InvalidArgument, "invalid vertex '" + std::string(token) + "'");
    out.push_back(static_cast<int>(v));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return make_sample_set(std::move(out), d);
}

/// Diagonal 0/1 sub-sampling matrix.
inline Eigen::MatrixXd subsampling_matrix(const SampleSet& omega, int d) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(d, d);
  for (int v : omega.vertices) s(v, v) = 1.0;
  return s;
}

/// Singular values below 1e-9 * max(largest singular value, scale) count as zero.
inline int numerical_rank(const Eigen::MatrixXd& m, double scale = 0.0) {
  if (m.size() == 0) return 0;
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  const double cutoff = 1e-9 * std::max(sv(0), scale);
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) rank += sv(i) > cutoff ? 1 : 0;
  return rank;
}

namespace detail {

inline Eigen::VectorXd group_block(const std::vector<int>& group, const Eigen::VectorXd& coords) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(group.size()));
  for (std::size_t r = 0; r < group.size(); ++r) out(static_cast<Eigen::Index>(r)) = coords(group[r]);
  return out;
}

inline int count_visible_groups(const GraphOperator& op, const Eigen::VectorXd& b, std::size_t num_groups) {
  const Eigen::VectorXd coords = op.spectral.basis * b;
  const double tol = 1e-10 * (1.0 + b.norm());
  int r = 0;
  for (std::size_t j = 0; j < num_groups; ++j) {
    if (group_block(op.groups[j], coords).norm() > tol) ++r;
  }
  return r;
}

}  // namespace detail

/// Degree of the minimal annihilating polynomial of the vertex-domain vector
/// `b` under A: the number of eigenvalue groups on which b has a non-zero
/// projection.
inline int annihilator_degree(const GraphOperator& op, const Eigen::VectorXd& b) {
  if (b.size() != op.dim()) throw Error(ErrorKind::InvalidArgument, "vector dimension mismatch");
  return detail::count_visible_groups(op, b, op.groups.size());
}

/// Same count restricted to the groups spanning `pw` (the D_k-annihilator of
/// the vector's eigen-coordinates inside the band).
inline int annihilator_degree(const GraphOperator& op, const Eigen::VectorXd& b, const PWSpace& pw) {
  if (b.size() != op.dim()) throw Error(ErrorKind::InvalidArgument, "vector dimension mismatch");
  return detail::count_visible_groups(op, b, static_cast<std::size_t>(pw.num_groups));
}

/// Stacked space-time sampling matrix, (time_steps * d) x m. Block n is
/// S_omega A^n I_W, i.e. the samples at time n of the evolution started from
/// a PW coefficient vector.
inline Eigen::MatrixXd spacetime_matrix(const GraphOperator& op, const PWSpace& pw, const SampleSet& omega, int time_steps) {
  if (time_steps < 1) throw Error(ErrorKind::InvalidArgument, "time steps must be >= 1");
  const int d = op.dim();
  const int m = pw.dim();
  const Eigen::MatrixXd rows = pw_rows(op, pw);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(time_steps) * d, m);
  Eigen::VectorXd powers = Eigen::VectorXd::Ones(m);
  Eigen::VectorXd band_lambda(m);
  for (int r = 0; r < m; ++r) band_lambda(r) = op.lambda(pw.indices[static_cast<std::size_t>(r)]);
  for (int n = 0; n < time_steps; ++n) {
    for (int v : omega.vertices) {
      out.row(static_cast<Eigen::Index>(n) * d + v) = rows.col(v).cwiseProduct(powers).transpose();
    }
    powers = powers.cwiseProduct(band_lambda);
  }
  return out;
}

struct GroupRank {
  int rank = 0;
  int dim = 0;
};

struct RecoverabilityReport {
  bool recoverable = false;
  std::vector<GroupRank> group_ranks;   // one per group inside the band
  std::vector<int> band_degrees;        // r_1i: D_k-annihilator degree of b_1i, per sampled vertex
  std::vector<int> full_degrees;        // A-annihilator degree of e_i, per sampled vertex
  int time_steps = 0;                   // L used for the stacked matrix
  int stacked_rank = 0;
  int pw_dim = 0;
};

/// Decides whether every signal in `pw` is determined by its space-time
/// samples on `omega`. Evaluates the per-group frame condition (in both the
/// eigen- and vertex-domain forms) and the left-invertibility of the stacked
/// matrix, and throws ConditionMismatch if they disagree.
inline RecoverabilityReport check_recoverable(const GraphOperator& op, const PWSpace& pw, const SampleSet& omega) {
  if (omega.empty()) throw Error(ErrorKind::InvalidArgument, "sample set is empty");
  const int d = op.dim();
  for (int v : omega.vertices) {
    if (v < 0 || v >= d) throw Error(ErrorKind::IndexOutOfRange, "sample vertex " + std::to_string(v));
  }
  RecoverabilityReport report;
  report.pw_dim = pw.dim();

  const auto& basis = op.spectral.basis;
  const auto k = static_cast<std::size_t>(pw.num_groups);
  bool frames = true;
  for (std::size_t j = 0; j < k; ++j) {
    const auto& group = op.groups[j];
    const auto gdim = static_cast<Eigen::Index>(group.size());
    // Eigen-domain form: the group's coordinates of b_1i for i in omega.
    Eigen::MatrixXd eig_form(gdim, static_cast<Eigen::Index>(omega.size()));
    Eigen::MatrixXd group_rows(gdim, d);
    for (Eigen::Index r = 0; r < gdim; ++r) group_rows.row(r) = basis.row(group[static_cast<std::size_t>(r)]);
    for (std::size_t c = 0; c < omega.size(); ++c) {
      eig_form.col(static_cast<Eigen::Index>(c)) = group_rows.col(omega.vertices[c]);
    }
    // Vertex-domain form: Q_j e_i.
    const Eigen::MatrixXd vertex_form = group_rows.transpose() * eig_form;
    const int rank_eig = numerical_rank(eig_form, 1.0);
    const int rank_vertex = numerical_rank(vertex_form, 1.0);
    if (rank_eig != rank_vertex) {
      throw Error(ErrorKind::ConditionMismatch, "frame ranks differ between eigen and vertex forms in group " +
                                                    std::to_string(j));
    }
    report.group_ranks.push_back({rank_eig, static_cast<int>(gdim)});
    frames = frames && rank_eig == static_cast<int>(gdim);
  }

  int depth = 1;
  for (int v : omega.vertices) {
    const Eigen::VectorXd e = Eigen::VectorXd::Unit(d, v);
    report.band_degrees.push_back(annihilator_degree(op, e, pw));
    report.full_degrees.push_back(annihilator_degree(op, e));
    depth = std::max(depth, report.band_degrees.back());
  }
  report.time_steps = depth;
  report.stacked_rank = numerical_rank(spacetime_matrix(op, pw, omega, depth), 1.0);
  const bool left_invertible = report.stacked_rank == pw.dim();
  if (left_invertible != frames) {
    throw Error(ErrorKind::ConditionMismatch, "frame condition and stacked-matrix rank disagree (rank " +
                                                  std::to_string(report.stacked_rank) + " of " +
                                                  std::to_string(pw.dim()) + ")");
  }
  report.recoverable = frames;
  return report;
}

/// Minimum-norm least-squares solve of stacked * x = samples.
inline Eigen::VectorXd least_squares_reconstruct(const Eigen::MatrixXd& stacked, const Eigen::VectorXd& samples) {
  return stacked.completeOrthogonalDecomposition().solve(samples);
}

}  // namespace dsgraph
