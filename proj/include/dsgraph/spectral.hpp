#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dsgraph/error.hpp"
#include "dsgraph/graph.hpp"
#include "dsgraph/random.hpp"

namespace dsgraph {

inline double max_abs(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

/// Orthonormal eigenbasis of a symmetric matrix.
///
/// `basis` stores eigenvectors as ROWS, so the factored matrix is
/// `basis.transpose() * eigenvalues.asDiagonal() * basis`, and entry
/// `basis(i, v)` is the i-th eigenvector evaluated at vertex v.
struct SpectralBasis {
  Eigen::VectorXd eigenvalues;  // ascending
  Eigen::MatrixXd basis;        // rows are eigenvectors

  int dim() const { return static_cast<int>(eigenvalues.size()); }
};

/// Cyclic Jacobi eigensolver. Deterministic for a fixed input: rotations
/// follow the fixed (p, q) row-cyclic order, equal eigenvalues keep their
/// post-sweep order, and each eigenvector's first significant component is
/// made positive.
inline SpectralBasis eig_sym(const Eigen::MatrixXd& matrix, int max_sweeps = 100) {
  const Eigen::Index n = matrix.rows();
  if (matrix.cols() != n) throw Error(ErrorKind::InvalidArgument, "eig_sym needs a square matrix");
  const double scale = max_abs(matrix);
  if (max_abs(matrix - matrix.transpose()) > 1e-10 * (1.0 + scale)) {
    throw Error(ErrorKind::InvalidArgument, "eig_sym needs a symmetric matrix");
  }

  Eigen::MatrixXd a = 0.5 * (matrix + matrix.transpose());
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double frob = a.norm();
  const double target = std::pow(1e-13 * frob, 2);

  auto off_diagonal = [&] {
    double off = 0.0;
    for (Eigen::Index q = 1; q < n; ++q)
      for (Eigen::Index p = 0; p < q; ++p) off += 2.0 * a(p, q) * a(p, q);
    return off;
  };

  bool converged = off_diagonal() <= target;
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
    converged = off_diagonal() <= target;
  }
  if (!converged) {
    // Accept a slower tail as long as the contract-level residual holds.
    const double residual = std::sqrt(off_diagonal());
    if (residual > 1e-10 * (1.0 + frob)) {
      throw Error(ErrorKind::NoConvergence, "Jacobi sweeps exhausted, off-diagonal norm " +
                                                std::to_string(residual));
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });

  SpectralBasis out;
  out.eigenvalues.resize(n);
  out.basis.resize(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const Eigen::Index col = order[static_cast<std::size_t>(r)];
    out.eigenvalues(r) = a(col, col);
    Eigen::VectorXd vec = v.col(col);
    const double peak = vec.cwiseAbs().maxCoeff();
    for (Eigen::Index k = 0; k < n; ++k) {
      if (std::abs(vec(k)) > 1e-9 * peak) {
        if (vec(k) < 0) vec = -vec;
        break;
      }
    }
    out.basis.row(r) = vec.transpose();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Operator eigenvalue sampling

enum class EigDistribution { Uniform01, Triangular, Beta, Exp1Mapped };

inline std::string to_string(EigDistribution dist) {
  switch (dist) {
    case EigDistribution::Uniform01: return "uniform01";
    case EigDistribution::Triangular: return "triangular";
    case EigDistribution::Beta: return "beta";
    case EigDistribution::Exp1Mapped: return "exp1";
  }
  return "unknown";
}

inline EigDistribution parse_eig_distribution(std::string_view name) {
  if (name == "uniform01" || name == "uniform") return EigDistribution::Uniform01;
  if (name == "triangular") return EigDistribution::Triangular;
  if (name == "beta") return EigDistribution::Beta;
  if (name == "exp1" || name == "exp") return EigDistribution::Exp1Mapped;
  throw Error(ErrorKind::InvalidArgument, "unknown eigenvalue distribution '" + std::string(name) + "'");
}

/// Draws one value from `dist`, mapped into the open interval (0, 1).
/// Triangular(0, 1/2, 1) and Beta(1/2, 1/2) use inverse CDFs; Exp(1) draws
/// are pushed through x / (1 + x).
inline double draw_eigenvalue(EigDistribution dist, Rng& rng) {
  const double u = rng.uniform_open();
  double x = u;
  switch (dist) {
    case EigDistribution::Uniform01:
      break;
    case EigDistribution::Triangular:
      x = u < 0.5 ? std::sqrt(0.5 * u) : 1.0 - std::sqrt(0.5 * (1.0 - u));
      break;
    case EigDistribution::Beta: {
      const double s = std::sin(0.5 * std::numbers::pi * u);
      x = s * s;
      break;
    }
    case EigDistribution::Exp1Mapped: {
      const double e = -std::log(u);
      x = e / (1.0 + e);
      break;
    }
  }
  return std::clamp(x, std::nextafter(0.0, 1.0), std::nextafter(1.0, 0.0));
}

/// `d` draws sorted ascending.
inline Eigen::VectorXd sample_eigenvalues(EigDistribution dist, int d, std::uint64_t seed) {
  if (d < 1) throw Error(ErrorKind::InvalidArgument, "sample_eigenvalues needs d >= 1");
  Rng rng(seed);
  std::vector<double> values(static_cast<std::size_t>(d));
  for (auto& v : values) v = draw_eigenvalue(dist, rng);
  std::sort(values.begin(), values.end());
  return Eigen::Map<Eigen::VectorXd>(values.data(), d);
}

// ---------------------------------------------------------------------------
// Graph operators

/// A = basis^T diag(lambda) basis, eigenvalues grouped by (near) equality.
struct GraphOperator {
  SpectralBasis spectral;
  Eigen::VectorXd lambda;                 // eigenvalue of A on eigenvector i
  std::vector<std::vector<int>> groups;   // ascending eigenvalue; indices sorted

  int dim() const { return spectral.dim(); }

  Eigen::MatrixXd dense() const {
    return spectral.basis.transpose() * lambda.asDiagonal() * spectral.basis;
  }

  double group_eigenvalue(std::size_t j) const { return lambda(groups.at(j).front()); }

  double grouping_tolerance() const {
    return 1e-8 * (1.0 + (lambda.size() ? lambda.maxCoeff() : 0.0));
  }
};

inline std::vector<std::vector<int>> group_eigenvalues(const Eigen::VectorXd& lambda, double tol) {
  std::vector<int> order(static_cast<std::size_t>(lambda.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return lambda(i) < lambda(j); });
  std::vector<std::vector<int>> groups;
  for (std::size_t r = 0; r < order.size(); ++r) {
    const int i = order[r];
    if (r == 0 || lambda(i) - lambda(order[r - 1]) > tol) groups.emplace_back();
    groups.back().push_back(i);
  }
  for (auto& g : groups) std::sort(g.begin(), g.end());
  return groups;
}

inline GraphOperator make_operator(SpectralBasis basis, Eigen::VectorXd lambda) {
  if (lambda.size() != basis.dim()) {
    throw Error(ErrorKind::InvalidArgument, "operator eigenvalue count does not match basis dimension");
  }
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (!(lambda(i) >= 0.0)) {
      throw Error(ErrorKind::NegativeEigenvalue, "eigenvalue " + std::to_string(i) + " is " +
                                                     std::to_string(lambda(i)));
    }
  }
  GraphOperator op{std::move(basis), std::move(lambda), {}};
  op.groups = group_eigenvalues(op.lambda, op.grouping_tolerance());
  return op;
}

/// Assigns ascending `values` to eigenvectors: eigenvector i receives
/// values[permutation[i]] (identity when absent, i.e. low Laplacian
/// frequencies get the smallest operator eigenvalues).
inline Eigen::VectorXd assign_eigenvalues(const Eigen::VectorXd& values,
                                          const std::optional<std::vector<int>>& permutation = std::nullopt) {
  if (!permutation) return values;
  const auto& perm = *permutation;
  if (static_cast<Eigen::Index>(perm.size()) != values.size()) {
    throw Error(ErrorKind::InvalidArgument, "permutation length mismatch");
  }
  std::vector<int> check = perm;
  std::sort(check.begin(), check.end());
  for (std::size_t i = 0; i < check.size(); ++i) {
    if (check[i] != static_cast<int>(i)) throw Error(ErrorKind::InvalidArgument, "not a permutation");
  }
  Eigen::VectorXd out(values.size());
  for (std::size_t i = 0; i < perm.size(); ++i) out(static_cast<Eigen::Index>(i)) = values(perm[i]);
  return out;
}

/// Parses "lambda_op[i]=<float>" lines ('#' comments allowed); every index in
/// [0, d) must appear exactly once.
inline Eigen::VectorXd parse_operator_spec(std::string_view text, int d) {
  Eigen::VectorXd lambda(d);
  std::vector<char> seen(static_cast<std::size_t>(d), 0);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;

    constexpr std::string_view prefix = "lambda_op[";
    const auto close = line.find("]=");
    if (line.substr(0, prefix.size()) != prefix || close == std::string_view::npos) {
      throw ParseError(line_no, "expected lambda_op[i]=<float>");
    }
    long long index = 0;
    if (!detail::parse_int(line.substr(prefix.size(), close - prefix.size()), index) || index < 0 || index >= d) {
      throw ParseError(line_no, "operator index out of range");
    }
    const std::string value_text(detail::trim(line.substr(close + 2)));
    std::size_t consumed = 0;
    double value = 0.0;
    try {
      value = std::stod(value_text, &consumed);
    } catch (const std::exception&) {
      throw ParseError(line_no, "invalid eigenvalue");
    }
    if (consumed != value_text.size()) throw ParseError(line_no, "invalid eigenvalue");
    if (seen[static_cast<std::size_t>(index)]) throw ParseError(line_no, "duplicate operator index");
    seen[static_cast<std::size_t>(index)] = 1;
    lambda(index) = value;
  }
  for (int i = 0; i < d; ++i) {
    if (!seen[static_cast<std::size_t>(i)]) throw ParseError(line_no, "missing lambda_op[" + std::to_string(i) + "]");
  }
  return lambda;
}

// ---------------------------------------------------------------------------
// Paley-Wiener spaces

/// Band-limited subspace spanned by the eigenvectors of the first
/// `num_groups` eigenvalue groups. `indices` is sorted ascending and never
/// splits a group.
struct PWSpace {
  std::vector<int> indices;
  int num_groups = 0;

  int dim() const { return static_cast<int>(indices.size()); }
};

inline PWSpace pw_space_by_groups(const GraphOperator& op, int num_groups) {
  if (num_groups < 1) throw Error(ErrorKind::EmptySpace, "Paley-Wiener space needs at least one group");
  if (num_groups > static_cast<int>(op.groups.size())) {
    throw Error(ErrorKind::InvalidArgument, "requested " + std::to_string(num_groups) + " groups, operator has " +
                                                std::to_string(op.groups.size()));
  }
  PWSpace pw;
  pw.num_groups = num_groups;
  for (int j = 0; j < num_groups; ++j) {
    const auto& g = op.groups[static_cast<std::size_t>(j)];
    pw.indices.insert(pw.indices.end(), g.begin(), g.end());
  }
  std::sort(pw.indices.begin(), pw.indices.end());
  return pw;
}

/// Span of eigenvectors with eigenvalue <= omega.
inline PWSpace pw_space_by_cutoff(const GraphOperator& op, double omega) {
  int k = 0;
  const double tol = op.grouping_tolerance();
  while (k < static_cast<int>(op.groups.size()) && op.group_eigenvalue(static_cast<std::size_t>(k)) <= omega + tol) ++k;
  if (k == 0) throw Error(ErrorKind::EmptySpace, "cutoff below the smallest eigenvalue");
  return pw_space_by_groups(op, k);
}

/// The union of leading groups whose total dimension is exactly `m`.
inline PWSpace pw_space_by_dimension(const GraphOperator& op, int m) {
  if (m < 1) throw Error(ErrorKind::EmptySpace, "Paley-Wiener dimension must be positive");
  int total = 0;
  for (std::size_t j = 0; j < op.groups.size(); ++j) {
    total += static_cast<int>(op.groups[j].size());
    if (total == m) return pw_space_by_groups(op, static_cast<int>(j) + 1);
    if (total > m) break;
  }
  throw Error(ErrorKind::InvalidArgument, "dimension " + std::to_string(m) +
                                              " does not align with eigenvalue groups");
}

/// Rows of the eigenvector matrix restricted to the space (m x d).
inline Eigen::MatrixXd pw_rows(const GraphOperator& op, const PWSpace& pw) {
  Eigen::MatrixXd rows(pw.dim(), op.dim());
  for (int r = 0; r < pw.dim(); ++r) rows.row(r) = op.spectral.basis.row(pw.indices[static_cast<std::size_t>(r)]);
  return rows;
}

}  // namespace dsgraph
