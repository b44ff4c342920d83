#include <gtest/gtest.h>

#include "dsgraph/dsgraph.hpp"
#include "oracles.hpp"

using namespace dsgraph;

namespace {

GraphOperator p2_operator() {
  return make_operator(eig_sym(laplacian(oracle::p2())), Eigen::Vector2d(0.5, 0.25));
}

PlacementProblem full_problem(const GraphOperator& op, TimeMode mode, int s = 1) {
  return {op, pw_space_by_groups(op, static_cast<int>(op.groups.size())), s, mode};
}

Eigen::VectorXd indicator(int d, const std::vector<int>& v) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
  for (int i : v) x(i) = 1.0;
  return x;
}

double scale_rel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return max_abs(a - b) / (1.0 + max_abs(b)); }

}  // namespace

TEST(TimeMode, ParseAndFormat) {
  EXPECT_TRUE(parse_time_mode("infinite").infinite);
  const TimeMode f = parse_time_mode("finite:8");
  EXPECT_FALSE(f.infinite);
  EXPECT_EQ(f.steps, 8);
  EXPECT_EQ(f.to_string(), "finite:8");
  EXPECT_THROW(parse_time_mode("finite:0"), Error);
  EXPECT_THROW(parse_time_mode("finite:x"), Error);
  EXPECT_THROW(parse_time_mode("forever"), Error);
}

TEST(TimeCoefficient, Branches) {
  EXPECT_EQ(time_coefficient(1.0, 1.0, TimeMode::Finite(7)), 7.0);
  EXPECT_EQ(time_coefficient(0.0, 0.4, TimeMode::Finite(7)), 1.0);
  EXPECT_NEAR(time_coefficient(0.5, 0.5, TimeMode::Finite(3)), 1.0 + 0.25 + 0.0625, 1e-15);
  EXPECT_NEAR(time_coefficient(0.5, 0.5, TimeMode::Infinite()), 4.0 / 3.0, 1e-15);
  // Geometric series near p = 1 keeps full relative accuracy.
  const double p = 1.0 - 1e-12;
  EXPECT_NEAR(time_coefficient(p, 1.0, TimeMode::Finite(10)), 10.0, 1e-9);
}

TEST(BuildAtoms, PathOfTwoInfinite) {
  const AtomCache cache = build_atoms(full_problem(p2_operator(), TimeMode::Infinite()));
  Eigen::Matrix2d expected;
  expected << 2.0 / 3.0, 4.0 / 7.0, 4.0 / 7.0, 8.0 / 15.0;
  EXPECT_LE(max_abs(cache.atom(0) - expected), 1e-15);
  const Eigen::MatrixXd summed = oracle::summed_frame_matrix(p2_operator(), pw_space_by_groups(p2_operator(), 2), SampleSet{{0}}, 2000);
  EXPECT_LE(max_abs(summed - expected), 1e-12);
}

TEST(BuildAtoms, SingleStepIsOuterProduct) {
  const auto inst = oracle::random_instance(8, 12, 3);
  const PWSpace pw = pw_space_by_dimension(inst.op, 3);
  const AtomCache cache = build_atoms({inst.op, pw, 2, TimeMode::Finite(1)});
  const Eigen::MatrixXd rows = pw_rows(inst.op, pw);
  for (int v = 0; v < 8; ++v) {
    const Eigen::VectorXd b = rows.col(v);
    EXPECT_LE(max_abs(cache.atom(v) - b * b.transpose()), 1e-15);
  }
}

TEST(BuildAtoms, UnitEigenvaluesGiveCoefficientL) {
  const SpectralBasis b = eig_sym(laplacian(oracle::p3()));
  const GraphOperator op = make_operator(b, Eigen::Vector3d(1.0, 1.0, 0.5));
  // Groups ascend: {2} then {0, 1}; both are kept so all indices are present.
  const AtomCache cache = build_atoms({op, pw_space_by_groups(op, 2), 1, TimeMode::Finite(5)});
  EXPECT_NEAR(cache.coefficients()(2, 2), 1.0 + 0.25 + 0.0625 + 0.015625 + 0.00390625, 1e-15);
  EXPECT_EQ(cache.coefficients()(0, 0), 5.0);
  EXPECT_EQ(cache.coefficients()(0, 1), 5.0);
  EXPECT_EQ(cache.coefficients()(1, 1), 5.0);
}

TEST(BuildAtoms, ClosedFormMatchesDirectSummation) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto inst = oracle::random_instance(9, 16, seed);
    const PWSpace pw = pw_space_by_dimension(inst.op, 5);
    const SampleSet omega{{0, 3, 7}};
    for (int steps : {1, 2, 8, 64}) {
      const AtomCache cache = build_atoms({inst.op, pw, 3, TimeMode::Finite(steps)});
      EXPECT_LE(scale_rel(c_matrix(cache, omega), oracle::summed_frame_matrix(inst.op, pw, omega, steps)), 1e-10);
    }
  }
}

TEST(BuildAtoms, InfiniteModeMatchesLongTruncation) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    Graph g = generate_graph({RandomConnectedSpec{8, 12}, seed});
    Eigen::VectorXd lambda = 0.9 * sample_eigenvalues(EigDistribution::Uniform01, 8, seed + 100);
    const GraphOperator op = make_operator(eig_sym(laplacian(g)), lambda);
    const PWSpace pw = pw_space_by_dimension(op, 4);
    const SampleSet omega{{1, 2, 5}};
    const AtomCache cache = build_atoms({op, pw, 3, TimeMode::Infinite()});
    EXPECT_LE(scale_rel(c_matrix(cache, omega), oracle::summed_frame_matrix(op, pw, omega, 2000)), 1e-6);
  }
}

TEST(BuildAtoms, AtomsSymmetricPsdAndPackedConsistent) {
  const auto inst = oracle::random_instance(12, 25, 5);
  const AtomCache cache = build_atoms({inst.op, pw_space_by_dimension(inst.op, 6), 4, TimeMode::Infinite()});
  for (int v = 0; v < 12; ++v) {
    const Eigen::MatrixXd& m = cache.atom(v);
    EXPECT_EQ(m, m.transpose());
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues().minCoeff(), -1e-12);
    EXPECT_EQ(cache.unpack(cache.packed().col(v)), m);
  }
}

TEST(BuildAtoms, RejectsBadProblems) {
  const SpectralBasis b = eig_sym(laplacian(oracle::p2()));
  const GraphOperator op = make_operator(b, Eigen::Vector2d(0.5, 1.0));
  try {
    build_atoms(full_problem(op, TimeMode::Infinite()));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SpectrumOutOfRange);
  }
  EXPECT_NO_THROW(build_atoms(full_problem(op, TimeMode::Finite(3))));
  const GraphOperator zero = make_operator(b, Eigen::Vector2d(0.0, 0.5));
  EXPECT_THROW(build_atoms(full_problem(zero, TimeMode::Infinite())), Error);
  EXPECT_THROW(build_atoms(full_problem(p2_operator(), TimeMode::Infinite(), 0)), Error);
  EXPECT_THROW(build_atoms(full_problem(p2_operator(), TimeMode::Infinite(), 3)), Error);
}

TEST(CMatrix, IndicatorZeroAndFull) {
  const auto inst = oracle::random_instance(10, 20, 6);
  const PWSpace full = pw_space_by_groups(inst.op, 10);
  const AtomCache cache = build_atoms({inst.op, full, 3, TimeMode::Infinite()});
  EXPECT_LE(max_abs(c_matrix(cache, indicator(10, {2, 5, 9})) - c_matrix(cache, SampleSet{{2, 5, 9}})), 1e-15);
  EXPECT_EQ(c_matrix(cache, Eigen::VectorXd::Zero(10)), Eigen::MatrixXd::Zero(10, 10));
  Eigen::VectorXd diag(10);
  for (int i = 0; i < 10; ++i) diag(i) = 1.0 / (1.0 - inst.op.lambda(i) * inst.op.lambda(i));
  EXPECT_LE(scale_rel(c_matrix(cache, Eigen::VectorXd::Ones(10)), diag.asDiagonal().toDenseMatrix()), 1e-12);
}

TEST(CMatrix, Linear) {
  const auto inst = oracle::random_instance(10, 20, 7);
  const AtomCache cache = build_atoms({inst.op, pw_space_by_dimension(inst.op, 4), 3, TimeMode::Infinite()});
  Rng rng(1);
  for (int t = 0; t < 10; ++t) {
    Eigen::VectorXd x(10), y(10);
    for (int i = 0; i < 10; ++i) {
      x(i) = rng.uniform_open();
      y(i) = rng.uniform_open();
    }
    const double a = rng.uniform(-2, 2);
    const double b = rng.uniform(-2, 2);
    EXPECT_LE(scale_rel(c_matrix(cache, a * x + b * y), a * c_matrix(cache, x) + b * c_matrix(cache, y)), 1e-14);
  }
}

TEST(MseObjective, FullSetDiagonalCase) {
  const AtomCache cache = build_atoms(full_problem(p2_operator(), TimeMode::Infinite()));
  EXPECT_NEAR(mse_objective(cache, Eigen::VectorXd::Ones(2)), (1 - 0.25) + (1 - 0.0625), 1e-14);
  EXPECT_NEAR(mse_objective(cache, Eigen::VectorXd::Ones(2)), 1.6875, 1e-14);
}

TEST(MseObjective, SingleVertexOfPathOfTwo) {
  const AtomCache cache = build_atoms(full_problem(p2_operator(), TimeMode::Infinite()));
  // Hand inverse: det = 16/45 - 16/49 = 64/2205, trace = 6/5.
  const double hand = (6.0 / 5.0) / (64.0 / 2205.0);
  const double summed = oracle::trace_inverse(
      oracle::summed_frame_matrix(p2_operator(), pw_space_by_groups(p2_operator(), 2), SampleSet{{0}}, 2000));
  EXPECT_NEAR(hand, summed, 1e-9 * hand);
  EXPECT_NEAR(mse_objective(cache, SampleSet{{0}}), hand, 1e-12 * hand);
  EXPECT_NEAR(mse_objective(cache, Eigen::Vector2d(1, 0)), 41.34375, 1e-11);
}

TEST(MseObjective, InvisibleModeIsInfinite) {
  const GraphOperator op = make_operator(eig_sym(laplacian(oracle::p3())), Eigen::Vector3d(0.2, 0.5, 0.8));
  const AtomCache cache = build_atoms({op, pw_space_by_groups(op, 2), 1, TimeMode::Infinite()});
  EXPECT_LE(numerical_rank(cache.atom(1)), 1);
  EXPECT_TRUE(std::isinf(mse_objective(cache, Eigen::Vector3d(0, 1, 0))));
  EXPECT_TRUE(std::isinf(mse_objective(cache, Eigen::Vector3d(0, 0, 0))));
  EXPECT_TRUE(std::isfinite(mse_objective(cache, Eigen::Vector3d(1, 0, 0))));
}

TEST(MseObjective, MatchesDenseInverse) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = oracle::random_instance(15, 30, seed);
    const AtomCache cache = build_atoms({inst.op, pw_space_by_dimension(inst.op, 6), 6, TimeMode::Infinite()});
    Rng rng(seed);
    Eigen::VectorXd x(15);
    for (int i = 0; i < 15; ++i) x(i) = rng.uniform(0.1, 1.0);
    const double ref = oracle::trace_inverse(c_matrix(cache, x));
    EXPECT_NEAR(mse_objective(cache, x), ref, 1e-10 * ref);
  }
}

TEST(MseObjective, ThresholdOnSmallestEigenvalue) {
  // C = diag(1, mu) in packed form; trace 1 + mu, threshold 1e-10 (2 + mu).
  TraceInverseKernel kernel(2);
  Eigen::Vector3d packed(1.0, 0.0, 1e-9);
  EXPECT_TRUE(std::isfinite(kernel.evaluate(packed)));
  packed(2) = 1e-11;
  EXPECT_TRUE(std::isinf(kernel.evaluate(packed)));
  packed(2) = -1e-3;
  EXPECT_TRUE(std::isinf(kernel.evaluate(packed)));
}

TEST(MseGradient, NonPositiveAndMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto inst = oracle::random_instance(10, 20, seed);
    const AtomCache cache = build_atoms({inst.op, pw_space_by_dimension(inst.op, 4), 4, TimeMode::Infinite()});
    Rng rng(seed + 50);
    for (int t = 0; t < 5; ++t) {
      Eigen::VectorXd x(10);
      for (int i = 0; i < 10; ++i) x(i) = rng.uniform(0.2, 0.8);
      const Eigen::VectorXd g = mse_gradient(cache, x);
      EXPECT_LE(g.maxCoeff(), 0.0);
      const Eigen::VectorXd fd = oracle::fd_gradient(cache, x, 1e-5);
      for (int v = 0; v < 10; ++v) EXPECT_NEAR(g(v), fd(v), 1e-5 * std::max(1.0, std::abs(fd(v))));
    }
  }
}

TEST(MseGradient, ScalarCase) {
  const auto inst = oracle::random_instance(6, 8, 2);
  const AtomCache cache = build_atoms({inst.op, pw_space_by_dimension(inst.op, 1), 2, TimeMode::Infinite()});
  Eigen::VectorXd x(6);
  x << 0.1, 0.2, 0.3, 0.4, 0.5, 0.6;
  double c = 0.0;
  for (int v = 0; v < 6; ++v) c += x(v) * cache.atom(v)(0, 0);
  const Eigen::VectorXd g = mse_gradient(cache, x);
  for (int v = 0; v < 6; ++v) EXPECT_NEAR(g(v), -cache.atom(v)(0, 0) / (c * c), 1e-14 / (c * c));
}

TEST(MseGradient, SingularPointRaises) {
  const AtomCache cache = build_atoms(full_problem(p2_operator(), TimeMode::Infinite()));
  try {
    mse_gradient(cache, Eigen::Vector2d(0, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SingularPoint);
  }
}

TEST(MseProperties, MonotoneInSampleSet) {
  Rng rng(31);
  int checked = 0;
  for (int t = 0; t < 100; ++t) {
    const auto inst = oracle::random_instance(10, 18, rng.next_u64());
    const AtomCache cache = build_atoms({inst.op, pw_space_by_dimension(inst.op, 3), 3, TimeMode::Infinite()});
    std::vector<int> omega;
    for (int v = 0; v < 10; ++v)
      if (rng.below(3) == 0) omega.push_back(v);
    const int extra = static_cast<int>(rng.below(10));
    const double before = mse_objective(cache, SampleSet{omega});
    if (!std::isfinite(before)) continue;
    if (std::find(omega.begin(), omega.end(), extra) == omega.end()) omega.push_back(extra);
    const double after = mse_objective(cache, make_sample_set(omega, 10));
    EXPECT_LE(after, before + 1e-9 * (1.0 + before));
    ++checked;
  }
  EXPECT_GT(checked, 20);
}

TEST(MseProperties, BandCompressionLowersTraceInverse) {
  Rng rng(41);
  int checked = 0;
  for (int t = 0; t < 100; ++t) {
    const auto inst = oracle::random_instance(6, 9, rng.next_u64());
    const AtomCache band = build_atoms({inst.op, pw_space_by_dimension(inst.op, 3), 3, TimeMode::Infinite()});
    const AtomCache full = build_atoms(full_problem(inst.op, TimeMode::Infinite()));
    std::vector<int> omega;
    for (int v = 0; v < 6; ++v)
      if (rng.below(2)) omega.push_back(v);
    const double compressed = mse_objective(band, SampleSet{omega});
    const double whole = mse_objective(full, SampleSet{omega});
    if (!std::isfinite(compressed) || !std::isfinite(whole)) continue;
    EXPECT_LT(compressed, whole);
    ++checked;
  }
  EXPECT_GT(checked, 10);
}

TEST(MseProperties, ConvexAlongSegments) {
  const auto inst = oracle::random_instance(12, 24, 8);
  const AtomCache cache = build_atoms({inst.op, pw_space_by_dimension(inst.op, 5), 5, TimeMode::Infinite()});
  Rng rng(3);
  for (int t = 0; t < 30; ++t) {
    Eigen::VectorXd x(12), y(12);
    for (int i = 0; i < 12; ++i) {
      x(i) = rng.uniform(0.05, 1.0);
      y(i) = rng.uniform(0.05, 1.0);
    }
    const double fx = mse_objective(cache, x);
    const double fy = mse_objective(cache, y);
    const double fm = mse_objective(cache, 0.5 * (x + y));
    EXPECT_LE(fm, 0.5 * (fx + fy) + 1e-12 * (fx + fy));
  }
}

TEST(RankedScore, OrdersByRankThenPseudoInverse) {
  // A single time step makes every atom a rank-one outer product.
  const auto inst = oracle::random_instance(8, 12, 4);
  const AtomCache cache = build_atoms({inst.op, pw_space_by_dimension(inst.op, 3), 3, TimeMode::Finite(1)});
  TraceInverseKernel kernel(3);
  const RankedScore one = ranked_score(cache, cache.packed().col(0), kernel);
  EXPECT_EQ(one.rank, 1);
  EXPECT_NEAR(one.pinv_trace, 1.0 / cache.atom(0).trace(), 1e-12 / cache.atom(0).trace());
  const Eigen::VectorXd three = cache.packed().col(0) + cache.packed().col(1) + cache.packed().col(2);
  const RankedScore full = ranked_score(cache, three, kernel);
  EXPECT_EQ(full.rank, 3);
  EXPECT_NEAR(full.pinv_trace, mse_objective(cache, SampleSet{{0, 1, 2}}), 1e-12 * full.pinv_trace);
  EXPECT_TRUE(full.better_than(one, 1e-12));
  EXPECT_FALSE(one.better_than(full, 1e-12));
  const RankedScore none = ranked_score(cache, Eigen::VectorXd::Zero(6), kernel);
  EXPECT_EQ(none.rank, 0);
  EXPECT_TRUE(one.better_than(none, 1e-12));
}
