#include <doctest.h>

#include <optional>
#include <vector>

#include "riskshare/errors.hpp"
#include "riskshare/io.hpp"
#include "riskshare/solver_friends.hpp"
#include "test_support.hpp"

using riskshare::ConstraintClass;
using riskshare::Error;
using riskshare::ErrorKind;
using riskshare::Graph;
using riskshare::LossModel;
using riskshare::ProblemSpec;

namespace {

Eigen::MatrixXd mat(int n, std::initializer_list<double> vals) {
  Eigen::MatrixXd M(n, n);
  auto it = vals.begin();
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) M(r, c) = *it++;
  return M;
}

ProblemSpec load(const char* name) {
  return riskshare::load_problem_spec(riskshare::testing::fixture(name));
}

}  // namespace

TEST_CASE("closed form on the complete graph: identical agents") {
  const ProblemSpec p = load("sec_2_2_1.json");
  const riskshare::SolveReport r = riskshare::feng_complete(p.model);
  CHECK(riskshare::testing::max_abs_diff(r.sharing.A,
                                         Eigen::MatrixXd::Constant(4, 4, 0.25)) <= 1e-15);
  CHECK(r.objective == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(r.sharing.constraint_class == ConstraintClass::complete);
  CHECK(r.gamma_pairs.empty());
  CHECK(r.diagnostics.column_sum_residual <= 1e-15);
  CHECK(r.diagnostics.fairness_residual <= 1e-15);
}

TEST_CASE("closed form on the complete graph: heterogeneous means") {
  const ProblemSpec p = load("sec_2_6_1.json");
  const riskshare::SolveReport r = riskshare::feng_complete(p.model);
  const Eigen::MatrixXd expected =
      mat(3, {85.0 / 273, 67.0 / 273, -5.0 / 273,
              88.0 / 273, 79.0 / 273, 43.0 / 273,
              100.0 / 273, 127.0 / 273, 235.0 / 273});
  CHECK(riskshare::testing::max_abs_diff(r.sharing.A, expected) <= 1e-14);
  CHECK(r.objective == doctest::Approx(19.0 / 26.0).epsilon(1e-14));
  // The small-mean agent holds a genuinely negative position in the
  // large-mean agent's loss.
  CHECK(r.sharing.A(0, 2) < 0.0);
}

TEST_CASE("closed form on the complete graph: negative entries at extreme spread") {
  const ProblemSpec p = load("sec_2_7_complete.json");
  const riskshare::SolveReport r = riskshare::feng_complete(p.model);
  // Means (1, 1, 4, 16, 64, 64): exactly the four pairs (small agent, huge
  // agent) go negative.
  std::vector<std::pair<int, int>> negatives;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      if (r.sharing.A(i, j) < 0.0) negatives.emplace_back(i + 1, j + 1);
  CHECK(negatives == std::vector<std::pair<int, int>>{{1, 5}, {1, 6}, {2, 5}, {2, 6}});
}

TEST_CASE("multiplier system assembly matches the hand-computed 4-agent instance") {
  const ProblemSpec p = load("sec_2_2_2.json");
  const riskshare::GammaSystem sys = riskshare::assemble_gamma_system(p.model, p.graph);

  CHECK(sys.pairs == std::vector<std::pair<int, int>>{{4, 2}, {2, 4}});
  CHECK(sys.K.rows() == 2);
  CHECK(sys.K(0, 0) == doctest::Approx(-9.0 / 16.0).epsilon(1e-15));
  CHECK(sys.K(0, 1) == doctest::Approx(-1.0 / 16.0).epsilon(1e-15));
  CHECK(sys.K(1, 0) == doctest::Approx(-1.0 / 16.0).epsilon(1e-15));
  CHECK(sys.K(1, 1) == doctest::Approx(-9.0 / 16.0).epsilon(1e-15));
  CHECK(sys.rhs(0) == doctest::Approx(-0.25).epsilon(1e-15));
  CHECK(sys.rhs(1) == doctest::Approx(-0.25).epsilon(1e-15));

  riskshare::GammaSolveInfo info;
  const Eigen::VectorXd gamma = riskshare::solve_gamma(sys.K, sys.rhs, &info);
  CHECK(gamma(0) == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(gamma(1) == doctest::Approx(0.4).epsilon(1e-14));
  // Eigenvalues of K are -5/8 and -1/2, so the reciprocal condition is 0.8.
  CHECK(info.rcond == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(info.residual <= 1e-15);
}

TEST_CASE("solve_gamma input validation") {
  CHECK_THROWS_AS(riskshare::solve_gamma(Eigen::MatrixXd::Ones(2, 3), Eigen::VectorXd::Ones(2)),
                  Error);
  try {
    riskshare::solve_gamma(Eigen::MatrixXd::Ones(2, 2), Eigen::VectorXd::Ones(2));
    FAIL("singular system accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::singular_system);
  }
  try {
    riskshare::solve_gamma(Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Ones(2));
    FAIL("mismatched rhs accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::dimension_mismatch);
  }
  // Empty system: no off-edge pairs, nothing to solve.
  CHECK(riskshare::solve_gamma(Eigen::MatrixXd(0, 0), Eigen::VectorXd(0)).size() == 0);
}

TEST_CASE("network solve: 4 agents missing one edge, iid losses") {
  const ProblemSpec p = load("sec_2_2_2.json");
  const riskshare::SolveReport r = riskshare::solve_friends(p.model, p.graph);

  const Eigen::MatrixXd expected =
      mat(4, {0.2, 0.3, 0.2, 0.3,
              0.3, 0.4, 0.3, 0.0,
              0.2, 0.3, 0.2, 0.3,
              0.3, 0.0, 0.3, 0.4});
  CHECK(riskshare::testing::max_abs_diff(r.sharing.A, expected) <= 1e-14);
  CHECK(r.objective == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(r.sharing.constraint_class == ConstraintClass::friends);

  REQUIRE(r.gamma_pairs.size() == 2);
  CHECK(r.gamma_pairs[0].i == 4);
  CHECK(r.gamma_pairs[0].j == 2);
  CHECK(r.gamma_pairs[0].value == doctest::Approx(0.4).epsilon(1e-13));
  CHECK(r.gamma_pairs[1].i == 2);
  CHECK(r.gamma_pairs[1].j == 4);
  CHECK(r.gamma_pairs[1].value == doctest::Approx(0.4).epsilon(1e-13));

  // Off-edge entries are snapped to exact zeros.
  CHECK(r.sharing.A(1, 3) == 0.0);
  CHECK(r.sharing.A(3, 1) == 0.0);
}

TEST_CASE("network solve: positive correlation on the cycle") {
  const ProblemSpec p = load("sec_2_2_3.json");
  const riskshare::SolveReport r = riskshare::solve_friends(p.model, p.graph);
  const double s7 = 1.0 / 7.0, s14 = 5.0 / 14.0, s27 = 2.0 / 7.0;
  const Eigen::MatrixXd expected = mat(4, {s7, s14, s7, s14,
                                           s14, s27, s14, 0.0,
                                           s7, s14, s7, s14,
                                           s14, 0.0, s14, s27});
  CHECK(riskshare::testing::max_abs_diff(r.sharing.A, expected) <= 1e-13);
  CHECK(r.objective == doctest::Approx(19.0 / 21.0).epsilon(1e-13));
}

TEST_CASE("network solve: negative correlation on the cycle") {
  const ProblemSpec p = load("sec_2_2_4.json");
  const riskshare::SolveReport r = riskshare::solve_friends(p.model, p.graph);
  const Eigen::MatrixXd expected =
      mat(4, {5.0 / 23, 13.0 / 46, 5.0 / 23, 13.0 / 46,
              13.0 / 46, 10.0 / 23, 13.0 / 46, 0.0,
              5.0 / 23, 13.0 / 46, 5.0 / 23, 13.0 / 46,
              13.0 / 46, 0.0, 13.0 / 46, 10.0 / 23});
  CHECK(riskshare::testing::max_abs_diff(r.sharing.A, expected) <= 1e-13);
  CHECK(r.objective == doctest::Approx(19.0 / 69.0).epsilon(1e-13));
}

TEST_CASE("network solve: 3-agent path with heterogeneous means") {
  const ProblemSpec p = load("sec_2_6_2.json");
  const riskshare::SolveReport r = riskshare::solve_friends(p.model, p.graph);
  const Eigen::MatrixXd expected = mat(3, {18.0 / 38, 5.0 / 38, 0.0,
                                           20.0 / 38, 13.0 / 38, 5.0 / 38,
                                           0.0, 20.0 / 38, 33.0 / 38});
  CHECK(riskshare::testing::max_abs_diff(r.sharing.A, expected) <= 1e-13);
  CHECK(r.objective == doctest::Approx(16.0 / 19.0).epsilon(1e-13));
  // Removing the (1,3) edge removes the negative position the complete graph
  // would assign; the constrained optimum is entrywise nonnegative here.
  CHECK(r.sharing.A.minCoeff() >= 0.0);
}

TEST_CASE("complete graph reduction: network solver equals the closed form") {
  riskshare::testing::Rng rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = rng.uniform_int(2, 6);
    auto inst = riskshare::testing::random_instance(rng, n);
    const LossModel model = riskshare::testing::model_of(inst);
    const Graph complete = Graph::complete(n);

    const riskshare::SolveReport closed = riskshare::feng_complete(model);
    const riskshare::SolveReport network = riskshare::solve_friends(model, complete);
    CHECK(riskshare::testing::max_abs_diff(closed.sharing.A, network.sharing.A) <= 1e-12);
    CHECK(network.gamma_pairs.empty());
    CHECK(network.diagnostics.linear_system_residual == 0.0);
  }
}

TEST_CASE("barbell: sixteen multipliers, nonnegative optimum") {
  const ProblemSpec p = load("sec_2_7_barbell.json");
  const riskshare::SolveReport r = riskshare::solve_friends(p.model, p.graph);
  CHECK(r.gamma_pairs.size() == 16);
  CHECK(r.sharing.A.minCoeff() >= -1e-12);
  CHECK(r.diagnostics.column_sum_residual <= 1e-12);
  CHECK(r.diagnostics.fairness_residual <= 1e-12 * p.model.mu().cwiseAbs().maxCoeff());
  // Cutting the network from complete to barbell costs variance.
  const riskshare::SolveReport complete = riskshare::feng_complete(p.model);
  CHECK(r.objective >= complete.objective - 1e-12);
}

TEST_CASE("matrix-free iterative path agrees with the dense solve") {
  riskshare::FriendsOptions iterative;
  iterative.dense_limit = 0;  // force MINRES regardless of size

  for (const char* name : {"sec_2_2_2.json", "sec_2_2_3.json", "sec_2_2_4.json",
                           "sec_2_6_2.json", "sec_2_7_barbell.json"}) {
    const ProblemSpec p = load(name);
    const riskshare::SolveReport dense = riskshare::solve_friends(p.model, p.graph);
    const riskshare::SolveReport mf = riskshare::solve_friends(p.model, p.graph, iterative);
    CAPTURE(name);
    CHECK(riskshare::testing::max_abs_diff(dense.sharing.A, mf.sharing.A) <= 1e-9);
    CHECK(mf.objective == doctest::Approx(dense.objective).epsilon(1e-10));
    for (size_t g = 0; g < dense.gamma_pairs.size(); ++g) {
      CHECK(mf.gamma_pairs[g].value ==
            doctest::Approx(dense.gamma_pairs[g].value).epsilon(1e-8));
    }
  }

  riskshare::testing::Rng rng(31);
  for (int trial = 0; trial < 8; ++trial) {
    const auto inst = riskshare::testing::random_instance(rng, 6);
    const LossModel model = riskshare::testing::model_of(inst);
    const Graph graph = riskshare::testing::graph_of(inst);
    const riskshare::SolveReport dense = riskshare::solve_friends(model, graph);
    const riskshare::SolveReport mf = riskshare::solve_friends(model, graph, iterative);
    CHECK(riskshare::testing::max_abs_diff(dense.sharing.A, mf.sharing.A) <= 1e-8);
  }
}

TEST_CASE("input validation") {
  const ProblemSpec p = load("sec_2_2_2.json");
  try {
    riskshare::solve_friends(p.model, Graph::from_edges(4, {{1, 2}, {3, 4}}));
    FAIL("disconnected graph accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::not_connected);
  }
  try {
    riskshare::solve_friends(p.model, Graph::path(3));
    FAIL("size mismatch accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::dimension_mismatch);
  }
}
