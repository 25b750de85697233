#include "dispersim/errors.hpp"
#include "dispersim/sparse.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace dispersim;

namespace {

Triplets random_system(int n, std::mt19937& rng) {
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  std::uniform_int_distribution<int> col(0, n - 1);
  Triplets t;
  for (int i = 0; i < n; ++i) {
    t.push_back({i, i, 4.0 + val(rng)});
    for (int k = 0; k < 3; ++k) t.push_back({i, col(rng), val(rng)});
  }
  return t;
}

}  // namespace

TEST(Csr, SumsDuplicatesAndSorts) {
  const Triplets t = {{1, 2, 1.0}, {0, 0, 2.0}, {1, 2, 0.5}, {1, 0, -1.0}, {0, 0, 1.0}};
  const CsrMatrix a = to_csr(t, 2, 3);
  EXPECT_EQ(a.nonzeros(), 3u);
  EXPECT_EQ(a.coeff(0, 0), 3.0);
  EXPECT_EQ(a.coeff(1, 2), 1.5);
  EXPECT_EQ(a.coeff(1, 0), -1.0);
  EXPECT_EQ(a.coeff(0, 1), 0.0);
  EXPECT_EQ(a.find(0, 1), -1);
  EXPECT_EQ(a.columns(), (std::vector<Index>{0, 0, 2}));
}

TEST(Csr, ResultIndependentOfTripletOrder) {
  std::mt19937 rng(7);
  Triplets t = random_system(60, rng);
  for (int k = 0; k < 200; ++k) t.push_back({k % 60, (7 * k) % 60, 1e-3 * k - 0.1});
  const CsrMatrix a = to_csr(t, 60, 60);
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(t.begin(), t.end(), rng);
    const CsrMatrix b = to_csr(t, 60, 60);
    ASSERT_TRUE(a.same_pattern(b));
    EXPECT_EQ(a.values(), b.values());
  }
}

TEST(Csr, RejectsInvalidArrays) {
  EXPECT_THROW(CsrMatrix(2, 2, {0, 2, 3}, {1, 0, 1}, {1, 2, 3}), ContractViolation);
  EXPECT_THROW(CsrMatrix(2, 2, {0, 1, 2}, {0, 2}, {1, 2}), ContractViolation);
  EXPECT_THROW(CsrMatrix(2, 2, {0, 1}, {0}, {1}), ContractViolation);
  EXPECT_THROW(to_csr(Triplets{{0, 5, 1.0}}, 2, 2), ContractViolation);
}

TEST(Csr, MultiplyMatchesDense) {
  std::mt19937 rng(3);
  const CsrMatrix a = to_csr(random_system(30, rng), 30, 30);
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(30, -1.0, 2.0);
  EXPECT_LT((a.multiply(x) - a.to_dense() * x).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Lu, MatchesDenseGaussianElimination) {
  std::mt19937 rng(11);
  for (int n : {1, 5, 40, 150}) {
    const CsrMatrix a = to_csr(random_system(n, rng), n, n);
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) b(i) = std::sin(1.0 + i);
    const Eigen::VectorXd x = lu_solve(a, b);
    const Eigen::VectorXd ref = oracle::gauss_solve(a.to_dense(), b);
    EXPECT_LT((x - ref).cwiseAbs().maxCoeff(), 1e-11 * (1.0 + ref.cwiseAbs().maxCoeff())) << n;
  }
}

TEST(Lu, NeedsPivoting) {
  // Zero leading diagonal entry: fine with row exchanges.
  const CsrMatrix a = to_csr(Triplets{{0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 1.0}}, 2, 2);
  const Eigen::VectorXd x = lu_solve(a, Eigen::Vector2d(2.0, 5.0));
  EXPECT_NEAR(x(0), 3.0, 1e-15);
  EXPECT_NEAR(x(1), 2.0, 1e-15);
}

TEST(Lu, SingularMatrixIsReported) {
  const CsrMatrix rank_one = to_csr(Triplets{{0, 0, 1.0}, {0, 1, 2.0}, {1, 0, 2.0}, {1, 1, 4.0}}, 2, 2);
  EXPECT_THROW(lu_solve(rank_one, Eigen::Vector2d(1.0, 1.0)), SingularSystem);
  const CsrMatrix empty_row = to_csr(Triplets{{0, 0, 1.0}, {0, 1, 1.0}}, 2, 2);
  EXPECT_THROW(lu_solve(empty_row, Eigen::Vector2d(1.0, 1.0)), SingularSystem);
  const CsrMatrix tiny = to_csr(Triplets{{0, 0, 1.0}, {1, 1, 1e-17}}, 2, 2);
  EXPECT_THROW(lu_solve(tiny, Eigen::Vector2d(1.0, 1.0)), SingularSystem);
}

TEST(Lu, RefactorizationWithSamePattern) {
  std::mt19937 rng(5);
  CsrMatrix a = to_csr(random_system(50, rng), 50, 50);
  LuSolver lu;
  lu.factorize(a);
  EXPECT_GT(lu.pivot_ratio(), 0.0);
  const Eigen::VectorXd b = Eigen::VectorXd::Ones(50);
  const Eigen::VectorXd x1 = lu.solve(b);
  EXPECT_LT((a.multiply(x1) - b).cwiseAbs().maxCoeff(), 1e-12);
  for (double& v : a.values()) v *= 1.5;
  lu.factorize(a);
  const Eigen::VectorXd x2 = lu.solve(b);
  EXPECT_LT((x2 - x1 / 1.5).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Lu, SolveBeforeFactorizeIsAContractViolation) {
  LuSolver lu;
  EXPECT_FALSE(lu.factorized());
  EXPECT_THROW(lu.solve(Eigen::VectorXd::Ones(2)), ContractViolation);
  EXPECT_THROW(lu.factorize(to_csr(Triplets{{0, 1, 1.0}}, 1, 2)), ContractViolation);
}
