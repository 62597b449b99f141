#include "mfbm/errors.hpp"
#include "mfbm/graph.hpp"
#include "support.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

using namespace mfbm;

TEST_CASE("ring lattice without rewiring") {
  GraphSpec g{10, 2, 0.0, 1};
  const auto adj = watts_strogatz(g);
  CHECK(adj.sum() == 2 * 10 * 2);
  for (int i = 0; i < 10; ++i) {
    CHECK(adj(i, i) == 0);
    CHECK(adj(i, (i + 1) % 10) == 1);
    CHECK(adj(i, (i + 2) % 10) == 1);
    CHECK(adj(i, (i + 3) % 10) == 0);
  }
}

TEST_CASE("rewired graph keeps its edge count and shortens paths") {
  GraphSpec ring{100, 2, 0.0, 4};
  GraphSpec small{100, 2, 0.2, 4};
  const auto a0 = watts_strogatz(ring);
  const auto a1 = watts_strogatz(small);
  CHECK(a1 == a1.transpose());
  CHECK(a1.diagonal().sum() == 0);
  CHECK(a1.sum() == 2 * 100 * 2);
  CHECK(a1.maxCoeff() == 1);
  CHECK(a0 != a1);
  const double l0 = testing::mean_geodesic(a0);
  const double l1 = testing::mean_geodesic(a1);
  // The lattice value is ≈ n / (4k).
  CHECK(l0 == doctest::Approx(12.9).epsilon(0.02));
  CHECK(l1 < 0.6 * l0);
  CHECK(watts_strogatz(small) == a1);
}

TEST_CASE("graph parameter checks") {
  CHECK_THROWS_AS(watts_strogatz({2, 1, 0.1, 0}), InvalidParams);
  CHECK_THROWS_AS(watts_strogatz({10, 5, 0.1, 0}), InvalidParams);
  CHECK_THROWS_AS(watts_strogatz({10, 2, 1.5, 0}), InvalidParams);
}

TEST_CASE("edge weights live on edges, below the diagonal, inside the law") {
  const auto adj = watts_strogatz({30, 2, 0.3, 2});
  const auto a = random_edge_weights(adj, {0.1, 1.0}, 9);
  for (int i = 0; i < 30; ++i) {
    for (int j = 0; j < 30; ++j) {
      if (j >= i || !adj(i, j)) {
        CHECK(a(i, j) == 0.0);
      } else {
        CHECK(std::abs(a(i, j)) >= 0.1);
        CHECK(std::abs(a(i, j)) <= 1.0);
      }
    }
  }
  CHECK((a.array() < 0).any());
  CHECK((a.array() > 0).any());
}

TEST_CASE("correlation from the structural model") {
  const auto adj = watts_strogatz({25, 2, 0.2, 5});
  const auto a = random_edge_weights(adj, {0.1, 1.0}, 6);
  const auto rho = correlation_from_graph(a);
  CHECK(rho.diagonal().isOnes());
  CHECK((rho - rho.transpose()).norm() < 1e-14);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rho);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
  // Independent check: Ω ∝ (I − A)ᵗ(I − A).
  const Eigen::MatrixXd B = Eigen::MatrixXd::Identity(25, 25) - a;
  const Eigen::MatrixXd S = (B.transpose() * B).inverse();
  const Eigen::VectorXd d = S.diagonal().cwiseSqrt().cwiseInverse();
  CHECK((rho - d.asDiagonal() * S * d.asDiagonal()).cwiseAbs().maxCoeff() < 1e-10);
  Eigen::MatrixXd upper = a;
  upper(0, 1) = 0.5;
  CHECK_THROWS_AS(correlation_from_graph(upper), InvalidParams);
}

TEST_CASE("correlation and partial correlation are exactly symmetric") {
  const auto adj = watts_strogatz({100, 2, 0.2, 7});
  const auto rho = correlation_from_graph(random_edge_weights(adj, {0.1, 1.0}, 9));
  CHECK(rho == rho.transpose());
  const auto pc = partial_correlation(rho);
  CHECK(pc == pc.transpose());
}

TEST_CASE("partial correlation vanishes for conditionally independent nodes") {
  // Chain 0 → 1 → 2: nodes 0 and 2 are independent given 1.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
  a(1, 0) = 0.7;
  a(2, 1) = -0.4;
  const auto pc = partial_correlation(correlation_from_graph(a));
  CHECK(std::abs(pc(0, 2)) < 1e-12);
  CHECK(std::abs(pc(0, 1)) > 0.1);
  CHECK(pc(1, 2) < 0.0);
  CHECK(pc.diagonal().isOnes());
}
