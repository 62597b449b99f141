#include "mfbm/graph.hpp"

#include "mfbm/errors.hpp"
#include "mfbm/synthesis.hpp"

#include <random>

namespace mfbm {

Eigen::MatrixXi watts_strogatz(const GraphSpec& spec) {
  const int n = spec.nodes;
  const int k = spec.neighbors_each_side;
  if (n < 3) throw InvalidParams("graph needs at least 3 nodes");
  if (k < 1 || 2 * k >= n) throw InvalidParams("neighbors_each_side must be in [1, (nodes-1)/2]");
  if (!(spec.rewire_prob >= 0.0 && spec.rewire_prob <= 1.0)) {
    throw InvalidParams("rewire probability must lie in [0,1]");
  }
  Eigen::MatrixXi adj = Eigen::MatrixXi::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 1; j <= k; ++j) {
      const int t = (i + j) % n;
      adj(i, t) = adj(t, i) = 1;
    }
  }
  Rng rng(spec.seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, n - 1);
  for (int j = 1; j <= k; ++j) {
    for (int i = 0; i < n; ++i) {
      const int t = (i + j) % n;
      if (!adj(i, t) || coin(rng) >= spec.rewire_prob) continue;
      if (adj.row(i).sum() >= n - 1) continue;
      int u = pick(rng);
      while (u == i || adj(i, u)) u = pick(rng);
      adj(i, t) = adj(t, i) = 0;
      adj(i, u) = adj(u, i) = 1;
    }
  }
  return adj;
}

Eigen::MatrixXd random_edge_weights(const Eigen::MatrixXi& adjacency, const WeightLaw& law,
                                    std::uint64_t seed) {
  if (!(law.low >= 0.0 && law.high > law.low)) throw InvalidParams("invalid weight law");
  const auto n = adjacency.rows();
  Rng rng(seed);
  std::uniform_real_distribution<double> mag(law.low, law.high);
  std::bernoulli_distribution sign(0.5);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      if (adjacency(i, j)) a(i, j) = sign(rng) ? mag(rng) : -mag(rng);
    }
  }
  return a;
}

Eigen::MatrixXd correlation_from_graph(const Eigen::MatrixXd& a_lower) {
  const auto n = a_lower.rows();
  if (a_lower.cols() != n) throw InvalidParams("weight matrix must be square");
  if (a_lower.triangularView<Eigen::Upper>().toDenseMatrix().cwiseAbs().maxCoeff() != 0.0) {
    throw InvalidParams("weight matrix must be strictly lower triangular");
  }
  const Eigen::MatrixXd B = Eigen::MatrixXd::Identity(n, n) - a_lower;
  // Unit lower-triangular, hence always invertible.
  const Eigen::MatrixXd Binv = B.triangularView<Eigen::UnitLower>().solve(
      Eigen::MatrixXd::Identity(n, n));
  const Eigen::MatrixXd S = Binv * Binv.transpose();
  const Eigen::VectorXd d = S.diagonal().cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd rho = d.asDiagonal() * S * d.asDiagonal();
  rho = (0.5 * (rho + rho.transpose())).eval();
  rho.diagonal().setOnes();
  return rho;
}

Eigen::MatrixXd partial_correlation(const Eigen::MatrixXd& rho) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(rho);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw NumericalFailure("correlation matrix is not invertible");
  }
  const Eigen::MatrixXd omega = ldlt.solve(Eigen::MatrixXd::Identity(rho.rows(), rho.cols()));
  const Eigen::VectorXd d = omega.diagonal().cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd pc = -(d.asDiagonal() * omega * d.asDiagonal());
  pc = (0.5 * (pc + pc.transpose())).eval();
  pc.diagonal().setOnes();
  return pc;
}

}  // namespace mfbm
