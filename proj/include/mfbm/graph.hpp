#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace mfbm {

struct GraphSpec {
  int nodes = 100;
  int neighbors_each_side = 2;
  double rewire_prob = 0.2;
  std::uint64_t seed = 0;
};

/// Edge weights drawn uniformly from [−high, −low] ∪ [low, high].
struct WeightLaw {
  double low = 0.1;
  double high = 0.5;  // wider laws are rarely admissible at p = 100
};

/// Symmetric 0/1 adjacency of a Watts-Strogatz small-world graph: a ring where
/// node i links to i±1..i±k, then the far end of each edge (i, i+j) is moved
/// with probability rewire_prob to a uniformly drawn node, redrawing self-loops
/// and duplicate edges. The edge count nodes·k is preserved.
Eigen::MatrixXi watts_strogatz(const GraphSpec& spec);

/// Strictly lower-triangular weight matrix carrying one random weight per edge.
Eigen::MatrixXd random_edge_weights(const Eigen::MatrixXi& adjacency, const WeightLaw& law,
                                    std::uint64_t seed);

/// S = (I − A)⁻¹ (I − A)⁻ᵗ rescaled to unit diagonal. A must be strictly lower
/// triangular.
Eigen::MatrixXd correlation_from_graph(const Eigen::MatrixXd& a_lower);

/// −ρ⁻¹ rescaled to unit diagonal.
Eigen::MatrixXd partial_correlation(const Eigen::MatrixXd& rho);

}  // namespace mfbm
