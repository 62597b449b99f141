#pragma once

#include "mfbm/estimation.hpp"
#include "mfbm/filtering.hpp"
#include "mfbm/model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>

namespace testing {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi);

/// Random admissible parameters: H in [h_lo, h_hi], σ in [0.5, 2], a random
/// correlation matrix and |η_ij| ≤ eta_max. Redraws until validate() accepts.
mfbm::MfbmParams random_admissible(Rng& rng, int p, double h_lo = 0.1, double h_hi = 0.9,
                                   double eta_max = 0.1);

/// Minimizer of the weighted regression objective by a generic least-squares
/// solve over (H, α, μ, ν); returns H.
Eigen::VectorXd brute_force_H(const mfbm::RegressionInputs& in, const std::vector<int>& dilations,
                              const mfbm::Weights& w);

/// Direct double sum σ_iσ_j Σ_k Σ_l a_k a_l (−½)(ρ − η sign x)|x|^α with
/// x = h + m1·k − m2·l, written without the library's kernel.
double filtered_cov_direct(const mfbm::MfbmParams& params, const mfbm::Filter& filter, int i,
                           int j, int m1, int m2, int h);

/// Largest root ρ in (0, 1) of det of the 2 × 2 existence matrix with η = 0.
double rho_boundary_closed_form(double H1, double H2);

/// Mean shortest-path length over connected ordered pairs, by breadth-first search.
double mean_geodesic(const Eigen::MatrixXi& adjacency);

}  // namespace testing
