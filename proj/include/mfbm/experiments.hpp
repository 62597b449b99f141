#pragma once

#include "mfbm/estimation.hpp"
#include "mfbm/graph.hpp"
#include "mfbm/model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mfbm {

enum class Family { Causal, WellBalanced, General };

std::string to_string(Family f);
Family family_from_string(const std::string& s);

/// One row of a Monte-Carlo table: every component gets either the same H
/// or H equally spaced in [H_lo, H_hi]; every pair shares ρ.
struct McCell {
  int p = 2;
  double H_lo = 0.2;
  double H_hi = 0.2;
  double rho = 0.5;
  double sigma = 1.0;
  /// η_ij (i < j) for the causal family; required only when that family runs.
  std::optional<Eigen::MatrixXd> causal_eta;

  std::string H_label() const;
};

/// Parameters of a cell under a family. General: η_ij = 0.2(1 − H_i − H_j)
/// for i < j. Causal: the supplied η.
MfbmParams cell_params(const McCell& cell, Family family);

struct McExperiment {
  std::vector<McCell> cells;
  std::vector<Family> families{Family::WellBalanced};
  std::vector<char> variants{'v', 'c', 'd'};
  int n = 1000;
  int replications = 100;
  int first_replication = 0;
  std::uint64_t seed = 0;
  EstimationConfig config = EstimationConfig::defaults();
  int jobs = 1;
};

/// Squared errors of one replication under one weight variant, averaged over
/// components (H), or pairs (ρ, η). H is NaN only when the moments could not
/// be formed; ρ and η are NaN when any later stage failed. For p = 1 the pair
/// errors are 0.
struct ReplicationError {
  double H = 0.0;
  double rho = 0.0;
  double eta = 0.0;
};

struct McRow {
  McCell cell;
  Family family = Family::WellBalanced;
  char variant = 'v';
  bool admissible = true;
  int first_replication = 0;
  std::vector<ReplicationError> errors;  // by replication

  /// Replications where the full estimator failed.
  int failures() const;
  double mse_H() const;
  double mse_rho() const;
  double mse_eta() const;
};

std::vector<McRow> run_mc_table(const McExperiment& exp);

/// Rows of two runs over disjoint replication ranges of the same experiment,
/// combined in replication order.
std::vector<McRow> merge_mc_tables(const std::vector<McRow>& a, const std::vector<McRow>& b);

/// CSV: family,p,H,rho,variant,replications,failures,mse_H,mse_rho,mse_eta.
/// Inadmissible cells carry "×" in the MSE columns.
std::string mc_table_csv(const std::vector<McRow>& rows);

struct ConvergenceStudy {
  MfbmParams params;
  std::vector<int> sizes{256, 1024, 4096, 16384};
  int replications = 200;
  std::uint64_t seed = 0;
  EstimationConfig config = EstimationConfig::defaults();
  int jobs = 1;

  /// H = (0.3, 0.8), σ = (2, 1), ρ = 0.4, η = 0.
  static MfbmParams default_params();
};

struct ConvergenceResult {
  std::vector<std::string> labels;  // θ components
  std::vector<int> sizes;
  Eigen::MatrixXd std_dev;  // sizes × θ
  Eigen::MatrixXd mean;     // sizes × θ
  std::vector<int> failures;
  Eigen::VectorXd slopes;  // log-log slope of std against n, per θ component
};

ConvergenceResult run_convergence(const ConvergenceStudy& study);
std::string convergence_csv(const ConvergenceResult& r);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct HighDimSetup {
  GraphSpec graph;
  WeightLaw weights;
  double H_lo = 0.3;
  double H_hi = 0.8;
  bool H_random = true;  // uniform draws; otherwise equally spaced
  int n = 8192;
  std::uint64_t seed = 0;
  int max_attempts = 50;
  EstimationConfig config = EstimationConfig::defaults();
};

struct HighDimResult {
  Eigen::MatrixXi adjacency;
  MfbmParams params;
  int attempts = 0;
  EstimationResult estimate;
  Eigen::MatrixXd partial_true;
  Eigen::MatrixXd partial_hat;
  double threshold = 0.05;
  double precision = 0.0;
  double recall = 0.0;
};

/// Graph, admissible parameters, one synthesized path, and its estimate.
HighDimResult run_highdim(const HighDimSetup& setup);

/// Builds the graph and an admissible parameter set, redrawing edge weights
/// (and H when random) until validate() accepts or attempts run out.
MfbmParams highdim_params(const HighDimSetup& setup, Eigen::MatrixXi* adjacency = nullptr,
                          int* attempts = nullptr);

}  // namespace mfbm
