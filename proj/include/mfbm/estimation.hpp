#pragma once

#include "mfbm/filtering.hpp"
#include "mfbm/model.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mfbm {

/// Weights of the variance, correlation and asymmetry terms of the
/// regression objective.
struct Weights {
  double v = 1.0;
  double c = 0.0;
  double d = 0.0;

  /// "v" → (1,0,0), "c" → (1,1,0), "d" → (1,1,1).
  static Weights preset(char variant);
};

struct EstimationConfig {
  Filter filter;
  std::vector<int> dilations;
  Weights weights;
  std::optional<int> sign_dilation;  // defaults to the smallest dilation
  int min_terms = 30;

  /// db4, dilations 1..5, weights (1,0,0).
  static EstimationConfig defaults();

  /// Throws InvalidParams unless there are at least two dilations, ascending,
  /// distinct and ≥ 1,
  /// weights are nonnegative with w_v > 0, and sign_dilation is one of the
  /// dilations.
  void check() const;

  /// Position of the sign dilation inside `dilations`.
  int sign_index() const;
};

/// 0-based number of the pair i < j, numbering along rows.
int pair_index(int i, int j, int p);
std::pair<int, int> pair_components(int k, int p);
inline int pair_count(int p) { return p * (p - 1) / 2; }

/// Position of each moment inside C_n. mi indexes the dilation set, k a pair.
///
/// Order: C^m_ii(0) for i, then m; C^m_ij(0) for pair, then m; then C^m_ij(mℓ);
/// then C^m_ij(−mℓ) = C^m_ji(mℓ).
struct MomentLayout {
  int p = 0;
  int num_dilations = 0;

  Eigen::Index size() const {
    return static_cast<Eigen::Index>(num_dilations) * p * (3 * p - 1) / 2;
  }
  Eigen::Index var(int i, int mi) const { return Eigen::Index{i} * num_dilations + mi; }
  Eigen::Index cov0(int k, int mi) const { return block(1, k, mi); }
  Eigen::Index lag_pos(int k, int mi) const { return block(2, k, mi); }
  Eigen::Index lag_neg(int k, int mi) const { return block(3, k, mi); }

 private:
  Eigen::Index block(int b, int k, int mi) const {
    const Eigen::Index pm = Eigen::Index{p} * num_dilations;
    const Eigen::Index dm = Eigen::Index{pair_count(p)} * num_dilations;
    return pm + (b - 1) * dm + Eigen::Index{k} * num_dilations + mi;
  }
};

struct MomentVector {
  Eigen::VectorXd entries;
  MomentLayout layout;
  std::vector<int> dilations;
  int ell = 0;
  Eigen::Index n_used = 0;

  double variance(int i, int mi) const { return entries(layout.var(i, mi)); }
  /// C^m_ij(0) for any i ≠ j.
  double cov0(int i, int j, int mi) const;
  /// C^m_ij(mℓ) for any i ≠ j.
  double lagged(int i, int j, int mi) const;
};

/// C^m_ij(h) = (1/(N − |h|)) Σ_r x_i(r) x_j(r+h) over the N valid rows of a
/// filtered series; negative h uses C_ij(−h) = C_ji(h). Throws
/// InsufficientData when fewer than min_terms products are available.
double empirical_cov(const FilteredSeries& fs, int i, int j, int h, int min_terms = 30);

/// C_n of an n × p path. Requires n > 2·max(dilations)·ℓ.
MomentVector compute_moment_vector(const Eigen::MatrixXd& path, const EstimationConfig& config);

/// E[C_n] under the model, i.e. the same entries built from γ^m_ij.
MomentVector theoretical_moment_vector(const MfbmParams& params, const Filter& filter,
                                       const std::vector<int>& dilations);

/// Log-variables of the regression. Rows are components (v) or pairs (c, d),
/// columns dilations. Values whose argument fell below the floor are marked.
struct RegressionInputs {
  Eigen::MatrixXd v;
  Eigen::MatrixXd c;
  Eigen::MatrixXd d;
  std::vector<bool> c_unreliable;
  std::vector<bool> d_unreliable;
};

inline constexpr double kLogFloor = 1e-300;

RegressionInputs regression_inputs(const MomentVector& mv);

Eigen::VectorXd estimate_H(const RegressionInputs& in, const std::vector<int>& dilations,
                           const Weights& w);

struct Intercepts {
  Eigen::VectorXd alpha;
  Eigen::MatrixXd mu;  // symmetric, zero diagonal
  Eigen::MatrixXd nu;
};

Intercepts estimate_intercepts(const RegressionInputs& in, const Eigen::VectorXd& H_hat,
                               const std::vector<int>& dilations);

Eigen::VectorXd estimate_sigma2(const Eigen::VectorXd& alpha_hat, const Eigen::VectorXd& H_hat,
                                const Filter& filter);

/// Geometric-mean correlation estimate, signed by C^{m_s}_ij(0).
Eigen::MatrixXd estimate_rho(const MomentVector& mv, const Eigen::VectorXd& H_hat,
                             const Filter& filter, int sign_index);

/// Geometric-mean asymmetry estimate. The sign is that of
/// −(C^{m_s}_ij(m_sℓ) − C^{m_s}_ji(m_sℓ)) / π̂_ij(ℓ), which is the sign of η_ij
/// in expectation. Throws NumericalFailure if π̂_ij(ℓ) = 0.
Eigen::MatrixXd estimate_eta(const MomentVector& mv, const Eigen::VectorXd& H_hat,
                             const Filter& filter, int sign_index);

struct EstimationResult {
  Eigen::VectorXd H_hat;
  Eigen::VectorXd sigma2_hat;
  Eigen::MatrixXd rho_hat;
  Eigen::MatrixXd eta_hat;
  Intercepts intercepts;
  RegressionInputs inputs;
  EstimationConfig config;
  Eigen::Index n_used = 0;

  /// Pairs (i < j) whose c or d input hit the log floor while its weight was
  /// positive.
  std::vector<std::pair<int, int>> unreliable_pairs() const;
};

/// The map g: C_n ↦ θ̂.
EstimationResult estimate_from_moments(const MomentVector& mv, const EstimationConfig& config);

EstimationResult estimate_all(const Eigen::MatrixXd& path, const EstimationConfig& config);

/// θ = (H, σ², ρ_ij (i<j), η_ij (i<j)), length p(p+1).
Eigen::VectorXd theta_vector(const Eigen::VectorXd& H, const Eigen::VectorXd& sigma2,
                             const Eigen::MatrixXd& rho, const Eigen::MatrixXd& eta);
Eigen::VectorXd theta_vector(const MfbmParams& params);
Eigen::VectorXd theta_vector(const EstimationResult& result);

/// Human-readable 1-based names matching theta_vector: H1, sigma2_1, rho12, eta12, ...
std::vector<std::string> theta_labels(int p);

/// Inverse of theta_vector (σ = √σ²).
MfbmParams params_from_theta(const Eigen::VectorXd& theta, int p);

}  // namespace mfbm
