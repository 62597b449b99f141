#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace mfbm {

/// Full parameter set of a p-variate fractional Brownian motion.
///
/// Component indices are 0-based throughout the C++ API. `rho` must be
/// symmetric with unit diagonal, `eta` antisymmetric. `sigma` holds standard
/// deviations at time 1 (not variances).
struct MfbmParams {
  Eigen::VectorXd H;
  Eigen::VectorXd sigma;
  Eigen::MatrixXd rho;
  Eigen::MatrixXd eta;

  int p() const { return static_cast<int>(H.size()); }

  /// Independent components: rho = I, eta = 0.
  static MfbmParams independent(const Eigen::VectorXd& H, const Eigen::VectorXd& sigma);

  /// Same correlation for every pair, eta = 0 (time-reversible).
  static MfbmParams well_balanced(const Eigen::VectorXd& H, const Eigen::VectorXd& sigma,
                                  double rho_offdiag);

  /// Throws InvalidParams if the field sizes disagree with p.
  void check_dimensions() const;
};

struct ValidityReport {
  bool admissible = false;
  double min_eigenvalue = 0.0;
  std::vector<std::string> violations;
};

/// Hermitian matrix Γ(H_i+H_j+1)(ρ_ij sin(πα/2) − i η_ij cos(πα/2)), α = H_i+H_j.
/// The process exists iff it is positive semidefinite.
Eigen::MatrixXcd existence_matrix(const MfbmParams& params);

/// The same matrix with sin(πα/2) on the η term as well. Kept only so the
/// test suite can document how it differs from the corrected form.
Eigen::MatrixXcd existence_matrix_sin_sin(const MfbmParams& params);

/// Checks ranges, symmetry, antisymmetry and positive semidefiniteness of the
/// existence matrix. A negative `tol_psd` selects the default tolerance of
/// 1e-10 times the largest eigenvalue magnitude. Dimension mismatches throw.
ValidityReport validate(const MfbmParams& params, double tol_psd = -1.0);

/// validate(), throwing InvalidParams with every violation when inadmissible.
void require_admissible(const MfbmParams& params);

/// w_ij(h) of the cross-covariance. w(0) = 0; uses 0·log 0 := 0.
double w_func(const MfbmParams& params, int i, int j, double h);

/// E[x_i(s) x_j(t)].
double cross_cov(const MfbmParams& params, int i, int j, double s, double t);

/// γ_ij(h) = E[Δx_i(t) Δx_j(t+h)] for unit increments Δx(t) = x(t+1) − x(t).
/// Large lags are evaluated by a convergent expansion to avoid cancellation.
double increment_cov(const MfbmParams& params, int i, int j, std::int64_t h);

/// increment_cov for every lag in [first, last], element k at lag first + k.
std::vector<double> increment_cov_range(const MfbmParams& params, int i, int j,
                                        std::int64_t first, std::int64_t last);

/// Leading term σ_iσ_j|h|^{α−2}(ρ_ij − η_ij sign h) α(α−1) of γ_ij(h).
/// Throws Unsupported for i ≠ j, α = 1, η_ij ≠ 0.
double increment_cov_asymptote(const MfbmParams& params, int i, int j, double h);

}  // namespace mfbm
