#pragma once

#include "mfbm/estimation.hpp"
#include "mfbm/filtering.hpp"
#include "mfbm/model.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace mfbm {

struct SigmaOptions {
  int initial_cutoff = 64;
  int max_cutoff = 1 << 16;
  double rel_tol = 1e-8;
  int jobs = 1;
};

/// Limit covariance of √n (C_n − γ), in the layout of MomentVector.
///
/// Each entry is a lag sum over |k| ≤ lag_cutoff of products of filtered
/// covariances. `tail` holds the estimated truncation error of every entry,
/// extrapolated from the power-law decay of the summands.
struct SigmaMatrix {
  Eigen::MatrixXd values;
  Eigen::MatrixXd tail;
  MomentLayout layout;
  std::vector<int> dilations;
  int lag_cutoff = 0;
  double tail_bound = 0.0;
  bool converged = false;

  /// Block (r, c) with r, c ∈ {1,2,3,4}: variances, lag-0 covariances,
  /// covariances at +mℓ, covariances at −mℓ.
  Eigen::MatrixXd block(int r, int c) const;
};

/// A moment x_i^m(t) x_j^m(t + shift) of the vector C_n; m is the dilation
/// value, shift is 0 or m·ℓ.
struct MomentSpec {
  int i = 0;
  int j = 0;
  int m = 1;
  int shift = 0;
};

/// Moments of C_n in layout order.
std::vector<MomentSpec> moment_specs(int p, const std::vector<int>& dilations, int ell);

/// Σ_{|k| ≤ cutoff} [γ_{i1i2}(k) γ_{j1j2}(k + s2 − s1) + γ_{i1j2}(k + s2) γ_{j1i2}(k − s1)],
/// γ = γ^{m1,m2}. Evaluated directly, without tables or tail control.
double sigma_lag_sum(const MfbmParams& params, const Filter& filter, const MomentSpec& a,
                     const MomentSpec& b, int cutoff);

/// Throws Unsupported unless q > max(H) + 1/4.
SigmaMatrix sigma_matrix(const MfbmParams& params, const Filter& filter,
                         const std::vector<int>& dilations, const SigmaOptions& options = {});

enum class CltNormalization {
  /// Σ̃ = Σ₁ / (γ^{m1}_{i1i1}(0) γ^{m2}_{i2i2}(0)).
  Variance,
  /// Σ̃ = Σ₁ / (γ^{m1}_{i1i2}(0) γ^{m2}_{i1i2}(0)); undefined when ρ = 0.
  Literal,
};

std::string to_string(CltNormalization norm);

/// Asymptotic covariance of √n (Ĥ − H) for weights (1,0,0):
/// (1/(4 (L̆ᵗL̆)²)) (I ⊗ L̆)ᵗ Σ̃ (I ⊗ L̆).
Eigen::MatrixXd h_clt_covariance(const MfbmParams& params, const Filter& filter,
                                 const std::vector<int>& dilations,
                                 CltNormalization norm = CltNormalization::Variance,
                                 const SigmaOptions& options = {});

/// ∇g at `at` by central differences, p(p+1) × D.
Eigen::MatrixXd numerical_gradient(const MomentVector& at, const EstimationConfig& config);

struct DeltaMethod {
  Eigen::MatrixXd gradient;
  SigmaMatrix sigma;
  Eigen::MatrixXd covariance;  // ∇g Σ ∇gᵗ
};

/// Delta method evaluated at γ(params).
DeltaMethod delta_method_covariance(const MfbmParams& params, const EstimationConfig& config,
                                    const SigmaOptions& options = {});

struct ConfidenceInterval {
  std::string label;
  double estimate = 0.0;
  double std_error = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct ConfidenceReport {
  std::vector<ConfidenceInterval> intervals;
  double level = 0.0;
  int lag_cutoff = 0;
  double tail_bound = 0.0;
};

/// θ̂ ± z·√((∇gΣ∇gᵗ)_kk / n), with Σ and ∇g evaluated at the plug-in θ̂.
ConfidenceReport confidence_intervals(const EstimationResult& result, Eigen::Index n,
                                      double level, const SigmaOptions& options = {});

}  // namespace mfbm
