#pragma once

#include "mfbm/model.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mfbm {

/// Finite filter a_0..a_ℓ annihilating polynomials of degree < q.
struct Filter {
  std::string name;
  std::vector<double> taps;
  int ell = 0;
  int q = 0;
};

/// Filter oversampled by m: taps at multiples of m, zeros elsewhere.
struct DilatedFilter {
  Filter base;
  int m = 1;
  std::vector<double> taps;  // length m·ℓ + 1
};

/// Output of a dilated filter over the valid support only.
///
/// Row r holds x^m(t) at the 1-based time t = m·ℓ + 1 + r; there are
/// n − m·ℓ rows and one column per component.
struct FilteredSeries {
  Eigen::MatrixXd values;
  int m = 1;
  int ell = 0;
};

/// Number of leading vanishing moments: Σ k^l a_k = 0 for l < q, each within
/// rel_tol · Σ|a_k|.
int vanishing_moments(std::span<const double> taps, double rel_tol = 1e-10);

/// Builds a filter from raw taps, measuring q. Throws InvalidParams if the
/// taps do not sum to zero (q = 0).
Filter filter_from_taps(std::string name, std::vector<double> taps);

/// "diffK" (K-fold difference, q = K) or "dbN" (Daubechies high-pass with N
/// taps, q = N/2, N ∈ {2,4,...,12}). Daubechies taps have unit energy and a
/// positive q-th moment.
Filter make_filter(std::string_view name);

/// Names accepted by make_filter, in listing order.
std::vector<std::string> available_filters();

DilatedFilter dilate(const Filter& filter, int m);

/// Valid-support convolution x^m_i(t) = Σ_k a^m_k x_i(t − k) of every column of
/// the n × p path matrix. Throws InsufficientData when n ≤ m·ℓ.
FilteredSeries apply_filter(const Eigen::MatrixXd& path, const DilatedFilter& df);

/// γ^{m1,m2}_ij(h) = E[x^{m1}_i(t) x^{m2}_j(t+h)] under the model.
double theoretical_filtered_cov(const MfbmParams& params, const Filter& filter, int i, int j,
                                int m1, int m2, double h);

/// π_ij(h) = −½ Σ_{k,l} a_k a_l |h + k − l|^{H_i+H_j}. Throws NumericalFailure
/// if π(0) is not strictly positive.
double pi_a(double Hi, double Hj, const Filter& filter, int h);

/// q > Hmax + 1/(2·alpha): the filtered covariances are in ℓ^alpha.
bool summability_order(const Filter& filter, double Hmax, int alpha);

}  // namespace mfbm
