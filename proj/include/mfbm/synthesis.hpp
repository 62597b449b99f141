#pragma once

#include "mfbm/model.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

namespace mfbm {

/// mfBm values at t = 1..n: row t−1, one column per component.
struct SamplePath {
  Eigen::MatrixXd values;
  MfbmParams params_used;
  std::uint64_t seed = 0;

  int n() const { return static_cast<int>(values.rows()); }
  int p() const { return static_cast<int>(values.cols()); }
};

inline constexpr std::size_t kDefaultCovarianceCap = 20000;

/// Generator used by every sampler: std::mt19937_64 feeding
/// std::normal_distribution<double>.
using Rng = std::mt19937_64;

/// Seed of Monte-Carlo replication r.
constexpr std::uint64_t replication_seed(std::uint64_t seed, std::uint64_t r) { return seed ^ r; }

/// Covariance of the stacked vector (x_1(1..n), ..., x_p(1..n)): entry
/// (i·n + s−1, j·n + t−1) = cross_cov(i, j, s, t). Refuses n·p > cap.
Eigen::MatrixXd build_path_covariance(const MfbmParams& params, int n,
                                      std::size_t cap = kDefaultCovarianceCap);

/// Dense Cholesky sampler. Factorisation is done once; draws are cheap.
class ExactSampler {
 public:
  ExactSampler(MfbmParams params, int n, std::size_t cap = kDefaultCovarianceCap);

  SamplePath draw(std::uint64_t seed) const;

  /// Diagonal jitter (absolute) that was needed for the factorisation.
  double jitter() const { return jitter_; }

 private:
  MfbmParams params_;
  int n_;
  Eigen::MatrixXd lower_;
  double jitter_ = 0.0;
};

SamplePath sample_exact(const MfbmParams& params, int n, std::uint64_t seed);

/// Block-circulant embedding sampler for the stationary increments.
///
/// The p × p matrix covariance sequence of the unit increments is embedded in
/// a block-circulant matrix of size M = 2·nextpow2(n) (doubled up to twice if
/// some spectral matrix is not positive semidefinite), diagonalised by FFT,
/// and the path is the cumulative sum of the increments with x(1) = Δx(0).
/// If every embedding fails the sampler falls back to ExactSampler and logs a
/// warning on stderr.
class CirculantSampler {
 public:
  CirculantSampler(MfbmParams params, int n);
  ~CirculantSampler();
  CirculantSampler(CirculantSampler&&) noexcept;
  CirculantSampler& operator=(CirculantSampler&&) noexcept;

  SamplePath draw(std::uint64_t seed) const;

  /// Embedding length M, or 0 when the dense fallback is in use.
  std::size_t embedding_size() const { return embedding_; }
  bool uses_fallback() const { return fallback_ != nullptr; }
  /// Smallest spectral eigenvalue of the accepted embedding.
  double min_spectral_eigenvalue() const { return min_eigenvalue_; }

 private:
  bool try_embedding(std::size_t m);
  Eigen::MatrixXcd spectral_matrix(std::size_t f) const;
  Eigen::MatrixXcd factor(std::size_t f) const;

  MfbmParams params_;
  int n_;
  std::size_t embedding_ = 0;
  double min_eigenvalue_ = 0.0;
  // spectra_[pair(i<=j)][f] for f = 0..M/2.
  std::vector<std::vector<std::complex<double>>> spectra_;
  std::vector<Eigen::MatrixXcd> factors_;  // cached A(f), A A^H = S(f), when small enough
  std::unique_ptr<ExactSampler> fallback_;
};

SamplePath sample_increments_circulant(const MfbmParams& params, int n, std::uint64_t seed);

}  // namespace mfbm
