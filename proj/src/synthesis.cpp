#include "mfbm/synthesis.hpp"

#include "mfbm/errors.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <iostream>

namespace mfbm {

namespace {

constexpr std::size_t kFactorCacheBytes = std::size_t{256} << 20;
constexpr double kSpectralTol = 1e-10;
constexpr int kMaxEmbeddingDoublings = 2;

std::size_t next_pow2(std::size_t n) {
  std::size_t m = 1;
  while (m < n) m <<= 1;
  return m;
}

int pair_index(int i, int j, int p) {
  // Upper triangle including the diagonal, row-major.
  return i * p - i * (i - 1) / 2 + (j - i);
}

}  // namespace

Eigen::MatrixXd build_path_covariance(const MfbmParams& params, int n, std::size_t cap) {
  params.check_dimensions();
  if (n < 1) throw InvalidParams("path length must be >= 1");
  const int p = params.p();
  const std::size_t dim = static_cast<std::size_t>(n) * static_cast<std::size_t>(p);
  if (dim > cap) {
    throw InvalidParams("n*p = " + std::to_string(dim) + " exceeds the dense covariance cap " +
                        std::to_string(cap));
  }
  Eigen::MatrixXd cov(dim, dim);
  std::vector<double> w(2 * static_cast<std::size_t>(n) + 1);
  for (int i = 0; i < p; ++i) {
    for (int j = i; j < p; ++j) {
      for (int h = -n; h <= n; ++h) w[h + n] = w_func(params, i, j, h);
      const double half_ss = 0.5 * params.sigma(i) * params.sigma(j);
      for (int s = 1; s <= n; ++s) {
        for (int t = 1; t <= n; ++t) {
          const double v = half_ss * (w[n - s] + w[n + t] - w[n + t - s]);
          const auto r = static_cast<Eigen::Index>(i) * n + s - 1;
          const auto c = static_cast<Eigen::Index>(j) * n + t - 1;
          cov(r, c) = v;
          cov(c, r) = v;
        }
      }
    }
  }
  return cov;
}

ExactSampler::ExactSampler(MfbmParams params, int n, std::size_t cap)
    : params_(std::move(params)), n_(n) {
  require_admissible(params_);
  Eigen::MatrixXd cov = build_path_covariance(params_, n_, cap);
  const double scale = cov.trace() / static_cast<double>(cov.rows());
  for (double rel : {0.0, 1e-12, 1e-10, 1e-8}) {
    Eigen::MatrixXd jittered = cov;
    jittered.diagonal().array() += rel * scale;
    Eigen::LLT<Eigen::MatrixXd> llt(jittered);
    if (llt.info() == Eigen::Success) {
      lower_ = llt.matrixL();
      jitter_ = rel * scale;
      return;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov, Eigen::EigenvaluesOnly);
  throw NumericalFailure("Cholesky factorisation of the path covariance failed (min eigenvalue " +
                         std::to_string(solver.eigenvalues().minCoeff()) + ")");
}

SamplePath ExactSampler::draw(std::uint64_t seed) const {
  Rng rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(lower_.rows());
  for (Eigen::Index k = 0; k < z.size(); ++k) z(k) = normal(rng);
  const Eigen::VectorXd x = lower_.triangularView<Eigen::Lower>() * z;
  SamplePath path;
  path.params_used = params_;
  path.seed = seed;
  path.values = Eigen::Map<const Eigen::MatrixXd>(x.data(), n_, params_.p());
  return path;
}

SamplePath sample_exact(const MfbmParams& params, int n, std::uint64_t seed) {
  return ExactSampler(params, n).draw(seed);
}

CirculantSampler::CirculantSampler(MfbmParams params, int n)
    : params_(std::move(params)), n_(n) {
  require_admissible(params_);
  if (n_ < 1) throw InvalidParams("path length must be >= 1");
  std::size_t m = 2 * next_pow2(static_cast<std::size_t>(n_));
  for (int attempt = 0; attempt <= kMaxEmbeddingDoublings; ++attempt, m *= 2) {
    if (try_embedding(m)) return;
  }
  std::clog << "warning: circulant embedding not positive semidefinite up to M = " << m / 2
            << " (min eigenvalue " << min_eigenvalue_ << "); using dense Cholesky sampler\n";
  spectra_.clear();
  factors_.clear();
  embedding_ = 0;
  try {
    fallback_ = std::make_unique<ExactSampler>(params_, n_);
  } catch (const InvalidParams& e) {
    throw NumericalFailure(std::string("circulant embedding failed and dense fallback refused: ") +
                           e.what());
  }
}

CirculantSampler::~CirculantSampler() = default;
CirculantSampler::CirculantSampler(CirculantSampler&&) noexcept = default;
CirculantSampler& CirculantSampler::operator=(CirculantSampler&&) noexcept = default;

bool CirculantSampler::try_embedding(std::size_t m) {
  const int p = params_.p();
  const std::size_t half = m / 2;
  const auto lag = static_cast<std::int64_t>(half);
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> c(m), spec;
  spectra_.assign(static_cast<std::size_t>(p) * (p + 1) / 2, {});
  for (int i = 0; i < p; ++i) {
    for (int j = i; j < p; ++j) {
      // g[k] = γ_ij(k − half), k = 0..2·half.
      const auto g = increment_cov_range(params_, i, j, -lag, lag);
      for (std::size_t d = 0; d < m; ++d) {
        if (d < half) {
          c[d] = g[half + d];
        } else if (d == half) {
          c[d] = 0.5 * (g[2 * half] + g[0]);
        } else {
          c[d] = g[d - half];
        }
      }
      fft.fwd(spec, c);
      auto& out = spectra_[pair_index(i, j, p)];
      out.resize(half + 1);
      for (std::size_t f = 0; f <= half; ++f) out[f] = std::conj(spec[f]);
    }
  }
  embedding_ = m;

  const std::size_t factor_bytes = static_cast<std::size_t>(p) * p * (half + 1) * 16;
  const bool cache = factor_bytes <= kFactorCacheBytes;
  factors_.clear();
  if (cache) factors_.resize(half + 1);
  double lo = 0.0;
  double hi = 0.0;
  for (std::size_t f = 0; f <= half; ++f) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(
        spectral_matrix(f), cache ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    const Eigen::VectorXd& ev = solver.eigenvalues();
    lo = std::min(lo, ev.minCoeff());
    hi = std::max(hi, ev.maxCoeff());
    if (cache) {
      factors_[f] = solver.eigenvectors() *
                    ev.cwiseMax(0.0).cwiseSqrt().cast<std::complex<double>>().asDiagonal();
    }
  }
  min_eigenvalue_ = lo;
  if (lo < -kSpectralTol * hi) {
    factors_.clear();
    return false;
  }
  if (cache) spectra_.clear();
  return true;
}

Eigen::MatrixXcd CirculantSampler::spectral_matrix(std::size_t f) const {
  const int p = params_.p();
  Eigen::MatrixXcd s(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = i; j < p; ++j) {
      const auto v = spectra_[pair_index(i, j, p)][f];
      s(i, j) = v;
      s(j, i) = std::conj(v);
    }
    s(i, i) = s(i, i).real();
  }
  return s;
}

Eigen::MatrixXcd CirculantSampler::factor(std::size_t f) const {
  if (!factors_.empty()) return factors_[f];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(spectral_matrix(f));
  return solver.eigenvectors() *
         solver.eigenvalues().cwiseMax(0.0).cwiseSqrt().cast<std::complex<double>>().asDiagonal();
}

SamplePath CirculantSampler::draw(std::uint64_t seed) const {
  if (fallback_) return fallback_->draw(seed);
  const int p = params_.p();
  const std::size_t m = embedding_;
  const std::size_t half = m / 2;
  Rng rng(seed);
  std::normal_distribution<double> normal;

  Eigen::MatrixXcd xi(p, m);
  for (std::size_t f = 0; f < m; ++f) {
    for (int i = 0; i < p; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      xi(i, static_cast<Eigen::Index>(f)) = {re, im};
    }
  }
  Eigen::MatrixXcd w(p, m);
  for (std::size_t f = 0; f <= half; ++f) {
    const Eigen::MatrixXcd a = factor(f);
    w.col(f) = a * xi.col(f);
    if (f != 0 && f != half) w.col(m - f) = a.conjugate() * xi.col(m - f);
  }

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec(m), y;
  SamplePath path;
  path.params_used = params_;
  path.seed = seed;
  path.values.resize(n_, p);
  const double scale = std::sqrt(static_cast<double>(m));
  for (int i = 0; i < p; ++i) {
    for (std::size_t f = 0; f < m; ++f) spec[f] = w(i, static_cast<Eigen::Index>(f));
    fft.inv(y, spec);
    double x = 0.0;
    for (int t = 0; t < n_; ++t) {
      x += scale * y[t].real();
      path.values(t, i) = x;
    }
  }
  return path;
}

SamplePath sample_increments_circulant(const MfbmParams& params, int n, std::uint64_t seed) {
  return CirculantSampler(params, n).draw(seed);
}

}  // namespace mfbm
