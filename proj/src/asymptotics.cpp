#include "mfbm/asymptotics.hpp"

#include "lag_kernel.hpp"
#include "mfbm/errors.hpp"
#include "mfbm/parallel.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mfbm {

namespace {

// γ^{m1,m2}_ab(h) for every (a, b, m1, m2) and integer |h| ≤ radius.
class GammaTables {
 public:
  GammaTables(const MfbmParams& params, const Filter& filter, const std::vector<int>& dilations,
              int radius)
      : p_(params.p()), nm_(static_cast<int>(dilations.size())), radius_(radius) {
    data_.resize(static_cast<std::size_t>(p_) * p_ * nm_ * nm_);
    for (int a = 0; a < p_; ++a) {
      for (int b = 0; b < p_; ++b) {
        const double alpha = params.H(a) + params.H(b);
        const double rho = a == b ? 1.0 : params.rho(a, b);
        const double eta = a == b ? 0.0 : params.eta(a, b);
        const double ss = params.sigma(a) * params.sigma(b);
        for (int m1 = 0; m1 < nm_; ++m1) {
          for (int m2 = 0; m2 < nm_; ++m2) {
            const auto kernel = detail::filtered_kernel(filter, dilations[m1], dilations[m2], alpha);
            auto& row = data_[index(a, b, m1, m2)];
            row.resize(2 * static_cast<std::size_t>(radius_) + 1);
            for (int h = -radius_; h <= radius_; ++h) {
              row[h + radius_] = -0.5 * ss * kernel(static_cast<double>(h), rho - eta, rho + eta);
            }
          }
        }
      }
    }
  }

  double operator()(int a, int b, int m1, int m2, int h) const {
    return data_[index(a, b, m1, m2)][h + radius_];
  }

 private:
  std::size_t index(int a, int b, int m1, int m2) const {
    return ((static_cast<std::size_t>(a) * p_ + b) * nm_ + m1) * nm_ + m2;
  }

  int p_;
  int nm_;
  int radius_;
  std::vector<std::vector<double>> data_;
};

struct IndexedMoment {
  MomentSpec spec;
  int mi = 0;
};

struct EntrySum {
  double value = 0.0;
  double tail = 0.0;
};

EntrySum lag_sum(const GammaTables& g, const IndexedMoment& A, const IndexedMoment& B, int K,
                 double beta) {
  const auto& a = A.spec;
  const auto& b = B.spec;
  auto term = [&](int k) {
    return g(a.i, b.i, A.mi, B.mi, k) * g(a.j, b.j, A.mi, B.mi, k + b.shift - a.shift) +
           g(a.i, b.j, A.mi, B.mi, k + b.shift) * g(a.j, b.i, A.mi, B.mi, k - a.shift);
  };
  EntrySum out;
  double amp = 0.0;
  for (int k = -K; k <= K; ++k) {
    const double t = term(k);
    out.value += t;
    const int ak = std::abs(k);
    if (2 * ak >= K) {
      amp = std::max(amp, std::abs(t) * std::pow(static_cast<double>(ak) / K, beta));
    }
  }
  // Σ_{|k|>K} amp (|k|/K)^{−β} ≈ 2 amp K / (β − 1), doubled as a safety margin.
  out.tail = 4.0 * amp * K / (beta - 1.0);
  return out;
}

void require_rate_condition(const MfbmParams& params, const Filter& filter) {
  const double hmax = params.H.maxCoeff();
  if (!summability_order(filter, hmax, 2)) {
    std::ostringstream os;
    os << "limit covariance requires q > max(H) + 1/4 (filter '" << filter.name << "' has q = "
       << filter.q << ", max(H) = " << hmax << ")";
    throw Unsupported(os.str());
  }
}

struct SigmaCore {
  Eigen::MatrixXd values;
  Eigen::MatrixXd tail;
  int cutoff = 0;
  bool converged = false;
};

SigmaCore compute_sigma(const MfbmParams& params, const Filter& filter,
                        const std::vector<int>& dilations, const std::vector<MomentSpec>& specs,
                        const SigmaOptions& options) {
  params.check_dimensions();
  require_rate_condition(params, filter);
  if (options.initial_cutoff < 2 || options.max_cutoff < options.initial_cutoff) {
    throw InvalidParams("invalid lag cutoff range");
  }
  std::vector<IndexedMoment> moments;
  int max_shift = 0;
  for (const auto& s : specs) {
    const auto it = std::find(dilations.begin(), dilations.end(), s.m);
    if (it == dilations.end()) throw InvalidParams("moment dilation not in the dilation set");
    moments.push_back({s, static_cast<int>(it - dilations.begin())});
    max_shift = std::max(max_shift, s.shift);
  }
  const auto D = static_cast<Eigen::Index>(moments.size());
  SigmaCore core;
  core.values.resize(D, D);
  core.tail.resize(D, D);
  for (int K = options.initial_cutoff;; K *= 2) {
    const GammaTables tables(params, filter, dilations, K + 2 * max_shift);
    parallel_for(static_cast<std::size_t>(D), options.jobs, [&](std::size_t r) {
      const auto a = static_cast<Eigen::Index>(r);
      for (Eigen::Index b = a; b < D; ++b) {
        const auto& A = moments[a].spec;
        const auto& B = moments[b].spec;
        const double beta =
            4.0 * filter.q - (params.H(A.i) + params.H(A.j) + params.H(B.i) + params.H(B.j));
        const auto e = lag_sum(tables, moments[a], moments[b], K, beta);
        core.values(a, b) = core.values(b, a) = e.value;
        core.tail(a, b) = core.tail(b, a) = e.tail;
      }
    });
    core.cutoff = K;
    const double scale = core.values.diagonal().cwiseAbs().maxCoeff();
    core.converged = true;
    for (Eigen::Index a = 0; a < D && core.converged; ++a) {
      for (Eigen::Index b = a; b < D; ++b) {
        const double t = core.tail(a, b);
        if (!(t <= options.rel_tol * std::abs(core.values(a, b)) || t <= 1e-15 * scale)) {
          core.converged = false;
          break;
        }
      }
    }
    if (core.converged || 2 * K > options.max_cutoff) break;
  }
  return core;
}

}  // namespace

std::vector<MomentSpec> moment_specs(int p, const std::vector<int>& dilations, int ell) {
  std::vector<MomentSpec> specs;
  for (int i = 0; i < p; ++i) {
    for (int m : dilations) specs.push_back({i, i, m, 0});
  }
  for (int block = 0; block < 3; ++block) {
    for (int k = 0; k < pair_count(p); ++k) {
      const auto [i, j] = pair_components(k, p);
      for (int m : dilations) {
        if (block == 0) specs.push_back({i, j, m, 0});
        if (block == 1) specs.push_back({i, j, m, m * ell});
        if (block == 2) specs.push_back({j, i, m, m * ell});
      }
    }
  }
  return specs;
}

double sigma_lag_sum(const MfbmParams& params, const Filter& filter, const MomentSpec& a,
                     const MomentSpec& b, int cutoff) {
  auto g = [&](int x, int y, double h) {
    return theoretical_filtered_cov(params, filter, x, y, a.m, b.m, h);
  };
  double s = 0.0;
  for (int k = -cutoff; k <= cutoff; ++k) {
    s += g(a.i, b.i, k) * g(a.j, b.j, k + b.shift - a.shift) +
         g(a.i, b.j, k + b.shift) * g(a.j, b.i, k - a.shift);
  }
  return s;
}

Eigen::MatrixXd SigmaMatrix::block(int r, int c) const {
  if (r < 1 || r > 4 || c < 1 || c > 4) throw InvalidParams("block index must be in 1..4");
  const Eigen::Index pm = Eigen::Index{layout.p} * layout.num_dilations;
  const Eigen::Index dm = Eigen::Index{pair_count(layout.p)} * layout.num_dilations;
  auto start = [&](int b) { return b == 1 ? Eigen::Index{0} : pm + (b - 2) * dm; };
  auto size = [&](int b) { return b == 1 ? pm : dm; };
  return values.block(start(r), start(c), size(r), size(c));
}

SigmaMatrix sigma_matrix(const MfbmParams& params, const Filter& filter,
                         const std::vector<int>& dilations, const SigmaOptions& options) {
  const auto specs = moment_specs(params.p(), dilations, filter.ell);
  auto core = compute_sigma(params, filter, dilations, specs, options);
  SigmaMatrix s;
  s.values = std::move(core.values);
  s.tail = std::move(core.tail);
  s.layout = {params.p(), static_cast<int>(dilations.size())};
  s.dilations = dilations;
  s.lag_cutoff = core.cutoff;
  s.tail_bound = s.tail.size() ? s.tail.maxCoeff() : 0.0;
  s.converged = core.converged;
  return s;
}

std::string to_string(CltNormalization norm) {
  return norm == CltNormalization::Variance ? "variance" : "literal";
}

Eigen::MatrixXd h_clt_covariance(const MfbmParams& params, const Filter& filter,
                                 const std::vector<int>& dilations, CltNormalization norm,
                                 const SigmaOptions& options) {
  const int p = params.p();
  const int nm = static_cast<int>(dilations.size());
  auto specs = moment_specs(p, dilations, filter.ell);
  specs.resize(static_cast<std::size_t>(p) * nm);
  const auto core = compute_sigma(params, filter, dilations, specs, options);

  Eigen::VectorXd L(nm);
  for (int k = 0; k < nm; ++k) L(k) = std::log(dilations[k]);
  const Eigen::VectorXd Lc = L.array() - L.mean();
  const double S = Lc.squaredNorm();
  if (!(S > 0.0)) throw InvalidParams("regression is singular: at least two dilations are needed");

  auto gamma0 = [&](int a, int b, int m) {
    return theoretical_filtered_cov(params, filter, a, b, m, m, 0.0);
  };
  Eigen::MatrixXd out(p, p);
  for (int i1 = 0; i1 < p; ++i1) {
    for (int i2 = 0; i2 < p; ++i2) {
      double s = 0.0;
      for (int a = 0; a < nm; ++a) {
        for (int b = 0; b < nm; ++b) {
          const int m1 = dilations[a];
          const int m2 = dilations[b];
          const double den = norm == CltNormalization::Variance
                                 ? gamma0(i1, i1, m1) * gamma0(i2, i2, m2)
                                 : gamma0(i1, i2, m1) * gamma0(i1, i2, m2);
          if (den == 0.0) {
            throw NumericalFailure("literal normalisation divides by a vanishing covariance");
          }
          s += Lc(a) * Lc(b) * core.values(Eigen::Index{i1} * nm + a, Eigen::Index{i2} * nm + b) /
               den;
        }
      }
      out(i1, i2) = s / (4.0 * S * S);
    }
  }
  return out;
}

Eigen::MatrixXd numerical_gradient(const MomentVector& at, const EstimationConfig& config) {
  const int p = at.layout.p;
  const auto specs = moment_specs(p, at.dilations, at.ell);
  const auto D = at.entries.size();
  const int rows = p * (p + 1);
  Eigen::MatrixXd grad(rows, D);
  MomentVector work = at;
  for (Eigen::Index d = 0; d < D; ++d) {
    const auto& s = specs[d];
    const int mi = static_cast<int>(std::find(at.dilations.begin(), at.dilations.end(), s.m) -
                                    at.dilations.begin());
    const double scale = std::sqrt(at.variance(s.i, mi) * at.variance(s.j, mi));
    const double step = 1e-6 * std::max(std::abs(at.entries(d)), scale);
    work.entries(d) = at.entries(d) + step;
    const Eigen::VectorXd plus = theta_vector(estimate_from_moments(work, config));
    work.entries(d) = at.entries(d) - step;
    const Eigen::VectorXd minus = theta_vector(estimate_from_moments(work, config));
    work.entries(d) = at.entries(d);
    grad.col(d) = (plus - minus) / (2.0 * step);
  }
  return grad;
}

DeltaMethod delta_method_covariance(const MfbmParams& params, const EstimationConfig& config,
                                    const SigmaOptions& options) {
  config.check();
  DeltaMethod dm;
  const auto gamma = theoretical_moment_vector(params, config.filter, config.dilations);
  dm.gradient = numerical_gradient(gamma, config);
  dm.sigma = sigma_matrix(params, config.filter, config.dilations, options);
  dm.covariance = dm.gradient * dm.sigma.values * dm.gradient.transpose();
  return dm;
}

ConfidenceReport confidence_intervals(const EstimationResult& result, Eigen::Index n,
                                      double level, const SigmaOptions& options) {
  if (!(level > 0.0 && level < 1.0)) throw InvalidParams("confidence level must lie in (0,1)");
  if (n < 1) throw InvalidParams("sample size must be positive");
  const int p = static_cast<int>(result.H_hat.size());
  const Eigen::VectorXd theta = theta_vector(result);
  const auto dm = delta_method_covariance(params_from_theta(theta, p), result.config, options);
  const double z =
      boost::math::quantile(boost::math::normal_distribution<double>(), 0.5 + 0.5 * level);
  const auto labels = theta_labels(p);
  ConfidenceReport report;
  report.level = level;
  report.lag_cutoff = dm.sigma.lag_cutoff;
  report.tail_bound = dm.sigma.tail_bound;
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    ConfidenceInterval ci;
    ci.label = labels[k];
    ci.estimate = theta(k);
    ci.std_error = std::sqrt(std::max(dm.covariance(k, k), 0.0) / static_cast<double>(n));
    ci.lower = ci.estimate - z * ci.std_error;
    ci.upper = ci.estimate + z * ci.std_error;
    report.intervals.push_back(ci);
  }
  return report;
}

}  // namespace mfbm
