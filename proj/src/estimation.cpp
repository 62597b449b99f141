#include "mfbm/estimation.hpp"

#include "mfbm/errors.hpp"

#include <algorithm>
#include <cmath>

namespace mfbm {

namespace {

Eigen::VectorXd log_dilations(const std::vector<int>& dilations) {
  Eigen::VectorXd L(static_cast<Eigen::Index>(dilations.size()));
  for (std::size_t k = 0; k < dilations.size(); ++k) L(k) = std::log(dilations[k]);
  return L;
}

double floored_log(double x, bool& unreliable) {
  const double a = std::abs(x);
  if (!(a >= kLogFloor)) {
    unreliable = true;
    return std::log(kLogFloor);
  }
  return std::log(a);
}

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Π_m x_m^{1/|M|}, exactly zero as soon as one factor is zero.
template <class F>
double geometric_mean(int count, F&& factor) {
  double log_sum = 0.0;
  for (int mi = 0; mi < count; ++mi) {
    const double x = factor(mi);
    if (x == 0.0) return 0.0;
    log_sum += std::log(x);
  }
  return std::exp(log_sum / count);
}

}  // namespace

Weights Weights::preset(char variant) {
  switch (variant) {
    case 'v':
      return {1.0, 0.0, 0.0};
    case 'c':
      return {1.0, 1.0, 0.0};
    case 'd':
      return {1.0, 1.0, 1.0};
    default:
      throw InvalidParams(std::string("unknown weight preset '") + variant + "'");
  }
}

EstimationConfig EstimationConfig::defaults() {
  EstimationConfig c;
  c.filter = make_filter("db4");
  c.dilations = {1, 2, 3, 4, 5};
  return c;
}

void EstimationConfig::check() const {
  if (dilations.size() < 2) throw InvalidParams("the regression needs at least two dilations");
  for (std::size_t k = 0; k < dilations.size(); ++k) {
    if (dilations[k] < 1) throw InvalidParams("dilations must be >= 1");
    if (k > 0 && dilations[k] <= dilations[k - 1]) {
      throw InvalidParams("dilations must be strictly increasing");
    }
  }
  if (!(weights.v > 0.0) || !(weights.c >= 0.0) || !(weights.d >= 0.0)) {
    throw InvalidParams("weights must satisfy w_v > 0, w_c >= 0, w_d >= 0");
  }
  if (min_terms < 1) throw InvalidParams("min_terms must be >= 1");
  if (filter.taps.size() < 2) throw InvalidParams("filter not set");
  sign_index();
}

int EstimationConfig::sign_index() const {
  if (!sign_dilation) return 0;
  const auto it = std::find(dilations.begin(), dilations.end(), *sign_dilation);
  if (it == dilations.end()) throw InvalidParams("sign dilation is not in the dilation set");
  return static_cast<int>(it - dilations.begin());
}

int pair_index(int i, int j, int p) {
  if (i > j) std::swap(i, j);
  return i * p + j - (i + 1) * (i + 2) / 2;
}

std::pair<int, int> pair_components(int k, int p) {
  int i = 0;
  while (k >= p - 1 - i) {
    k -= p - 1 - i;
    ++i;
  }
  return {i, i + 1 + k};
}

double MomentVector::cov0(int i, int j, int mi) const {
  return entries(layout.cov0(pair_index(i, j, layout.p), mi));
}

double MomentVector::lagged(int i, int j, int mi) const {
  const int k = pair_index(i, j, layout.p);
  return entries(i < j ? layout.lag_pos(k, mi) : layout.lag_neg(k, mi));
}

double empirical_cov(const FilteredSeries& fs, int i, int j, int h, int min_terms) {
  if (h < 0) return empirical_cov(fs, j, i, -h, min_terms);
  const Eigen::Index rows = fs.values.rows();
  const Eigen::Index terms = rows - h;
  if (terms < min_terms) {
    throw InsufficientData("only " + std::to_string(std::max<Eigen::Index>(terms, 0)) +
                           " products for lag " + std::to_string(h) + " at dilation " +
                           std::to_string(fs.m) + " (need " + std::to_string(min_terms) + ")");
  }
  const double s = fs.values.col(i).head(terms).dot(fs.values.col(j).segment(h, terms));
  return s / static_cast<double>(terms);
}

MomentVector compute_moment_vector(const Eigen::MatrixXd& path, const EstimationConfig& config) {
  config.check();
  const int p = static_cast<int>(path.cols());
  if (p < 1) throw InvalidParams("path has no components");
  if (!path.allFinite()) throw InvalidParams("path contains non-finite values");
  const Eigen::Index n = path.rows();
  const Eigen::Index need = 2 * Eigen::Index{config.dilations.back()} * config.filter.ell;
  if (n <= need) {
    throw InsufficientData("path length " + std::to_string(n) + " must exceed " +
                           std::to_string(need) + " for this filter and dilation set");
  }
  MomentVector mv;
  mv.layout = {p, static_cast<int>(config.dilations.size())};
  mv.dilations = config.dilations;
  mv.ell = config.filter.ell;
  mv.n_used = n;
  mv.entries.resize(mv.layout.size());
  for (int mi = 0; mi < mv.layout.num_dilations; ++mi) {
    const int m = config.dilations[mi];
    const auto fs = apply_filter(path, dilate(config.filter, m));
    const int lag = m * config.filter.ell;
    for (int i = 0; i < p; ++i) {
      mv.entries(mv.layout.var(i, mi)) = empirical_cov(fs, i, i, 0, config.min_terms);
      for (int j = i + 1; j < p; ++j) {
        const int k = pair_index(i, j, p);
        mv.entries(mv.layout.cov0(k, mi)) = empirical_cov(fs, i, j, 0, config.min_terms);
        mv.entries(mv.layout.lag_pos(k, mi)) = empirical_cov(fs, i, j, lag, config.min_terms);
        mv.entries(mv.layout.lag_neg(k, mi)) = empirical_cov(fs, i, j, -lag, config.min_terms);
      }
    }
  }
  return mv;
}

MomentVector theoretical_moment_vector(const MfbmParams& params, const Filter& filter,
                                       const std::vector<int>& dilations) {
  params.check_dimensions();
  const int p = params.p();
  MomentVector mv;
  mv.layout = {p, static_cast<int>(dilations.size())};
  mv.dilations = dilations;
  mv.ell = filter.ell;
  mv.entries.resize(mv.layout.size());
  for (int mi = 0; mi < mv.layout.num_dilations; ++mi) {
    const int m = dilations[mi];
    const double lag = static_cast<double>(m) * filter.ell;
    for (int i = 0; i < p; ++i) {
      mv.entries(mv.layout.var(i, mi)) = theoretical_filtered_cov(params, filter, i, i, m, m, 0.0);
      for (int j = i + 1; j < p; ++j) {
        const int k = pair_index(i, j, p);
        mv.entries(mv.layout.cov0(k, mi)) =
            theoretical_filtered_cov(params, filter, i, j, m, m, 0.0);
        mv.entries(mv.layout.lag_pos(k, mi)) =
            theoretical_filtered_cov(params, filter, i, j, m, m, lag);
        mv.entries(mv.layout.lag_neg(k, mi)) =
            theoretical_filtered_cov(params, filter, j, i, m, m, lag);
      }
    }
  }
  return mv;
}

RegressionInputs regression_inputs(const MomentVector& mv) {
  const int p = mv.layout.p;
  const int nm = mv.layout.num_dilations;
  const int np = pair_count(p);
  RegressionInputs in;
  in.v.resize(p, nm);
  in.c.resize(np, nm);
  in.d.resize(np, nm);
  in.c_unreliable.assign(np, false);
  in.d_unreliable.assign(np, false);
  for (int mi = 0; mi < nm; ++mi) {
    for (int i = 0; i < p; ++i) {
      const double var = mv.variance(i, mi);
      if (!(var > 0.0)) {
        throw NumericalFailure("empirical variance of component " + std::to_string(i + 1) +
                               " at dilation " + std::to_string(mv.dilations[mi]) +
                               " is not positive");
      }
      in.v(i, mi) = std::log(var);
    }
    for (int k = 0; k < np; ++k) {
      bool c_flag = false;
      bool d_flag = false;
      in.c(k, mi) = floored_log(mv.entries(mv.layout.cov0(k, mi)), c_flag);
      in.d(k, mi) = floored_log(
          0.5 * (mv.entries(mv.layout.lag_pos(k, mi)) - mv.entries(mv.layout.lag_neg(k, mi))),
          d_flag);
      if (c_flag) in.c_unreliable[k] = true;
      if (d_flag) in.d_unreliable[k] = true;
    }
  }
  return in;
}

Eigen::VectorXd estimate_H(const RegressionInputs& in, const std::vector<int>& dilations,
                           const Weights& w) {
  const int p = static_cast<int>(in.v.rows());
  const Eigen::VectorXd L = log_dilations(dilations);
  if (L.size() != in.v.cols()) throw InvalidParams("dilation count does not match the inputs");
  const Eigen::VectorXd Lc = L.array() - L.mean();
  const double S = Lc.squaredNorm();
  if (!(S > 0.0)) throw InvalidParams("regression is singular: at least two dilations are needed");

  // X_k = S⁻¹ L̆ᵗ (2 w_v v_k + Σ_{j≠k} (w_c c_kj + w_d d_kj)).
  Eigen::VectorXd X(p);
  for (int k = 0; k < p; ++k) {
    Eigen::VectorXd y = 2.0 * w.v * in.v.row(k).transpose();
    for (int j = 0; j < p; ++j) {
      if (j == k) continue;
      const int pk = pair_index(k, j, p);
      y += w.c * in.c.row(pk).transpose() + w.d * in.d.row(pk).transpose();
    }
    X(k) = Lc.dot(y) / S;
  }
  const double W = p > 1 ? w.c + w.d : 0.0;
  const double lambda = 4.0 * w.v + (p - 2) * W;
  if (!(lambda > 0.0)) throw InvalidParams("regression weights give a singular system");
  return X / lambda - Eigen::VectorXd::Constant(p, W / (lambda * (lambda + p * W)) * X.sum());
}

Intercepts estimate_intercepts(const RegressionInputs& in, const Eigen::VectorXd& H_hat,
                               const std::vector<int>& dilations) {
  const int p = static_cast<int>(in.v.rows());
  const double Lbar = log_dilations(dilations).mean();
  Intercepts out;
  out.alpha = in.v.rowwise().mean() - 2.0 * Lbar * H_hat;
  out.mu = Eigen::MatrixXd::Zero(p, p);
  out.nu = Eigen::MatrixXd::Zero(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) {
      const int k = pair_index(i, j, p);
      const double slope = (H_hat(i) + H_hat(j)) * Lbar;
      out.mu(i, j) = out.mu(j, i) = in.c.row(k).mean() - slope;
      out.nu(i, j) = out.nu(j, i) = in.d.row(k).mean() - slope;
    }
  }
  return out;
}

Eigen::VectorXd estimate_sigma2(const Eigen::VectorXd& alpha_hat, const Eigen::VectorXd& H_hat,
                                const Filter& filter) {
  Eigen::VectorXd s2(alpha_hat.size());
  for (Eigen::Index i = 0; i < s2.size(); ++i) {
    s2(i) = std::exp(alpha_hat(i)) / pi_a(H_hat(i), H_hat(i), filter, 0);
  }
  return s2;
}

Eigen::MatrixXd estimate_rho(const MomentVector& mv, const Eigen::VectorXd& H_hat,
                             const Filter& filter, int sign_index) {
  const int p = mv.layout.p;
  const int nm = mv.layout.num_dilations;
  Eigen::MatrixXd rho = Eigen::MatrixXd::Identity(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) {
      const double gm = geometric_mean(nm, [&](int mi) {
        return std::abs(mv.cov0(i, j, mi)) / std::sqrt(mv.variance(i, mi) * mv.variance(j, mi));
      });
      const double pii = pi_a(H_hat(i), H_hat(i), filter, 0);
      const double pjj = pi_a(H_hat(j), H_hat(j), filter, 0);
      const double pij = pi_a(H_hat(i), H_hat(j), filter, 0);
      const double value = gm * std::sqrt(pii * pjj) / pij * sign_of(mv.cov0(i, j, sign_index));
      rho(i, j) = rho(j, i) = value;
    }
  }
  return rho;
}

Eigen::MatrixXd estimate_eta(const MomentVector& mv, const Eigen::VectorXd& H_hat,
                             const Filter& filter, int sign_index) {
  const int p = mv.layout.p;
  const int nm = mv.layout.num_dilations;
  Eigen::MatrixXd eta = Eigen::MatrixXd::Zero(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) {
      const double pij_ell = pi_a(H_hat(i), H_hat(j), filter, filter.ell);
      if (pij_ell == 0.0) {
        throw NumericalFailure("pi_" + std::to_string(i + 1) + std::to_string(j + 1) +
                               "(ell) vanishes; asymmetry is not identifiable with this filter");
      }
      const double gm = geometric_mean(nm, [&](int mi) {
        return std::abs(mv.lagged(i, j, mi) - mv.lagged(j, i, mi)) /
               std::sqrt(mv.variance(i, mi) * mv.variance(j, mi));
      });
      const double pii = pi_a(H_hat(i), H_hat(i), filter, 0);
      const double pjj = pi_a(H_hat(j), H_hat(j), filter, 0);
      const double delta = mv.lagged(i, j, sign_index) - mv.lagged(j, i, sign_index);
      const double value =
          0.5 * gm * std::sqrt(pii * pjj) / std::abs(pij_ell) * sign_of(-delta / pij_ell);
      eta(i, j) = value;
      eta(j, i) = -value;
    }
  }
  return eta;
}

std::vector<std::pair<int, int>> EstimationResult::unreliable_pairs() const {
  std::vector<std::pair<int, int>> out;
  const int p = static_cast<int>(H_hat.size());
  for (int k = 0; k < pair_count(p); ++k) {
    const bool c_bad = config.weights.c > 0.0 && inputs.c_unreliable[k];
    const bool d_bad = config.weights.d > 0.0 && inputs.d_unreliable[k];
    if (c_bad || d_bad) out.push_back(pair_components(k, p));
  }
  return out;
}

EstimationResult estimate_from_moments(const MomentVector& mv, const EstimationConfig& config) {
  config.check();
  if (mv.dilations != config.dilations) {
    throw InvalidParams("moment vector was built with a different dilation set");
  }
  EstimationResult r;
  r.config = config;
  r.n_used = mv.n_used;
  r.inputs = regression_inputs(mv);
  r.H_hat = estimate_H(r.inputs, config.dilations, config.weights);
  r.intercepts = estimate_intercepts(r.inputs, r.H_hat, config.dilations);
  r.sigma2_hat = estimate_sigma2(r.intercepts.alpha, r.H_hat, config.filter);
  r.rho_hat = estimate_rho(mv, r.H_hat, config.filter, config.sign_index());
  r.eta_hat = estimate_eta(mv, r.H_hat, config.filter, config.sign_index());
  return r;
}

EstimationResult estimate_all(const Eigen::MatrixXd& path, const EstimationConfig& config) {
  return estimate_from_moments(compute_moment_vector(path, config), config);
}

Eigen::VectorXd theta_vector(const Eigen::VectorXd& H, const Eigen::VectorXd& sigma2,
                             const Eigen::MatrixXd& rho, const Eigen::MatrixXd& eta) {
  const int p = static_cast<int>(H.size());
  const int np = pair_count(p);
  Eigen::VectorXd theta(2 * p + 2 * np);
  theta.head(p) = H;
  theta.segment(p, p) = sigma2;
  for (int k = 0; k < np; ++k) {
    const auto [i, j] = pair_components(k, p);
    theta(2 * p + k) = rho(i, j);
    theta(2 * p + np + k) = eta(i, j);
  }
  return theta;
}

Eigen::VectorXd theta_vector(const MfbmParams& params) {
  return theta_vector(params.H, params.sigma.array().square().matrix(), params.rho, params.eta);
}

Eigen::VectorXd theta_vector(const EstimationResult& result) {
  return theta_vector(result.H_hat, result.sigma2_hat, result.rho_hat, result.eta_hat);
}

std::vector<std::string> theta_labels(int p) {
  std::vector<std::string> labels;
  for (int i = 1; i <= p; ++i) labels.push_back("H" + std::to_string(i));
  for (int i = 1; i <= p; ++i) labels.push_back("sigma2_" + std::to_string(i));
  for (const char* prefix : {"rho", "eta"}) {
    for (int k = 0; k < pair_count(p); ++k) {
      const auto [i, j] = pair_components(k, p);
      labels.push_back(std::string(prefix) + std::to_string(i + 1) + "_" + std::to_string(j + 1));
    }
  }
  return labels;
}

MfbmParams params_from_theta(const Eigen::VectorXd& theta, int p) {
  const int np = pair_count(p);
  if (theta.size() != 2 * p + 2 * np) throw InvalidParams("theta has the wrong length");
  MfbmParams params;
  params.H = theta.head(p);
  params.sigma = theta.segment(p, p).array().sqrt();
  params.rho = Eigen::MatrixXd::Identity(p, p);
  params.eta = Eigen::MatrixXd::Zero(p, p);
  for (int k = 0; k < np; ++k) {
    const auto [i, j] = pair_components(k, p);
    params.rho(i, j) = params.rho(j, i) = theta(2 * p + k);
    params.eta(i, j) = theta(2 * p + np + k);
    params.eta(j, i) = -theta(2 * p + np + k);
  }
  return params;
}

}  // namespace mfbm
