#include "mfbm/model.hpp"

#include "lag_kernel.hpp"
#include "mfbm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

namespace mfbm {

namespace detail {

namespace {
constexpr int kMaxSeriesOrder = 400;
constexpr double kSeriesThreshold = 4.0;
}  // namespace

LagKernel::LagKernel(const std::vector<double>& a, const std::vector<double>& pos_a, int qa,
                     const std::vector<double>& b, const std::vector<double>& pos_b, int qb,
                     double alpha)
    : alpha_(alpha), first_order_(qa + qb) {
  std::map<double, double> merged;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] == 0.0) continue;
    for (std::size_t l = 0; l < b.size(); ++l) {
      if (b[l] == 0.0) continue;
      merged[pos_a[k] - pos_b[l]] += a[k] * b[l];
    }
  }
  terms_.reserve(merged.size());
  for (const auto& [d, w] : merged) {
    terms_.push_back({d, w});
    max_d_ = std::max(max_d_, std::abs(d));
    abs_weight_ += std::abs(w);
  }

  binom_.resize(kMaxSeriesOrder + 1);
  scaled_moments_.assign(kMaxSeriesOrder + 1, 0.0);
  binom_[0] = 1.0;
  for (int r = 1; r <= kMaxSeriesOrder; ++r) binom_[r] = binom_[r - 1] * (alpha - r + 1) / r;
  if (max_d_ > 0.0) {
    for (const auto& t : terms_) {
      const double x = t.d / max_d_;
      double xr = 1.0;
      for (int r = 0; r <= kMaxSeriesOrder; ++r) {
        scaled_moments_[r] += t.w * xr;
        xr *= x;
      }
    }
  }
  for (int r = 0; r < std::min(first_order_, kMaxSeriesOrder + 1); ++r) scaled_moments_[r] = 0.0;
}

double LagKernel::operator()(double h, double c_pos, double c_neg) const {
  const double ah = std::abs(h);
  if (max_d_ == 0.0 || ah < kSeriesThreshold * max_d_) {
    double s = 0.0;
    for (const auto& t : terms_) {
      const double x = h + t.d;
      if (x == 0.0) continue;
      s += t.w * (x > 0.0 ? c_pos : c_neg) * std::pow(std::abs(x), alpha_);
    }
    return s;
  }
  // |h + d| = |h| (1 + d/h) with 1 + d/h > 0 here.
  const double x = max_d_ / h;
  const double ax = std::abs(x);
  double sum = 0.0;
  double xr = std::pow(x, first_order_);
  double bound_r = abs_weight_ * std::pow(ax, first_order_);
  for (int r = first_order_; r <= kMaxSeriesOrder; ++r) {
    sum += binom_[r] * scaled_moments_[r] * xr;
    const double bound = std::abs(binom_[r]) * bound_r;
    if (bound <= 1e-17 * std::abs(sum) || bound == 0.0) break;
    xr *= x;
    bound_r *= ax;
  }
  return (h > 0.0 ? c_pos : c_neg) * std::pow(ah, alpha_) * sum;
}

}  // namespace detail

namespace {

bool uses_log_branch(const MfbmParams& params, int i, int j) {
  return i != j && params.H(i) + params.H(j) == 1.0 && params.eta(i, j) != 0.0;
}

void check_index(const MfbmParams& params, int i) {
  if (i < 0 || i >= params.p()) {
    throw InvalidParams("component index " + std::to_string(i) + " out of range for p = " +
                        std::to_string(params.p()));
  }
}

}  // namespace

MfbmParams MfbmParams::independent(const Eigen::VectorXd& H, const Eigen::VectorXd& sigma) {
  const auto p = H.size();
  return MfbmParams{H, sigma, Eigen::MatrixXd::Identity(p, p), Eigen::MatrixXd::Zero(p, p)};
}

MfbmParams MfbmParams::well_balanced(const Eigen::VectorXd& H, const Eigen::VectorXd& sigma,
                                     double rho_offdiag) {
  auto params = independent(H, sigma);
  params.rho.setConstant(rho_offdiag);
  params.rho.diagonal().setOnes();
  return params;
}

void MfbmParams::check_dimensions() const {
  const auto n = H.size();
  if (n == 0) throw InvalidParams("p must be positive");
  if (sigma.size() != n) throw InvalidParams("sigma has wrong length");
  if (rho.rows() != n || rho.cols() != n) throw InvalidParams("rho must be p x p");
  if (eta.rows() != n || eta.cols() != n) throw InvalidParams("eta must be p x p");
}

Eigen::MatrixXcd existence_matrix(const MfbmParams& params) {
  params.check_dimensions();
  const int p = params.p();
  Eigen::MatrixXcd q(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      const double a = params.H(i) + params.H(j);
      const double g = std::tgamma(a + 1.0);
      const double half = std::numbers::pi * a / 2.0;
      q(i, j) = {g * params.rho(i, j) * std::sin(half), -g * params.eta(i, j) * std::cos(half)};
    }
  }
  return q;
}

Eigen::MatrixXcd existence_matrix_sin_sin(const MfbmParams& params) {
  params.check_dimensions();
  const int p = params.p();
  Eigen::MatrixXcd q(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      const double a = params.H(i) + params.H(j);
      const double gs = std::tgamma(a + 1.0) * std::sin(std::numbers::pi * a / 2.0);
      q(i, j) = {gs * params.rho(i, j), -gs * params.eta(i, j)};
    }
  }
  return q;
}

ValidityReport validate(const MfbmParams& params, double tol_psd) {
  params.check_dimensions();
  ValidityReport report;
  const int p = params.p();
  auto fail = [&](const std::string& msg) { report.violations.push_back(msg); };

  for (int i = 0; i < p; ++i) {
    if (!(params.H(i) > 0.0 && params.H(i) < 1.0)) {
      std::ostringstream os;
      os << "H[" << i << "] = " << params.H(i) << " outside (0,1)";
      fail(os.str());
    }
    if (!(params.sigma(i) > 0.0) || !std::isfinite(params.sigma(i))) {
      std::ostringstream os;
      os << "sigma[" << i << "] = " << params.sigma(i) << " not positive";
      fail(os.str());
    }
    if (params.rho(i, i) != 1.0) fail("rho diagonal entry " + std::to_string(i) + " is not 1");
    if (params.eta(i, i) != 0.0) fail("eta diagonal entry " + std::to_string(i) + " is not 0");
    for (int j = i + 1; j < p; ++j) {
      const std::string ij = "(" + std::to_string(i) + "," + std::to_string(j) + ")";
      if (params.rho(i, j) != params.rho(j, i)) fail("rho not symmetric at " + ij);
      if (!(std::abs(params.rho(i, j)) < 1.0)) fail("|rho| >= 1 at " + ij);
      if (params.eta(i, j) != -params.eta(j, i)) fail("eta not antisymmetric at " + ij);
      if (!std::isfinite(params.eta(i, j))) fail("eta not finite at " + ij);
    }
  }
  if (!report.violations.empty()) {
    report.min_eigenvalue = std::numeric_limits<double>::quiet_NaN();
    return report;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(existence_matrix(params),
                                                         Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  report.min_eigenvalue = ev.minCoeff();
  const double scale = ev.cwiseAbs().maxCoeff();
  const double tol = tol_psd >= 0.0 ? tol_psd : 1e-10 * scale;
  if (report.min_eigenvalue < -tol) {
    std::ostringstream os;
    os << "existence matrix not positive semidefinite (min eigenvalue " << report.min_eigenvalue
       << ")";
    fail(os.str());
  }
  report.admissible = report.violations.empty();
  return report;
}

void require_admissible(const MfbmParams& params) {
  const auto report = validate(params);
  if (report.admissible) return;
  std::string msg = "inadmissible parameters:";
  for (const auto& v : report.violations) msg += " " + v + ";";
  msg.pop_back();
  throw InvalidParams(msg);
}

double w_func(const MfbmParams& params, int i, int j, double h) {
  check_index(params, i);
  check_index(params, j);
  if (h == 0.0) return 0.0;
  const double rho = i == j ? 1.0 : params.rho(i, j);
  const double eta = i == j ? 0.0 : params.eta(i, j);
  const double a = params.H(i) + params.H(j);
  if (a != 1.0) {
    const double sgn = h > 0.0 ? 1.0 : -1.0;
    return (rho - eta * sgn) * std::pow(std::abs(h), a);
  }
  return rho * std::abs(h) + eta * h * std::log(std::abs(h));
}

double cross_cov(const MfbmParams& params, int i, int j, double s, double t) {
  return 0.5 * params.sigma(i) * params.sigma(j) *
         (w_func(params, i, j, -s) + w_func(params, i, j, t) - w_func(params, i, j, t - s));
}

double increment_cov(const MfbmParams& params, int i, int j, std::int64_t h) {
  return increment_cov_range(params, i, j, h, h).front();
}

std::vector<double> increment_cov_range(const MfbmParams& params, int i, int j,
                                        std::int64_t first, std::int64_t last) {
  check_index(params, i);
  check_index(params, j);
  if (last < first) throw InvalidParams("empty lag range");
  const double ss = params.sigma(i) * params.sigma(j);
  std::vector<double> out(static_cast<std::size_t>(last - first + 1));
  if (uses_log_branch(params, i, j)) {
    for (std::size_t k = 0; k < out.size(); ++k) {
      const double hd = static_cast<double>(first + static_cast<std::int64_t>(k));
      out[k] = 0.5 * ss *
               (w_func(params, i, j, hd - 1) - 2.0 * w_func(params, i, j, hd) +
                w_func(params, i, j, hd + 1));
    }
    return out;
  }
  const double rho = i == j ? 1.0 : params.rho(i, j);
  const double eta = i == j ? 0.0 : params.eta(i, j);
  static const std::vector<double> diff{1.0, -1.0};
  static const std::vector<double> pos{0.0, 1.0};
  const detail::LagKernel kernel(diff, pos, 1, diff, pos, 1, params.H(i) + params.H(j));
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double hd = static_cast<double>(first + static_cast<std::int64_t>(k));
    out[k] = -0.5 * ss * kernel(hd, rho - eta, rho + eta);
  }
  return out;
}

double increment_cov_asymptote(const MfbmParams& params, int i, int j, double h) {
  check_index(params, i);
  check_index(params, j);
  if (uses_log_branch(params, i, j)) {
    throw Unsupported("asymptote for H_i + H_j = 1 with eta != 0 is not defined");
  }
  const double a = params.H(i) + params.H(j);
  const double rho = i == j ? 1.0 : params.rho(i, j);
  const double eta = i == j ? 0.0 : params.eta(i, j);
  const double sgn = h > 0.0 ? 1.0 : (h < 0.0 ? -1.0 : 0.0);
  return params.sigma(i) * params.sigma(j) * std::pow(std::abs(h), a - 2.0) * (rho - eta * sgn) *
         a * (a - 1.0);
}

}  // namespace mfbm
