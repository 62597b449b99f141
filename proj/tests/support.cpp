#include "support.hpp"

#include <cmath>
#include <numbers>
#include <queue>

namespace testing {

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

mfbm::MfbmParams random_admissible(Rng& rng, int p, double h_lo, double h_hi, double eta_max) {
  std::normal_distribution<double> normal;
  for (;;) {
    mfbm::MfbmParams params;
    params.H.resize(p);
    params.sigma.resize(p);
    for (int i = 0; i < p; ++i) {
      params.H(i) = uniform(rng, h_lo, h_hi);
      params.sigma(i) = uniform(rng, 0.5, 2.0);
    }
    Eigen::MatrixXd a(p, p);
    for (int i = 0; i < p; ++i) {
      for (int j = 0; j < p; ++j) a(i, j) = normal(rng);
    }
    Eigen::MatrixXd s = a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(p, p);
    const Eigen::VectorXd d = s.diagonal().cwiseSqrt().cwiseInverse();
    params.rho = d.asDiagonal() * s * d.asDiagonal();
    params.rho.diagonal().setOnes();
    params.eta = Eigen::MatrixXd::Zero(p, p);
    for (int i = 0; i < p; ++i) {
      for (int j = i + 1; j < p; ++j) {
        params.eta(i, j) = uniform(rng, -eta_max, eta_max);
        params.eta(j, i) = -params.eta(i, j);
      }
    }
    if (mfbm::validate(params).admissible) return params;
  }
}

Eigen::VectorXd brute_force_H(const mfbm::RegressionInputs& in, const std::vector<int>& dilations,
                              const mfbm::Weights& w) {
  const int p = static_cast<int>(in.v.rows());
  const int np = p * (p - 1) / 2;
  const int nm = static_cast<int>(dilations.size());
  const int unknowns = 2 * p + 2 * np;
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> rhs;
  auto add = [&](double weight, Eigen::VectorXd row, double target) {
    if (weight <= 0.0) return;
    const double s = std::sqrt(weight);
    rows.push_back(s * row);
    rhs.push_back(s * target);
  };
  for (int mi = 0; mi < nm; ++mi) {
    const double L = std::log(static_cast<double>(dilations[mi]));
    for (int i = 0; i < p; ++i) {
      Eigen::VectorXd r = Eigen::VectorXd::Zero(unknowns);
      r(i) = 2.0 * L;
      r(p + i) = 1.0;
      add(w.v, r, in.v(i, mi));
    }
    int k = 0;
    for (int i = 0; i < p; ++i) {
      for (int j = i + 1; j < p; ++j, ++k) {
        Eigen::VectorXd r = Eigen::VectorXd::Zero(unknowns);
        r(i) = L;
        r(j) = L;
        Eigen::VectorXd rc = r;
        rc(2 * p + k) = 1.0;
        add(w.c, rc, in.c(k, mi));
        Eigen::VectorXd rd = r;
        rd(2 * p + np + k) = 1.0;
        add(w.d, rd, in.d(k, mi));
      }
    }
  }
  Eigen::MatrixXd A(rows.size(), unknowns);
  Eigen::VectorXd b(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    A.row(r) = rows[r].transpose();
    b(r) = rhs[r];
  }
  const Eigen::VectorXd x = A.completeOrthogonalDecomposition().solve(b);
  return x.head(p);
}

double filtered_cov_direct(const mfbm::MfbmParams& params, const mfbm::Filter& filter, int i,
                           int j, int m1, int m2, int h) {
  const double alpha = params.H(i) + params.H(j);
  long double sum = 0.0L;
  for (std::size_t k = 0; k < filter.taps.size(); ++k) {
    for (std::size_t l = 0; l < filter.taps.size(); ++l) {
      const long double x = h + static_cast<long double>(m1) * k - static_cast<long double>(m2) * l;
      if (x == 0.0L) continue;
      const long double sign = x > 0 ? 1.0L : -1.0L;
      long double w;
      if (std::abs(alpha - 1.0) < 1e-14) {
        w = params.rho(i, j) * std::fabs(x) + params.eta(i, j) * x * std::log(std::fabs(x));
      } else {
        w = (params.rho(i, j) - params.eta(i, j) * sign) * std::pow(std::fabs(x), alpha);
      }
      sum += static_cast<long double>(filter.taps[k]) * filter.taps[l] * w;
    }
  }
  return static_cast<double>(-0.5L * params.sigma(i) * params.sigma(j) * sum);
}

double rho_boundary_closed_form(double H1, double H2) {
  const double pi = std::numbers::pi;
  auto diag = [&](double H) { return std::tgamma(2 * H + 1) * std::sin(pi * H); };
  const double a = H1 + H2;
  const double off = std::tgamma(a + 1) * std::sin(pi * a / 2);
  // Bisection on the smallest eigenvalue of [[d1, ρ·off], [ρ·off, d2]].
  auto min_eig = [&](double rho) {
    const double d1 = diag(H1);
    const double d2 = diag(H2);
    const double c = rho * off;
    return 0.5 * (d1 + d2) - std::sqrt(0.25 * (d1 - d2) * (d1 - d2) + c * c);
  };
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (min_eig(mid) >= 0.0 ? lo : hi) = mid;
  }
  return lo;
}

double mean_geodesic(const Eigen::MatrixXi& adjacency) {
  const int n = static_cast<int>(adjacency.rows());
  double total = 0.0;
  long pairs = 0;
  for (int s = 0; s < n; ++s) {
    std::vector<int> dist(n, -1);
    std::queue<int> q;
    dist[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v = 0; v < n; ++v) {
        if (adjacency(u, v) && dist[v] < 0) {
          dist[v] = dist[u] + 1;
          q.push(v);
        }
      }
    }
    for (int t = 0; t < n; ++t) {
      if (t != s && dist[t] > 0) {
        total += dist[t];
        ++pairs;
      }
    }
  }
  return pairs ? total / pairs : 0.0;
}

}  // namespace testing
