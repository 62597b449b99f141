#include "mfbm/filtering.hpp"

#include "lag_kernel.hpp"
#include "mfbm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace mfbm {

namespace {

// Daubechies high-pass (wavelet) filters, unit energy, positive q-th moment.
const std::map<std::string, std::vector<double>, std::less<>>& daubechies_table() {
  static const std::map<std::string, std::vector<double>, std::less<>> table{
      {"db2", {-0.70710678118654752440, 0.70710678118654752440}},
      {"db4",
       {0.48296291314453414337, -0.83651630373780790558, 0.22414386804201338103,
        0.12940952255126038117}},
      {"db6",
       {-0.33267055295008261600, 0.80689150931109257649, -0.45987750211849157010,
        -0.13501102001025458870, 0.085441273882026661693, 0.035226291885709536603}},
      {"db8",
       {0.23037781330889650086, -0.71484657055291564709, 0.63088076792985890788,
        0.027983769416859854211, -0.18703481171909308408, -0.030841381835560763627,
        0.032883011666885199735, 0.010597401785069032105}},
      {"db10",
       {-0.16010239797419291448, 0.60382926979718967054, -0.72430852843777292773,
        0.13842814590132073151, 0.24229488706638203186, -0.032244869584638374648,
        -0.077571493840045713523, -0.0062414902127982742742, 0.012580751999081999469,
        0.0033357252854737712780}},
      {"db12",
       {0.11154074335010946362, -0.49462389039845308568, 0.75113390802109535068,
        -0.31525035170919762909, -0.22626469396543982008, 0.12976686756726193556,
        0.097501605587323049102, -0.027522865530305728626, -0.031582039317486029565,
        -0.00055384220116149613925, 0.0047772575109455106396, 0.0010773010853084795649}},
  };
  return table;
}

constexpr int kMaxDiffOrder = 8;

std::vector<double> difference_taps(int order) {
  std::vector<double> taps{1.0};
  for (int r = 0; r < order; ++r) {
    std::vector<double> next(taps.size() + 1, 0.0);
    for (std::size_t k = 0; k < taps.size(); ++k) {
      next[k] += taps[k];
      next[k + 1] -= taps[k];
    }
    taps = std::move(next);
  }
  return taps;
}

}  // namespace

int vanishing_moments(std::span<const double> taps, double rel_tol) {
  // The tolerance for moment l scales with Σ|k^l a_k| so that rounding in the
  // stored taps is not mistaken for a non-vanishing moment.
  const int size = static_cast<int>(taps.size());
  for (int l = 0; l < size; ++l) {
    double sum = 0.0;
    double scale = 0.0;
    for (int k = 0; k < size; ++k) {
      const double term = std::pow(static_cast<double>(k), l) * taps[k];
      sum += term;
      scale += std::abs(term);
    }
    if (std::abs(sum) > rel_tol * scale) return l;
  }
  return size;
}

Filter filter_from_taps(std::string name, std::vector<double> taps) {
  if (taps.size() < 2) throw InvalidParams("filter needs at least two taps");
  for (double t : taps) {
    if (!std::isfinite(t)) throw InvalidParams("filter taps must be finite");
  }
  while (taps.size() > 1 && taps.back() == 0.0) taps.pop_back();
  const int q = vanishing_moments(taps);
  if (q < 1) throw InvalidParams("filter '" + name + "' does not sum to zero");
  if (q >= static_cast<int>(taps.size())) throw InvalidParams("filter '" + name + "' is zero");
  Filter f;
  f.name = std::move(name);
  f.ell = static_cast<int>(taps.size()) - 1;
  f.q = q;
  f.taps = std::move(taps);
  return f;
}

Filter make_filter(std::string_view name) {
  if (name.starts_with("diff")) {
    const auto rest = name.substr(4);
    int order = 0;
    for (char c : rest) {
      if (c < '0' || c > '9') throw InvalidParams("unknown filter '" + std::string(name) + "'");
      order = order * 10 + (c - '0');
    }
    if (rest.empty() || order < 1 || order > kMaxDiffOrder) {
      throw InvalidParams("unknown filter '" + std::string(name) + "'");
    }
    return filter_from_taps(std::string(name), difference_taps(order));
  }
  const auto& table = daubechies_table();
  if (auto it = table.find(name); it != table.end()) {
    return filter_from_taps(std::string(name), it->second);
  }
  throw InvalidParams("unknown filter '" + std::string(name) + "'");
}

std::vector<std::string> available_filters() {
  std::vector<std::string> names;
  for (int k = 1; k <= kMaxDiffOrder; ++k) names.push_back("diff" + std::to_string(k));
  for (int n = 2; n <= 12; n += 2) names.push_back("db" + std::to_string(n));
  return names;
}

DilatedFilter dilate(const Filter& filter, int m) {
  if (m < 1) throw InvalidParams("dilation factor must be >= 1");
  DilatedFilter df;
  df.base = filter;
  df.m = m;
  df.taps.assign(static_cast<std::size_t>(m) * filter.ell + 1, 0.0);
  for (std::size_t k = 0; k < filter.taps.size(); ++k) df.taps[k * m] = filter.taps[k];
  return df;
}

FilteredSeries apply_filter(const Eigen::MatrixXd& path, const DilatedFilter& df) {
  const Eigen::Index n = path.rows();
  const Eigen::Index span = static_cast<Eigen::Index>(df.m) * df.base.ell;
  if (n <= span) {
    throw InsufficientData("path of length " + std::to_string(n) +
                           " too short for filter span " + std::to_string(span));
  }
  FilteredSeries out;
  out.m = df.m;
  out.ell = df.base.ell;
  out.values.setZero(n - span, path.cols());
  const auto& a = df.base.taps;
  for (Eigen::Index c = 0; c < path.cols(); ++c) {
    for (Eigen::Index r = 0; r < n - span; ++r) {
      // 0-based source index of x(t) is r + span.
      double s = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) {
        s += a[k] * path(r + span - static_cast<Eigen::Index>(k) * df.m, c);
      }
      out.values(r, c) = s;
    }
  }
  return out;
}

double theoretical_filtered_cov(const MfbmParams& params, const Filter& filter, int i, int j,
                                int m1, int m2, double h) {
  if (i < 0 || j < 0 || i >= params.p() || j >= params.p()) {
    throw InvalidParams("component index out of range");
  }
  if (m1 < 1 || m2 < 1) throw InvalidParams("dilation factor must be >= 1");
  const double alpha = params.H(i) + params.H(j);
  const double rho = i == j ? 1.0 : params.rho(i, j);
  const double eta = i == j ? 0.0 : params.eta(i, j);
  if (i != j && alpha == 1.0 && eta != 0.0) {
    throw Unsupported("filtered covariance for H_i + H_j = 1 with eta != 0");
  }
  const auto kernel = detail::filtered_kernel(filter, m1, m2, alpha);
  return -0.5 * params.sigma(i) * params.sigma(j) * kernel(h, rho - eta, rho + eta);
}

double pi_a(double Hi, double Hj, const Filter& filter, int h) {
  const double alpha = Hi + Hj;
  const auto& a = filter.taps;
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    for (std::size_t l = 0; l < a.size(); ++l) {
      const double x = static_cast<double>(h) + static_cast<double>(k) - static_cast<double>(l);
      if (x != 0.0) s += a[k] * a[l] * std::pow(std::abs(x), alpha);
    }
  }
  const double pi = -0.5 * s;
  if (h == 0 && !(pi > 0.0)) {
    throw NumericalFailure("pi(0) not positive for filter '" + filter.name + "'");
  }
  return pi;
}

bool summability_order(const Filter& filter, double Hmax, int alpha) {
  if (alpha < 1) throw InvalidParams("summability exponent must be >= 1");
  return filter.q > Hmax + 1.0 / (2.0 * alpha);
}

}  // namespace mfbm
