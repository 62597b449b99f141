#include "mfbm/errors.hpp"
#include "mfbm/filtering.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace mfbm;

namespace {

double moment(const std::vector<double>& taps, int l) {
  double s = 0.0;
  for (std::size_t k = 0; k < taps.size(); ++k) s += std::pow(static_cast<double>(k), l) * taps[k];
  return s;
}

MfbmParams pair_params() {
  MfbmParams p = MfbmParams::well_balanced(Eigen::Vector2d(0.3, 0.65), Eigen::Vector2d(1.3, 0.8), 0.45);
  p.eta(0, 1) = 0.12;
  p.eta(1, 0) = -0.12;
  return p;
}

}  // namespace

TEST_CASE("difference filters carry binomial taps") {
  const auto d3 = make_filter("diff3");
  CHECK(d3.taps == std::vector<double>{1, -3, 3, -1});
  CHECK(d3.ell == 3);
  CHECK(d3.q == 3);
  CHECK(make_filter("diff1").q == 1);
}

TEST_CASE("Daubechies filters have unit energy and N/2 vanishing moments") {
  for (int N = 2; N <= 12; N += 2) {
    const auto f = make_filter("db" + std::to_string(N));
    CAPTURE(N);
    CHECK(f.taps.size() == static_cast<std::size_t>(N));
    CHECK(f.ell == N - 1);
    CHECK(f.q == N / 2);
    const double energy = std::inner_product(f.taps.begin(), f.taps.end(), f.taps.begin(), 0.0);
    CHECK(energy == doctest::Approx(1.0).epsilon(1e-12));
    for (int l = 0; l < N / 2; ++l) CHECK(std::abs(moment(f.taps, l)) < 1e-9 * std::pow(N, l));
    CHECK(moment(f.taps, N / 2) > 0.0);
  }
}

TEST_CASE("unknown names and taps that do not sum to zero are rejected") {
  CHECK_THROWS_AS(make_filter("db3"), InvalidParams);
  CHECK_THROWS_AS(make_filter("haar9"), InvalidParams);
  CHECK_THROWS_AS(filter_from_taps("bad", {1.0, 0.5}), InvalidParams);
  const auto f = filter_from_taps("custom", {1.0, -2.0, 1.0});
  CHECK(f.q == 2);
  CHECK(f.ell == 2);
}

TEST_CASE("available filters all construct") {
  const auto names = available_filters();
  CHECK(names.size() >= 14);
  for (const auto& n : names) CHECK_NOTHROW(make_filter(n));
}

TEST_CASE("dilation inserts zeros between taps") {
  const auto f = make_filter("diff2");
  const auto df = dilate(f, 3);
  CHECK(df.taps == std::vector<double>{1, 0, 0, -2, 0, 0, 1});
  CHECK(dilate(f, 1).taps == f.taps);
  CHECK_THROWS(dilate(f, 0));
}

TEST_CASE("apply_filter keeps the valid support and matches a hand convolution") {
  const auto f = make_filter("db4");
  const int n = 40;
  Eigen::MatrixXd x(n, 2);
  for (int t = 0; t < n; ++t) {
    x(t, 0) = std::sin(0.3 * t) + 0.01 * t * t;
    x(t, 1) = std::cos(0.7 * t);
  }
  const int m = 2;
  const auto fs = apply_filter(x, dilate(f, m));
  CHECK(fs.values.rows() == n - m * f.ell);
  CHECK(fs.values.cols() == 2);
  // Row r is time t = mℓ + 1 + r (1-based), i.e. index mℓ + r.
  for (int r : {0, 5, 33}) {
    double expect = 0.0;
    for (int k = 0; k <= f.ell; ++k) expect += f.taps[k] * x(m * f.ell + r - m * k, 1);
    CHECK(fs.values(r, 1) == doctest::Approx(expect).epsilon(1e-13));
  }
  CHECK_THROWS_AS(apply_filter(x.topRows(m * f.ell), dilate(f, m)), InsufficientData);
}

TEST_CASE("filters annihilate polynomials below their order") {
  const int n = 64;
  Eigen::MatrixXd x(n, 3);
  for (int t = 0; t < n; ++t) {
    x(t, 0) = 3.5;
    x(t, 1) = 2.0 - 0.25 * t;
    x(t, 2) = 0.1 * t * t;
  }
  const auto fs = apply_filter(x, dilate(make_filter("db6"), 2));
  CHECK(fs.values.col(0).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(fs.values.col(1).cwiseAbs().maxCoeff() < 1e-11);
  CHECK(fs.values.col(2).cwiseAbs().maxCoeff() < 1e-9);
  const auto fs1 = apply_filter(x, dilate(make_filter("diff1"), 1));
  CHECK(fs1.values.col(0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(fs1.values.col(1).cwiseAbs().minCoeff() > 0.2);
}

TEST_CASE("pi_a is the normalized double sum") {
  const auto f = make_filter("db4");
  for (int h : {0, 1, 3}) {
    double expect = 0.0;
    for (int k = 0; k <= f.ell; ++k) {
      for (int l = 0; l <= f.ell; ++l) {
        expect += -0.5 * f.taps[k] * f.taps[l] * std::pow(std::abs(h + k - l), 0.9);
      }
    }
    CHECK(pi_a(0.3, 0.6, f, h) == doctest::Approx(expect).epsilon(1e-12));
  }
  CHECK(pi_a(0.4, 0.4, f, 0) > 0.0);
}

TEST_CASE("filtered covariance agrees with the direct double sum") {
  const auto p = pair_params();
  const auto f = make_filter("db4");
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      for (int h : {-9, -3, 0, 2, 6, 40}) {
        for (auto [m1, m2] : {std::pair{1, 1}, std::pair{2, 3}, std::pair{5, 5}}) {
          CAPTURE(i);
          CAPTURE(j);
          CAPTURE(h);
          const double direct = testing::filtered_cov_direct(p, f, i, j, m1, m2, h);
          const double lib = theoretical_filtered_cov(p, f, i, j, m1, m2, h);
          CHECK(lib == doctest::Approx(direct).epsilon(1e-9).scale(1e-12));
        }
      }
    }
  }
}

TEST_CASE("filtered covariance agrees with filtering the path covariance") {
  const auto p = pair_params();
  const auto f = make_filter("diff2");
  const int m = 2;
  const double t = 30.0;
  for (int h : {0, 1, 4}) {
    double expect = 0.0;
    for (int k = 0; k <= f.ell; ++k) {
      for (int l = 0; l <= f.ell; ++l) {
        expect += f.taps[k] * f.taps[l] * cross_cov(p, 0, 1, t - m * k, t + h - m * l);
      }
    }
    CHECK(theoretical_filtered_cov(p, f, 0, 1, m, m, h) == doctest::Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("dilated covariance scales with the sign-corrected asymmetry term") {
  // γ^m_ij(m h) = σ_iσ_j m^α (ρ π_ij(h) + η ½ Σ a_k a_l sign(h+k−l)|h+k−l|^α).
  const auto p = pair_params();
  const auto f = make_filter("db6");
  const double a = p.H(0) + p.H(1);
  for (int m : {1, 2, 4}) {
    for (int h : {0, f.ell, -f.ell, 2}) {
      double odd = 0.0;
      for (int k = 0; k <= f.ell; ++k) {
        for (int l = 0; l <= f.ell; ++l) {
          const double x = h + k - l;
          if (x != 0.0) odd += f.taps[k] * f.taps[l] * (x > 0 ? 1 : -1) * std::pow(std::abs(x), a);
        }
      }
      const double expect = p.sigma(0) * p.sigma(1) * std::pow(m, a) *
                            (p.rho(0, 1) * pi_a(p.H(0), p.H(1), f, h) + p.eta(0, 1) * 0.5 * odd);
      CHECK(theoretical_filtered_cov(p, f, 0, 1, m, m, m * h) ==
            doctest::Approx(expect).epsilon(1e-9));
    }
  }
}

TEST_CASE("summability order compares q with H") {
  CHECK(summability_order(make_filter("db4"), 0.8, 2));
  CHECK_FALSE(summability_order(make_filter("diff1"), 0.8, 2));
  CHECK(summability_order(make_filter("diff1"), 0.4, 1));
  CHECK_FALSE(summability_order(make_filter("diff1"), 0.8, 1));
}

TEST_CASE("vanishing moment counter") {
  CHECK(vanishing_moments(std::vector<double>{1, -1}) == 1);
  CHECK(vanishing_moments(std::vector<double>{1, -4, 6, -4, 1}) == 4);
  CHECK(vanishing_moments(std::vector<double>{1, 2}) == 0);
}
