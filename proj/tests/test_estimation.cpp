#include "mfbm/errors.hpp"
#include "mfbm/estimation.hpp"
#include "mfbm/synthesis.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace mfbm;

namespace {

RegressionInputs random_inputs(testing::Rng& rng, int p, int nm) {
  std::normal_distribution<double> normal;
  RegressionInputs in;
  const int np = pair_count(p);
  in.v.resize(p, nm);
  in.c.resize(np, nm);
  in.d.resize(np, nm);
  for (int r = 0; r < p; ++r) {
    for (int c = 0; c < nm; ++c) in.v(r, c) = normal(rng);
  }
  for (int r = 0; r < np; ++r) {
    for (int c = 0; c < nm; ++c) {
      in.c(r, c) = normal(rng);
      in.d(r, c) = normal(rng);
    }
  }
  in.c_unreliable.assign(np, false);
  in.d_unreliable.assign(np, false);
  return in;
}

Eigen::VectorXd centered_log(const std::vector<int>& dil) {
  Eigen::VectorXd L(dil.size());
  for (std::size_t k = 0; k < dil.size(); ++k) L(k) = std::log(static_cast<double>(dil[k]));
  return L.array() - L.mean();
}

}  // namespace

TEST_CASE("pair numbering runs along rows") {
  const int p = 4;
  CHECK(pair_index(0, 1, p) == 0);
  CHECK(pair_index(0, 3, p) == 2);
  CHECK(pair_index(1, 2, p) == 3);
  CHECK(pair_index(2, 3, p) == 5);
  for (int k = 0; k < pair_count(p); ++k) {
    const auto [i, j] = pair_components(k, p);
    CHECK(i < j);
    CHECK(pair_index(i, j, p) == k);
  }
}

TEST_CASE("moment layout has |M|p(3p-1)/2 entries in block order") {
  MomentLayout lay{3, 4};
  CHECK(lay.size() == 4 * 3 * 8 / 2);
  CHECK(lay.var(0, 0) == 0);
  CHECK(lay.var(2, 3) == 11);
  CHECK(lay.cov0(0, 0) == 12);
  CHECK(lay.lag_pos(0, 0) == 24);
  CHECK(lay.lag_neg(2, 3) == lay.size() - 1);
}

TEST_CASE("Weights presets") {
  CHECK(Weights::preset('v').c == 0.0);
  CHECK(Weights::preset('c').c == 1.0);
  CHECK(Weights::preset('c').d == 0.0);
  CHECK(Weights::preset('d').d == 1.0);
  CHECK_THROWS(Weights::preset('x'));
}

TEST_CASE("configuration checks") {
  auto c = EstimationConfig::defaults();
  CHECK(c.filter.name == "db4");
  CHECK(c.dilations == std::vector<int>{1, 2, 3, 4, 5});
  CHECK_NOTHROW(c.check());
  CHECK(c.sign_index() == 0);
  c.sign_dilation = 3;
  CHECK(c.sign_index() == 2);
  c.sign_dilation = 7;
  CHECK_THROWS_AS(c.check(), InvalidParams);
  c = EstimationConfig::defaults();
  c.dilations = {2, 1};
  CHECK_THROWS_AS(c.check(), InvalidParams);
  c = EstimationConfig::defaults();
  c.dilations = {3};
  CHECK_THROWS_AS(c.check(), InvalidParams);
  c = EstimationConfig::defaults();
  c.weights = {0.0, 1.0, 0.0};
  CHECK_THROWS_AS(c.check(), InvalidParams);
}

TEST_CASE("variance-only weights give the scalar regression slope") {
  testing::Rng rng(5);
  const std::vector<int> dil{1, 2, 4, 8};
  const auto in = random_inputs(rng, 3, 4);
  const auto L = centered_log(dil);
  const auto H = estimate_H(in, dil, Weights::preset('v'));
  for (int k = 0; k < 3; ++k) {
    CHECK(H(k) == doctest::Approx(L.dot(in.v.row(k).transpose()) / (2 * L.squaredNorm())));
  }
}

TEST_CASE("two components with correlation weights follow the printed closed form") {
  testing::Rng rng(6);
  const std::vector<int> dil{1, 2, 3, 4, 5};
  const auto in = random_inputs(rng, 2, 5);
  const auto L = centered_log(dil);
  const auto H = estimate_H(in, dil, Weights::preset('c'));
  for (int k = 0; k < 2; ++k) {
    const int j = 1 - k;
    const Eigen::VectorXd comb = 10 * in.v.row(k) - 2 * in.v.row(j) + 4 * in.c.row(0);
    CHECK(H(k) == doctest::Approx(L.dot(comb) / (24 * L.squaredNorm())).epsilon(1e-12));
  }
}

TEST_CASE("closed form minimizes the weighted objective") {
  testing::Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int p = 1 + trial % 5;
    const std::vector<int> dil{1, 2, 3, 5, 8};
    const auto in = random_inputs(rng, p, 5);
    const Weights w{testing::uniform(rng, 0.2, 2.0), testing::uniform(rng, 0.0, 2.0),
                    trial % 3 == 0 ? 0.0 : testing::uniform(rng, 0.0, 2.0)};
    const auto H = estimate_H(in, dil, w);
    const auto ref = testing::brute_force_H(in, dil, w);
    CHECK((H - ref).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("empirical covariance averages over available products") {
  FilteredSeries fs;
  fs.values.resize(40, 2);
  for (int r = 0; r < 40; ++r) {
    fs.values(r, 0) = r % 3 - 1.0;
    fs.values(r, 1) = 0.5 * r;
  }
  double expect = 0.0;
  for (int r = 0; r + 4 < 40; ++r) expect += fs.values(r, 0) * fs.values(r + 4, 1);
  expect /= 36;
  CHECK(empirical_cov(fs, 0, 1, 4) == doctest::Approx(expect));
  CHECK(empirical_cov(fs, 1, 0, -4) == doctest::Approx(expect));
  CHECK_THROWS_AS(empirical_cov(fs, 0, 1, 20), InsufficientData);
}

TEST_CASE("moment vector needs enough samples") {
  const auto cfg = EstimationConfig::defaults();
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(2 * 5 * 3, 2);
  CHECK_THROWS_AS(compute_moment_vector(x, cfg), InsufficientData);
}

TEST_CASE("moment vector accessors read the right entries") {
  testing::Rng rng(8);
  const auto params = testing::random_admissible(rng, 3);
  const auto cfg = EstimationConfig::defaults();
  const auto mv = theoretical_moment_vector(params, cfg.filter, cfg.dilations);
  CHECK(mv.entries.size() == mv.layout.size());
  const int m = cfg.dilations[2];
  const int lag = m * cfg.filter.ell;
  CHECK(mv.variance(1, 2) == doctest::Approx(theoretical_filtered_cov(params, cfg.filter, 1, 1, m, m, 0)));
  CHECK(mv.cov0(2, 0, 2) == doctest::Approx(theoretical_filtered_cov(params, cfg.filter, 0, 2, m, m, 0)));
  CHECK(mv.lagged(0, 2, 2) == doctest::Approx(theoretical_filtered_cov(params, cfg.filter, 0, 2, m, m, lag)));
  CHECK(mv.lagged(2, 0, 2) == doctest::Approx(theoretical_filtered_cov(params, cfg.filter, 2, 0, m, m, lag)));
}

TEST_CASE("noiseless moments return the parameters for every weight preset") {
  testing::Rng rng(9);
  const auto params = testing::random_admissible(rng, 3);
  for (char v : {'v', 'c', 'd'}) {
    auto cfg = EstimationConfig::defaults();
    cfg.weights = Weights::preset(v);
    const auto r = estimate_from_moments(theoretical_moment_vector(params, cfg.filter, cfg.dilations), cfg);
    CHECK((theta_vector(r) - theta_vector(params)).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(r.unreliable_pairs().empty());
  }
}

TEST_CASE("negative correlation and asymmetry keep their signs") {
  MfbmParams p = MfbmParams::well_balanced(Eigen::Vector2d(0.4, 0.55), Eigen::Vector2d(1, 2), -0.35);
  p.eta(0, 1) = -0.09;
  p.eta(1, 0) = 0.09;
  const auto cfg = EstimationConfig::defaults();
  const auto r = estimate_from_moments(theoretical_moment_vector(p, cfg.filter, cfg.dilations), cfg);
  CHECK(r.rho_hat(0, 1) == doctest::Approx(-0.35).epsilon(1e-9));
  CHECK(r.eta_hat(0, 1) == doctest::Approx(-0.09).epsilon(1e-9));
  CHECK(r.eta_hat(1, 0) == doctest::Approx(0.09).epsilon(1e-9));
}

TEST_CASE("uncorrelated pairs are flagged when their log input is used") {
  const auto p = MfbmParams::independent(Eigen::Vector2d(0.4, 0.6), Eigen::Vector2d(1, 1));
  auto cfg = EstimationConfig::defaults();
  cfg.weights = Weights::preset('c');
  const auto r = estimate_from_moments(theoretical_moment_vector(p, cfg.filter, cfg.dilations), cfg);
  CHECK(r.unreliable_pairs().size() == 1);
  cfg.weights = Weights::preset('v');
  const auto rv = estimate_from_moments(theoretical_moment_vector(p, cfg.filter, cfg.dilations), cfg);
  CHECK(rv.unreliable_pairs().empty());
  CHECK(rv.rho_hat(0, 1) == 0.0);
}

TEST_CASE("estimate_all on a long path lands near the truth") {
  MfbmParams p = MfbmParams::well_balanced(Eigen::Vector2d(0.3, 0.7), Eigen::Vector2d(2, 1), 0.4);
  const auto path = sample_increments_circulant(p, 1 << 14, 4);
  const auto r = estimate_all(path.values, EstimationConfig::defaults());
  CHECK(r.H_hat(0) == doctest::Approx(0.3).epsilon(0.1));
  CHECK(r.H_hat(1) == doctest::Approx(0.7).epsilon(0.1));
  CHECK(r.sigma2_hat(0) == doctest::Approx(4.0).epsilon(0.25));
  CHECK(r.rho_hat(0, 1) == doctest::Approx(0.4).epsilon(0.25));
  CHECK(r.n_used == (1 << 14));
}

TEST_CASE("theta vector round trip and labels") {
  testing::Rng rng(10);
  const auto p = testing::random_admissible(rng, 3);
  const auto theta = theta_vector(p);
  CHECK(theta.size() == 12);
  const auto back = params_from_theta(theta, 3);
  CHECK((back.H - p.H).norm() < 1e-15);
  CHECK((back.sigma - p.sigma).norm() < 1e-14);
  CHECK((back.rho - p.rho).norm() < 1e-15);
  CHECK((back.eta - p.eta).norm() < 1e-15);
  const auto labels = theta_labels(3);
  REQUIRE(labels.size() == 12);
  CHECK(labels[0] == "H1");
  CHECK(labels[3] == "sigma2_1");
  CHECK(labels[6] == "rho1_2");
  CHECK(labels[11] == "eta2_3");
}
