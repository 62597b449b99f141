#include "mfbm/experiments.hpp"

#include "mfbm/errors.hpp"
#include "mfbm/io.hpp"
#include "mfbm/parallel.hpp"
#include "mfbm/synthesis.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace mfbm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_finite(const std::vector<ReplicationError>& errors, double ReplicationError::*field) {
  double s = 0.0;
  int count = 0;
  for (const auto& e : errors) {
    if (std::isnan(e.*field)) continue;
    s += e.*field;
    ++count;
  }
  return count ? s / count : kNaN;
}

ReplicationError squared_errors(const EstimationResult& r, const MfbmParams& truth) {
  const int p = truth.p();
  ReplicationError e;
  e.H = (r.H_hat - truth.H).squaredNorm() / p;
  if (p > 1) {
    double sr = 0.0;
    double se = 0.0;
    for (int i = 0; i < p; ++i) {
      for (int j = i + 1; j < p; ++j) {
        sr += std::pow(r.rho_hat(i, j) - truth.rho(i, j), 2);
        se += std::pow(r.eta_hat(i, j) - truth.eta(i, j), 2);
      }
    }
    e.rho = sr / pair_count(p);
    e.eta = se / pair_count(p);
  }
  return e;
}

std::string fmt(double x) { return std::isnan(x) ? "nan" : io::format_double(x); }

}  // namespace

std::string to_string(Family f) {
  switch (f) {
    case Family::Causal:
      return "causal";
    case Family::WellBalanced:
      return "well-balanced";
    case Family::General:
      return "general";
  }
  return "?";
}

Family family_from_string(const std::string& s) {
  if (s == "causal") return Family::Causal;
  if (s == "well-balanced" || s == "well_balanced") return Family::WellBalanced;
  if (s == "general") return Family::General;
  throw InvalidParams("unknown model family '" + s + "'");
}

std::string McCell::H_label() const {
  if (H_lo == H_hi) return io::format_double(H_lo);
  return io::format_double(H_lo) + ":" + io::format_double(H_hi);
}

MfbmParams cell_params(const McCell& cell, Family family) {
  if (cell.p < 1) throw InvalidParams("cell dimension must be >= 1");
  Eigen::VectorXd H(cell.p);
  for (int i = 0; i < cell.p; ++i) {
    H(i) = cell.p == 1 ? cell.H_lo : cell.H_lo + (cell.H_hi - cell.H_lo) * i / (cell.p - 1);
  }
  auto params = MfbmParams::well_balanced(H, Eigen::VectorXd::Constant(cell.p, cell.sigma),
                                          cell.rho);
  if (family == Family::General) {
    for (int i = 0; i < cell.p; ++i) {
      for (int j = i + 1; j < cell.p; ++j) {
        params.eta(i, j) = 0.2 * (1.0 - H(i) - H(j));
        params.eta(j, i) = -params.eta(i, j);
      }
    }
  } else if (family == Family::Causal) {
    if (!cell.causal_eta) {
      throw InvalidParams("causal family requires a user-supplied eta for every cell");
    }
    const auto& eta = *cell.causal_eta;
    if (eta.rows() != cell.p || eta.cols() != cell.p) {
      throw InvalidParams("causal eta has the wrong dimension");
    }
    for (int i = 0; i < cell.p; ++i) {
      for (int j = i + 1; j < cell.p; ++j) {
        params.eta(i, j) = eta(i, j);
        params.eta(j, i) = -eta(i, j);
      }
    }
  }
  return params;
}

int McRow::failures() const {
  int f = 0;
  for (const auto& e : errors) f += (std::isnan(e.H) || std::isnan(e.rho)) ? 1 : 0;
  return f;
}

double McRow::mse_H() const { return mean_finite(errors, &ReplicationError::H); }
double McRow::mse_rho() const { return mean_finite(errors, &ReplicationError::rho); }
double McRow::mse_eta() const { return mean_finite(errors, &ReplicationError::eta); }

std::vector<McRow> run_mc_table(const McExperiment& exp) {
  exp.config.check();
  if (exp.replications < 1) throw InvalidParams("replications must be >= 1");
  if (exp.variants.empty()) throw InvalidParams("no estimator variant selected");
  std::vector<EstimationConfig> configs;
  for (char v : exp.variants) {
    auto c = exp.config;
    c.weights = Weights::preset(v);
    configs.push_back(c);
  }
  std::vector<McRow> rows;
  for (const auto& cell : exp.cells) {
    for (Family family : exp.families) {
      const auto params = cell_params(cell, family);
      const bool admissible = validate(params).admissible;
      const std::size_t first = rows.size();
      for (char v : exp.variants) {
        McRow row;
        row.cell = cell;
        row.family = family;
        row.variant = v;
        row.admissible = admissible;
        row.first_replication = exp.first_replication;
        if (admissible) row.errors.resize(exp.replications);
        rows.push_back(std::move(row));
      }
      if (!admissible) continue;
      const CirculantSampler sampler(params, exp.n);
      parallel_for(exp.replications, exp.jobs, [&](std::size_t r) {
        const auto seed = replication_seed(exp.seed, exp.first_replication + r);
        const auto path = sampler.draw(seed);
        std::optional<MomentVector> mv;
        std::optional<RegressionInputs> inputs;
        try {
          mv = compute_moment_vector(path.values, exp.config);
          inputs = regression_inputs(*mv);
        } catch (const Error&) {
        }
        for (std::size_t k = 0; k < configs.size(); ++k) {
          auto& slot = rows[first + k].errors[r];
          slot = {kNaN, kNaN, kNaN};
          if (!inputs) continue;
          // Ĥ exists whenever the moments do; later stages may still fail
          // (e.g. π̂(0) ≤ 0 for a wild Ĥ) without discarding its error.
          const auto H = estimate_H(*inputs, exp.config.dilations, configs[k].weights);
          slot.H = (H - params.H).squaredNorm() / params.p();
          try {
            const auto full = squared_errors(estimate_from_moments(*mv, configs[k]), params);
            slot.rho = full.rho;
            slot.eta = full.eta;
          } catch (const Error&) {
          }
        }
      });
    }
  }
  return rows;
}

std::vector<McRow> merge_mc_tables(const std::vector<McRow>& a, const std::vector<McRow>& b) {
  if (a.size() != b.size()) throw InvalidParams("tables have different layouts");
  std::vector<McRow> out;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const McRow* lo = &a[k];
    const McRow* hi = &b[k];
    if (lo->family != hi->family || lo->variant != hi->variant || lo->cell.p != hi->cell.p ||
        lo->cell.H_lo != hi->cell.H_lo || lo->cell.H_hi != hi->cell.H_hi ||
        lo->cell.rho != hi->cell.rho) {
      throw InvalidParams("tables have different layouts");
    }
    if (hi->first_replication < lo->first_replication) std::swap(lo, hi);
    if (lo->admissible &&
        lo->first_replication + static_cast<int>(lo->errors.size()) != hi->first_replication) {
      throw InvalidParams("replication ranges are not contiguous");
    }
    McRow row = *lo;
    row.errors.insert(row.errors.end(), hi->errors.begin(), hi->errors.end());
    out.push_back(std::move(row));
  }
  return out;
}

std::string mc_table_csv(const std::vector<McRow>& rows) {
  std::ostringstream os;
  os << "family,p,H,rho,variant,replications,failures,mse_H,mse_rho,mse_eta\n";
  for (const auto& r : rows) {
    os << to_string(r.family) << ',' << r.cell.p << ',' << r.cell.H_label() << ','
       << io::format_double(r.cell.rho) << ',' << r.variant << ',';
    if (!r.admissible) {
      os << "0,0,×,×,×\n";
      continue;
    }
    os << r.errors.size() << ',' << r.failures() << ',' << fmt(r.mse_H()) << ','
       << fmt(r.mse_rho()) << ',' << fmt(r.mse_eta()) << '\n';
  }
  return os.str();
}

MfbmParams ConvergenceStudy::default_params() {
  Eigen::VectorXd H(2), sigma(2);
  H << 0.3, 0.8;
  sigma << 2.0, 1.0;
  return MfbmParams::well_balanced(H, sigma, 0.4);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidParams("slope needs two or more points");
  const auto k = static_cast<Eigen::Index>(x.size());
  Eigen::VectorXd lx(k), ly(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    lx(i) = std::log(x[i]);
    ly(i) = std::log(y[i]);
  }
  const Eigen::VectorXd cx = lx.array() - lx.mean();
  return cx.dot(ly.array().matrix() - Eigen::VectorXd::Constant(k, ly.mean())) / cx.squaredNorm();
}

ConvergenceResult run_convergence(const ConvergenceStudy& study) {
  study.config.check();
  if (study.replications < 2) throw InvalidParams("convergence study needs at least 2 replications");
  if (study.sizes.size() < 2) throw InvalidParams("convergence study needs at least 2 sizes");
  require_admissible(study.params);
  const int p = study.params.p();
  ConvergenceResult res;
  res.labels = theta_labels(p);
  res.sizes = study.sizes;
  const auto dim = static_cast<Eigen::Index>(res.labels.size());
  res.std_dev.resize(study.sizes.size(), dim);
  res.mean.resize(study.sizes.size(), dim);
  for (std::size_t s = 0; s < study.sizes.size(); ++s) {
    const CirculantSampler sampler(study.params, study.sizes[s]);
    Eigen::MatrixXd draws(study.replications, dim);
    std::vector<char> ok(study.replications, 0);
    parallel_for(study.replications, study.jobs, [&](std::size_t r) {
      try {
        const auto path = sampler.draw(replication_seed(study.seed, r));
        draws.row(r) = theta_vector(estimate_all(path.values, study.config)).transpose();
        ok[r] = 1;
      } catch (const Error&) {
      }
    });
    std::vector<Eigen::Index> good;
    for (int r = 0; r < study.replications; ++r) {
      if (ok[r]) good.push_back(r);
    }
    res.failures.push_back(study.replications - static_cast<int>(good.size()));
    if (good.size() < 2) {
      throw NumericalFailure("fewer than two successful replications at n = " +
                             std::to_string(study.sizes[s]));
    }
    const Eigen::MatrixXd kept = draws(good, Eigen::all);
    const Eigen::RowVectorXd mu = kept.colwise().mean();
    res.mean.row(s) = mu;
    res.std_dev.row(s) =
        ((kept.rowwise() - mu).colwise().squaredNorm() / static_cast<double>(good.size() - 1))
            .cwiseSqrt();
  }
  res.slopes.resize(dim);
  std::vector<double> xs(study.sizes.begin(), study.sizes.end());
  for (Eigen::Index c = 0; c < dim; ++c) {
    std::vector<double> ys(study.sizes.size());
    for (std::size_t s = 0; s < ys.size(); ++s) ys[s] = res.std_dev(s, c);
    res.slopes(c) = loglog_slope(xs, ys);
  }
  return res;
}

std::string convergence_csv(const ConvergenceResult& r) {
  std::ostringstream os;
  os << "n,failures";
  for (const auto& l : r.labels) os << ",std_" << l;
  for (const auto& l : r.labels) os << ",mean_" << l;
  os << '\n';
  for (std::size_t s = 0; s < r.sizes.size(); ++s) {
    os << r.sizes[s] << ',' << r.failures[s];
    for (Eigen::Index c = 0; c < r.std_dev.cols(); ++c) os << ',' << fmt(r.std_dev(s, c));
    for (Eigen::Index c = 0; c < r.mean.cols(); ++c) os << ',' << fmt(r.mean(s, c));
    os << '\n';
  }
  os << "slope,";
  for (Eigen::Index c = 0; c < r.slopes.size(); ++c) os << ',' << fmt(r.slopes(c));
  for (Eigen::Index c = 0; c < r.slopes.size(); ++c) os << ',';
  os << '\n';
  return os.str();
}

MfbmParams highdim_params(const HighDimSetup& setup, Eigen::MatrixXi* adjacency, int* attempts) {
  const int p = setup.graph.nodes;
  if (!(setup.H_lo > 0.0 && setup.H_hi < 1.0 && setup.H_lo <= setup.H_hi)) {
    throw InvalidParams("H range must lie inside (0,1)");
  }
  const auto adj = watts_strogatz(setup.graph);
  if (adjacency) *adjacency = adj;
  Rng rng(setup.seed);
  std::uniform_real_distribution<double> uni(setup.H_lo, setup.H_hi);
  for (int attempt = 1; attempt <= setup.max_attempts; ++attempt) {
    Eigen::VectorXd H(p);
    for (int i = 0; i < p; ++i) {
      H(i) = setup.H_random ? uni(rng)
                            : setup.H_lo + (setup.H_hi - setup.H_lo) * i / std::max(p - 1, 1);
    }
    const auto a = random_edge_weights(adj, setup.weights, rng());
    MfbmParams params;
    params.H = H;
    params.sigma = Eigen::VectorXd::Ones(p);
    params.rho = correlation_from_graph(a);
    params.eta = Eigen::MatrixXd::Zero(p, p);
    if (validate(params).admissible) {
      if (attempts) *attempts = attempt;
      return params;
    }
  }
  throw InvalidParams("no admissible parameter set after " + std::to_string(setup.max_attempts) +
                      " draws");
}

HighDimResult run_highdim(const HighDimSetup& setup) {
  HighDimResult res;
  res.params = highdim_params(setup, &res.adjacency, &res.attempts);
  const auto path = CirculantSampler(res.params, setup.n).draw(setup.seed);
  auto config = setup.config;
  config.weights = Weights::preset('v');
  res.estimate = estimate_all(path.values, config);
  res.partial_true = partial_correlation(res.params.rho);
  res.precision = res.recall = kNaN;
  try {
    res.partial_hat = partial_correlation(res.estimate.rho_hat);
  } catch (const Error&) {
    return res;
  }
  int tp = 0, fp = 0, fn = 0;
  const int p = res.params.p();
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) {
      const bool predicted = std::abs(res.partial_hat(i, j)) > res.threshold;
      const bool edge = res.adjacency(i, j) != 0;
      tp += predicted && edge;
      fp += predicted && !edge;
      fn += !predicted && edge;
    }
  }
  res.precision = tp + fp ? static_cast<double>(tp) / (tp + fp) : kNaN;
  res.recall = tp + fn ? static_cast<double>(tp) / (tp + fn) : kNaN;
  return res;
}

}  // namespace mfbm
