#include "mfbm/asymptotics.hpp"
#include "mfbm/errors.hpp"
#include "mfbm/estimation.hpp"
#include "mfbm/experiments.hpp"
#include "mfbm/filtering.hpp"
#include "mfbm/io.hpp"
#include "mfbm/model.hpp"
#include "mfbm/synthesis.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

using namespace mfbm;
using io::json;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  bool seed_given = false;
  int jobs = 1;
  std::string format = "csv";
};

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    io::write_text(out, text);
  }
}

Filter resolve_filter(const std::string& spec) {
  if (std::filesystem::exists(spec) && std::filesystem::path(spec).extension() == ".json") {
    return io::read_filter(spec);
  }
  return make_filter(spec);
}

EstimationConfig build_config(const std::string& filter, const std::string& dilations,
                              const std::string& weights, int sign_dilation) {
  EstimationConfig c;
  c.filter = resolve_filter(filter);
  c.dilations = io::parse_dilations(dilations);
  c.weights = io::parse_weights(weights);
  if (sign_dilation > 0) c.sign_dilation = sign_dilation;
  c.check();
  return c;
}

json report_json(const ValidityReport& r) {
  return json{{"admissible", r.admissible},
              {"min_eigenvalue", std::isnan(r.min_eigenvalue) ? json(nullptr)
                                                              : json(r.min_eigenvalue)},
              {"violations", r.violations}};
}

// --- validate ---------------------------------------------------------------

struct ValidateArgs {
  std::string params;
  double tol = -1.0;
};

int cmd_validate(const ValidateArgs& a) {
  const auto report = validate(io::read_params(a.params), a.tol);
  std::cout << report_json(report).dump(2) << '\n';
  return report.admissible ? 0 : 2;
}

// --- simulate ---------------------------------------------------------------

struct SimulateArgs {
  std::string params;
  int n = 1024;
  std::string method = "circulant";
  std::string out;
};

int cmd_simulate(const SimulateArgs& a, const Globals& g) {
  const auto params = io::read_params(a.params);
  const auto report = validate(params);
  if (!report.admissible) {
    std::cerr << report_json(report).dump(2) << '\n';
    return 2;
  }
  const SamplePath path = a.method == "exact" ? sample_exact(params, a.n, g.seed)
                                              : sample_increments_circulant(params, a.n, g.seed);
  if (std::filesystem::path(a.out).extension() == ".bin") {
    io::write_path_binary(a.out, path.values);
  } else {
    io::write_path_csv(a.out, path.values);
  }
  return 0;
}

// --- estimate ---------------------------------------------------------------

struct EstimateArgs {
  std::string input;
  std::string filter = "db4";
  std::string dilations = "1:5";
  std::string weights = "1,0,0";
  int sign_dilation = 0;
  double ci = 0.0;
  std::string out;
};

int cmd_estimate(const EstimateArgs& a, const Globals& g) {
  const auto config = build_config(a.filter, a.dilations, a.weights, a.sign_dilation);
  const auto path = io::read_path(a.input);
  const auto result = estimate_all(path, config);
  json j = io::result_to_json(result);
  if (a.ci > 0.0) {
    SigmaOptions opts;
    opts.jobs = g.jobs;
    j["confidence_intervals"] =
        io::intervals_to_json(confidence_intervals(result, path.rows(), a.ci, opts));
  }
  emit(j.dump(2) + "\n", a.out);
  return 0;
}

// --- filters ----------------------------------------------------------------

int cmd_filters_list(const Globals& g) {
  if (g.format == "json") {
    json list = json::array();
    for (const auto& name : available_filters()) {
      const auto f = make_filter(name);
      list.push_back({{"name", f.name}, {"ell", f.ell}, {"q", f.q}, {"taps", f.taps}});
    }
    std::cout << list.dump(2) << '\n';
    return 0;
  }
  std::cout << "name,ell,q,taps\n";
  for (const auto& name : available_filters()) {
    const auto f = make_filter(name);
    std::cout << f.name << ',' << f.ell << ',' << f.q << ",\"";
    for (std::size_t k = 0; k < f.taps.size(); ++k) {
      std::cout << (k ? " " : "") << io::format_double(f.taps[k]);
    }
    std::cout << "\"\n";
  }
  return 0;
}

// --- mc-table ---------------------------------------------------------------

McExperiment read_experiment(const std::string& file, const Globals& g) {
  const auto j = json::parse(io::read_text(file));
  McExperiment e;
  e.n = j.value("n", e.n);
  e.replications = j.value("replications", e.replications);
  e.first_replication = j.value("first_replication", 0);
  e.seed = g.seed_given ? g.seed : j.value("seed", std::uint64_t{0});
  e.config.filter = resolve_filter(j.value("filter", std::string("db4")));
  if (j.contains("dilations")) {
    e.config.dilations = j["dilations"].is_string()
                             ? io::parse_dilations(j["dilations"].get<std::string>())
                             : j["dilations"].get<std::vector<int>>();
  }
  if (j.contains("variants")) {
    e.variants.clear();
    for (char c : j["variants"].get<std::string>()) e.variants.push_back(c);
  }
  if (j.contains("families")) {
    e.families.clear();
    for (const auto& f : j["families"]) e.families.push_back(family_from_string(f));
  }
  for (const auto& c : j.at("cells")) {
    McCell base;
    base.p = c.value("p", 2);
    base.sigma = c.value("sigma", 1.0);
    if (c.at("H").is_array()) {
      base.H_lo = c["H"][0].get<double>();
      base.H_hi = c["H"][1].get<double>();
    } else {
      base.H_lo = base.H_hi = c["H"].get<double>();
    }
    if (c.contains("causal_eta")) {
      const auto& ce = c["causal_eta"];
      base.causal_eta = ce.is_number() ? Eigen::MatrixXd::Constant(base.p, base.p, ce.get<double>())
                                       : io::matrix_from_json(ce);
    }
    const auto rhos = c.at("rho").is_array() ? c["rho"].get<std::vector<double>>()
                                             : std::vector<double>{c["rho"].get<double>()};
    for (double rho : rhos) {
      McCell cell = base;
      cell.rho = rho;
      e.cells.push_back(cell);
    }
  }
  e.jobs = g.jobs;
  return e;
}

struct McArgs {
  std::string experiment;
  std::string out;
  int first_replication = -1;
  int replications = 0;
};

int cmd_mc_table(const McArgs& a, const Globals& g) {
  auto exp = read_experiment(a.experiment, g);
  if (a.first_replication >= 0) exp.first_replication = a.first_replication;
  if (a.replications > 0) exp.replications = a.replications;
  const auto rows = run_mc_table(exp);
  if (g.format == "json") {
    json list = json::array();
    for (const auto& r : rows) {
      json row{{"family", to_string(r.family)},
               {"p", r.cell.p},
               {"H", r.cell.H_label()},
               {"rho", r.cell.rho},
               {"variant", std::string(1, r.variant)},
               {"admissible", r.admissible}};
      if (r.admissible) {
        row["replications"] = r.errors.size();
        row["failures"] = r.failures();
        row["mse_H"] = r.mse_H();
        row["mse_rho"] = r.mse_rho();
        row["mse_eta"] = r.mse_eta();
      }
      list.push_back(row);
    }
    emit(list.dump(2) + "\n", a.out);
  } else {
    emit(mc_table_csv(rows), a.out);
  }
  return 0;
}

// --- convergence ------------------------------------------------------------

struct ConvergenceArgs {
  std::string params;
  std::string sizes = "256,1024,4096,16384";
  int replications = 200;
  std::string filter = "db4";
  std::string dilations = "1:5";
  std::string out;
};

int cmd_convergence(const ConvergenceArgs& a, const Globals& g) {
  ConvergenceStudy s;
  s.params = a.params.empty() ? ConvergenceStudy::default_params() : io::read_params(a.params);
  s.sizes = io::parse_dilations(a.sizes);
  s.replications = a.replications;
  s.seed = g.seed;
  s.jobs = g.jobs;
  s.config = build_config(a.filter, a.dilations, "v", 0);
  const auto r = run_convergence(s);
  if (g.format == "json") {
    json j{{"sizes", r.sizes}, {"failures", r.failures}, {"parameters", json::array()}};
    for (std::size_t c = 0; c < r.labels.size(); ++c) {
      std::vector<double> sd(r.sizes.size()), mu(r.sizes.size());
      for (std::size_t k = 0; k < r.sizes.size(); ++k) {
        sd[k] = r.std_dev(k, c);
        mu[k] = r.mean(k, c);
      }
      j["parameters"].push_back(
          {{"name", r.labels[c]}, {"std", sd}, {"mean", mu}, {"slope", r.slopes(c)}});
    }
    emit(j.dump(2) + "\n", a.out);
  } else {
    emit(convergence_csv(r), a.out);
  }
  for (std::size_t c = 0; c < r.labels.size(); ++c) {
    std::cerr << "slope " << r.labels[c] << " = " << r.slopes(c) << '\n';
  }
  return 0;
}

// --- highdim ----------------------------------------------------------------

struct HighDimArgs {
  int nodes = 100;
  int neighbors = 2;
  double rewire = 0.2;
  double H_lo = 0.3;
  double H_hi = 0.8;
  bool H_spaced = false;
  double weight_low = WeightLaw{}.low;
  double weight_high = WeightLaw{}.high;
  int n = 8192;
  std::string filter = "db4";
  std::string dilations = "1:5";
  std::string out_dir = "highdim";
};

int cmd_highdim(const HighDimArgs& a, const Globals& g) {
  HighDimSetup s;
  s.graph = {a.nodes, a.neighbors, a.rewire, g.seed};
  s.weights = {a.weight_low, a.weight_high};
  s.H_lo = a.H_lo;
  s.H_hi = a.H_hi;
  s.H_random = !a.H_spaced;
  s.n = a.n;
  s.seed = g.seed;
  s.config = build_config(a.filter, a.dilations, "v", 0);
  const auto r = run_highdim(s);

  const std::filesystem::path dir(a.out_dir);
  std::filesystem::create_directories(dir);
  io::write_params(dir / "params.json", r.params);
  io::write_text(dir / "estimate.json", io::result_to_json(r.estimate).dump(2) + "\n");
  io::write_matrix_csv(dir / "adjacency.csv", r.adjacency.cast<double>());
  io::write_matrix_csv(dir / "partial_true.csv", r.partial_true);
  if (r.partial_hat.size()) io::write_matrix_csv(dir / "partial_hat.csv", r.partial_hat);

  std::string comp = "component,H,H_hat,rho_next,rho_hat_next\n";
  const int p = r.params.p();
  for (int i = 0; i < p; ++i) {
    comp += std::to_string(i + 1) + ',' + io::format_double(r.params.H(i)) + ',' +
            io::format_double(r.estimate.H_hat(i)) + ',';
    if (i + 1 < p) {
      comp += io::format_double(r.params.rho(i, i + 1)) + ',' +
              io::format_double(r.estimate.rho_hat(i, i + 1));
    } else {
      comp += ',';
    }
    comp += '\n';
  }
  io::write_text(dir / "components.csv", comp);

  const json summary{{"nodes", p},
                     {"n", a.n},
                     {"attempts", r.attempts},
                     {"rmse_H", std::sqrt((r.estimate.H_hat - r.params.H).squaredNorm() / p)},
                     {"threshold", r.threshold},
                     {"precision", r.precision},
                     {"recall", r.recall}};
  io::write_text(dir / "summary.json", summary.dump(2) + "\n");
  std::cout << summary.dump(2) << '\n';
  return 0;
}

// --- sigma ------------------------------------------------------------------

struct SigmaArgs {
  std::string params;
  std::string filter = "db4";
  std::string dilations = "1:5";
  std::string out = "sigma.bin";
  std::string out_format = "bin";
  int max_cutoff = 1 << 16;
};

int cmd_sigma(const SigmaArgs& a, const Globals& g) {
  const auto params = io::read_params(a.params);
  require_admissible(params);
  SigmaOptions opts;
  opts.jobs = g.jobs;
  opts.max_cutoff = a.max_cutoff;
  const auto filter = resolve_filter(a.filter);
  const auto s = sigma_matrix(params, filter, io::parse_dilations(a.dilations), opts);
  if (a.out_format == "csv") {
    io::write_matrix_csv(a.out, s.values);
  } else {
    io::write_matrix_binary(a.out, s.values);
  }
  std::cout << json{{"dim", s.values.rows()},
                    {"lag_cutoff", s.lag_cutoff},
                    {"tail_bound", s.tail_bound},
                    {"converged", s.converged}}
                   .dump(2)
            << '\n';
  return 0;
}

void add_sigma_options(CLI::App* cmd, SigmaArgs& a) {
  cmd->add_option("--params", a.params, "model parameter JSON")->required();
  cmd->add_option("--filter", a.filter, "filter name or JSON taps file");
  cmd->add_option("--dilations", a.dilations, "dilation set, a:b or a,b,c");
  cmd->add_option("--out", a.out, "output file");
  cmd->add_option("--out-format", a.out_format, "bin or csv")
      ->check(CLI::IsMember({"bin", "csv"}));
  cmd->add_option("--max-cutoff", a.max_cutoff, "largest lag cutoff");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthesis and identification of multivariate fractional Brownian motion"};
  app.require_subcommand(1);
  Globals g;
  auto* seed_opt = app.add_option("--seed", g.seed, "random seed");
  app.add_option("--jobs", g.jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--format", g.format, "tabular output format")
      ->check(CLI::IsMember({"csv", "json"}));

  ValidateArgs va;
  auto* validate_cmd = app.add_subcommand("validate", "check parameter admissibility");
  validate_cmd->add_option("--params", va.params, "model parameter JSON")->required();
  validate_cmd->add_option("--tol", va.tol, "PSD tolerance (negative: relative default)");

  SimulateArgs sa;
  auto* simulate_cmd = app.add_subcommand("simulate", "synthesize a sample path");
  simulate_cmd->add_option("--params", sa.params, "model parameter JSON")->required();
  simulate_cmd->add_option("--n", sa.n, "number of time points")->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--method", sa.method, "circulant or exact")
      ->check(CLI::IsMember({"circulant", "exact"}));
  simulate_cmd->add_option("--out", sa.out, "output path (.csv or .bin)")->required();

  EstimateArgs ea;
  auto* estimate_cmd = app.add_subcommand("estimate", "estimate all parameters from a path");
  estimate_cmd->add_option("--input", ea.input, "path file (.csv or .bin)")->required();
  estimate_cmd->add_option("--filter", ea.filter, "filter name or JSON taps file");
  estimate_cmd->add_option("--dilations", ea.dilations, "dilation set, a:b or a,b,c");
  estimate_cmd->add_option("--weights", ea.weights, "wv,wc,wd or preset v, c, d");
  estimate_cmd->add_option("--sign-dilation", ea.sign_dilation, "dilation used for signs");
  estimate_cmd->add_option("--ci", ea.ci, "confidence level for delta-method intervals");
  estimate_cmd->add_option("--out", ea.out, "result JSON (default stdout)");

  auto* filters_cmd = app.add_subcommand("filters", "filter bank");
  filters_cmd->require_subcommand(1);
  auto* filters_list = filters_cmd->add_subcommand("list", "list built-in filters");

  McArgs ma;
  auto* mc_cmd = app.add_subcommand("mc-table", "Monte-Carlo MSE tables");
  mc_cmd->add_option("--experiment", ma.experiment, "experiment JSON")->required();
  mc_cmd->add_option("--out", ma.out, "output file (default stdout)");
  mc_cmd->add_option("--first-replication", ma.first_replication, "first replication index");
  mc_cmd->add_option("--replications", ma.replications, "override replication count");

  ConvergenceArgs ca;
  auto* conv_cmd = app.add_subcommand("convergence", "standard deviation against sample size");
  conv_cmd->add_option("--params", ca.params, "model parameter JSON (default: built-in)");
  conv_cmd->add_option("--sizes", ca.sizes, "sample sizes, comma separated");
  conv_cmd->add_option("--replications", ca.replications, "replications per size");
  conv_cmd->add_option("--filter", ca.filter, "filter name or JSON taps file");
  conv_cmd->add_option("--dilations", ca.dilations, "dilation set");
  conv_cmd->add_option("--out", ca.out, "output file (default stdout)");

  HighDimArgs ha;
  auto* hd_cmd = app.add_subcommand("highdim", "graph-driven high-dimensional example");
  hd_cmd->add_option("--nodes", ha.nodes, "number of components");
  hd_cmd->add_option("--neighbors", ha.neighbors, "ring neighbours on each side");
  hd_cmd->add_option("--rewire", ha.rewire, "rewiring probability");
  hd_cmd->add_option("--H-min", ha.H_lo, "smallest Hurst exponent");
  hd_cmd->add_option("--H-max", ha.H_hi, "largest Hurst exponent");
  hd_cmd->add_flag("--H-spaced", ha.H_spaced, "equally spaced instead of uniform draws");
  hd_cmd->add_option("--weight-min", ha.weight_low, "smallest absolute edge weight");
  hd_cmd->add_option("--weight-max", ha.weight_high, "largest absolute edge weight");
  hd_cmd->add_option("--n", ha.n, "path length");
  hd_cmd->add_option("--filter", ha.filter, "filter name or JSON taps file");
  hd_cmd->add_option("--dilations", ha.dilations, "dilation set");
  hd_cmd->add_option("--out-dir", ha.out_dir, "output directory");

  SigmaArgs sg;
  auto* sigma_cmd = app.add_subcommand("sigma", "limit covariance of the moment vector");
  add_sigma_options(sigma_cmd, sg);
  auto* asym_cmd = app.add_subcommand("asymptotics", "asymptotic quantities");
  asym_cmd->require_subcommand(1);
  auto* asym_sigma = asym_cmd->add_subcommand("sigma", "limit covariance of the moment vector");
  add_sigma_options(asym_sigma, sg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  g.seed_given = seed_opt->count() > 0;

  try {
    if (*validate_cmd) return cmd_validate(va);
    if (*simulate_cmd) return cmd_simulate(sa, g);
    if (*estimate_cmd) return cmd_estimate(ea, g);
    if (*filters_list) return cmd_filters_list(g);
    if (*mc_cmd) return cmd_mc_table(ma, g);
    if (*conv_cmd) return cmd_convergence(ca, g);
    if (*hd_cmd) return cmd_highdim(ha, g);
    if (*sigma_cmd || *asym_sigma) return cmd_sigma(sg, g);
  } catch (const InvalidParams& e) {
    std::cerr << "invalid parameters: " << e.what() << '\n';
    return 2;
  } catch (const Unsupported& e) {
    std::cerr << "unsupported: " << e.what() << '\n';
    return 2;
  } catch (const InsufficientData& e) {
    std::cerr << "insufficient data: " << e.what() << '\n';
    return 3;
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 4;
  } catch (const json::exception& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
