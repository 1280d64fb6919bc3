#include "scorematch/cli.hpp"

#include <CLI11.hpp>
#include <Eigen/Dense>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "scorematch/errors.hpp"
#include "scorematch/io.hpp"
#include "scorematch/parallel.hpp"
#include "scorematch/version.hpp"

namespace scorematch::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void write_manifest(const std::string& dir, const std::string& command, const json& config,
                    std::uint64_t seed, const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs, double wall_time_s) {
  json j{{"command", command}, {"config", config},           {"seed", seed},
         {"inputs", inputs},   {"outputs", outputs},          {"version", kVersion},
         {"wall_time_s", wall_time_s}};
  std::ofstream out(fs::path(dir) / "manifest.json");
  out << j.dump(2) << "\n";
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir);
}

void center_columns(DataMatrix& data) {
  const Eigen::RowVectorXd mean = data.values.colwise().mean();
  data.values.rowwise() -= mean;
}

void standardize_columns(DataMatrix& data) {
  center_columns(data);
  for (int j = 0; j < data.m(); ++j) {
    const double sd = std::sqrt(data.values.col(j).squaredNorm() / data.n());
    if (sd > 0) data.values.col(j) /= sd;
  }
}

struct SimulateArgs {
  std::string design;
  std::string out = ".";
  std::uint64_t seed = 1;
  int n = 100;
  int m = 0;
  int side = 0;
  int degree = 0;
  int blocks = 0;
  int block_size = 0;
  int components = 1;
  int hubs = 0;
  int hub_degree = 0;
  double kappa = 0.0;
  double edge_prob = 0.01;
  std::string family = "gaussian";
  std::string star_param = "kappa";
  double quartic = -0.08;  // -2/25
  double b2 = -1.0;
  double b = 0.16;  // 8/50
  double target_min_eig = 0.6;
  double fraction = 0.02;
  double noise_variance = 0.2;
  int df = 3;
  int burnin = 100;
  int thin = 10;
};

int cmd_simulate(const SimulateArgs& a) {
  Timer timer;
  ensure_dir(a.out);
  Rng rng(a.seed);
  TruthSpec truth;
  DataMatrix data;

  if (a.design == "chain") {
    if (a.m < 2) throw CLI::ValidationError("--m", "chain needs m >= 2");
    truth = truth_chain(a.m, a.kappa != 0.0 ? a.kappa : 0.3);
    if (a.family == "truncated") truth.family = FamilySpec::make(Family::TruncatedGaussianCentered);
    data = sample_from_truth(truth, a.n, rng.stream(1));
  } else if (a.design == "lattice") {
    if (a.side < 2) throw CLI::ValidationError("--side", "lattice needs side >= 2");
    truth = truth_lattice(a.side, a.kappa != 0.0 ? a.kappa : 0.2);
    if (a.family == "truncated") truth.family = FamilySpec::make(Family::TruncatedGaussianCentered);
    data = sample_from_truth(truth, a.n, rng.stream(1));
  } else if (a.design == "star") {
    if (a.m < 2 || a.degree < 1) throw CLI::ValidationError("--m/--d", "star needs m >= 2, d >= 1");
    truth = a.star_param == "sigma" ? truth_star_sigma(a.m, a.degree) : truth_star_kappa(a.m, a.degree);
    data = sample_from_truth(truth, a.n, rng.stream(1));
  } else if (a.design == "hub-lattice") {
    Graph g = gen_graph(GraphKind::HubLattice,
                        {.side = a.side, .components = a.components, .hubs = a.hubs,
                         .hub_degree = a.hub_degree},
                        rng.stream(0));
    truth = precision_peng(g, rng.stream(2));
    data = sample_from_truth(truth, a.n, rng.stream(1));
  } else if (a.design == "truncated-blocks") {
    if (a.blocks < 1 || a.block_size < 2)
      throw CLI::ValidationError("--blocks/--block-size", "need blocks >= 1 and block-size >= 2");
    truth = precision_block_uniform(a.blocks, a.block_size, rng.stream(2));
    data = sample_from_truth(truth, a.n, rng.stream(1));
  } else if (a.design == "normal-conditionals") {
    if (a.side < 2) throw CLI::ValidationError("--side", "normal-conditionals uses a lattice; side >= 2");
    Graph g = gen_graph(GraphKind::Lattice2d, {.side = a.side});
    truth = truth_normal_conditionals(g, a.quartic, a.b2, a.b);
    data = sample_normal_conditionals_gibbs(truth.interaction, truth.b2, truth.b, a.n, rng.stream(1),
                                            a.burnin, a.thin);
  } else if (a.design == "contaminated") {
    if (a.m < 2) throw CLI::ValidationError("--m", "need m >= 2");
    truth = precision_discrete(a.m, a.target_min_eig, rng.stream(2));
    data = sample_mvn(truth.sigma, a.n, rng.stream(1));
    data = contaminate(data, a.fraction, a.noise_variance, rng.stream(3));
  } else if (a.design == "mvt") {
    if (a.m < 2) throw CLI::ValidationError("--m", "need m >= 2");
    Graph g = gen_graph(GraphKind::ErdosRenyi, {.m = a.m, .edge_prob = a.edge_prob}, rng.stream(0));
    truth = precision_peng(g, rng.stream(2));
    data = sample_mvt(truth.sigma, a.df, a.n, rng.stream(1));
  } else {
    throw CLI::ValidationError("--design", "unknown design: " + a.design);
  }
  truth.seed = a.seed;

  const std::string data_path = (fs::path(a.out) / "data.csv").string();
  const std::string truth_path = (fs::path(a.out) / "truth.json").string();
  io::write_data_csv(data_path, data);
  io::write_truth_json(truth_path, truth);
  json cfg{{"design", a.design}, {"n", a.n}};
  write_manifest(a.out, "simulate", cfg, a.seed, {}, {data_path, truth_path}, timer.seconds());
  return 0;
}

struct FitArgs {
  std::string data;
  std::string family = "gaussian";
  std::string solver = "path";
  std::string penalty = "auto";
  double lambda = -1.0;
  int grid = 0;
  double lambda_min_ratio = 1e-3;
  double lambda_min = 0.0;
  double tol = 1e-8;
  int t_max = 10000;
  bool center = false;
  bool standardize = false;
  std::string out = ".";
};

PenaltySpec resolve_penalty(const std::string& penalty, Family family, const ParamLayout& layout) {
  std::string mode = penalty;
  if (mode == "auto") mode = family == Family::NormalConditionals ? "group" : "l1";
  if (mode == "l1") return PenaltySpec::l1_offdiagonal(layout);
  if (mode == "group") return PenaltySpec::group_pairs(layout);
  throw CLI::ValidationError("--penalty", "unknown penalty: " + penalty);
}

int cmd_fit(const FitArgs& a) {
  Timer timer;
  ensure_dir(a.out);
  const Family family = family_from_name(a.family);
  DataMatrix data = io::read_data(a.data);
  if (a.standardize)
    standardize_columns(data);
  else if (a.center)
    center_columns(data);
  if (family_domain(family) == Domain::NonnegativeOrthant && data.values.minCoeff() < 0.0) {
    std::cerr << "error: the " << a.family
              << " family requires non-negative data; raw data has negative entries"
              << (a.center || a.standardize ? " after centering/standardization" : "")
              << ". Shift or re-simulate the data.\n";
    return 2;
  }
  const QuadraticLoss loss = build_loss(FamilySpec::make(family), data);
  const PenaltySpec penalty = resolve_penalty(a.penalty, family, *loss.layout());

  std::vector<std::string> outputs;
  if (a.solver == "path") {
    const SolutionPath path = solve_path(loss, penalty, {.lambda_min = a.lambda_min});
    const std::string path_json = (fs::path(a.out) / "path.json").string();
    const std::string path_csv = (fs::path(a.out) / "path.csv").string();
    io::write_path_json(path_json, path);
    io::write_path_csv(path_csv, path);
    outputs = {path_json, path_csv};
  } else if (a.solver == "cd") {
    CdOptions opts;
    opts.tol = a.tol;
    opts.t_max = a.t_max;
    auto solve = [&](double lam, const CdOptions& o) {
      return penalty.mode == PenaltySpec::Mode::Group ? solve_group_cd(loss, penalty, lam, o)
                                                      : solve_cd(loss, penalty, lam, o);
    };
    if (a.grid > 0) {
      const double lmax = lambda_max(loss, penalty);
      const auto grid = default_lambda_grid(lmax, a.grid, a.lambda_min_ratio);
      const auto fits = fit_lambda_grid(loss, penalty, grid, opts);
      json arr = json::array();
      for (const auto& est : fits) {
        const std::string name = "estimate_" + std::to_string(arr.size()) + ".json";
        const std::string file = (fs::path(a.out) / name).string();
        io::write_estimate_json(file, est);
        outputs.push_back(file);
        arr.push_back(json{{"lambda", est.lambda},
                           {"kkt_residual", est.kkt_residual},
                           {"support", support_size(est.theta)},
                           {"file", name}});
      }
      const std::string grid_file = (fs::path(a.out) / "grid.json").string();
      std::ofstream gout(grid_file);
      gout << json{{"lambda_max", lmax}, {"estimates", arr}}.dump(2) << "\n";
      outputs.push_back(grid_file);
    } else {
      if (a.lambda < 0) throw CLI::ValidationError("--lambda", "cd solver needs --lambda or --grid");
      const Estimate est = solve(a.lambda, opts);
      const std::string file = (fs::path(a.out) / "estimate.json").string();
      io::write_estimate_json(file, est);
      outputs = {file};
    }
  } else {
    throw CLI::ValidationError("--solver", "unknown solver: " + a.solver);
  }
  json cfg{{"family", a.family},       {"solver", a.solver},
           {"penalty", a.penalty},     {"lambda", a.lambda},
           {"grid", a.grid},           {"center", a.center},
           {"standardize", a.standardize}, {"tol", a.tol},
           {"t_max", a.t_max}};
  write_manifest(a.out, "fit", cfg, 0, {a.data}, outputs, timer.seconds());
  return 0;
}

struct TuneArgs {
  std::string data;
  std::string family = "gaussian";
  std::string solver = "cd";
  std::string penalty = "auto";
  double gamma = 0.5;
  bool refit = false;
  int grid = 50;
  double lambda_min_ratio = 1e-3;
  bool center = false;
  bool standardize = false;
  std::string out = ".";
};

int cmd_tune(const TuneArgs& a) {
  Timer timer;
  ensure_dir(a.out);
  const Family family = family_from_name(a.family);
  DataMatrix data = io::read_data(a.data);
  if (a.standardize)
    standardize_columns(data);
  else if (a.center)
    center_columns(data);
  const QuadraticLoss loss = build_loss(FamilySpec::make(family), data);
  const PenaltySpec penalty = resolve_penalty(a.penalty, family, *loss.layout());
  const EbicConfig config{.gamma = a.gamma, .refit = a.refit};

  EbicSelection selection;
  if (a.solver == "path") {
    const SolutionPath path = solve_path(loss, penalty);
    selection = select_lambda_ebic(path, loss, penalty, data.n(), config);
  } else {
    const double lmax = lambda_max(loss, penalty);
    const auto grid = default_lambda_grid(lmax, a.grid, a.lambda_min_ratio);
    const auto fits = fit_lambda_grid(loss, penalty, grid);
    selection = select_lambda_ebic(fits, loss, penalty, data.n(), config);
  }
  const std::string sel_json = (fs::path(a.out) / "selection.json").string();
  const std::string sel_csv = (fs::path(a.out) / "scores.csv").string();
  const std::string est_file = (fs::path(a.out) / "estimate.json").string();
  io::write_selection_json(sel_json, selection, a.gamma, a.refit);
  io::write_selection_csv(sel_csv, selection);
  io::write_estimate_json(est_file, selection.estimate);
  json cfg{{"family", a.family}, {"solver", a.solver}, {"gamma", a.gamma},
           {"refit", a.refit},   {"grid", a.grid},     {"lambda_min_ratio", a.lambda_min_ratio}};
  write_manifest(a.out, "tune", cfg, 0, {a.data}, {sel_json, sel_csv, est_file}, timer.seconds());
  return 0;
}

struct DiagnoseArgs {
  std::string truth;
  int mc_samples = 0;
  std::uint64_t seed = 1;
  std::string out = ".";
};

int cmd_diagnose(const DiagnoseArgs& a) {
  Timer timer;
  ensure_dir(a.out);
  const TruthSpec truth = io::read_truth_json(a.truth);
  TheoryReport report;
  std::string note;
  if (truth.family.kind == Family::GaussianCentered) {
    report = theory_constants(truth);
  } else if (truth.family.kind == Family::TruncatedGaussianCentered) {
    if (a.mc_samples < 2)
      throw CLI::ValidationError("--mc-samples", "non-Gaussian families need Monte Carlo samples");
    const PopulationGamma pg =
        population_gamma(truth.family, truth, a.mc_samples, Rng(a.seed));
    report = theory_constants(pg.loss, truth.interaction,
                              support_coords_offdiag(pg.loss, truth.interaction));
    note = "Gamma* estimated by Monte Carlo with " + std::to_string(a.mc_samples) + " samples";
  } else {
    throw CLI::ValidationError("--truth", "diagnose supports gaussian and truncated truths");
  }
  const std::string report_path = (fs::path(a.out) / "report.json").string();
  io::write_theory_report_json(report_path, report, note);
  json cfg{{"mc_samples", a.mc_samples}};
  write_manifest(a.out, "diagnose", cfg, a.seed, {a.truth}, {report_path}, timer.seconds());
  return 0;
}

struct EvalArgs {
  std::string fit;
  std::string truth;
  std::string family = "gaussian";
  std::string out = ".";
  double zero_tol = 1e-6;
};

int cmd_eval(const EvalArgs& a) {
  Timer timer;
  ensure_dir(a.out);
  const TruthSpec truth = io::read_truth_json(a.truth);
  const Family family = family_from_name(a.family);
  const LayoutPtr layout = io::layout_for_family(family, truth.graph.m);

  const json fit_json = json::parse(std::ifstream(a.fit));
  std::vector<std::string> outputs;
  json metrics;
  if (fit_json.contains("knots")) {
    const SolutionPath path = io::read_path_json(a.fit, layout);
    const RocCurve curve = roc_points(path, truth.graph);
    const std::string roc_path = (fs::path(a.out) / "roc.csv").string();
    io::write_roc_csv(roc_path, curve);
    outputs.push_back(roc_path);
    metrics["auc"] = curve.auc;
  } else {
    const Estimate est = io::read_estimate_json(a.fit, layout);
    const EdgeSet edges = support_edges(est.theta, a.zero_tol);
    int tp = 0, fp = 0;
    for (const auto& e : edges) (truth.graph.edges.count(e) ? tp : fp)++;
    Graph est_graph;
    est_graph.m = truth.graph.m;
    for (const auto& [j, k] : edges) est_graph.add_edge(j, k);
    json degree_hist = json::object();
    for (const auto& [deg, count] : degree_distribution(est_graph))
      degree_hist[std::to_string(deg)] = count;
    metrics["true_positives"] = tp;
    metrics["false_positives"] = fp;
    metrics["false_negatives"] = truth.graph.num_edges() - tp;
    metrics["support_size"] = static_cast<int>(edges.size());
    metrics["degree_distribution"] = degree_hist;
    const ParameterVector truth_pv =
        ParameterVector::from_matrix(ParamLayout::pairwise(truth.graph.m), truth.interaction);
    if (layout->same_shape(*truth_pv.layout()))
      metrics["signed_support_match"] = signed_support_match(est.theta, truth_pv, a.zero_tol);
  }
  const std::string metrics_path = (fs::path(a.out) / "metrics.json").string();
  std::ofstream mout(metrics_path);
  mout << metrics.dump(2) << "\n";
  outputs.push_back(metrics_path);
  json cfg{{"family", a.family}, {"zero_tol", a.zero_tol}};
  write_manifest(a.out, "eval", cfg, 0, {a.fit, a.truth}, outputs, timer.seconds());
  return 0;
}

struct ExperimentArgs {
  std::string config;
  std::string out = ".";
  int threads = 0;
};

int run_auc_experiment(const json& cfg, const ExperimentArgs& a, const Timer& timer) {
  const std::string design = cfg.at("design").get<std::string>();
  const int trials = cfg.at("trials").get<int>();
  const int n = cfg.at("n").get<int>();
  const std::uint64_t seed = cfg.value("seed", 1ull);

  json results = json::array();
  int wins = 0;
  std::vector<std::string> outputs;
  for (int t = 0; t < trials; ++t) {
    Rng rng(seed, static_cast<std::uint64_t>(t));
    TruthSpec truth;
    DataMatrix data;
    std::vector<Family> families;
    if (design == "auc_truncated_blocks") {
      truth = precision_block_uniform(cfg.value("blocks", 3), cfg.value("block_size", 10),
                                      rng.stream(1000001));
      data = sample_from_truth(truth, n, rng.stream(1000002));
      families = {Family::TruncatedGaussianCentered, Family::GaussianCentered};
    } else if (design == "auc_normal_conditionals") {
      Graph g = gen_graph(GraphKind::Lattice2d, {.side = cfg.value("side", 5)});
      truth = truth_normal_conditionals(g, cfg.value("quartic", -0.08), cfg.value("b2", -1.0),
                                        cfg.value("b", 0.16));
      data = sample_from_truth(truth, n, rng.stream(1000002));
      families = {Family::NormalConditionals, Family::GaussianCentered};
    } else {
      throw CLI::ValidationError("--config", "unknown auc design: " + design);
    }
    const auto aucs = auc_comparison(data, truth.graph, families);
    json row{{"trial", t}};
    for (const auto& fa : aucs) row[family_name(fa.family)] = fa.auc;
    if (aucs[0].auc > aucs[1].auc) ++wins;
    results.push_back(std::move(row));
    if (t == 0) {
      for (const auto& fa : aucs) {
        const std::string roc_path =
            (fs::path(a.out) / ("roc_" + std::string(family_name(fa.family)) + ".csv")).string();
        io::write_roc_csv(roc_path, fa.curve);
        outputs.push_back(roc_path);
      }
    }
  }
  json summary{{"design", design},
               {"trials", trials},
               {"n", n},
               {"matched_family_wins", wins},
               {"results", results}};
  const std::string aucs_path = (fs::path(a.out) / "aucs.json").string();
  std::ofstream out(aucs_path);
  out << summary.dump(2) << "\n";
  outputs.push_back(aucs_path);
  write_manifest(a.out, "experiment", cfg, seed, {a.config}, outputs, timer.seconds());
  return 0;
}

int cmd_experiment(const ExperimentArgs& a) {
  Timer timer;
  ensure_dir(a.out);
  const json cfg = json::parse(std::ifstream(a.config));
  for (const char* field : {"design", "trials"})
    if (!cfg.contains(field))
      throw CLI::ValidationError("--config", std::string("missing config field: ") + field);

  const std::string design = cfg.at("design").get<std::string>();
  if (design.rfind("auc_", 0) == 0) {
    for (const char* field : {"n"})
      if (!cfg.contains(field))
        throw CLI::ValidationError("--config", std::string("missing config field: ") + field);
    return run_auc_experiment(cfg, a, timer);
  }

  for (const char* field : {"grid", "lambda_const"})
    if (!cfg.contains(field))
      throw CLI::ValidationError("--config", std::string("missing config field: ") + field);
  if (!cfg.contains("n_list") && !cfg.contains("r_list"))
    throw CLI::ValidationError("--config", "missing config field: n_list or r_list");

  ExperimentConfig config;
  config.design = design_from_name(design);
  config.grid = cfg.at("grid").get<std::vector<double>>();
  if (cfg.contains("n_list")) config.n_list = cfg.at("n_list").get<std::vector<int>>();
  if (cfg.contains("r_list")) config.r_list = cfg.at("r_list").get<std::vector<double>>();
  config.trials = cfg.at("trials").get<int>();
  config.lambda_const = cfg.at("lambda_const").get<double>();
  config.rescale_exponent = cfg.value("rescale_exponent", 8.0);
  config.star_m = cfg.value("star_m", 200);
  config.chain_m = cfg.value("chain_m", 64);
  config.star_kappa_param = cfg.value("star_kappa_param", true);
  config.seed = cfg.value("seed", 1ull);
  config.threads = a.threads;

  const RecoveryTable table = recovery_probability(config);
  const std::string recovery_path = (fs::path(a.out) / "recovery.csv").string();
  io::write_recovery_csv(recovery_path, table);
  std::vector<std::string> outputs{recovery_path};

  json alignment;
  if (config.grid.size() >= 2) {
    const auto rescaled_axis = [&](double gv, int n) {
      switch (config.design) {
        case ExperimentDesign::VaryMChain:
        case ExperimentDesign::VaryMLattice:
          return n / std::log(gv);
        case ExperimentDesign::VaryDStar:
          return n / (gv * gv);
        case ExperimentDesign::NonnegChainScaling:
          return n / std::pow(std::log(gv), config.rescale_exponent);
        default:
          return static_cast<double>(n);
      }
    };
    const auto raw_axis = [](double, int n) { return static_cast<double>(n); };
    try {
      alignment["rescaled"] = rescale_alignment(table, rescaled_axis);
      alignment["unrescaled"] = rescale_alignment(table, raw_axis);
    } catch (const std::invalid_argument& e) {
      alignment["error"] = e.what();
    }
    const std::string align_path = (fs::path(a.out) / "alignment.json").string();
    std::ofstream out(align_path);
    out << alignment.dump(2) << "\n";
    outputs.push_back(align_path);
  }
  write_manifest(a.out, "experiment", cfg, config.seed, {a.config}, outputs, timer.seconds());
  return 0;
}

struct VerifyArgs {
  std::string fit;
  std::string data;
  std::string family = "gaussian";
  std::string penalty = "auto";
  double tol = 1e-6;
  bool center = false;
  bool standardize = false;
};

int cmd_verify(const VerifyArgs& a) {
  const Family family = family_from_name(a.family);
  DataMatrix data = io::read_data(a.data);
  if (a.standardize)
    standardize_columns(data);
  else if (a.center)
    center_columns(data);
  const QuadraticLoss loss = build_loss(FamilySpec::make(family), data);
  const PenaltySpec penalty = resolve_penalty(a.penalty, family, *loss.layout());
  const LayoutPtr layout = loss.layout();

  const json fit_json = json::parse(std::ifstream(a.fit));
  bool all_ok = true;
  auto report = [&](const std::string& name, bool ok, double value) {
    std::cout << (ok ? "PASS" : "FAIL") << "  " << name << " (" << value << ")\n";
    all_ok = all_ok && ok;
  };

  if (fit_json.contains("knots")) {
    const SolutionPath path = io::read_path_json(a.fit, layout);
    double worst = 0;
    for (std::size_t r = 0; r < path.knots.size(); ++r)
      worst = std::max(worst,
                       kkt_residual_reduced(loss, penalty, path.coefficients[r], path.knots[r]));
    report("kkt residual at knots <= " + std::to_string(a.tol), worst <= a.tol, worst);
    double worst_mid = 0;
    for (std::size_t r = 0; r < path.num_segments(); ++r) {
      const double mid = 0.5 * (path.knots[r] + path.knots[r + 1]);
      worst_mid = std::max(worst_mid, kkt_residual_reduced(loss, penalty, path.at(mid), mid));
    }
    report("kkt residual at segment midpoints <= " + std::to_string(a.tol), worst_mid <= a.tol,
           worst_mid);
    if (family == Family::GaussianCentered && data.n() > data.m() &&
        path.termination == PathTermination::GradientZero) {
      const Eigen::MatrixXd w = sample_covariance(data);
      const Eigen::MatrixXd winv = w.inverse();
      const Eigen::MatrixXd endpoint = ParameterVector(layout, path.at(0.0)).matrix();
      const double err = (endpoint - winv).cwiseAbs().maxCoeff();
      report("path endpoint at lambda=0 equals W^-1 within 1e-8", err <= 1e-8, err);
    }
  } else {
    const Estimate est = io::read_estimate_json(a.fit, layout);
    const double res = kkt_residual(loss, penalty, est.theta, est.lambda);
    report("kkt residual <= " + std::to_string(a.tol), res <= a.tol, res);
  }
  return all_ok ? 0 : 1;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"regularized score matching for graphical model structure learning"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "generate data and ground truth");
  sim_cmd->add_option("--design", sim.design,
                      "chain|lattice|star|hub-lattice|truncated-blocks|normal-conditionals|"
                      "contaminated|mvt")
      ->required();
  sim_cmd->add_option("--out", sim.out, "output directory");
  sim_cmd->add_option("--seed", sim.seed, "rng seed");
  sim_cmd->add_option("--n", sim.n, "sample count")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--m", sim.m, "variable count");
  sim_cmd->add_option("--side", sim.side, "lattice side");
  sim_cmd->add_option("--d", sim.degree, "star hub degree");
  sim_cmd->add_option("--blocks", sim.blocks, "number of diagonal blocks");
  sim_cmd->add_option("--block-size", sim.block_size, "block size");
  sim_cmd->add_option("--components", sim.components, "hub-lattice components");
  sim_cmd->add_option("--hubs", sim.hubs, "hubs per component");
  sim_cmd->add_option("--hub-degree", sim.hub_degree, "hub degree");
  sim_cmd->add_option("--kappa", sim.kappa, "edge weight (chain 0.3, lattice 0.2)");
  sim_cmd->add_option("--edge-prob", sim.edge_prob, "Erdos-Renyi edge probability");
  sim_cmd->add_option("--family", sim.family, "gaussian|truncated sampling family");
  sim_cmd->add_option("--star-param", sim.star_param, "kappa|sigma star weight convention");
  sim_cmd->add_option("--quartic", sim.quartic, "normal-conditionals edge coefficient");
  sim_cmd->add_option("--b2", sim.b2, "normal-conditionals x^2 coefficient");
  sim_cmd->add_option("--b", sim.b, "normal-conditionals x coefficient");
  sim_cmd->add_option("--target-min-eig", sim.target_min_eig, "contaminated design eigenvalue");
  sim_cmd->add_option("--fraction", sim.fraction, "contaminated row fraction");
  sim_cmd->add_option("--noise-variance", sim.noise_variance, "contamination variance");
  sim_cmd->add_option("--df", sim.df, "t degrees of freedom");
  sim_cmd->add_option("--burnin", sim.burnin, "Gibbs burn-in sweeps");
  sim_cmd->add_option("--thin", sim.thin, "Gibbs thinning");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "fit a regularized score matching estimate");
  fit_cmd->add_option("--data", fit.data, "data CSV or JSON")->required();
  fit_cmd->add_option("--family", fit.family, "gaussian|truncated|truncated-location|normal-conditionals");
  fit_cmd->add_option("--solver", fit.solver, "path|cd");
  fit_cmd->add_option("--penalty", fit.penalty, "l1|group|auto");
  fit_cmd->add_option("--lambda", fit.lambda, "penalty level for cd");
  fit_cmd->add_option("--grid", fit.grid, "number of grid points for cd");
  fit_cmd->add_option("--lambda-min-ratio", fit.lambda_min_ratio, "grid lower end ratio");
  fit_cmd->add_option("--lambda-min", fit.lambda_min, "path stopping lambda");
  fit_cmd->add_option("--tol", fit.tol, "cd convergence tolerance");
  fit_cmd->add_option("--tmax", fit.t_max, "cd sweep cap");
  fit_cmd->add_flag("--center", fit.center, "subtract column means first");
  fit_cmd->add_flag("--standardize", fit.standardize, "center and scale columns first");
  fit_cmd->add_option("--out", fit.out, "output directory");

  TuneArgs tune;
  auto* tune_cmd = app.add_subcommand("tune", "select lambda by extended BIC");
  tune_cmd->add_option("--data", tune.data, "data CSV or JSON")->required();
  tune_cmd->add_option("--family", tune.family, "model family");
  tune_cmd->add_option("--solver", tune.solver, "cd|path candidate source");
  tune_cmd->add_option("--penalty", tune.penalty, "l1|group|auto");
  tune_cmd->add_option("--gamma", tune.gamma, "extended BIC gamma")->check(CLI::Range(0.0, 1.0));
  tune_cmd->add_flag("--refit", tune.refit, "rescore with unregularized refit on the support");
  tune_cmd->add_option("--grid", tune.grid, "grid size for cd");
  tune_cmd->add_option("--lambda-min-ratio", tune.lambda_min_ratio, "grid lower end ratio");
  tune_cmd->add_flag("--center", tune.center, "subtract column means first");
  tune_cmd->add_flag("--standardize", tune.standardize, "center and scale columns first");
  tune_cmd->add_option("--out", tune.out, "output directory");

  DiagnoseArgs diag;
  auto* diag_cmd = app.add_subcommand("diagnose", "population theory constants for a truth");
  diag_cmd->add_option("--truth", diag.truth, "truth JSON")->required();
  diag_cmd->add_option("--mc-samples", diag.mc_samples, "Monte Carlo samples for non-Gaussian");
  diag_cmd->add_option("--seed", diag.seed, "rng seed");
  diag_cmd->add_option("--out", diag.out, "output directory");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "score a fit against ground truth");
  eval_cmd->add_option("--fit", eval.fit, "path.json or estimate.json")->required();
  eval_cmd->add_option("--truth", eval.truth, "truth JSON")->required();
  eval_cmd->add_option("--family", eval.family, "family used for the fit");
  eval_cmd->add_option("--zero-tol", eval.zero_tol, "support threshold");
  eval_cmd->add_option("--out", eval.out, "output directory");

  ExperimentArgs exp;
  auto* exp_cmd = app.add_subcommand("experiment", "run a configured experiment");
  exp_cmd->add_option("--config", exp.config, "experiment config JSON")->required();
  exp_cmd->add_option("--out", exp.out, "output directory");
  exp_cmd->add_option("--threads", exp.threads, "worker cap (SCOREMATCH_THREADS fallback)");

  VerifyArgs verify;
  auto* verify_cmd = app.add_subcommand("verify", "re-check a fit against its data");
  verify_cmd->add_option("--fit", verify.fit, "path.json or estimate.json")->required();
  verify_cmd->add_option("--data", verify.data, "data CSV or JSON")->required();
  verify_cmd->add_option("--family", verify.family, "family used for the fit");
  verify_cmd->add_option("--penalty", verify.penalty, "l1|group|auto");
  verify_cmd->add_option("--tol", verify.tol, "kkt tolerance");
  verify_cmd->add_flag("--center", verify.center, "subtract column means first");
  verify_cmd->add_flag("--standardize", verify.standardize, "center and scale columns first");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*sim_cmd) return cmd_simulate(sim);
    if (*fit_cmd) return cmd_fit(fit);
    if (*tune_cmd) return cmd_tune(tune);
    if (*diag_cmd) return cmd_diagnose(diag);
    if (*eval_cmd) return cmd_eval(eval);
    if (*exp_cmd) return cmd_experiment(exp);
    if (*verify_cmd) return cmd_verify(verify);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace scorematch::cli
