#include "scorematch/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "scorematch/parallel.hpp"
#include "scorematch/tuning.hpp"

namespace scorematch {

EdgeSet support_edges(const ParameterVector& theta, double zero_tol) {
  const auto& layout = *theta.layout();
  EdgeSet edges;
  for (int id : layout.pair_coords())
    if (std::abs(theta.reduced()[id]) > zero_tol) {
      const CoordInfo& ci = layout.coord(id);
      edges.insert({ci.j, ci.k});
    }
  return edges;
}

RocCurve roc_from_edge_sets(const std::vector<EdgeSet>& supports, const Graph& truth,
                            const std::vector<double>& lambdas) {
  if (truth.num_edges() == 0)
    throw std::invalid_argument("roc: truth has no edges so TPR is undefined; use an FPR-only summary");
  if (truth.num_nonedges() == 0)
    throw std::invalid_argument("roc: truth graph is complete so FPR is undefined");
  RocCurve curve;
  const double pos = truth.num_edges();
  const double neg = truth.num_nonedges();
  for (std::size_t i = 0; i < supports.size(); ++i) {
    int tp = 0, fp = 0;
    for (const auto& e : supports[i]) (truth.edges.count(e) ? tp : fp)++;
    curve.points.emplace_back(fp / neg, tp / pos);
    curve.lambdas.push_back(i < lambdas.size() ? lambdas[i]
                                               : std::numeric_limits<double>::quiet_NaN());
  }

  // Trapezoid over FPR-sorted points from (0,0), carrying the final support
  // level out to FPR = 1.
  std::vector<std::pair<double, double>> pts = curve.points;
  pts.emplace_back(0.0, 0.0);
  std::sort(pts.begin(), pts.end());
  const double last_tpr = pts.back().second;
  pts.emplace_back(1.0, last_tpr);
  double auc = 0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    auc += (pts[i + 1].first - pts[i].first) * 0.5 * (pts[i].second + pts[i + 1].second);
  curve.auc = auc;
  return curve;
}

RocCurve roc_points(const SolutionPath& path, const Graph& truth) {
  if (path.layout->m() != truth.m) throw std::invalid_argument("roc_points: dimension mismatch");
  std::vector<EdgeSet> supports;
  std::vector<double> lambdas;
  supports.push_back({});  // empty support above lambda_max
  lambdas.push_back(path.lambda_max());
  for (std::size_t r = path.num_segments(); r-- > 0;) {
    EdgeSet edges;
    for (int id : path.active_sets[r]) {
      const CoordInfo& ci = path.layout->coord(id);
      edges.insert({ci.j, ci.k});
    }
    if (!supports.empty() && edges == supports.back()) continue;
    supports.push_back(std::move(edges));
    lambdas.push_back(path.knots[r]);
  }
  return roc_from_edge_sets(supports, truth, lambdas);
}

RocCurve roc_from_estimates(const std::vector<Estimate>& grid, const Graph& truth) {
  std::vector<Estimate> ordered = grid;
  std::sort(ordered.begin(), ordered.end(),
            [](const Estimate& a, const Estimate& b) { return a.lambda > b.lambda; });
  std::vector<EdgeSet> supports;
  std::vector<double> lambdas;
  for (const auto& est : ordered) {
    EdgeSet edges = support_edges(est.theta);
    if (!supports.empty() && edges == supports.back()) continue;
    supports.push_back(std::move(edges));
    lambdas.push_back(est.lambda);
  }
  return roc_from_edge_sets(supports, truth, lambdas);
}

ExperimentDesign design_from_name(const std::string& name) {
  if (name == "vary_m_chain") return ExperimentDesign::VaryMChain;
  if (name == "vary_m_lattice") return ExperimentDesign::VaryMLattice;
  if (name == "vary_d_star") return ExperimentDesign::VaryDStar;
  if (name == "vary_complexity_chain") return ExperimentDesign::VaryComplexityChain;
  if (name == "nonneg_chain_scaling") return ExperimentDesign::NonnegChainScaling;
  throw std::invalid_argument("unknown experiment design: " + name);
}

const char* design_name(ExperimentDesign design) {
  switch (design) {
    case ExperimentDesign::VaryMChain: return "vary_m_chain";
    case ExperimentDesign::VaryMLattice: return "vary_m_lattice";
    case ExperimentDesign::VaryDStar: return "vary_d_star";
    case ExperimentDesign::VaryComplexityChain: return "vary_complexity_chain";
    case ExperimentDesign::NonnegChainScaling: return "nonneg_chain_scaling";
  }
  return "?";
}

namespace {

struct DesignPoint {
  TruthSpec truth;
  int m = 0;
  double rate_base = 1.0;    // n is rescaled by 1/rate_base for alignment plots
  double lambda_base = 1.0;  // lambda = lambda_const * sqrt(lambda_base / n)
  bool nonneg = false;
};

DesignPoint make_point(const ExperimentConfig& config, double grid_value) {
  DesignPoint pt;
  switch (config.design) {
    case ExperimentDesign::VaryMChain: {
      pt.m = static_cast<int>(grid_value);
      pt.truth = truth_chain(pt.m);
      pt.rate_base = std::log(static_cast<double>(pt.m));
      pt.lambda_base = pt.rate_base;
      break;
    }
    case ExperimentDesign::VaryMLattice: {
      pt.m = static_cast<int>(grid_value);
      const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(pt.m))));
      if (side * side != pt.m)
        throw std::invalid_argument("vary_m_lattice: m must be a perfect square");
      pt.truth = truth_lattice(side);
      pt.rate_base = std::log(static_cast<double>(pt.m));
      pt.lambda_base = pt.rate_base;
      break;
    }
    case ExperimentDesign::VaryDStar: {
      const int d = static_cast<int>(grid_value);
      pt.m = config.star_m;
      pt.truth = config.star_kappa_param ? truth_star_kappa(pt.m, d) : truth_star_sigma(pt.m, d);
      // the sample-size axis rescales by d^2; lambda keeps the
      // sqrt(log m / n) rate with m fixed
      pt.rate_base = static_cast<double>(d) * d;
      pt.lambda_base = std::log(static_cast<double>(pt.m));
      break;
    }
    case ExperimentDesign::VaryComplexityChain: {
      pt.m = config.chain_m;
      pt.truth = truth_chain(pt.m, grid_value);
      pt.rate_base = 1.0;
      pt.lambda_base = std::log(static_cast<double>(pt.m));
      break;
    }
    case ExperimentDesign::NonnegChainScaling: {
      pt.m = static_cast<int>(grid_value);
      TruthSpec chain = truth_chain(pt.m);
      chain.family = FamilySpec::make(Family::TruncatedGaussianCentered);
      pt.truth = std::move(chain);
      pt.rate_base = std::pow(std::log(static_cast<double>(pt.m)), config.rescale_exponent);
      pt.lambda_base = pt.rate_base;
      pt.nonneg = true;
      break;
    }
  }
  return pt;
}

}  // namespace

RecoveryTable recovery_probability(const ExperimentConfig& config) {
  if (config.trials < 1) throw std::invalid_argument("recovery_probability: trials must be >= 1");
  if (config.grid.empty()) throw std::invalid_argument("recovery_probability: empty grid");
  if (config.n_list.empty() && config.r_list.empty())
    throw std::invalid_argument("recovery_probability: need n_list or r_list");

  RecoveryTable table{config.design, {}};
  for (double grid_value : config.grid) {
    const DesignPoint pt = make_point(config, grid_value);
    const ParameterVector truth_pv =
        ParameterVector::from_matrix(ParamLayout::pairwise(pt.m), pt.truth.interaction);

    std::vector<int> ns = config.n_list;
    for (double r : config.r_list) ns.push_back(static_cast<int>(std::lround(r * pt.rate_base)));
    std::sort(ns.begin(), ns.end());
    ns.erase(std::unique(ns.begin(), ns.end()), ns.end());

    for (std::size_t ni = 0; ni < ns.size(); ++ni) {
      const int n = ns[ni];
      if (n < 2) throw std::invalid_argument("recovery_probability: n must be >= 2");
      const double lam =
          config.lambda_const * std::sqrt(pt.lambda_base / static_cast<double>(n));
      std::vector<int> results(config.trials, 0);
      std::vector<int> errors(config.trials, 0);
      // Streams are keyed by (grid position, trial) so that matched grid
      // positions across curves share random numbers; curves then differ by
      // the design point, not by sampling noise, which sharpens alignment
      // comparisons without biasing any single curve.
      const std::uint64_t base_stream = ni * static_cast<std::uint64_t>(config.trials);
      parallel_for(config.trials, config.threads, [&](std::size_t t) {
        Rng rng(config.seed, base_stream + t);
        try {
          const DataMatrix data = sample_from_truth(pt.truth, n, rng);
          ParameterVector est;
          if (pt.nonneg) {
            const QuadraticLoss loss = build_nonneg_gaussian_loss(data);
            est = solve_cd(loss, PenaltySpec::l1_offdiagonal(*loss.layout()), lam).theta;
          } else {
            est = solve_cd_gaussian(sample_covariance(data), lam).theta;
          }
          results[t] = signed_support_match(est, truth_pv) ? 1 : 0;
        } catch (const std::exception&) {
          errors[t] = 1;
        }
      });
      RecoveryRow row;
      row.grid_value = grid_value;
      row.n = n;
      row.rescaled_n = n / pt.rate_base;
      row.trials = config.trials;
      row.failures = 0;
      int ok = 0;
      for (int t = 0; t < config.trials; ++t) {
        ok += results[t];
        row.failures += errors[t];
      }
      row.success = static_cast<double>(ok) / config.trials;
      table.rows.push_back(row);
    }
  }
  return table;
}

double rescale_alignment(const RecoveryTable& table,
                         const std::function<double(double, int)>& axis) {
  // Group rows into per-grid-value curves on the transformed axis.
  std::vector<double> grid_values;
  for (const auto& row : table.rows)
    if (std::find(grid_values.begin(), grid_values.end(), row.grid_value) == grid_values.end())
      grid_values.push_back(row.grid_value);
  if (grid_values.size() < 2)
    throw std::invalid_argument("rescale_alignment: need at least two curves");

  using Curve = std::vector<std::pair<double, double>>;
  std::vector<Curve> curves;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (double gv : grid_values) {
    Curve c;
    for (const auto& row : table.rows)
      if (row.grid_value == gv) c.emplace_back(axis(gv, row.n), row.success);
    std::sort(c.begin(), c.end());
    if (c.size() < 2) throw std::invalid_argument("rescale_alignment: need >= 2 points per curve");
    lo = std::max(lo, c.front().first);
    hi = std::min(hi, c.back().first);
    curves.push_back(std::move(c));
  }
  if (!(lo < hi)) throw std::invalid_argument("rescale_alignment: curves do not overlap on the axis");

  auto interp = [](const Curve& c, double x) {
    auto it = std::lower_bound(c.begin(), c.end(), std::make_pair(x, -1.0));
    if (it == c.begin()) return it->second;
    if (it == c.end()) return (c.end() - 1)->second;
    const auto& [x1, y1] = *(it - 1);
    const auto& [x2, y2] = *it;
    if (x2 == x1) return y2;
    return y1 + (y2 - y1) * (x - x1) / (x2 - x1);
  };

  // Evaluate on the union of in-range sample positions.
  std::vector<double> xs;
  for (const auto& c : curves)
    for (const auto& [x, y] : c)
      if (x >= lo && x <= hi) xs.push_back(x);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  double dist = 0;
  for (double x : xs)
    for (std::size_t a = 0; a < curves.size(); ++a)
      for (std::size_t b = a + 1; b < curves.size(); ++b)
        dist = std::max(dist, std::abs(interp(curves[a], x) - interp(curves[b], x)));
  return dist;
}

std::vector<FamilyAuc> auc_comparison(const DataMatrix& data, const Graph& truth,
                                      const std::vector<Family>& families, int grid_points) {
  if (grid_points < 2) throw std::invalid_argument("auc_comparison: need at least two grid points");
  std::vector<FamilyAuc> out;
  for (Family fam : families) {
    const FamilySpec spec = FamilySpec::make(fam);
    if (spec.domain == Domain::NonnegativeOrthant && data.values.minCoeff() < 0.0)
      throw std::invalid_argument(std::string("auc_comparison: negative data for family ") +
                                  family_name(fam));
    const QuadraticLoss loss = build_loss(spec, data);
    FamilyAuc fa;
    fa.family = fam;
    if (fam == Family::NormalConditionals) {
      const PenaltySpec penalty = PenaltySpec::group_pairs(*loss.layout());
      const double lmax = lambda_max(loss, penalty);
      const auto grid = default_lambda_grid(lmax, grid_points);
      const auto fits = fit_lambda_grid(loss, penalty, grid);
      fa.curve = roc_from_estimates(fits, truth);
    } else {
      const PenaltySpec penalty = PenaltySpec::l1_offdiagonal(*loss.layout());
      const SolutionPath path = solve_path(loss, penalty);
      fa.curve = roc_points(path, truth);
    }
    fa.auc = fa.curve.auc;
    out.push_back(std::move(fa));
  }
  return out;
}

}  // namespace scorematch
