#pragma once

#include <functional>
#include <set>
#include <vector>

#include "scorematch/diagnostics.hpp"
#include "scorematch/graph.hpp"
#include "scorematch/simulate.hpp"
#include "scorematch/solvers.hpp"

namespace scorematch {

using EdgeSet = std::set<std::pair<int, int>>;

struct RocCurve {
  std::vector<double> lambdas;  // one per point, decreasing (NaN for synthetic sweeps)
  std::vector<std::pair<double, double>> points;  // (fpr, tpr), ordered by decreasing lambda
  double auc = 0.0;
};

// ROC over the supports of a sweep from sparse to dense.  The trapezoid runs
// over the swept range; when the sweep stops early the last TPR is carried to
// FPR = 1.
RocCurve roc_from_edge_sets(const std::vector<EdgeSet>& supports, const Graph& truth,
                            const std::vector<double>& lambdas = {});

// Segment-exact supports of an l1 path.
RocCurve roc_points(const SolutionPath& path, const Graph& truth);

// Grid mode for families without piecewise-linear paths.
RocCurve roc_from_estimates(const std::vector<Estimate>& grid, const Graph& truth);

EdgeSet support_edges(const ParameterVector& theta, double zero_tol = 0.0);

enum class ExperimentDesign {
  VaryMChain,
  VaryMLattice,
  VaryDStar,
  VaryComplexityChain,
  NonnegChainScaling,
};

ExperimentDesign design_from_name(const std::string& name);
const char* design_name(ExperimentDesign design);

struct ExperimentConfig {
  ExperimentDesign design = ExperimentDesign::VaryMChain;
  std::vector<double> grid;  // m (chain/lattice), d (star), or edge weight (complexity)
  // Sample sizes: either explicit per-n values or ratios r with n = round(r *
  // rate_base(grid point)); rate_base is log m, d^2, or (log m)^a.
  std::vector<int> n_list;
  std::vector<double> r_list;
  int trials = 50;
  double lambda_const = 1.0;     // lambda = lambda_const * rate(n, m, d)
  double rescale_exponent = 8.0; // exponent a for the non-negative design
  int star_m = 200;
  int chain_m = 64;              // complexity design
  bool star_kappa_param = true;  // kappa_jk = 2.5/d edges (vs sigma-side weights)
  std::uint64_t seed = 1;
  int threads = 0;
};

struct RecoveryRow {
  double grid_value = 0;
  int n = 0;
  double rescaled_n = 0;
  double success = 0;  // fraction of trials with exact signed support recovery
  int trials = 0;
  int failures = 0;  // trials that errored (recorded, not raised)
};

struct RecoveryTable {
  ExperimentDesign design;
  std::vector<RecoveryRow> rows;
};

RecoveryTable recovery_probability(const ExperimentConfig& config);

// Max pairwise sup-distance between per-grid-value success curves after
// mapping n through `axis(grid_value, n)`, interpolated over the common range.
double rescale_alignment(const RecoveryTable& table,
                         const std::function<double(double, int)>& axis);

struct FamilyAuc {
  Family family = Family::GaussianCentered;
  double auc = 0;
  RocCurve curve;
};

// Fit each family on the same data and report ROC/AUC against the truth.
// Families must be applicable to the data domain.
std::vector<FamilyAuc> auc_comparison(const DataMatrix& data, const Graph& truth,
                                      const std::vector<Family>& families, int grid_points = 40);

}  // namespace scorematch
