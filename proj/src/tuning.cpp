#include "scorematch/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "scorematch/errors.hpp"

namespace scorematch {

int support_size(const ParameterVector& theta, double zero_tol) {
  const auto& layout = *theta.layout();
  const int m = layout.m();
  int count = 0;
  for (int j = 0; j < m; ++j)
    for (int k = j + 1; k < m; ++k) {
      for (int a = 0; a < layout.num_sets(); ++a)
        if (std::abs(theta.reduced()[layout.pair_id(a, j, k)]) > zero_tol) {
          ++count;
          break;
        }
    }
  return count;
}

double ebic_score(const Estimate& estimate, const QuadraticLoss& loss, int n, int m, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("ebic_score: gamma must be in [0,1]");
  if (n < 1 || m < 1) throw std::invalid_argument("ebic_score: n and m must be positive");
  // The fit term carries the sample size so that it competes with the
  // |E| log n complexity term, as in likelihood-based BIC; for the Gaussian
  // family this reads n * (-2 tr(K) + tr(KKW)) + |E| log n + 4 |E| gamma log m.
  const double fit = loss.value_reduced(estimate.theta.reduced()) - loss.constant();
  const int edges = support_size(estimate.theta);
  return 2.0 * n * fit + edges * std::log(static_cast<double>(n)) +
         4.0 * edges * gamma * std::log(static_cast<double>(m));
}

ParameterVector refit_restricted(const QuadraticLoss& loss, const PenaltySpec& penalty,
                                 const std::vector<int>& support) {
  const auto& layout = *loss.layout();
  std::vector<int> coords = penalty.unpenalized_coords(layout);
  for (int id : support) {
    if (id < 0 || id >= layout.num_coords())
      throw std::invalid_argument("refit_restricted: coordinate id out of range");
    coords.push_back(id);
  }
  std::sort(coords.begin(), coords.end());
  coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
  return ParameterVector(loss.layout(), solve_restricted_system(loss, coords));
}

namespace {

std::vector<int> support_coords(const ParameterVector& theta, const PenaltySpec& penalty) {
  std::vector<int> out;
  for (const auto& grp : penalty.groups)
    for (int id : grp.coords)
      if (theta.reduced()[id] != 0.0) out.push_back(id);
  return out;
}

EbicSelection select_impl(std::vector<Estimate> candidates, const QuadraticLoss& loss,
                          const PenaltySpec& penalty, int n, const EbicConfig& config) {
  if (candidates.empty()) throw std::invalid_argument("select_lambda_ebic: no candidates");
  if (!(config.gamma >= 0.0 && config.gamma <= 1.0))
    throw std::invalid_argument("select_lambda_ebic: gamma must be in [0,1]");
  std::sort(candidates.begin(), candidates.end(),
            [](const Estimate& a, const Estimate& b) { return a.lambda > b.lambda; });

  EbicSelection sel;
  const int m = loss.m();
  bool have_best = false;
  double best_score = 0;
  for (const auto& cand : candidates) {
    EbicEntry entry;
    entry.lambda = cand.lambda;
    entry.support = support_size(cand.theta);
    Estimate scored = cand;
    if (config.refit) {
      try {
        scored.theta = refit_restricted(loss, penalty, support_coords(cand.theta, penalty));
      } catch (const RankError&) {
        entry.refit_ok = false;  // fall back to the unrefitted estimate
      }
    }
    entry.score = ebic_score(scored, loss, n, m, config.gamma);
    sel.table.push_back(entry);
    if (!have_best || entry.score < best_score) {  // ties keep the larger lambda
      have_best = true;
      best_score = entry.score;
      sel.lambda = cand.lambda;
      sel.estimate = scored;
    }
  }
  return sel;
}

}  // namespace

EbicSelection select_lambda_ebic(const std::vector<Estimate>& candidates, const QuadraticLoss& loss,
                                 const PenaltySpec& penalty, int n, const EbicConfig& config) {
  return select_impl(candidates, loss, penalty, n, config);
}

EbicSelection select_lambda_ebic(const SolutionPath& path, const QuadraticLoss& loss,
                                 const PenaltySpec& penalty, int n, const EbicConfig& config) {
  std::vector<Estimate> candidates;
  candidates.reserve(path.knots.size());
  for (std::size_t r = 0; r < path.knots.size(); ++r) {
    Estimate est;
    est.theta = ParameterVector(path.layout, path.coefficients[r]);
    est.lambda = path.knots[r];
    est.kkt_residual = kkt_residual_reduced(loss, penalty, path.coefficients[r], path.knots[r]);
    candidates.push_back(std::move(est));
  }
  return select_impl(std::move(candidates), loss, penalty, n, config);
}

std::vector<double> default_lambda_grid(double lambda_max_value, int points, double min_ratio) {
  if (points < 1) throw std::invalid_argument("default_lambda_grid: need at least one point");
  if (!(min_ratio > 0 && min_ratio <= 1)) throw std::invalid_argument("default_lambda_grid: bad ratio");
  std::vector<double> grid;
  if (lambda_max_value <= 0) return {0.0};
  if (points == 1) return {lambda_max_value};
  grid.reserve(points);
  const double lo = std::log(lambda_max_value * min_ratio);
  const double hi = std::log(lambda_max_value);
  for (int i = 0; i < points; ++i)
    grid.push_back(std::exp(hi + (lo - hi) * i / (points - 1)));
  return grid;  // descending
}

std::vector<Estimate> fit_lambda_grid(const QuadraticLoss& loss, const PenaltySpec& penalty,
                                      const std::vector<double>& lambdas, const CdOptions& opts) {
  std::vector<double> order = lambdas;
  std::sort(order.begin(), order.end(), std::greater<>());
  std::vector<Estimate> out;
  out.reserve(order.size());
  CdOptions local = opts;
  for (double lam : order) {
    Estimate est = penalty.mode == PenaltySpec::Mode::Group ? solve_group_cd(loss, penalty, lam, local)
                                                            : solve_cd(loss, penalty, lam, local);
    local.warm_start = est.theta.reduced();
    out.push_back(std::move(est));
  }
  return out;
}

}  // namespace scorematch
