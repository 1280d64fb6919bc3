#include "scorematch/diagnostics.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "scorematch/errors.hpp"

namespace scorematch {

Eigen::MatrixXd meinshausen_sigma(double rho) {
  if (!(rho >= 0.0 && rho < 1.0 / std::sqrt(2.0)))
    throw std::invalid_argument("meinshausen_sigma: rho must lie in [0, 1/sqrt(2))");
  Eigen::MatrixXd s = Eigen::MatrixXd::Constant(4, 4, rho);
  s.diagonal().setOnes();
  s(1, 2) = s(2, 1) = 0.0;
  s(0, 3) = s(3, 0) = 2.0 * rho * rho;
  return s;
}

namespace {

// Per-block split of the support: S_j collects within-block indices of the
// support coordinates that live in block j.
std::vector<std::vector<int>> per_block_support(const ParamLayout& layout,
                                                const std::vector<int>& support) {
  std::vector<std::vector<int>> s(layout.m());
  for (int id : support) {
    const CoordInfo& ci = layout.coord(id);
    for (int l = 0; l < ci.n_locs; ++l) s[ci.locs[l].first].push_back(ci.locs[l].second);
  }
  for (auto& v : s) std::sort(v.begin(), v.end());
  return s;
}

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& a, const std::vector<int>& rows,
                          const std::vector<int>& cols) {
  Eigen::MatrixXd out(rows.size(), cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c) out(r, c) = a(rows[r], cols[c]);
  return out;
}

Eigen::MatrixXd inverse_or_throw(const Eigen::MatrixXd& a, const char* what) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible()) throw RankError(std::string(what) + ": restricted block is singular");
  return lu.inverse();
}

}  // namespace

double irrepresentability_alpha(const QuadraticLoss& gamma_star, const std::vector<int>& support) {
  const auto& layout = *gamma_star.layout();
  const auto s = per_block_support(layout, support);
  const int p = layout.block_size();
  double norm = 0.0;
  for (int j = 0; j < layout.m(); ++j) {
    if (s[j].empty()) continue;
    std::vector<int> sc;
    for (int r = 0; r < p; ++r)
      if (!std::binary_search(s[j].begin(), s[j].end(), r)) sc.push_back(r);
    const Eigen::MatrixXd inv = inverse_or_throw(submatrix(gamma_star.block(j), s[j], s[j]),
                                                 "irrepresentability_alpha");
    if (sc.empty()) continue;
    const Eigen::MatrixXd prod = submatrix(gamma_star.block(j), sc, s[j]) * inv;
    norm = std::max(norm, prod.cwiseAbs().rowwise().sum().maxCoeff());
  }
  return 1.0 - norm;
}

std::vector<int> support_coords_offdiag(const QuadraticLoss& gamma_star, const Eigen::MatrixXd& theta,
                                        double zero_tol) {
  const auto& layout = *gamma_star.layout();
  std::vector<int> s;
  for (int j = 0; j < layout.m(); ++j)
    for (int k = j + 1; k < layout.m(); ++k)
      if (std::abs(theta(j, k)) > zero_tol) s.push_back(layout.pair_id(0, j, k));
  return s;
}

std::vector<int> support_coords_with_diag(const QuadraticLoss& gamma_star, const Eigen::MatrixXd& theta,
                                          double zero_tol) {
  const auto& layout = *gamma_star.layout();
  std::vector<int> s = support_coords_offdiag(gamma_star, theta, zero_tol);
  for (int j = 0; j < layout.m(); ++j) s.push_back(layout.diag_id(0, j));
  std::sort(s.begin(), s.end());
  return s;
}

double c_gamma_star(const QuadraticLoss& gamma_star, const std::vector<int>& support) {
  const auto& layout = *gamma_star.layout();
  const auto s = per_block_support(layout, support);
  double norm = 0.0;
  for (int j = 0; j < layout.m(); ++j) {
    if (s[j].empty()) continue;
    const Eigen::MatrixXd inv =
        inverse_or_throw(submatrix(gamma_star.block(j), s[j], s[j]), "c_gamma_star");
    norm = std::max(norm, inv.cwiseAbs().rowwise().sum().maxCoeff());
  }
  return norm;
}

TheoryReport theory_constants(const QuadraticLoss& gamma_star, const Eigen::MatrixXd& theta_star,
                              const std::vector<int>& support) {
  TheoryReport report;
  report.support = support;
  report.alpha = irrepresentability_alpha(gamma_star, support);
  {
    // Variant with the diagonal coordinates adjoined to S.
    std::vector<int> with_diag = support;
    const auto& layout = *gamma_star.layout();
    if (!layout.diag_fixed_zero(0))
      for (int j = 0; j < layout.m(); ++j) with_diag.push_back(layout.diag_id(0, j));
    std::sort(with_diag.begin(), with_diag.end());
    with_diag.erase(std::unique(with_diag.begin(), with_diag.end()), with_diag.end());
    report.alpha_with_diag = irrepresentability_alpha(gamma_star, with_diag);
  }
  report.c_gamma_star = c_gamma_star(gamma_star, support);
  report.c_theta_star = theta_star.cwiseAbs().rowwise().sum().maxCoeff();
  return report;
}

TheoryReport theory_constants(const TruthSpec& truth) {
  if (truth.family.kind != Family::GaussianCentered)
    throw std::invalid_argument("theory_constants(TruthSpec): exact form needs the Gaussian family");
  const QuadraticLoss gamma = population_gaussian_loss(truth.sigma);
  TheoryReport report =
      theory_constants(gamma, truth.interaction, support_coords_offdiag(gamma, truth.interaction));
  if (report.alpha > 0)
    report.model_complexity =
        4.0 / report.alpha * report.c_gamma_star * truth.sigma.diagonal().maxCoeff();
  return report;
}

PopulationGamma population_gamma(const FamilySpec& family, const TruthSpec& truth,
                                 std::optional<int> mc_samples, Rng rng) {
  PopulationGamma out;
  if (family.kind == Family::GaussianCentered) {
    out.loss = population_gaussian_loss(truth.sigma);
    return out;
  }
  if (!mc_samples || *mc_samples < 2)
    throw std::invalid_argument("population_gamma: mc_samples required for non-Gaussian families");
  const DataMatrix data = sample_from_truth(truth, *mc_samples, rng);
  out.loss = build_loss(family, data);

  // Entrywise standard errors of the block averages.
  const int n = data.n();
  const int m = data.m();
  const int p = out.loss.block_size();
  std::vector<Eigen::MatrixXd> sumsq(m, Eigen::MatrixXd::Zero(p, p));
  Eigen::VectorXd h(p);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd xi = data.values.row(i).transpose();
    for (int j = 0; j < m; ++j) {
      double weight = 1.0;
      switch (family.kind) {
        case Family::TruncatedGaussianCentered:
          h.resize(m);
          h = -xi;
          weight = xi[j] * xi[j];
          break;
        case Family::TruncatedGaussianLocation:
          h.resize(m + 1);
          h.head(m) = -xi;
          h[m] = 1.0;
          weight = xi[j] * xi[j];
          break;
        case Family::NormalConditionals:
          h.resize(2 * m + 1);
          h.head(m) = 2.0 * xi;
          h.segment(m, m) = 4.0 * xi[j] * xi.cwiseProduct(xi);
          h[2 * m] = 1.0;
          break;
        default:
          throw std::logic_error("unreachable");
      }
      const Eigen::MatrixXd contrib = weight * (h * h.transpose());
      sumsq[j] += contrib.cwiseProduct(contrib);
    }
  }
  out.block_se.resize(m);
  for (int j = 0; j < m; ++j) {
    const Eigen::MatrixXd mean = out.loss.block(j);
    Eigen::MatrixXd var = sumsq[j] / n - mean.cwiseProduct(mean);
    out.block_se[j] = (var.cwiseMax(0.0) / n).cwiseSqrt();
  }
  return out;
}

bool signed_support_match(const ParameterVector& estimate, const ParameterVector& truth,
                          double zero_tol) {
  const auto& layout = *estimate.layout();
  if (!layout.same_shape(*truth.layout()))
    throw std::invalid_argument("signed_support_match: layouts differ");
  for (int id : layout.pair_coords()) {
    const double est = estimate.reduced()[id];
    const double tru = truth.reduced()[id];
    const bool est_on = std::abs(est) > zero_tol;
    const bool tru_on = tru != 0.0;
    if (est_on != tru_on) return false;
    if (tru_on && ((est > 0) != (tru > 0))) return false;
  }
  return true;
}

bool signed_support_match(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& truth,
                          double zero_tol) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols())
    throw std::invalid_argument("signed_support_match: dimension mismatch");
  for (int j = 0; j < estimate.rows(); ++j)
    for (int k = j + 1; k < estimate.cols(); ++k) {
      const bool est_on = std::abs(estimate(j, k)) > zero_tol;
      const bool tru_on = truth(j, k) != 0.0;
      if (est_on != tru_on) return false;
      if (tru_on && ((estimate(j, k) > 0) != (truth(j, k) > 0))) return false;
    }
  return true;
}

}  // namespace scorematch
