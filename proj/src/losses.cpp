#include "scorematch/losses.hpp"

#include <cmath>
#include <stdexcept>

#include "scorematch/errors.hpp"

namespace scorematch {

FamilySpec FamilySpec::make(Family kind) { return FamilySpec{kind, family_domain(kind)}; }

Domain family_domain(Family kind) {
  switch (kind) {
    case Family::TruncatedGaussianCentered:
    case Family::TruncatedGaussianLocation:
      return Domain::NonnegativeOrthant;
    default:
      return Domain::RealLine;
  }
}

const char* family_name(Family kind) {
  switch (kind) {
    case Family::GaussianCentered: return "gaussian";
    case Family::TruncatedGaussianCentered: return "truncated";
    case Family::TruncatedGaussianLocation: return "truncated-location";
    case Family::NormalConditionals: return "normal-conditionals";
  }
  return "?";
}

Family family_from_name(const std::string& name) {
  if (name == "gaussian") return Family::GaussianCentered;
  if (name == "truncated") return Family::TruncatedGaussianCentered;
  if (name == "truncated-location") return Family::TruncatedGaussianLocation;
  if (name == "normal-conditionals") return Family::NormalConditionals;
  throw std::invalid_argument("unknown family: " + name);
}

void DataMatrix::validate(bool require_nonneg) const {
  if (n() < 1) throw DataError("data matrix needs at least one row");
  if (m() < 2) throw DataError("data matrix needs at least two variables");
  if (!values.allFinite()) throw DataError("data matrix has non-finite entries");
  if (require_nonneg && values.minCoeff() < 0.0)
    throw DataError("data matrix has negative entries but the family requires x >= 0");
}

namespace {

void require_symmetric(const Eigen::MatrixXd& w, const char* who) {
  if (w.rows() != w.cols()) throw std::invalid_argument(std::string(who) + ": matrix must be square");
  const double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
  if ((w - w.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument(std::string(who) + ": matrix must be symmetric");
}

QuadraticLoss gaussian_like(const Eigen::MatrixXd& w) {
  const int m = static_cast<int>(w.rows());
  auto layout = ParamLayout::pairwise(m);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(layout->stacked_dim());
  for (int j = 0; j < m; ++j) g[j * m + j] = 1.0;  // vec of the identity
  return QuadraticLoss(layout, {w}, std::move(g), 0.0);
}

}  // namespace

Eigen::MatrixXd sample_covariance(const DataMatrix& x) {
  x.validate();
  const int n = x.n();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(x.m(), x.m());
  w.selfadjointView<Eigen::Lower>().rankUpdate(x.values.transpose(), 1.0 / n);
  w.triangularView<Eigen::StrictlyUpper>() = w.transpose();
  return w;
}

QuadraticLoss build_gaussian_loss(const Eigen::MatrixXd& w) {
  require_symmetric(w, "build_gaussian_loss");
  return gaussian_like(w);
}

QuadraticLoss population_gaussian_loss(const Eigen::MatrixXd& sigma) {
  require_symmetric(sigma, "population_gaussian_loss");
  return gaussian_like(sigma);
}

QuadraticLoss build_nonneg_gaussian_loss(const DataMatrix& x) {
  x.validate(/*require_nonneg=*/true);
  const int n = x.n();
  const int m = x.m();
  auto layout = ParamLayout::pairwise(m);
  const Eigen::MatrixXd w = sample_covariance(x);

  std::vector<Eigen::MatrixXd> blocks(m);
  for (int j = 0; j < m; ++j) {
    Eigen::MatrixXd blk = Eigen::MatrixXd::Zero(m, m);
    // (1/n) sum_i x_ij^2 x_i x_i' as a weighted rank update
    Eigen::MatrixXd scaled = x.values.transpose();  // m x n
    for (int i = 0; i < n; ++i) scaled.col(i) *= x.values(i, j);
    blk.selfadjointView<Eigen::Lower>().rankUpdate(scaled, 1.0 / n);
    blk.triangularView<Eigen::StrictlyUpper>() = blk.transpose();
    blocks[j] = std::move(blk);
  }

  Eigen::VectorXd g(layout->stacked_dim());
  for (int j = 0; j < m; ++j) {
    g.segment(j * m, m) = 2.0 * w.col(j);
    g[j * m + j] += w(j, j);
  }
  return QuadraticLoss(layout, std::move(blocks), std::move(g), 0.0);
}

QuadraticLoss build_general_pairwise_loss(const PairwiseStatSpec& spec, const DataMatrix& x,
                                          Domain domain) {
  const bool nonneg = domain == Domain::NonnegativeOrthant;
  x.validate(nonneg);
  if (!spec.h || !spec.hh) throw std::invalid_argument("PairwiseStatSpec: h and hh callbacks required");
  const int n = x.n();
  const int m = x.m();
  auto layout = ParamLayout::general(m, spec.num_sets, spec.diag_fixed_zero, spec.num_singleton_sets);
  const int p = layout->block_size();

  std::vector<Eigen::MatrixXd> blocks(m, Eigen::MatrixXd::Zero(p, p));
  Eigen::VectorXd g = Eigen::VectorXd::Zero(layout->stacked_dim());
  double c = 0;
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd xi = x.values.row(i).transpose();
    for (int j = 0; j < m; ++j) {
      const Eigen::VectorXd hj = spec.h(xi, j);
      const Eigen::VectorXd hjj = spec.hh(xi, j);
      if (hj.size() != p || hjj.size() != p)
        throw std::invalid_argument("PairwiseStatSpec: callback dimension does not match layout");
      const double bj = spec.db ? spec.db(xi, j) : 0.0;
      const double bjj = spec.d2b ? spec.d2b(xi, j) : 0.0;
      if (nonneg) {
        const double xj = xi[j];
        blocks[j].selfadjointView<Eigen::Lower>().rankUpdate(hj, xj * xj);
        g.segment(j * p, p) -= 2.0 * xj * hj + xj * xj * hjj + xj * xj * bj * hj;
        c += 2.0 * xj * bj + xj * xj * bjj + 0.5 * xj * xj * bj * bj;
      } else {
        blocks[j].selfadjointView<Eigen::Lower>().rankUpdate(hj, 1.0);
        g.segment(j * p, p) -= hjj + bj * hj;
        c += bjj + 0.5 * bj * bj;
      }
    }
  }
  for (auto& blk : blocks) {
    blk /= n;
    blk.triangularView<Eigen::StrictlyUpper>() = blk.transpose();
  }
  g /= n;
  c /= n;
  return QuadraticLoss(layout, std::move(blocks), std::move(g), c);
}

QuadraticLoss build_truncated_location_loss(const DataMatrix& x) {
  const int m = x.m();
  PairwiseStatSpec spec;
  spec.num_sets = 1;
  spec.diag_fixed_zero = {false};
  spec.num_singleton_sets = 1;
  // log q = -x'Kx/2 + eta'x:  d_j log q = theta_j' h_j with h_j = (-x; 1).
  spec.h = [m](const Eigen::VectorXd& xi, int j) {
    (void)j;
    Eigen::VectorXd v(m + 1);
    v.head(m) = -xi;
    v[m] = 1.0;
    return v;
  };
  spec.hh = [m](const Eigen::VectorXd& xi, int j) {
    (void)xi;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(m + 1);
    v[j] = -1.0;
    return v;
  };
  QuadraticLoss loss = build_general_pairwise_loss(spec, x, Domain::NonnegativeOrthant);
  // Re-wrap with the named location layout.
  return QuadraticLoss(ParamLayout::pairwise_with_location(m), loss.blocks(), loss.g(),
                       loss.constant());
}

QuadraticLoss build_normal_conditionals_loss(const DataMatrix& x) {
  x.validate();
  const int n = x.n();
  const int m = x.m();
  auto layout = ParamLayout::normal_conditionals(m);
  const int p = layout->block_size();  // 2m + 1

  std::vector<Eigen::MatrixXd> blocks(m, Eigen::MatrixXd::Zero(p, p));
  Eigen::VectorXd g = Eigen::VectorXd::Zero(layout->stacked_dim());
  // d_j log q = col_j(B)' (2x) + col_j(B2)' (4 x_j x^2) + b_j, so block j sees
  // h_j = (2x; 4 x_j x^2; 1) and hh_j = (2 e_j; 4 x^2 + 8 x_j^2 e_j; 0); the
  // B2 diagonal slot is structurally zero and never enters the objective.
  Eigen::VectorXd hj(p), hjj(p);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd xi = x.values.row(i).transpose();
    const Eigen::VectorXd xi2 = xi.cwiseProduct(xi);
    for (int j = 0; j < m; ++j) {
      hj.segment(0, m) = 2.0 * xi;
      hj.segment(m, m) = 4.0 * xi[j] * xi2;
      hj[2 * m] = 1.0;
      hjj.setZero();
      hjj[j] = 2.0;
      hjj.segment(m, m) = 4.0 * xi2;
      hjj[m + j] += 8.0 * xi2[j];
      blocks[j].selfadjointView<Eigen::Lower>().rankUpdate(hj, 1.0);
      g.segment(j * p, p) -= hjj;
    }
  }
  for (auto& blk : blocks) {
    blk /= n;
    blk.triangularView<Eigen::StrictlyUpper>() = blk.transpose();
  }
  g /= n;
  return QuadraticLoss(layout, std::move(blocks), std::move(g), 0.0);
}

QuadraticLoss build_loss(const FamilySpec& family, const DataMatrix& x) {
  if ((family.kind == Family::TruncatedGaussianCentered ||
       family.kind == Family::TruncatedGaussianLocation) &&
      family.domain != Domain::NonnegativeOrthant)
    throw std::invalid_argument("truncated families require the non-negative orthant domain");
  switch (family.kind) {
    case Family::GaussianCentered:
      return build_gaussian_loss(sample_covariance(x));
    case Family::TruncatedGaussianCentered:
      return build_nonneg_gaussian_loss(x);
    case Family::TruncatedGaussianLocation:
      return build_truncated_location_loss(x);
    case Family::NormalConditionals:
      return build_normal_conditionals_loss(x);
  }
  throw std::logic_error("unreachable");
}

}  // namespace scorematch
