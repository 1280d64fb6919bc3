#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "scorematch/errors.hpp"
#include "scorematch/solvers.hpp"

namespace scorematch {

namespace {

// Working state for coordinate descent: reduced coordinates plus the
// per-block products v_j = Gamma_j theta_j, updated in O(block size) per
// coordinate move.
class CdState {
 public:
  CdState(const QuadraticLoss& loss, Eigen::VectorXd u) : loss_(loss), u_(std::move(u)) {
    const auto& layout = *loss.layout();
    const int m = layout.m();
    const int p = layout.block_size();
    const Eigen::VectorXd stacked = layout.expand(u_);
    theta_.resize(m);
    v_.resize(m);
    for (int j = 0; j < m; ++j) {
      theta_[j] = stacked.segment(j * p, p);
      v_[j] = loss.block(j).selfadjointView<Eigen::Lower>() * theta_[j];
    }
  }

  const Eigen::VectorXd& u() const { return u_; }

  double grad(int coord) const {
    const CoordInfo& ci = loss_.layout()->coord(coord);
    const int p = loss_.layout()->block_size();
    double g = 0;
    for (int l = 0; l < ci.n_locs; ++l) {
      const auto [b, r] = ci.locs[l];
      g += v_[b][r] - loss_.g()[b * p + r];
    }
    return g;
  }

  void set(int coord, double value) {
    const double delta = value - u_[coord];
    if (delta == 0.0) return;
    const CoordInfo& ci = loss_.layout()->coord(coord);
    for (int l = 0; l < ci.n_locs; ++l) {
      const auto [b, r] = ci.locs[l];
      theta_[b][r] = value;
      v_[b] += delta * loss_.block(b).col(r);
    }
    u_[coord] = value;
  }

 private:
  const QuadraticLoss& loss_;
  Eigen::VectorXd u_;
  std::vector<Eigen::VectorXd> theta_;
  std::vector<Eigen::VectorXd> v_;
};

Eigen::VectorXd start_point(const QuadraticLoss& loss, const CdOptions& opts) {
  if (opts.warm_start) {
    if (opts.warm_start->size() != loss.layout()->num_coords())
      throw std::invalid_argument("warm start dimension mismatch");
    return *opts.warm_start;
  }
  return Eigen::VectorXd::Zero(loss.layout()->num_coords());
}

void check_cd_args(double lambda, const CdOptions& opts) {
  if (!(lambda >= 0)) throw std::invalid_argument("lambda must be non-negative");
  if (!(opts.tol > 0)) throw std::invalid_argument("tol must be positive");
  if (opts.t_max < 1) throw std::invalid_argument("t_max must be at least 1");
}

// Exact minimizer of 1/2 v'Hv - r'v + beta*||v|| over R^k (k <= 2), via the
// scalar equation sum_i rt_i^2/(d_i t + beta)^2 = 1 in t = ||v||.
Eigen::VectorXd group_block_update(const Eigen::MatrixXd& h, const Eigen::VectorXd& r, double beta) {
  const double rnorm = r.norm();
  if (rnorm <= beta) return Eigen::VectorXd::Zero(r.size());
  if (r.size() == 1) {
    if (h(0, 0) <= 0) throw RankError("group subproblem has zero curvature");
    Eigen::VectorXd v(1);
    v[0] = soft_threshold(r[0], beta) / h(0, 0);
    return v;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  const Eigen::VectorXd d = es.eigenvalues();
  const Eigen::VectorXd rt = es.eigenvectors().transpose() * r;
  auto phi = [&](double t) {
    double s = 0;
    for (int i = 0; i < d.size(); ++i) {
      const double den = d[i] * t + beta;
      s += rt[i] * rt[i] / (den * den);
    }
    return s - 1.0;
  };
  double lo = 0.0;
  double hi = 1.0 + rnorm / std::max(d.maxCoeff(), 1e-300);
  int grow = 0;
  while (phi(hi) > 0) {
    hi *= 4.0;
    if (++grow > 200) throw RankError("group subproblem unbounded (singular curvature block)");
  }
  double t = std::min(hi, (rnorm - beta) / std::max(d.mean(), 1e-300));
  if (!(t > lo && t < hi)) t = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    const double f = phi(t);
    if (std::abs(f) < 1e-14) break;
    if (f > 0)
      lo = t;
    else
      hi = t;
    double fp = 0;
    for (int i = 0; i < d.size(); ++i) {
      const double den = d[i] * t + beta;
      fp += -2.0 * d[i] * rt[i] * rt[i] / (den * den * den);
    }
    double tn = fp < 0 ? t - f / fp : 0.5 * (lo + hi);
    if (!(tn > lo && tn < hi)) tn = 0.5 * (lo + hi);
    if (std::abs(tn - t) < 1e-16 * std::max(1.0, t)) {
      t = tn;
      break;
    }
    t = tn;
  }
  Eigen::VectorXd vt(d.size());
  for (int i = 0; i < d.size(); ++i) vt[i] = t * rt[i] / (d[i] * t + beta);
  return es.eigenvectors() * vt;
}

Estimate run_cd(const QuadraticLoss& loss, const PenaltySpec& penalty, double lambda,
                const CdOptions& opts) {
  check_cd_args(lambda, opts);
  penalty.validate(*loss.layout());
  const auto& layout = *loss.layout();
  const int nc = layout.num_coords();
  const std::vector<int> group_of = penalty.coord_to_group(layout);

  std::vector<double> curv(nc);
  for (int i = 0; i < nc; ++i) curv[i] = loss.curvature(i);
  const double max_diag = loss.max_block_diagonal();
  const double curv_floor = 1e-14 * std::max(max_diag, 1e-300);
  const double kkt_bound = 10.0 * opts.tol * std::max(max_diag, 1.0);

  // Curvature blocks for the multi-coordinate groups.
  std::vector<Eigen::MatrixXd> group_h(penalty.groups.size());
  for (std::size_t gi = 0; gi < penalty.groups.size(); ++gi) {
    const auto& coords = penalty.groups[gi].coords;
    Eigen::MatrixXd h(coords.size(), coords.size());
    for (std::size_t a = 0; a < coords.size(); ++a)
      for (std::size_t b = 0; b <= a; ++b) h(a, b) = h(b, a) = loss.quad_entry(coords[a], coords[b]);
    group_h[gi] = std::move(h);
  }

  CdState state(loss, start_point(loss, opts));

  int iterations = 0;
  bool converged = false;
  for (int t = 1; t <= opts.t_max; ++t) {
    double l1_change = 0;
    // Unpenalized coordinates (diagonals/singletons come first in id order).
    for (int i = 0; i < nc; ++i) {
      if (group_of[i] != -1) continue;
      if (curv[i] <= curv_floor) continue;
      const double gi = state.grad(i);
      const double next = state.u()[i] - gi / curv[i];
      l1_change += std::abs(next - state.u()[i]) * layout.coord(i).n_locs;
      state.set(i, next);
    }
    // Penalized groups.
    for (std::size_t gi = 0; gi < penalty.groups.size(); ++gi) {
      const auto& grp = penalty.groups[gi];
      const double beta = lambda * grp.multiplicity;
      if (grp.coords.size() == 1) {
        const int i = grp.coords[0];
        if (curv[i] <= curv_floor) continue;
        const double gd = state.grad(i);
        const double next = soft_threshold(curv[i] * state.u()[i] - gd, beta) / curv[i];
        l1_change += std::abs(next - state.u()[i]) * layout.coord(i).n_locs;
        state.set(i, next);
      } else {
        const auto& coords = grp.coords;
        Eigen::VectorXd r(coords.size());
        for (std::size_t a = 0; a < coords.size(); ++a) {
          double hu = 0;
          for (std::size_t b = 0; b < coords.size(); ++b)
            hu += group_h[gi](a, b) * state.u()[coords[b]];
          r[a] = hu - state.grad(coords[a]);
        }
        const Eigen::VectorXd v = group_block_update(group_h[gi], r, beta);
        for (std::size_t a = 0; a < coords.size(); ++a) {
          l1_change += std::abs(v[a] - state.u()[coords[a]]) * layout.coord(coords[a]).n_locs;
          state.set(coords[a], v[a]);
        }
      }
    }
    iterations = t;
    if (l1_change <= opts.tol) {
      const double res = kkt_residual_reduced(loss, penalty, state.u(), lambda);
      if (res <= kkt_bound) {
        converged = true;
        break;
      }
      if (l1_change == 0.0) break;  // sweep fixed point; certify via kkt_residual below
    }
  }

  Estimate est;
  est.theta = ParameterVector(loss.layout(), state.u());
  est.lambda = lambda;
  est.kkt_residual = kkt_residual_reduced(loss, penalty, state.u(), lambda);
  est.iterations = iterations;
  est.converged = converged;
  return est;
}

}  // namespace

Eigen::VectorXd solve_restricted_system(const QuadraticLoss& loss, const std::vector<int>& coords) {
  const auto& layout = *loss.layout();
  const int k = static_cast<int>(coords.size());
  Eigen::VectorXd u = Eigen::VectorXd::Zero(layout.num_coords());
  if (k == 0) return u;
  Eigen::MatrixXd q(k, k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b <= a; ++b) q(a, b) = q(b, a) = loss.quad_entry(coords[a], coords[b]);
  const Eigen::VectorXd b_full = loss.b_reduced();
  Eigen::VectorXd rhs(k);
  for (int a = 0; a < k; ++a) rhs[a] = b_full[coords[a]];

  Eigen::LDLT<Eigen::MatrixXd> ldlt(q);
  Eigen::VectorXd sol;
  bool ok = ldlt.info() == Eigen::Success;
  if (ok) {
    sol = ldlt.solve(rhs);
    const double scale = std::max({1.0, q.cwiseAbs().maxCoeff() * sol.cwiseAbs().maxCoeff(),
                                   rhs.cwiseAbs().maxCoeff()});
    ok = (q * sol - rhs).cwiseAbs().maxCoeff() <= 1e-8 * scale;
  }
  if (!ok) {
    // Identify a block to report: the one holding the worst residual row.
    int bad = coords.empty() ? 0 : layout.coord(coords[0]).locs[0].first;
    if (ldlt.info() == Eigen::Success) {
      Eigen::VectorXd resid = (q * ldlt.solve(rhs) - rhs).cwiseAbs();
      int row;
      resid.maxCoeff(&row);
      bad = layout.coord(coords[row]).locs[0].first;
    }
    throw RankError("restricted system is numerically singular (block " + std::to_string(bad + 1) + ")");
  }
  for (int a = 0; a < k; ++a) u[coords[a]] = sol[a];
  return u;
}

double lambda_max(const QuadraticLoss& loss, const PenaltySpec& penalty) {
  penalty.validate(*loss.layout());
  const Eigen::VectorXd u0 = solve_restricted_system(loss, penalty.unpenalized_coords(*loss.layout()));
  const Eigen::VectorXd grad = loss.grad_reduced(u0);
  double lmax = 0;
  for (const auto& grp : penalty.groups) {
    double sq = 0;
    for (int id : grp.coords) sq += grad[id] * grad[id];
    lmax = std::max(lmax, std::sqrt(sq) / grp.multiplicity);
  }
  return lmax;
}

double kkt_residual_reduced(const QuadraticLoss& loss, const PenaltySpec& penalty,
                            const Eigen::VectorXd& u, double lambda) {
  const auto& layout = *loss.layout();
  const Eigen::VectorXd grad = loss.grad_reduced(u);
  const std::vector<int> group_of = penalty.coord_to_group(layout);
  double res = 0;
  for (int i = 0; i < layout.num_coords(); ++i)
    if (group_of[i] == -1) res = std::max(res, std::abs(grad[i]));
  for (const auto& grp : penalty.groups) {
    double unorm = 0, gnorm = 0;
    for (int id : grp.coords) {
      unorm += u[id] * u[id];
      gnorm += grad[id] * grad[id];
    }
    unorm = std::sqrt(unorm);
    gnorm = std::sqrt(gnorm);
    const double beta = lambda * grp.multiplicity;
    if (unorm > 0) {
      double viol = 0;
      for (int id : grp.coords) {
        const double v = grad[id] + beta * u[id] / unorm;
        viol += v * v;
      }
      res = std::max(res, std::sqrt(viol));
    } else {
      res = std::max(res, std::max(0.0, gnorm - beta));
    }
  }
  return res;
}

double kkt_residual(const QuadraticLoss& loss, const PenaltySpec& penalty, const ParameterVector& theta,
                    double lambda) {
  return kkt_residual_reduced(loss, penalty, theta.reduced(), lambda);
}

Estimate solve_cd(const QuadraticLoss& loss, const PenaltySpec& penalty, double lambda,
                  const CdOptions& opts) {
  if (penalty.mode != PenaltySpec::Mode::L1)
    throw std::invalid_argument("solve_cd handles the l1 penalty; use solve_group_cd for groups");
  return run_cd(loss, penalty, lambda, opts);
}

Estimate solve_group_cd(const QuadraticLoss& loss, const PenaltySpec& penalty, double lambda,
                        const CdOptions& opts) {
  for (const auto& grp : penalty.groups)
    if (grp.coords.size() > 2)
      throw std::invalid_argument("solve_group_cd supports groups of size at most 2");
  return run_cd(loss, penalty, lambda, opts);
}

Estimate solve_cd_gaussian(const Eigen::MatrixXd& w, double lambda, const CdOptions& opts) {
  check_cd_args(lambda, opts);
  if (w.rows() != w.cols()) throw std::invalid_argument("solve_cd_gaussian: W must be square");
  if ((w - w.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, w.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("solve_cd_gaussian: W must be symmetric");
  const int m = static_cast<int>(w.rows());
  auto layout = ParamLayout::pairwise(m);

  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(m, m);
  if (opts.warm_start) k = ParameterVector(layout, *opts.warm_start).matrix();
  Eigen::MatrixXd p = w * k;  // maintained product WK

  const double max_diag = w.diagonal().maxCoeff();
  const double curv_floor = 1e-14 * std::max(max_diag, 1e-300);
  const double kkt_bound = 10.0 * opts.tol * std::max(max_diag, 1.0);

  auto kkt_from_scratch = [&]() {
    const Eigen::MatrixXd pf = w * k;
    double res = 0;
    for (int j = 0; j < m; ++j) res = std::max(res, std::abs(pf(j, j) - 1.0));
    for (int j = 0; j < m; ++j)
      for (int l = j + 1; l < m; ++l) {
        const double grad = pf(j, l) + pf(l, j);
        if (k(j, l) != 0.0)
          res = std::max(res, std::abs(grad + 2.0 * lambda * (k(j, l) > 0 ? 1.0 : -1.0)));
        else
          res = std::max(res, std::max(0.0, std::abs(grad) - 2.0 * lambda));
      }
    return res;
  };

  int iterations = 0;
  bool converged = false;
  for (int t = 1; t <= opts.t_max; ++t) {
    double l1_change = 0;
    for (int j = 0; j < m; ++j) {
      if (w(j, j) <= curv_floor) continue;
      const double next = (1.0 - (p(j, j) - w(j, j) * k(j, j))) / w(j, j);
      const double delta = next - k(j, j);
      if (delta != 0.0) {
        l1_change += std::abs(delta);
        k(j, j) = next;
        p.col(j) += delta * w.col(j);
      }
    }
    for (int j = 0; j < m; ++j)
      for (int l = j + 1; l < m; ++l) {
        const double cjl = w(j, j) + w(l, l);
        if (cjl <= curv_floor) continue;
        const double r = p(j, l) + p(l, j) - cjl * k(j, l);
        const double next = soft_threshold(-r, 2.0 * lambda) / cjl;
        const double delta = next - k(j, l);
        if (delta != 0.0) {
          l1_change += 2.0 * std::abs(delta);
          k(j, l) = k(l, j) = next;
          p.col(l) += delta * w.col(j);
          p.col(j) += delta * w.col(l);
        }
      }
    iterations = t;
    if (l1_change <= opts.tol) {
      p = w * k;  // drop accumulated roundoff before certifying
      if (kkt_from_scratch() <= kkt_bound) {
        converged = true;
        break;
      }
      if (l1_change == 0.0) break;
    }
  }

  Estimate est;
  est.theta = ParameterVector::from_matrix(layout, k);
  est.lambda = lambda;
  est.kkt_residual = kkt_from_scratch();
  est.iterations = iterations;
  est.converged = converged;
  return est;
}

}  // namespace scorematch
