#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "scorematch/errors.hpp"
#include "scorematch/solvers.hpp"

namespace scorematch {

namespace {

// Active-set bookkeeping for the homotopy: the unpenalized coordinates stay
// in the linear system for the whole path, penalized coordinates come and go.
// M tracks the inverse of the active Gram block Q_AA by bordering updates and
// periodic full rebuilds.
class ActiveSystem {
 public:
  ActiveSystem(const QuadraticLoss& loss, std::vector<int> unpenalized)
      : loss_(loss), coords_(std::move(unpenalized)), n_unpen_(coords_.size()) {
    rebuild();
  }

  const std::vector<int>& coords() const { return coords_; }
  std::size_t size() const { return coords_.size(); }
  std::size_t num_unpenalized() const { return n_unpen_; }

  // Returns false when the augmented system is numerically singular.
  bool add(int coord) {
    const std::size_t k = coords_.size();
    Eigen::VectorXd q(k);
    for (std::size_t a = 0; a < k; ++a) q[a] = loss_.quad_entry(coords_[a], coord);
    const double d = loss_.quad_entry(coord, coord);
    const Eigen::VectorXd mq = m_ * q;
    const double s = d - q.dot(mq);
    const double s_tol = 1e-10 * std::max(d, 1e-8 * loss_.max_block_diagonal());
    if (!(s > s_tol)) return false;
    Eigen::MatrixXd next(k + 1, k + 1);
    next.topLeftCorner(k, k) = m_ + (mq * mq.transpose()) / s;
    next.topRightCorner(k, 1) = -mq / s;
    next.bottomLeftCorner(1, k) = -mq.transpose() / s;
    next(k, k) = 1.0 / s;
    m_ = std::move(next);
    coords_.push_back(coord);
    maybe_rebuild();
    return true;
  }

  void remove(int coord) {
    const auto it = std::find(coords_.begin() + n_unpen_, coords_.end(), coord);
    if (it == coords_.end()) throw std::logic_error("ActiveSystem: coordinate not active");
    const std::size_t idx = static_cast<std::size_t>(it - coords_.begin());
    const std::size_t k = coords_.size();
    const double piv = m_(idx, idx);
    if (!(piv > 0)) {
      coords_.erase(it);
      rebuild();
      return;
    }
    Eigen::MatrixXd next(k - 1, k - 1);
    std::size_t r2 = 0;
    for (std::size_t r = 0; r < k; ++r) {
      if (r == idx) continue;
      std::size_t c2 = 0;
      for (std::size_t c = 0; c < k; ++c) {
        if (c == idx) continue;
        next(r2, c2) = m_(r, c) - m_(r, idx) * m_(idx, c) / piv;
        ++c2;
      }
      ++r2;
    }
    m_ = std::move(next);
    coords_.erase(it);
    maybe_rebuild();
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const { return m_ * rhs; }

  Eigen::VectorXd row_quad(const Eigen::VectorXd& x) const {
    Eigen::VectorXd out(coords_.size());
    for (std::size_t a = 0; a < coords_.size(); ++a) out[a] = x[coords_[a]];
    return out;
  }

  void rebuild() {
    const std::size_t k = coords_.size();
    Eigen::MatrixXd q(k, k);
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b <= a; ++b)
        q(a, b) = q(b, a) = loss_.quad_entry(coords_[a], coords_[b]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(q);
    if (!lu.isInvertible()) throw RankError("active Gram block is numerically singular");
    m_ = lu.inverse();
    ops_ = 0;
  }

 private:
  void maybe_rebuild() {
    if (++ops_ >= 50) rebuild();
  }

  const QuadraticLoss& loss_;
  std::vector<int> coords_;
  std::size_t n_unpen_;
  Eigen::MatrixXd m_;
  int ops_ = 0;
};

}  // namespace

Eigen::VectorXd SolutionPath::at(double lambda) const {
  if (knots.empty()) throw std::logic_error("empty path");
  if (lambda >= knots.back()) return coefficients.back();
  if (lambda < knots.front() - 1e-12 * std::max(1.0, knots.back()))
    throw std::invalid_argument("lambda below the computed end of the path");
  lambda = std::max(lambda, knots.front());
  const auto it = std::upper_bound(knots.begin(), knots.end(), lambda);
  const std::size_t r = std::max<std::ptrdiff_t>(0, it - knots.begin() - 1);
  return coefficients[r] + (lambda - knots[r]) * slopes[r];
}

SolutionPath solve_path(const QuadraticLoss& loss, const PenaltySpec& penalty, const PathStop& stop) {
  penalty.validate(*loss.layout());
  if (penalty.mode != PenaltySpec::Mode::L1)
    throw std::invalid_argument("solve_path: group-penalized paths are not piecewise linear");
  if (!(stop.lambda_min >= 0)) throw std::invalid_argument("solve_path: lambda_min must be >= 0");
  const double psd_slack = 1e-8 * std::max(1.0, loss.max_block_diagonal());
  if (loss.min_block_eigenvalue() < -psd_slack)
    throw std::invalid_argument("solve_path: loss blocks must be positive semidefinite");

  const auto& layout = *loss.layout();
  const int nc = layout.num_coords();
  std::vector<double> mult(nc, 0.0);
  std::vector<bool> penalized(nc, false);
  for (const auto& grp : penalty.groups) {
    penalized[grp.coords[0]] = true;
    mult[grp.coords[0]] = grp.multiplicity;
  }

  SolutionPath path;
  path.layout = loss.layout();

  // Pre-solve the unpenalized coordinates with all penalized ones at zero.
  Eigen::VectorXd u = solve_restricted_system(loss, penalty.unpenalized_coords(layout));
  Eigen::VectorXd grad = loss.grad_reduced(u);

  double lam = 0;
  for (int i = 0; i < nc; ++i)
    if (penalized[i]) lam = std::max(lam, std::abs(grad[i]) / mult[i]);

  const double scale = std::max(1.0, lam);
  const double tie_tol = 1e-12 * scale;

  if (lam <= stop.lambda_min + tie_tol) {
    // Nothing ever activates above the stopping point.
    path.knots = {std::max(stop.lambda_min, 0.0)};
    path.coefficients = {u};
    path.termination =
        stop.lambda_min > 0 ? PathTermination::UserLambdaMin : PathTermination::GradientZero;
    return path;
  }

  ActiveSystem system(loss, penalty.unpenalized_coords(layout));
  std::vector<bool> active(nc, false);
  std::vector<char> just_dropped(nc, 0);
  std::vector<double> sign(nc, 0.0);
  int n_active_pen = 0;

  // Descending-lambda buffers, reversed into the final path at the end.
  std::vector<double> knots_desc{lam};
  std::vector<Eigen::VectorXd> coef_desc{u};
  std::vector<Eigen::VectorXd> slope_desc;
  std::vector<std::vector<int>> supp_desc;
  PathTermination termination = PathTermination::GradientZero;

  // Coordinates at the entry boundary join the active set (ties together).
  // A coordinate dropped at this knot may only re-enter strictly below it.
  auto try_enter = [&](double at_lambda) -> bool {
    for (int i = 0; i < nc; ++i) {
      if (!penalized[i] || active[i] || just_dropped[i]) continue;
      if (std::abs(grad[i]) >= at_lambda * mult[i] - tie_tol) {
        if (!system.add(i)) return false;
        active[i] = true;
        sign[i] = grad[i] > 0 ? -1.0 : 1.0;
        ++n_active_pen;
      }
    }
    return true;
  };

  const int max_knots = 200 * nc + 1000;
  bool rank_limited = !try_enter(lam);

  while (!rank_limited) {
    if (stop.max_active > 0 && n_active_pen > stop.max_active) {
      termination = PathTermination::RankLimit;  // explicit cap acts like the size guard
      break;
    }
    // Direction xi = -Q_AA^{-1} (mult * sign) with refinement.
    const std::size_t k = system.size();
    Eigen::VectorXd rhs(k);
    for (std::size_t a = 0; a < k; ++a) {
      const int c = system.coords()[a];
      rhs[a] = mult[c] * sign[c];
    }
    Eigen::VectorXd xi_a = -system.solve(rhs);
    Eigen::VectorXd xi = Eigen::VectorXd::Zero(nc);
    for (std::size_t a = 0; a < k; ++a) xi[system.coords()[a]] = xi_a[a];
    {
      const Eigen::VectorXd resid = system.row_quad(loss.applyQ_reduced(xi)) + rhs;
      xi_a -= system.solve(resid);
      for (std::size_t a = 0; a < k; ++a) xi[system.coords()[a]] = xi_a[a];
    }
    const Eigen::VectorXd qxi = loss.applyQ_reduced(xi);

    // Next event, moving downward from lam.
    double next = stop.lambda_min;
    bool have_event = false;
    for (int i = 0; i < nc; ++i) {  // entries
      if (!penalized[i] || active[i]) continue;
      for (double sg : {1.0, -1.0}) {
        const double den = qxi[i] - sg * mult[i];
        if (std::abs(den) < 1e-300) continue;
        const double cand = (lam * qxi[i] - grad[i]) / den;
        if (cand >= stop.lambda_min + tie_tol && cand <= lam - tie_tol && cand > next) {
          next = cand;
          have_event = true;
        }
      }
    }
    for (std::size_t a = system.num_unpenalized(); a < k; ++a) {  // drops
      const int i = system.coords()[a];
      if (std::abs(xi[i]) < 1e-300) continue;
      const double cand = lam - u[i] / xi[i];
      if (cand >= stop.lambda_min + tie_tol && cand <= lam - tie_tol && cand > next) {
        next = cand;
        have_event = true;
      }
    }

    if (!have_event) {
      // Straight run to the stopping point.
      u += (stop.lambda_min - lam) * xi;
      std::vector<int> supp;
      for (int i = 0; i < nc; ++i)
        if (active[i]) supp.push_back(i);
      knots_desc.push_back(stop.lambda_min);
      coef_desc.push_back(u);
      slope_desc.push_back(xi);
      supp_desc.push_back(std::move(supp));
      termination =
          stop.lambda_min > 0 ? PathTermination::UserLambdaMin : PathTermination::GradientZero;
      break;
    }

    // Advance to the event; collect ties, drops before entries.
    u += (next - lam) * xi;
    std::vector<int> supp;
    for (int i = 0; i < nc; ++i)
      if (active[i]) supp.push_back(i);
    knots_desc.push_back(next);
    slope_desc.push_back(xi);
    supp_desc.push_back(std::move(supp));

    std::fill(just_dropped.begin(), just_dropped.end(), 0);
    std::vector<int> drops;
    for (std::size_t a = system.num_unpenalized(); a < k; ++a) {
      const int i = system.coords()[a];
      if (std::abs(u[i]) <= 4.0 * tie_tol * (1.0 + std::abs(xi[i]))) drops.push_back(i);
    }
    for (int i : drops) {
      u[i] = 0.0;
      system.remove(i);
      active[i] = false;
      sign[i] = 0.0;
      just_dropped[i] = 1;
      --n_active_pen;
    }
    lam = next;
    grad = loss.grad_reduced(u);
    coef_desc.push_back(u);
    if (!try_enter(lam)) {
      rank_limited = true;
      break;
    }
    if (static_cast<int>(knots_desc.size()) > max_knots)
      throw std::runtime_error("solve_path: knot budget exceeded; instance may be degenerate");
  }

  if (rank_limited) termination = PathTermination::RankLimit;

  // Assemble ascending.
  const std::size_t nk = knots_desc.size();
  path.knots.assign(nk, 0.0);
  path.coefficients.assign(nk, Eigen::VectorXd());
  for (std::size_t r = 0; r < nk; ++r) {
    path.knots[r] = knots_desc[nk - 1 - r];
    path.coefficients[r] = coef_desc[nk - 1 - r];
  }
  const std::size_t ns = slope_desc.size();
  path.slopes.assign(ns, Eigen::VectorXd());
  path.active_sets.assign(ns, {});
  for (std::size_t r = 0; r < ns; ++r) {
    path.slopes[r] = slope_desc[ns - 1 - r];
    path.active_sets[r] = supp_desc[ns - 1 - r];
  }
  path.termination = termination;
  return path;
}

}  // namespace scorematch
