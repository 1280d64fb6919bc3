#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include "scorematch/diagnostics.hpp"
#include "scorematch/errors.hpp"
#include "scorematch/losses.hpp"
#include "scorematch/rng.hpp"
#include "scorematch/simulate.hpp"
#include "scorematch/solvers.hpp"

using namespace scorematch;

namespace {

Eigen::MatrixXd random_spd_cov(Rng& rng, int m, int n) {
  Eigen::MatrixXd x(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) x(i, j) = rng.normal();
  return sample_covariance(DataMatrix(x));
}

DataMatrix random_nonneg_data(Rng& rng, int n, int m) {
  Eigen::MatrixXd x(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) x(i, j) = std::abs(rng.normal());
  return DataMatrix(x);
}

}  // namespace

TEST_CASE("soft threshold") {
  CHECK(soft_threshold(3, 1) == doctest::Approx(2));
  CHECK(soft_threshold(-0.5, 1) == 0.0);
  CHECK(soft_threshold(-3, 1) == doctest::Approx(-2));
  for (double a : {-2.0, 0.0, 0.7}) CHECK(soft_threshold(a, 0) == a);
}

TEST_CASE("lambda_max: identity and 2x2 closed forms") {
  QuadraticLoss id = build_gaussian_loss(Eigen::MatrixXd::Identity(3, 3));
  CHECK(lambda_max(id, PenaltySpec::l1_offdiagonal(*id.layout())) == doctest::Approx(0));

  const double rho = 0.4;
  Eigen::MatrixXd w(2, 2);
  w << 1, rho, rho, 1;
  QuadraticLoss loss = build_gaussian_loss(w);
  // diagonal pre-solve gives kappa_jj = 1; combined pair gradient 2 rho,
  // multiplicity 2, hence lambda_max = |rho|
  CHECK(lambda_max(loss, PenaltySpec::l1_offdiagonal(*loss.layout())) == doctest::Approx(rho));
}

TEST_CASE("cd at lambda above lambda_max keeps penalized coordinates at zero") {
  Rng rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    const int m = 3 + static_cast<int>(rng.uniform_int(4));
    QuadraticLoss loss = build_gaussian_loss(random_spd_cov(rng, m, 4 * m));
    const PenaltySpec penalty = PenaltySpec::l1_offdiagonal(*loss.layout());
    const double lmax = lambda_max(loss, penalty);
    const Estimate est = solve_cd(loss, penalty, 1.01 * lmax);
    CHECK(est.converged);
    for (int id : loss.layout()->pair_coords()) CHECK(est.theta.reduced()[id] == 0.0);
    // diagonals solve to 1/w_jj when the off-diagonal support is empty
    for (int j = 0; j < m; ++j)
      CHECK(est.theta.reduced()[loss.layout()->diag_id(0, j)] ==
            doctest::Approx(1.0 / loss.block(0)(j, j)).epsilon(1e-8));
  }
}

TEST_CASE("cd solves the identity instance exactly") {
  QuadraticLoss loss = build_gaussian_loss(Eigen::MatrixXd::Identity(4, 4));
  const PenaltySpec penalty = PenaltySpec::l1_offdiagonal(*loss.layout());
  for (double lam : {0.0, 0.2, 5.0}) {
    const Estimate est = solve_cd(loss, penalty, lam);
    CHECK((est.theta.matrix() - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(est.kkt_residual <= 1e-10);
  }
}

TEST_CASE("kkt residual: exact solutions, zero vector, perturbation growth") {
  Rng rng(23);
  Eigen::MatrixXd w = random_spd_cov(rng, 2, 20);
  QuadraticLoss loss = build_gaussian_loss(w);
  const PenaltySpec penalty = PenaltySpec::l1_offdiagonal(*loss.layout());

  // diagonal-only instance: scalar stationarity -1 + w_jj k_jj = 0 exactly
  Eigen::MatrixXd diag_only = Eigen::MatrixXd::Zero(2, 2);
  diag_only(0, 0) = 2.0;
  diag_only(1, 1) = 0.5;
  QuadraticLoss dl = build_gaussian_loss(diag_only);
  ParameterVector exact(dl.layout());
  exact.reduced()[dl.layout()->diag_id(0, 0)] = 0.5;
  exact.reduced()[dl.layout()->diag_id(0, 1)] = 2.0;
  CHECK(kkt_residual(dl, PenaltySpec::l1_offdiagonal(*dl.layout()), exact, 1.0) <= 1e-12);

  // theta = 0 at large lambda: residual equals the unpenalized |gradient| = 1
  ParameterVector zero(loss.layout());
  const double lmax = lambda_max(loss, penalty);
  CHECK(kkt_residual(loss, penalty, zero, 2 * lmax + 1.0) == doctest::Approx(1.0));

  // perturbing an exact solution grows the residual linearly
  CdOptions tight;
  tight.tol = 1e-12;
  const Estimate est = solve_cd(loss, penalty, 0.1 * lmax + 0.01, tight);
  for (double delta : {1e-4, 1e-3, 1e-2}) {
    ParameterVector bumped = est.theta;
    bumped.reduced()[loss.layout()->diag_id(0, 0)] += delta;
    const double res = kkt_residual(loss, penalty, bumped, est.lambda);
    CHECK(res >= 0.5 * delta * w(0, 0));
    CHECK(res <= 10 * delta * std::max(1.0, w.cwiseAbs().maxCoeff()) + est.kkt_residual);
  }
}

TEST_CASE("generic cd agrees with the gaussian specialization") {
  Rng rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = 2 + static_cast<int>(rng.uniform_int(9));
    Eigen::MatrixXd w = random_spd_cov(rng, m, m + 5 + static_cast<int>(rng.uniform_int(20)));
    QuadraticLoss loss = build_gaussian_loss(w);
    const PenaltySpec penalty = PenaltySpec::l1_offdiagonal(*loss.layout());
    const double lam = rng.uniform(0.0, 0.8) * std::max(lambda_max(loss, penalty), 1e-3);
    CdOptions opts;
    opts.tol = 1e-10;
    const Estimate generic = solve_cd(loss, penalty, lam, opts);
    const Estimate special = solve_cd_gaussian(w, lam, opts);
    CHECK((generic.theta.matrix() - special.theta.matrix()).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("gaussian cd: diagonal W gives diag(1/w_jj) for any lambda") {
  Eigen::VectorXd d(4);
  d << 0.5, 1.0, 2.0, 4.0;
  const Eigen::MatrixXd w = d.asDiagonal();
  for (double lam : {0.0, 0.3, 10.0}) {
    Estimate est = solve_cd_gaussian(w, lam);
    CHECK((est.theta.matrix() - Eigen::MatrixXd(d.cwiseInverse().asDiagonal()))
              .cwiseAbs()
              .maxCoeff() <= 1e-10);
  }
}

TEST_CASE("path: identity covariance has a single constant segment") {
  QuadraticLoss loss = build_gaussian_loss(Eigen::MatrixXd::Identity(3, 3));
  const SolutionPath path = solve_path(loss, PenaltySpec::l1_offdiagonal(*loss.layout()));
  CHECK(path.knots.size() == 1);
  CHECK(path.termination == PathTermination::GradientZero);
  for (double lam : {0.0, 0.5, 3.0})
    CHECK((ParameterVector(path.layout, path.at(lam)).matrix() - Eigen::MatrixXd::Identity(3, 3))
              .cwiseAbs()
              .maxCoeff() <= 1e-12);
}

TEST_CASE("path endpoint at lambda zero is the unregularized inverse") {
  Rng rng(5);
  const int m = 10, n = 50;
  Eigen::MatrixXd w = random_spd_cov(rng, m, n);
  QuadraticLoss loss = build_gaussian_loss(w);
  const SolutionPath path = solve_path(loss, PenaltySpec::l1_offdiagonal(*loss.layout()));
  CHECK(path.termination == PathTermination::GradientZero);
  const Eigen::MatrixXd endpoint = ParameterVector(path.layout, path.at(0.0)).matrix();
  CHECK((endpoint - w.inverse()).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("path knots satisfy the interpolation identity and kkt") {
  Rng rng(19);
  const int m = 6, n = 40;
  QuadraticLoss loss = build_gaussian_loss(random_spd_cov(rng, m, n));
  const PenaltySpec penalty = PenaltySpec::l1_offdiagonal(*loss.layout());
  const SolutionPath path = solve_path(loss, penalty);
  REQUIRE(path.knots.size() >= 3);
  for (std::size_t r = 0; r + 1 < path.knots.size(); ++r) {
    const Eigen::VectorXd reproduced =
        path.coefficients[r] + (path.knots[r + 1] - path.knots[r]) * path.slopes[r];
    CHECK((reproduced - path.coefficients[r + 1]).cwiseAbs().maxCoeff() <= 1e-10);
    // piecewise linearity: KKT holds at segment midpoints
    const double mid = 0.5 * (path.knots[r] + path.knots[r + 1]);
    CHECK(kkt_residual_reduced(loss, penalty, path.at(mid), mid) <= 1e-8);
  }
}

TEST_CASE("path vs cd cross-agreement on gaussian and truncated instances") {
  Rng rng(29);
  for (int trial = 0; trial < 4; ++trial) {
    const int m = 4 + static_cast<int>(rng.uniform_int(12));  // up to 15
    const int n = m + 10 + static_cast<int>(rng.uniform_int(45));
    QuadraticLoss loss;
    if (trial % 2 == 0) {
      loss = build_gaussian_loss(random_spd_cov(rng, m, n));
    } else {
      loss = build_nonneg_gaussian_loss(random_nonneg_data(rng, n, m));
    }
    const PenaltySpec penalty = PenaltySpec::l1_offdiagonal(*loss.layout());
    const double lmax = lambda_max(loss, penalty);
    const SolutionPath path = solve_path(loss, penalty, {.lambda_min = 0.005 * lmax});
    CdOptions opts;
    opts.tol = 1e-11;
    opts.t_max = 50000;
    for (int i = 19; i >= 0; --i) {
      const double lam = lmax * (0.01 + (0.99 * i) / 19.0);
      const Estimate cd = solve_cd(loss, penalty, lam, opts);
      CHECK((path.at(lam) - cd.theta.reduced()).cwiseAbs().maxCoeff() <= 1e-5);
      opts.warm_start = cd.theta.reduced();
    }
  }
}

TEST_CASE("path rejects group penalties and non-psd losses") {
  QuadraticLoss loss = build_gaussian_loss(Eigen::MatrixXd::Identity(3, 3));
  CHECK_THROWS_AS(solve_path(loss, PenaltySpec::group_pairs(*loss.layout())), std::invalid_argument);

  Eigen::MatrixXd w = Eigen::MatrixXd::Identity(3, 3);
  w(0, 1) = w(1, 0) = 2.0;  // indefinite
  QuadraticLoss bad = build_gaussian_loss(w);
  CHECK_THROWS_AS(solve_path(bad, PenaltySpec::l1_offdiagonal(*bad.layout())), std::invalid_argument);
}

TEST_CASE("rank limit: singular covariance stops the path early") {
  Rng rng(77);
  const int m = 8, n = 4;  // W has rank 4
  QuadraticLoss loss = build_gaussian_loss(random_spd_cov(rng, m, n));
  const SolutionPath path = solve_path(loss, PenaltySpec::l1_offdiagonal(*loss.layout()));
  CHECK(path.termination == PathTermination::RankLimit);
  CHECK(path.lambda_min() > 0.0);
}

TEST_CASE("cd objective is non-increasing across sweeps") {
  Rng rng(37);
  const int m = 8, n = 30;
  QuadraticLoss loss = build_gaussian_loss(random_spd_cov(rng, m, n));
  const PenaltySpec penalty = PenaltySpec::l1_offdiagonal(*loss.layout());
  const double lam = 0.3 * lambda_max(loss, penalty);
  double prev = std::numeric_limits<double>::infinity();
  for (int sweeps = 1; sweeps <= 12; ++sweeps) {
    CdOptions opts;
    opts.t_max = sweeps;
    opts.tol = 1e-300;  // force exactly `sweeps` sweeps
    const Estimate est = solve_cd(loss, penalty, lam, opts);
    const double obj = loss.value(est.theta) + lam * penalty.norm(est.theta.reduced());
    CHECK(obj <= prev + 1e-12);
    prev = obj;
  }
}

TEST_CASE("warm starts do not change the solution beyond tolerance") {
  Rng rng(53);
  const int m = 7, n = 35;
  QuadraticLoss loss = build_gaussian_loss(random_spd_cov(rng, m, n));
  const PenaltySpec penalty = PenaltySpec::l1_offdiagonal(*loss.layout());
  const double lam = 0.2 * lambda_max(loss, penalty);
  CdOptions tight;
  tight.tol = 1e-12;
  const Estimate cold = solve_cd(loss, penalty, lam, tight);
  CdOptions warm = tight;
  Eigen::VectorXd start = cold.theta.reduced();
  for (int i = 0; i < start.size(); ++i) start[i] += 0.1 * rng.normal();
  warm.warm_start = start;
  const Estimate warmed = solve_cd(loss, penalty, lam, warm);
  CHECK((cold.theta.reduced() - warmed.theta.reduced()).cwiseAbs().maxCoeff() <= 1e-7);
}

TEST_CASE("group cd: singleton groups reduce to l1") {
  Rng rng(61);
  const int m = 5, n = 30;
  QuadraticLoss loss = build_gaussian_loss(random_spd_cov(rng, m, n));
  const PenaltySpec l1 = PenaltySpec::l1_offdiagonal(*loss.layout());
  PenaltySpec grp = l1;
  grp.mode = PenaltySpec::Mode::Group;
  const double lam = 0.25 * lambda_max(loss, l1);
  CdOptions opts;
  opts.tol = 1e-11;
  const Estimate a = solve_cd(loss, l1, lam, opts);
  const Estimate b = solve_group_cd(loss, grp, lam, opts);
  CHECK((a.theta.reduced() - b.theta.reduced()).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("group cd on the normal conditionals family") {
  Rng rng(67);
  Graph g = gen_graph(GraphKind::Chain, {.m = 4});
  TruthSpec truth = truth_normal_conditionals(g, -0.3, -1.0, 0.16);
  const DataMatrix data = sample_from_truth(truth, 400, rng);
  QuadraticLoss loss = build_normal_conditionals_loss(data);
  const PenaltySpec penalty = PenaltySpec::group_pairs(*loss.layout());
  const double lmax = lambda_max(loss, penalty);

  // above lambda_max every group is zero
  const Estimate sparse = solve_group_cd(loss, penalty, 1.01 * lmax);
  for (int id : loss.layout()->pair_coords()) CHECK(sparse.theta.reduced()[id] == 0.0);
  CHECK(sparse.kkt_residual <= 1e-6);

  // interior lambda: group kkt certified
  const Estimate mid = solve_group_cd(loss, penalty, 0.3 * lmax);
  CHECK(mid.converged);
  CHECK(mid.kkt_residual <= 1e-6);
}

TEST_CASE("isotropic group subproblem matches the closed form") {
  // one 2-coordinate group with curvature block c * I: the exact update is
  // max(|r| - beta, 0)/c along r/|r|.  Build a 2-variable instance whose pair
  // group is isotropic by symmetry of W.
  Eigen::MatrixXd w(2, 2);
  w << 1.0, 0.0, 0.0, 1.0;
  QuadraticLoss loss = build_gaussian_loss(w);
  PenaltySpec grp = PenaltySpec::l1_offdiagonal(*loss.layout());
  grp.mode = PenaltySpec::Mode::Group;
  // identity W: every penalized gradient is zero at the diagonal solve, so
  // the update must stay zero for any positive lambda
  const Estimate est = solve_group_cd(loss, grp, 0.5);
  CHECK(est.theta.reduced()[loss.layout()->pair_id(0, 0, 1)] == 0.0);
}

TEST_CASE("population path never activates the absent meinshausen edge") {
  const Eigen::MatrixXd sigma = meinshausen_sigma(0.3);
  QuadraticLoss pop = population_gaussian_loss(sigma);
  const PenaltySpec penalty = PenaltySpec::l1_offdiagonal(*pop.layout());
  const SolutionPath path = solve_path(pop, penalty);
  const int absent = pop.layout()->pair_id(0, 0, 3);
  for (const auto& coef : path.coefficients) CHECK(std::abs(coef[absent]) <= 1e-9);
  // and the lambda = 0 endpoint reproduces K* including its zero
  const Eigen::MatrixXd endpoint = ParameterVector(pop.layout(), path.at(0.0)).matrix();
  CHECK((endpoint - sigma.inverse()).cwiseAbs().maxCoeff() <= 1e-8);
}
