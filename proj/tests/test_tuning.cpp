#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include "scorematch/diagnostics.hpp"
#include "scorematch/errors.hpp"
#include "scorematch/losses.hpp"
#include "scorematch/simulate.hpp"
#include "scorematch/tuning.hpp"

using namespace scorematch;

TEST_CASE("ebic at the identity instance") {
  const int m = 5;
  QuadraticLoss loss = build_gaussian_loss(Eigen::MatrixXd::Identity(m, m));
  Estimate est;
  est.theta = ParameterVector::from_matrix(loss.layout(), Eigen::MatrixXd::Identity(m, m));
  est.lambda = 1.0;
  // empty support: fit term -2m + m, zero complexity terms (n = 1 isolates
  // the plain substitution; the fit term scales linearly in n)
  CHECK(ebic_score(est, loss, 1, m, 0.5) == doctest::Approx(-2.0 * m + m));
  CHECK(ebic_score(est, loss, 100, m, 0.5) == doctest::Approx(100 * (-2.0 * m + m)));
  // adding one (numerically negligible) edge raises the score by
  // log n + 4 gamma log m
  Eigen::MatrixXd k = Eigen::MatrixXd::Identity(m, m);
  k(0, 1) = k(1, 0) = 1e-9;
  Estimate with_edge;
  with_edge.theta = ParameterVector::from_matrix(loss.layout(), k);
  const int n = 57;
  for (double gamma : {0.0, 0.5, 1.0}) {
    const double slope = ebic_score(with_edge, loss, n, m, gamma) - ebic_score(est, loss, n, m, gamma);
    CHECK(slope == doctest::Approx(std::log(n) + 4 * gamma * std::log(m)).epsilon(1e-6));
  }
}

TEST_CASE("refit restricted") {
  Rng rng(91);
  const int m = 6, n = 60;
  Eigen::MatrixXd x(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) x(i, j) = rng.normal();
  Eigen::MatrixXd w = sample_covariance(DataMatrix(x));
  QuadraticLoss loss = build_gaussian_loss(w);
  const PenaltySpec penalty = PenaltySpec::l1_offdiagonal(*loss.layout());

  // full support -> W^{-1}
  std::vector<int> full;
  for (int id : loss.layout()->pair_coords()) full.push_back(id);
  const ParameterVector dense = refit_restricted(loss, penalty, full);
  CHECK((dense.matrix() - w.inverse()).cwiseAbs().maxCoeff() <= 1e-8);

  // empty support -> diag(1/w_jj)
  const ParameterVector sparse = refit_restricted(loss, penalty, {});
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(m, m);
  expected.diagonal() = w.diagonal().cwiseInverse();
  CHECK((sparse.matrix() - expected).cwiseAbs().maxCoeff() <= 1e-10);

  // permutation of the support listing does not matter
  std::vector<int> reversed(full.rbegin(), full.rend());
  const ParameterVector again = refit_restricted(loss, penalty, reversed);
  CHECK((again.reduced() - dense.reduced()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("refit on the population loss recovers the truth exactly") {
  TruthSpec truth = truth_chain(8, 0.3);
  QuadraticLoss pop = population_gaussian_loss(truth.sigma);
  const PenaltySpec penalty = PenaltySpec::l1_offdiagonal(*pop.layout());
  std::vector<int> support;
  for (const auto& [j, k] : truth.graph.edges) support.push_back(pop.layout()->pair_id(0, j, k));
  const ParameterVector refit = refit_restricted(pop, penalty, support);
  CHECK((refit.matrix() - truth.interaction).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("refit reports the offending block when singular") {
  Rng rng(13);
  const int m = 6, n = 3;  // rank-deficient W
  Eigen::MatrixXd x(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) x(i, j) = rng.normal();
  QuadraticLoss loss = build_gaussian_loss(sample_covariance(DataMatrix(x)));
  const PenaltySpec penalty = PenaltySpec::l1_offdiagonal(*loss.layout());
  std::vector<int> full;
  for (int id : loss.layout()->pair_coords()) full.push_back(id);
  CHECK_THROWS_AS(refit_restricted(loss, penalty, full), RankError);
}

TEST_CASE("selection basics: single candidate and larger-lambda ties") {
  QuadraticLoss loss = build_gaussian_loss(Eigen::MatrixXd::Identity(3, 3));
  const PenaltySpec penalty = PenaltySpec::l1_offdiagonal(*loss.layout());
  Estimate one;
  one.theta = ParameterVector::from_matrix(loss.layout(), Eigen::MatrixXd::Identity(3, 3));
  one.lambda = 0.7;
  EbicSelection sel = select_lambda_ebic({one}, loss, penalty, 50, {});
  CHECK(sel.lambda == doctest::Approx(0.7));

  // identical estimates at two lambdas score equally; the tie goes up
  Estimate two = one;
  two.lambda = 0.2;
  sel = select_lambda_ebic({two, one}, loss, penalty, 50, {});
  CHECK(sel.lambda == doctest::Approx(0.7));
}

TEST_CASE("ebic prefers the true support region on a chain") {
  const int m = 10, n = 200;
  int wins = 0;
  const int seeds = 11;
  for (int seed = 0; seed < seeds; ++seed) {
    TruthSpec truth = truth_chain(m, 0.3);
    const DataMatrix data = sample_mvn(truth.sigma, n, Rng(seed + 1));
    QuadraticLoss loss = build_gaussian_loss(sample_covariance(data));
    const PenaltySpec penalty = PenaltySpec::l1_offdiagonal(*loss.layout());
    const double lmax = lambda_max(loss, penalty);

    const auto fits = fit_lambda_grid(loss, penalty, default_lambda_grid(lmax, 40));
    double best_score = std::numeric_limits<double>::infinity();
    double dense_score = 0, empty_score = 0;
    for (const auto& est : fits) {
      const double score = ebic_score(est, loss, n, m, 0.5);
      best_score = std::min(best_score, score);
      if (est.lambda == fits.front().lambda) empty_score = score;
      if (est.lambda == fits.back().lambda) dense_score = score;
    }
    if (best_score < dense_score && best_score < empty_score) ++wins;
  }
  CHECK(wins > seeds / 2);
}

TEST_CASE("grid fitting is descending and warm-started") {
  Rng rng(3);
  const int m = 6, n = 40;
  Eigen::MatrixXd x(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) x(i, j) = rng.normal();
  QuadraticLoss loss = build_gaussian_loss(sample_covariance(DataMatrix(x)));
  const PenaltySpec penalty = PenaltySpec::l1_offdiagonal(*loss.layout());
  const auto grid = default_lambda_grid(lambda_max(loss, penalty), 12);
  CHECK(grid.size() == 12);
  CHECK(std::is_sorted(grid.rbegin(), grid.rend()));
  const auto fits = fit_lambda_grid(loss, penalty, grid);
  REQUIRE(fits.size() == grid.size());
  for (std::size_t i = 0; i < fits.size(); ++i) {
    CHECK(fits[i].lambda == doctest::Approx(grid[i]));
    CHECK(fits[i].kkt_residual <= 1e-6);
  }
}

namespace {

double matthews_correlation(const Eigen::MatrixXd& est, const Graph& truth, double tol = 1e-8) {
  double tp = 0, fp = 0, fn = 0, tn = 0;
  for (int j = 0; j < truth.m; ++j)
    for (int k = j + 1; k < truth.m; ++k) {
      const bool on = std::abs(est(j, k)) > tol;
      const bool really = truth.has_edge(j, k);
      tp += on && really;
      fp += on && !really;
      fn += !on && really;
      tn += !on && !really;
    }
  const double den = std::sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn));
  return den == 0 ? 0.0 : (tp * tn - fp * fn) / den;
}

}  // namespace

TEST_CASE("ebic-selected support beats the grid endpoints on a long chain") {
  const int m = 64, n = 400, seeds = 50;
  int wins = 0;
  TruthSpec truth = truth_chain(m, 0.3);
  for (int seed = 0; seed < seeds; ++seed) {
    const DataMatrix data = sample_mvn(truth.sigma, n, Rng(1000 + seed));
    QuadraticLoss loss = build_gaussian_loss(sample_covariance(data));
    const PenaltySpec penalty = PenaltySpec::l1_offdiagonal(*loss.layout());
    const auto fits =
        fit_lambda_grid(loss, penalty, default_lambda_grid(lambda_max(loss, penalty), 50));
    const EbicSelection sel = select_lambda_ebic(fits, loss, penalty, n, {});
    const double selected = matthews_correlation(sel.estimate.theta.matrix(), truth.graph);
    const double at_lmax = matthews_correlation(fits.front().theta.matrix(), truth.graph);
    const double at_lmin = matthews_correlation(fits.back().theta.matrix(), truth.graph);
    if (selected >= at_lmax && selected >= at_lmin) ++wins;
  }
  CHECK(wins >= 30);  // >= 60% of seeds
}

TEST_CASE("refit flag changes scores but never the candidate set") {
  Rng rng(44);
  const int m = 6, n = 80;
  TruthSpec truth = truth_chain(m, 0.3);
  const DataMatrix data = sample_mvn(truth.sigma, n, rng);
  QuadraticLoss loss = build_gaussian_loss(sample_covariance(data));
  const PenaltySpec penalty = PenaltySpec::l1_offdiagonal(*loss.layout());
  const auto fits = fit_lambda_grid(loss, penalty, default_lambda_grid(lambda_max(loss, penalty), 15));
  const EbicSelection plain = select_lambda_ebic(fits, loss, penalty, n, {0.5, false});
  const EbicSelection refit = select_lambda_ebic(fits, loss, penalty, n, {0.5, true});
  REQUIRE(plain.table.size() == refit.table.size());
  for (std::size_t i = 0; i < plain.table.size(); ++i)
    CHECK(plain.table[i].lambda == doctest::Approx(refit.table[i].lambda));
}
