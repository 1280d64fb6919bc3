#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "oracle.hpp"
#include "scorematch/diagnostics.hpp"
#include "scorematch/errors.hpp"
#include "scorematch/losses.hpp"
#include "scorematch/rng.hpp"

using namespace scorematch;

namespace {

Eigen::MatrixXd random_matrix(Rng& rng, int rows, int cols, double lo = -1, double hi = 1) {
  Eigen::MatrixXd a(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) a(i, j) = rng.uniform(lo, hi);
  return a;
}

Eigen::MatrixXd random_symmetric(Rng& rng, int m) {
  Eigen::MatrixXd a = random_matrix(rng, m, m);
  return 0.5 * (a + a.transpose());
}

oracle::LogDensity gaussian_logq(const Eigen::MatrixXd& k) {
  return [k](const Eigen::VectorXd& x) { return -0.5 * x.dot(k * x); };
}

oracle::LogDensity conditionals_logq(const Eigen::MatrixXd& b, const Eigen::MatrixXd& b2,
                                     const Eigen::VectorXd& bv) {
  return [=](const Eigen::VectorXd& x) {
    const Eigen::VectorXd x2 = x.cwiseProduct(x);
    double quartic = 0;
    for (int j = 0; j < x.size(); ++j)
      for (int l = j + 1; l < x.size(); ++l) quartic += 2.0 * b2(j, l) * x2[j] * x2[l];
    return x.dot(b * x) + quartic + bv.dot(x);
  };
}

}  // namespace

TEST_CASE("sample covariance basics") {
  Eigen::MatrixXd x(1, 2);
  x << 1, 2;
  Eigen::MatrixXd w = sample_covariance(DataMatrix(x));
  CHECK(w(0, 0) == doctest::Approx(1));
  CHECK(w(0, 1) == doctest::Approx(2));
  CHECK(w(1, 0) == doctest::Approx(2));
  CHECK(w(1, 1) == doctest::Approx(4));

  Eigen::MatrixXd y(2, 2);
  y << 1, 0, 0, 1;
  w = sample_covariance(DataMatrix(y));
  CHECK((w - 0.5 * Eigen::MatrixXd::Identity(2, 2)).norm() == doctest::Approx(0).epsilon(1e-14));

  Rng rng(11);
  Eigen::MatrixXd z = random_matrix(rng, 5, 3);
  w = sample_covariance(DataMatrix(z));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w, Eigen::EigenvaluesOnly);
  CHECK(es.eigenvalues().minCoeff() >= -1e-12);

  Eigen::MatrixXd bad = z;
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(sample_covariance(DataMatrix(bad)), DataError);
}

TEST_CASE("gaussian loss matches the trace form") {
  const int m = 3;
  QuadraticLoss loss = build_gaussian_loss(Eigen::MatrixXd::Identity(m, m));
  ParameterVector id = ParameterVector::from_matrix(loss.layout(), Eigen::MatrixXd::Identity(m, m));
  CHECK(loss.value(id) == doctest::Approx(-3.0 + 1.5));

  // scalar case: loss(kappa) = w kappa^2 / 2 - kappa, minimized at 1/w
  // (m = 1 is below the data-matrix floor, so check via the 2x2 diagonal)
  Eigen::MatrixXd w2 = Eigen::MatrixXd::Zero(2, 2);
  w2(0, 0) = 2.0;
  w2(1, 1) = 1.0;
  QuadraticLoss loss2 = build_gaussian_loss(w2);
  auto value = [&](double k00) {
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(2, 2);
    k(0, 0) = k00;
    return loss2.value(ParameterVector::from_matrix(loss2.layout(), k));
  };
  CHECK(value(0.5) < value(0.4));
  CHECK(value(0.5) < value(0.6));

  Rng rng(7);
  Eigen::MatrixXd w = random_symmetric(rng, 4);
  Eigen::MatrixXd k = random_symmetric(rng, 4);
  QuadraticLoss loss4 = build_gaussian_loss(w);
  const double direct = -k.trace() + 0.5 * (k * k * w).trace();
  CHECK(loss4.value(ParameterVector::from_matrix(loss4.layout(), k)) ==
        doctest::Approx(direct).epsilon(1e-10));

  Eigen::MatrixXd asym = w;
  asym(0, 1) += 1.0;
  CHECK_THROWS_AS(build_gaussian_loss(asym), std::invalid_argument);
}

TEST_CASE("gaussian loss is symmetric in K vs K transpose") {
  Rng rng(3);
  Eigen::MatrixXd w = random_symmetric(rng, 4);
  QuadraticLoss loss = build_gaussian_loss(w);
  // the trace-form objective accepts any square K and is transpose-invariant
  auto trace_objective = [&](const Eigen::MatrixXd& k) {
    return -k.trace() + 0.5 * (k * k * w).trace();
  };
  Eigen::MatrixXd k = random_matrix(rng, 4, 4);  // deliberately nonsymmetric
  CHECK(trace_objective(k) == doctest::Approx(trace_objective(k.transpose())).epsilon(1e-12));
  // and coincides with the block quadratic form on symmetric matrices
  Eigen::MatrixXd ks = 0.5 * (k + k.transpose());
  CHECK(loss.value(ParameterVector::from_matrix(loss.layout(), ks)) ==
        doctest::Approx(trace_objective(ks)).epsilon(1e-12));
}

TEST_CASE("data scaling rescales W and Gamma quadratically") {
  Rng rng(5);
  Eigen::MatrixXd x = random_matrix(rng, 10, 3);
  const double s = 2.5;
  Eigen::MatrixXd w1 = sample_covariance(DataMatrix(x));
  Eigen::MatrixXd w2 = sample_covariance(DataMatrix(Eigen::MatrixXd(s * x)));
  CHECK((w2 - s * s * w1).cwiseAbs().maxCoeff() == doctest::Approx(0).epsilon(1e-12));
  QuadraticLoss l1 = build_gaussian_loss(w1);
  QuadraticLoss l2 = build_gaussian_loss(w2);
  CHECK((l2.block(0) - s * s * l1.block(0)).cwiseAbs().maxCoeff() ==
        doctest::Approx(0).epsilon(1e-12));
}

TEST_CASE("nonneg gaussian loss: degenerate and closed-form cases") {
  // all-zero data: Gamma = 0, g = 0
  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(4, 2);
  QuadraticLoss loss0 = build_nonneg_gaussian_loss(DataMatrix(zero));
  CHECK(loss0.block(0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(loss0.g().cwiseAbs().maxCoeff() == 0.0);

  // single observation (c, 0): block 0 has c^4 in its corner, g_0 = 3 c^2
  const double c = 1.7;
  Eigen::MatrixXd one(1, 2);
  one << c, 0;
  QuadraticLoss loss = build_nonneg_gaussian_loss(DataMatrix(one));
  CHECK(loss.block(0)(0, 0) == doctest::Approx(c * c * c * c));
  CHECK(loss.g()[0] == doctest::Approx(3 * c * c));
  // scalar minimization of  c^4 k^2 / 2 - 3 c^2 k  at  k = 3 / c^2
  CHECK(loss.g()[0] / loss.block(0)(0, 0) == doctest::Approx(3.0 / (c * c)));

  Eigen::MatrixXd neg(2, 2);
  neg << 1, -1, 0, 1;
  CHECK_THROWS_AS(build_nonneg_gaussian_loss(DataMatrix(neg)), DataError);
}

TEST_CASE("finite-difference oracle: all families, random instances") {
  Rng rng(2024);
  for (int trial = 0; trial < 12; ++trial) {
    const int m = 2 + static_cast<int>(rng.uniform_int(5));
    const int n = 2 + static_cast<int>(rng.uniform_int(29));

    // basic score matching, Gaussian
    {
      Eigen::MatrixXd x = random_matrix(rng, n, m, -2, 2);
      Eigen::MatrixXd k = random_symmetric(rng, m);
      QuadraticLoss loss = build_gaussian_loss(sample_covariance(DataMatrix(x)));
      ParameterVector theta = ParameterVector::from_matrix(loss.layout(), k);
      const double lhs = oracle::empirical_loss(gaussian_logq(k), x, false) -
                         oracle::empirical_loss(gaussian_logq(Eigen::MatrixXd::Zero(m, m)), x, false);
      const double rhs = loss.value(theta) - loss.constant();
      CHECK(std::abs(lhs - rhs) <= 1e-6 * std::max(1.0, std::abs(rhs)));
    }

    // non-negative score matching, truncated Gaussian
    {
      Eigen::MatrixXd x = random_matrix(rng, n, m, 0, 2);
      Eigen::MatrixXd k = random_symmetric(rng, m);
      QuadraticLoss loss = build_nonneg_gaussian_loss(DataMatrix(x));
      ParameterVector theta = ParameterVector::from_matrix(loss.layout(), k);
      const double lhs = oracle::empirical_loss(gaussian_logq(k), x, true) -
                         oracle::empirical_loss(gaussian_logq(Eigen::MatrixXd::Zero(m, m)), x, true);
      const double rhs = loss.value(theta) - loss.constant();
      CHECK(std::abs(lhs - rhs) <= 1e-6 * std::max(1.0, std::abs(rhs)));
    }

    // normal conditionals
    {
      Eigen::MatrixXd x = random_matrix(rng, n, m, -1.5, 1.5);
      Eigen::MatrixXd b = random_symmetric(rng, m);
      Eigen::MatrixXd b2 = random_symmetric(rng, m);
      b2.diagonal().setZero();
      Eigen::VectorXd bv = random_matrix(rng, m, 1);
      QuadraticLoss loss = build_normal_conditionals_loss(DataMatrix(x));
      ParameterVector theta(loss.layout());
      for (int j = 0; j < m; ++j) {
        theta.reduced()[loss.layout()->diag_id(0, j)] = b(j, j);
        theta.reduced()[loss.layout()->singleton_id(0, j)] = bv[j];
        for (int l = j + 1; l < m; ++l) {
          theta.reduced()[loss.layout()->pair_id(0, j, l)] = b(j, l);
          theta.reduced()[loss.layout()->pair_id(1, j, l)] = b2(j, l);
        }
      }
      const auto zero_logq = [](const Eigen::VectorXd&) { return 0.0; };
      const double lhs = oracle::empirical_loss(conditionals_logq(b, b2, bv), x, false) -
                         oracle::empirical_loss(zero_logq, x, false);
      const double rhs = loss.value(theta) - loss.constant();
      CHECK(std::abs(lhs - rhs) <= 1e-6 * std::max(1.0, std::abs(rhs)));
    }
  }
}

TEST_CASE("normal conditionals block structure") {
  Rng rng(6);
  Eigen::MatrixXd x = random_matrix(rng, 8, 2, -1, 1);
  QuadraticLoss loss = build_normal_conditionals_loss(DataMatrix(x));
  CHECK(loss.block_size() == 5);
  CHECK(loss.layout()->stacked_dim() == 10);
  CHECK(loss.m() == 2);
  // theta = 0: loss equals the constant
  ParameterVector zero(loss.layout());
  CHECK(loss.value(zero) == doctest::Approx(loss.constant()));
}

TEST_CASE("every built loss has PSD blocks") {
  Rng rng(99);
  for (int trial = 0; trial < 5; ++trial) {
    const int m = 3 + static_cast<int>(rng.uniform_int(3));
    const int n = 5 + static_cast<int>(rng.uniform_int(20));
    Eigen::MatrixXd xr = random_matrix(rng, n, m, -2, 2);
    Eigen::MatrixXd xp = random_matrix(rng, n, m, 0, 2);
    CHECK(build_gaussian_loss(sample_covariance(DataMatrix(xr))).min_block_eigenvalue() >= -1e-10);
    CHECK(build_nonneg_gaussian_loss(DataMatrix(xp)).min_block_eigenvalue() >= -1e-10);
    CHECK(build_normal_conditionals_loss(DataMatrix(xr)).min_block_eigenvalue() >= -1e-10);
    CHECK(build_truncated_location_loss(DataMatrix(xp)).min_block_eigenvalue() >= -1e-10);
  }
}

TEST_CASE("general pairwise builder reproduces the named families") {
  Rng rng(31);
  const int m = 3;
  Eigen::MatrixXd xr = random_matrix(rng, 9, m, -2, 2);
  Eigen::MatrixXd xp = random_matrix(rng, 9, m, 0, 2);

  // centered Gaussian statistics: d_j log q = theta_j' (-x)
  PairwiseStatSpec spec;
  spec.num_sets = 1;
  spec.diag_fixed_zero = {false};
  spec.num_singleton_sets = 0;
  spec.h = [](const Eigen::VectorXd& x, int) { return Eigen::VectorXd(-x); };
  spec.hh = [m](const Eigen::VectorXd&, int j) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(m);
    v[j] = -1.0;
    return v;
  };

  QuadraticLoss general = build_general_pairwise_loss(spec, DataMatrix(xr), Domain::RealLine);
  QuadraticLoss gaussian = build_gaussian_loss(sample_covariance(DataMatrix(xr)));
  for (int j = 0; j < m; ++j)
    CHECK((general.block(j) - gaussian.block(j)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((general.g() - gaussian.g()).cwiseAbs().maxCoeff() <= 1e-12);

  QuadraticLoss general_plus =
      build_general_pairwise_loss(spec, DataMatrix(xp), Domain::NonnegativeOrthant);
  QuadraticLoss nonneg = build_nonneg_gaussian_loss(DataMatrix(xp));
  for (int j = 0; j < m; ++j)
    CHECK((general_plus.block(j) - nonneg.block(j)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((general_plus.g() - nonneg.g()).cwiseAbs().maxCoeff() <= 1e-12);

  // arbitrary callbacks still give PSD blocks
  PairwiseStatSpec wild = spec;
  wild.h = [m, &rng](const Eigen::VectorXd& x, int j) {
    Eigen::VectorXd v(m);
    for (int i = 0; i < m; ++i) v[i] = std::sin(x[i] + j) + 0.3 * x[(i + j) % m];
    return v;
  };
  wild.hh = [m](const Eigen::VectorXd&, int) { return Eigen::VectorXd::Zero(m); };
  CHECK(build_general_pairwise_loss(wild, DataMatrix(xr), Domain::RealLine).min_block_eigenvalue() >=
        -1e-10);

  // dimension mismatch is a contract error
  PairwiseStatSpec bad = spec;
  bad.h = [](const Eigen::VectorXd&, int) { return Eigen::VectorXd::Zero(2); };
  CHECK_THROWS_AS(build_general_pairwise_loss(bad, DataMatrix(xr), Domain::RealLine),
                  std::invalid_argument);
}

TEST_CASE("population gaussian loss and stationarity") {
  QuadraticLoss id = population_gaussian_loss(Eigen::MatrixXd::Identity(3, 3));
  CHECK((id.block(0) - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);

  const Eigen::MatrixXd sigma = meinshausen_sigma(0.3);
  QuadraticLoss pop = population_gaussian_loss(sigma);
  CHECK((pop.block(2) - sigma).cwiseAbs().maxCoeff() == 0.0);
  const Eigen::MatrixXd kstar = sigma.inverse();
  ParameterVector theta = ParameterVector::from_matrix(pop.layout(), 0.5 * (kstar + kstar.transpose()));
  // population stationarity: Gamma* vec(K*) = g*, i.e. zero reduced gradient
  CHECK(pop.grad_reduced(theta.reduced()).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("truncated location family adds unpenalized singletons") {
  Rng rng(8);
  Eigen::MatrixXd xp = random_matrix(rng, 12, 3, 0, 2);
  QuadraticLoss loss = build_truncated_location_loss(DataMatrix(xp));
  CHECK(loss.block_size() == 4);
  CHECK(loss.layout()->num_singleton_sets() == 1);
  // oracle check: log q = -x'Kx/2 + eta'x on the orthant
  Eigen::MatrixXd k = random_symmetric(rng, 3);
  Eigen::VectorXd eta = random_matrix(rng, 3, 1);
  ParameterVector theta(loss.layout());
  for (int j = 0; j < 3; ++j) {
    theta.reduced()[loss.layout()->diag_id(0, j)] = k(j, j);
    theta.reduced()[loss.layout()->singleton_id(0, j)] = eta[j];
    for (int l = j + 1; l < 3; ++l) theta.reduced()[loss.layout()->pair_id(0, j, l)] = k(j, l);
  }
  const oracle::LogDensity logq = [&](const Eigen::VectorXd& x) {
    return -0.5 * x.dot(k * x) + eta.dot(x);
  };
  const auto zero_logq = [](const Eigen::VectorXd&) { return 0.0; };
  const double lhs = oracle::empirical_loss(logq, xp, true) -
                     oracle::empirical_loss(zero_logq, xp, true);
  const double rhs = loss.value(theta) - loss.constant();
  CHECK(std::abs(lhs - rhs) <= 1e-6 * std::max(1.0, std::abs(rhs)));
}
