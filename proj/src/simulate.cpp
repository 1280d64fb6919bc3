#include "scorematch/simulate.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "scorematch/errors.hpp"

namespace scorematch {

namespace {

double min_eigenvalue(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Graph graph_from_pattern(const Eigen::MatrixXd& k, double tol) {
  Graph g;
  g.m = static_cast<int>(k.rows());
  for (int j = 0; j < g.m; ++j)
    for (int l = j + 1; l < g.m; ++l)
      if (std::abs(k(j, l)) > tol) g.add_edge(j, l);
  return g;
}

TruthSpec gaussian_truth(Eigen::MatrixXd k, Eigen::MatrixXd sigma, Graph graph, std::uint64_t seed) {
  TruthSpec t;
  t.graph = std::move(graph);
  t.family = FamilySpec::make(Family::GaussianCentered);
  t.interaction = std::move(k);
  t.sigma = std::move(sigma);
  t.seed = seed;
  return t;
}

}  // namespace

GraphKind graph_kind_from_name(const std::string& name) {
  if (name == "chain") return GraphKind::Chain;
  if (name == "lattice" || name == "lattice2d") return GraphKind::Lattice2d;
  if (name == "star") return GraphKind::Star;
  if (name == "hub-lattice" || name == "hub_lattice") return GraphKind::HubLattice;
  if (name == "erdos-renyi" || name == "er") return GraphKind::ErdosRenyi;
  throw std::invalid_argument("unknown graph kind: " + name);
}

Graph gen_graph(GraphKind kind, const GraphParams& params, Rng rng) {
  Graph g;
  switch (kind) {
    case GraphKind::Chain: {
      if (params.m < 2) throw std::invalid_argument("gen_graph: chain needs m >= 2");
      g.m = params.m;
      for (int j = 0; j + 1 < params.m; ++j) g.add_edge(j, j + 1);
      return g;
    }
    case GraphKind::Lattice2d: {
      if (params.side < 2) throw std::invalid_argument("gen_graph: lattice needs side >= 2");
      const int s = params.side;
      g.m = s * s;
      for (int r = 0; r < s; ++r)
        for (int c = 0; c < s; ++c) {
          const int id = r * s + c;
          if (c + 1 < s) g.add_edge(id, id + 1);
          if (r + 1 < s) g.add_edge(id, id + s);
        }
      return g;
    }
    case GraphKind::Star: {
      if (params.degree < 1 || params.degree >= params.m)
        throw std::invalid_argument("gen_graph: star needs 1 <= degree < m");
      g.m = params.m;
      for (int k = 1; k <= params.degree; ++k) g.add_edge(0, k);
      return g;
    }
    case GraphKind::HubLattice: {
      if (params.side < 2 || params.components < 1)
        throw std::invalid_argument("gen_graph: hub lattice needs side >= 2, components >= 1");
      const int s = params.side;
      const int per = s * s;
      if (params.hub_degree >= per)
        throw std::invalid_argument("gen_graph: hub degree must be below the component size");
      g.m = per * params.components;
      for (int comp = 0; comp < params.components; ++comp) {
        const int base = comp * per;
        for (int r = 0; r < s; ++r)
          for (int c = 0; c < s; ++c) {
            const int id = base + r * s + c;
            if (c + 1 < s) g.add_edge(id, id + 1);
            if (r + 1 < s) g.add_edge(id, id + s);
          }
        // hubs: distinct random nodes, each filled up to hub_degree with
        // random distinct partners inside the component
        std::vector<int> hubs;
        while (static_cast<int>(hubs.size()) < params.hubs) {
          const int cand = base + static_cast<int>(rng.uniform_int(per));
          if (std::find(hubs.begin(), hubs.end(), cand) == hubs.end()) hubs.push_back(cand);
        }
        for (int hub : hubs) {
          std::vector<int> deg = g.degrees();
          int guard = 0;
          while (deg[hub] < params.hub_degree && ++guard < 100000) {
            const int cand = base + static_cast<int>(rng.uniform_int(per));
            if (cand == hub || g.has_edge(hub, cand)) continue;
            g.add_edge(hub, cand);
            ++deg[hub];
          }
        }
      }
      return g;
    }
    case GraphKind::ErdosRenyi: {
      if (params.m < 2) throw std::invalid_argument("gen_graph: need m >= 2");
      if (!(params.edge_prob >= 0.0 && params.edge_prob <= 1.0))
        throw std::invalid_argument("gen_graph: edge probability must be in [0,1]");
      g.m = params.m;
      for (int j = 0; j < params.m; ++j)
        for (int k = j + 1; k < params.m; ++k)
          if (rng.uniform() < params.edge_prob) g.add_edge(j, k);
      return g;
    }
  }
  throw std::logic_error("unreachable");
}

TruthSpec precision_peng(const Graph& graph, Rng rng) {
  if (graph.num_edges() == 0) throw std::invalid_argument("precision_peng: graph has no edges");
  const int m = graph.m;
  for (int attempt = 0; attempt < 10; ++attempt) {
    Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(m, m);
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        if (j != k && graph.has_edge(j, k)) raw(j, k) = rng.uniform(0.5, 1.0);
    for (int j = 0; j < m; ++j) {
      double rowsum = 0;
      for (int k = 0; k < m; ++k)
        if (k != j) rowsum += std::abs(raw(j, k));
      if (rowsum > 0) raw.row(j) /= 1.5 * rowsum;
    }
    Eigen::MatrixXd sym = 0.5 * (raw + raw.transpose());
    sym.diagonal().setOnes();
    if (min_eigenvalue(sym) <= 1e-10) continue;  // redraw
    const Eigen::MatrixXd inv = sym.inverse();
    Eigen::VectorXd d = inv.diagonal().cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd sigma = d.asDiagonal() * inv * d.asDiagonal();
    sigma = 0.5 * (sigma + sigma.transpose());
    Eigen::MatrixXd k = sigma.inverse();
    k = 0.5 * (k + k.transpose());
    TruthSpec t = gaussian_truth(std::move(k), std::move(sigma), graph, rng.seed());
    return t;
  }
  throw std::runtime_error("precision_peng: failed to obtain a positive definite matrix");
}

TruthSpec precision_block_uniform(int num_blocks, int block_size, Rng rng) {
  if (num_blocks < 1 || block_size < 2)
    throw std::invalid_argument("precision_block_uniform: need blocks >= 1, block size >= 2");
  const int m = num_blocks * block_size;
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(m, m);
  for (int blk = 0; blk < num_blocks; ++blk) {
    const int base = blk * block_size;
    for (int j = 0; j < block_size; ++j)
      for (int l = 0; l < j; ++l) {
        const bool nonzero = rng.uniform() < 0.8;
        const double v = nonzero ? rng.uniform(0.5, 1.0) : 0.0;
        k(base + j, base + l) = k(base + l, base + j) = v;
      }
  }
  // Common diagonal value placing the smallest eigenvalue at 0.1.  The
  // eigenvalue is affine in the shared value, so the shift is exact.
  const double shift = 0.1 - min_eigenvalue(k);
  k.diagonal().setConstant(shift);

  TruthSpec t;
  t.graph = graph_from_pattern(k, 0.0);
  t.family = FamilySpec::make(Family::TruncatedGaussianCentered);
  t.interaction = k;
  t.sigma = k.inverse();
  t.seed = rng.seed();
  return t;
}

TruthSpec precision_discrete(int m, double target_min_eig, Rng rng) {
  if (m < 2) throw std::invalid_argument("precision_discrete: need m >= 2");
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
  for (int j = 0; j < m; ++j)
    for (int l = 0; l < j; ++l) {
      const double u = rng.uniform();
      double v = 0.0;
      if (u < 0.01)
        v = -1.0;
      else if (u > 0.99)
        v = 1.0;
      a(j, l) = a(l, j) = v;
    }
  Eigen::VectorXd diag(m);
  for (int j = 0; j < m; ++j) {
    int deg = 0;
    for (int l = 0; l < m; ++l)
      if (l != j && a(j, l) != 0.0) ++deg;
    diag[j] = 1.0 + deg;
  }
  auto with_factor = [&](double c) {
    Eigen::MatrixXd k = a;
    k.diagonal() = c * diag;
    return k;
  };
  double lo = 0.0, hi = 1.0;
  if (min_eigenvalue(with_factor(1.0)) < target_min_eig - 1e-9)
    throw std::invalid_argument("precision_discrete: target exceeds the unscaled minimum eigenvalue");
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f = min_eigenvalue(with_factor(mid)) - target_min_eig;
    if (std::abs(f) < 1e-4) {
      lo = hi = mid;
      break;
    }
    (f < 0 ? lo : hi) = mid;
  }
  const double c = 0.5 * (lo + hi);
  Eigen::MatrixXd k = with_factor(c);
  TruthSpec t = gaussian_truth(k, k.inverse(), graph_from_pattern(k, 0.0), rng.seed());
  return t;
}

TruthSpec truth_chain(int m, double edge_value) {
  Graph g = gen_graph(GraphKind::Chain, {.m = m});
  Eigen::MatrixXd k = Eigen::MatrixXd::Identity(m, m);
  for (int j = 0; j + 1 < m; ++j) k(j, j + 1) = k(j + 1, j) = edge_value;
  return gaussian_truth(k, k.inverse(), std::move(g), 0);
}

TruthSpec truth_lattice(int side, double edge_value) {
  Graph g = gen_graph(GraphKind::Lattice2d, {.side = side});
  const int m = g.m;
  Eigen::MatrixXd k = Eigen::MatrixXd::Identity(m, m);
  for (const auto& [j, l] : g.edges) k(j, l) = k(l, j) = edge_value;
  return gaussian_truth(k, k.inverse(), std::move(g), 0);
}

TruthSpec truth_star_sigma(int m, int degree, double numerator) {
  Graph star = gen_graph(GraphKind::Star, {.m = m, .degree = degree});
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(m, m);
  for (const auto& [j, l] : star.edges) sigma(j, l) = sigma(l, j) = numerator / degree;
  Eigen::MatrixXd k = sigma.inverse();
  k = 0.5 * (k + k.transpose());
  // The inverse of the star-patterned covariance fills in the hub
  // neighborhood, so the conditional independence graph comes from K.
  return gaussian_truth(k, std::move(sigma), graph_from_pattern(k, 1e-10), 0);
}

TruthSpec truth_star_kappa(int m, int degree, double numerator) {
  Graph star = gen_graph(GraphKind::Star, {.m = m, .degree = degree});
  Eigen::MatrixXd k = Eigen::MatrixXd::Identity(m, m);
  for (const auto& [j, l] : star.edges) k(j, l) = k(l, j) = numerator / degree;
  return gaussian_truth(k, k.inverse(), std::move(star), 0);
}

TruthSpec truth_normal_conditionals(const Graph& graph, double quartic_value, double b2_value,
                                    double b_value) {
  TruthSpec t;
  t.graph = graph;
  t.family = FamilySpec::make(Family::NormalConditionals);
  t.interaction = Eigen::MatrixXd::Zero(graph.m, graph.m);
  for (const auto& [j, l] : graph.edges) t.interaction(j, l) = t.interaction(l, j) = quartic_value;
  t.b2 = Eigen::VectorXd::Constant(graph.m, b2_value);
  t.b = Eigen::VectorXd::Constant(graph.m, b_value);
  return t;
}

DataMatrix sample_mvn(const Eigen::MatrixXd& sigma, int n, Rng rng) {
  if (n < 1) throw std::invalid_argument("sample_mvn: n must be positive");
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("sample_mvn: covariance must be positive definite");
  const int m = static_cast<int>(sigma.rows());
  const Eigen::MatrixXd l = llt.matrixL();
  Eigen::MatrixXd x(n, m);
  Eigen::VectorXd z(m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) z[j] = rng.normal();
    x.row(i) = (l * z).transpose();
  }
  return DataMatrix(std::move(x));
}

DataMatrix sample_truncated_mvn_gibbs(const Eigen::MatrixXd& k, int n, Rng rng, int burnin, int thin) {
  const int m = static_cast<int>(k.rows());
  if (n < 1) throw std::invalid_argument("sample_truncated_mvn_gibbs: n must be positive");
  if (thin < 1 || burnin < 0) throw std::invalid_argument("sample_truncated_mvn_gibbs: bad burnin/thin");
  if (min_eigenvalue(k) <= 0)
    throw std::invalid_argument("sample_truncated_mvn_gibbs: K must be positive definite");
  Eigen::MatrixXd x(n, m);
  Eigen::VectorXd state = Eigen::VectorXd::Ones(m);
  // Full conditional of X_j given the rest: N(mu_j, 1/k_jj) truncated to
  // [0, inf) with mu_j = -(sum_{l != j} k_jl x_l)/k_jj.
  auto sweep = [&]() {
    for (int j = 0; j < m; ++j) {
      const double kjj = k(j, j);
      const double dotv = k.col(j).dot(state) - kjj * state[j];
      const double mu = -dotv / kjj;
      state[j] = rng.normal_lower_trunc(mu, 1.0 / std::sqrt(kjj), 0.0);
    }
  };
  for (int it = 0; it < burnin; ++it) sweep();
  for (int kept = 0; kept < n; ++kept) {
    for (int it = 0; it < thin; ++it) sweep();
    x.row(kept) = state.transpose();
  }
  return DataMatrix(std::move(x));
}

DataMatrix sample_normal_conditionals_gibbs(const Eigen::MatrixXd& quartic, const Eigen::VectorXd& b2,
                                            const Eigen::VectorXd& b, int n, Rng rng, int burnin,
                                            int thin) {
  const int m = static_cast<int>(quartic.rows());
  if (quartic.cols() != m || b2.size() != m || b.size() != m)
    throw std::invalid_argument("sample_normal_conditionals_gibbs: dimension mismatch");
  if (n < 1) throw std::invalid_argument("sample_normal_conditionals_gibbs: n must be positive");
  if (thin < 1 || burnin < 0)
    throw std::invalid_argument("sample_normal_conditionals_gibbs: bad burnin/thin");
  Eigen::MatrixXd x(n, m);
  Eigen::VectorXd state = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd sq = state.cwiseProduct(state);
  // Conditional of X_j: coefficient of x_j^2 is a_j = b2_j + sum_{l != j}
  // B_jl x_l^2 and of x_j is b_j, i.e. N(-b_j/(2 a_j), -1/(2 a_j)).
  auto sweep = [&]() {
    for (int j = 0; j < m; ++j) {
      const double aj = b2[j] + quartic.col(j).dot(sq) - quartic(j, j) * sq[j];
      if (!(aj < 0))
        throw std::domain_error("normal-conditionals conditional is not normalizable at coordinate " +
                                std::to_string(j + 1));
      const double var = -0.5 / aj;  // -1/(2 a_j)
      state[j] = rng.normal(b[j] * var, std::sqrt(var));  // mean -b_j/(2 a_j)
      sq[j] = state[j] * state[j];
    }
  };
  for (int it = 0; it < burnin; ++it) sweep();
  for (int kept = 0; kept < n; ++kept) {
    for (int it = 0; it < thin; ++it) sweep();
    x.row(kept) = state.transpose();
  }
  return DataMatrix(std::move(x));
}

DataMatrix sample_mvt(const Eigen::MatrixXd& sigma, int df, int n, Rng rng) {
  if (df < 1) throw std::invalid_argument("sample_mvt: df must be >= 1");
  DataMatrix x = sample_mvn(sigma, n, rng);
  for (int i = 0; i < n; ++i) {
    const double w = rng.chi_squared(df);
    x.values.row(i) *= std::sqrt(df / w);
  }
  return x;
}

DataMatrix contaminate(const DataMatrix& x, double fraction, double noise_variance, Rng rng) {
  if (!(fraction >= 0.0 && fraction <= 1.0))
    throw std::invalid_argument("contaminate: fraction must be in [0,1]");
  if (!(noise_variance >= 0.0)) throw std::invalid_argument("contaminate: variance must be >= 0");
  DataMatrix out = x;
  const int n = x.n();
  const int count = static_cast<int>(std::ceil(fraction * n));
  if (count == 0) return out;
  // Partial Fisher-Yates for a uniform subset of rows.
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  for (int i = 0; i < count; ++i)
    std::swap(idx[i], idx[i + static_cast<int>(rng.uniform_int(n - i))]);
  const double sd = std::sqrt(noise_variance);
  for (int i = 0; i < count; ++i)
    for (int j = 0; j < x.m(); ++j) out.values(idx[i], j) = rng.normal(0.0, sd);
  return out;
}

DataMatrix sample_from_truth(const TruthSpec& truth, int n, Rng rng) {
  switch (truth.family.kind) {
    case Family::GaussianCentered:
      return sample_mvn(truth.sigma, n, rng);
    case Family::TruncatedGaussianCentered:
    case Family::TruncatedGaussianLocation:
      return sample_truncated_mvn_gibbs(truth.interaction, n, rng);
    case Family::NormalConditionals:
      return sample_normal_conditionals_gibbs(truth.interaction, truth.b2, truth.b, n, rng);
  }
  throw std::logic_error("unreachable");
}

}  // namespace scorematch
