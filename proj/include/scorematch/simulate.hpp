#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>

#include "scorematch/data_matrix.hpp"
#include "scorematch/graph.hpp"
#include "scorematch/losses.hpp"
#include "scorematch/rng.hpp"

namespace scorematch {

// Ground truth for a simulation: the graph, the interaction parameters, and
// the family they parameterize.  For Gaussian families `interaction` is K*
// and `sigma` its inverse; for normal conditionals the quartic matrix lives
// in `interaction` and (b2, b) hold the coefficients of x_j^2 and x_j.
struct TruthSpec {
  Graph graph;
  FamilySpec family;
  Eigen::MatrixXd interaction;        // K* or quartic B*
  Eigen::MatrixXd sigma;              // K*^-1 when applicable (size 0 otherwise)
  Eigen::VectorXd b2;                 // normal conditionals only
  Eigen::VectorXd b;                  // normal conditionals only
  std::uint64_t seed = 0;
};

struct GraphParams {
  int m = 0;            // chain/star/erdos_renyi node count
  int side = 0;         // lattice side length
  int degree = 0;       // star hub degree
  int components = 1;   // hub lattice components
  int hubs = 0;         // hubs per component
  int hub_degree = 0;   // degree of each hub
  double edge_prob = 0; // Erdos-Renyi
};

enum class GraphKind { Chain, Lattice2d, Star, HubLattice, ErdosRenyi };

GraphKind graph_kind_from_name(const std::string& name);

// chain/lattice/star are deterministic; hub selection and Erdos-Renyi draws
// come from the seed.
Graph gen_graph(GraphKind kind, const GraphParams& params, Rng rng = Rng(0));

// Sparse diagonally dominant construction: U[0.5,1] edge weights, rows
// rescaled by 1.5x their absolute off-diagonal sum, symmetrized by averaging,
// unit diagonal, inverted and converted to a correlation matrix.
TruthSpec precision_peng(const Graph& graph, Rng rng);

// Block-diagonal truncated-Gaussian design: within each block the lower
// triangle is 0 w.p. 0.2 and U[0.5,1] w.p. 0.8; a common diagonal value puts
// the minimum eigenvalue at 0.1.
TruthSpec precision_block_uniform(int num_blocks, int block_size, Rng rng);

// Contamination-study design: lower-triangular entries -1/0/1 w.p.
// 0.01/0.98/0.01, diagonal 1 + row support size, then the diagonal is scaled
// down by a common factor to reach the target minimum eigenvalue.
TruthSpec precision_discrete(int m, double target_min_eig, Rng rng);

// Chain / lattice / star interaction matrices with the fixed edge weights
// used by the scaling experiments (chain 0.3, lattice 0.2, star via
// sigma_jk = 2.5/d on the covariance side unless kappa parameterization is
// chosen).
TruthSpec truth_chain(int m, double edge_value = 0.3);
TruthSpec truth_lattice(int side, double edge_value = 0.2);
TruthSpec truth_star_sigma(int m, int degree, double numerator = 2.5);
TruthSpec truth_star_kappa(int m, int degree, double numerator = 2.5);
// Normal-conditionals truth on a graph: quartic interactions `quartic_value`
// on edges, x_j^2 coefficients b2_value, x_j coefficients b_value.
TruthSpec truth_normal_conditionals(const Graph& graph, double quartic_value, double b2_value,
                                    double b_value);

DataMatrix sample_mvn(const Eigen::MatrixXd& sigma, int n, Rng rng);

// Coordinate Gibbs sampler for N(0, K^-1) truncated to the non-negative
// orthant; discards `burnin` sweeps then keeps every `thin`-th state.
DataMatrix sample_truncated_mvn_gibbs(const Eigen::MatrixXd& k, int n, Rng rng, int burnin = 100,
                                      int thin = 10);

// Gibbs sampler for the normal-conditionals density; requires
// b2_j + sum_{k != j} B_jk x_k^2 < 0 along the chain.
DataMatrix sample_normal_conditionals_gibbs(const Eigen::MatrixXd& quartic, const Eigen::VectorXd& b2,
                                            const Eigen::VectorXd& b, int n, Rng rng, int burnin = 100,
                                            int thin = 10);

// Multivariate t with scatter matrix `sigma` (documented convention; the
// covariance is df/(df-2) * sigma for df > 2).
DataMatrix sample_mvt(const Eigen::MatrixXd& sigma, int df, int n, Rng rng);

// Replace ceil(fraction * n) randomly chosen rows by iid N(0, noise_variance).
DataMatrix contaminate(const DataMatrix& x, double fraction, double noise_variance, Rng rng);

// Data generation matching the truth family.
DataMatrix sample_from_truth(const TruthSpec& truth, int n, Rng rng);

}  // namespace scorematch
