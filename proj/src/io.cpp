#include "scorematch/io.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "scorematch/errors.hpp"

namespace scorematch::io {

using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path);
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

json matrix_to_json(const Eigen::MatrixXd& a) {
  json rows = json::array();
  for (int r = 0; r < a.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < a.cols(); ++c) row.push_back(a(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows) {
  const int nr = static_cast<int>(rows.size());
  if (nr == 0) return {};
  const int nc = static_cast<int>(rows.at(0).size());
  Eigen::MatrixXd a(nr, nc);
  for (int r = 0; r < nr; ++r) {
    if (static_cast<int>(rows.at(r).size()) != nc) throw std::runtime_error("ragged matrix in JSON");
    for (int c = 0; c < nc; ++c) a(r, c) = rows.at(r).at(c).get<double>();
  }
  return a;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd vector_from_json(const json& arr) {
  Eigen::VectorXd v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v[i] = arr.at(i).get<double>();
  return v;
}

// Edges serialize 1-based.
json graph_to_json(const Graph& g) {
  json edges = json::array();
  for (const auto& [j, k] : g.edges) edges.push_back(json::array({j + 1, k + 1}));
  return json{{"m", g.m}, {"edges", std::move(edges)}};
}

Graph graph_from_json(const json& jg) {
  Graph g;
  g.m = jg.at("m").get<int>();
  for (const auto& e : jg.at("edges")) g.add_edge(e.at(0).get<int>() - 1, e.at(1).get<int>() - 1);
  return g;
}

const char* termination_name(PathTermination t) {
  switch (t) {
    case PathTermination::GradientZero: return "gradient-zero";
    case PathTermination::RankLimit: return "rank-limit";
    case PathTermination::UserLambdaMin: return "user-lambda-min";
  }
  return "?";
}

PathTermination termination_from_name(const std::string& s) {
  if (s == "gradient-zero") return PathTermination::GradientZero;
  if (s == "rank-limit") return PathTermination::RankLimit;
  if (s == "user-lambda-min") return PathTermination::UserLambdaMin;
  throw std::runtime_error("unknown path termination: " + s);
}

json reduced_to_sparse(const ParamLayout& layout, const Eigen::VectorXd& u) {
  json out = json::array();
  for (int i = 0; i < u.size(); ++i)
    if (u[i] != 0.0) out.push_back(json::array({layout.coord_name(i), u[i]}));
  return out;
}

}  // namespace

LayoutPtr layout_for_family(Family family, int m) {
  switch (family) {
    case Family::GaussianCentered:
    case Family::TruncatedGaussianCentered:
      return ParamLayout::pairwise(m);
    case Family::TruncatedGaussianLocation:
      return ParamLayout::pairwise_with_location(m);
    case Family::NormalConditionals:
      return ParamLayout::normal_conditionals(m);
  }
  throw std::logic_error("unreachable");
}

DataMatrix read_data(const std::string& path) {
  if (ends_with(path, ".json")) {
    const json j = json::parse(slurp(path));
    DataMatrix data(matrix_from_json(j.at("values")));
    if (j.contains("n") && j.at("n").get<int>() != data.n())
      throw std::runtime_error("data JSON: n does not match values");
    if (j.contains("m") && j.at("m").get<int>() != data.m())
      throw std::runtime_error("data JSON: m does not match values");
    return data;
  }
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw DataError("non-numeric CSV cell: '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw DataError("ragged CSV row in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("empty data file " + path);
  Eigen::MatrixXd values(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows.front().size(); ++c) values(r, c) = rows[r][c];
  return DataMatrix(std::move(values));
}

void write_data_csv(const std::string& path, const DataMatrix& data) {
  std::ostringstream out;
  out.precision(17);
  for (int i = 0; i < data.n(); ++i) {
    for (int j = 0; j < data.m(); ++j) {
      if (j) out << ',';
      out << data.values(i, j);
    }
    out << '\n';
  }
  spit(path, out.str());
}

void write_truth_json(const std::string& path, const TruthSpec& truth) {
  json j{{"family", family_name(truth.family.kind)},
         {"seed", truth.seed},
         {"graph", graph_to_json(truth.graph)},
         {"interaction", matrix_to_json(truth.interaction)}};
  if (truth.sigma.size() > 0) j["sigma"] = matrix_to_json(truth.sigma);
  if (truth.b2.size() > 0) j["b2"] = vector_to_json(truth.b2);
  if (truth.b.size() > 0) j["b"] = vector_to_json(truth.b);
  spit(path, j.dump(2) + "\n");
}

TruthSpec read_truth_json(const std::string& path) {
  const json j = json::parse(slurp(path));
  TruthSpec t;
  t.family = FamilySpec::make(family_from_name(j.at("family").get<std::string>()));
  t.seed = j.value("seed", 0ull);
  t.graph = graph_from_json(j.at("graph"));
  t.interaction = matrix_from_json(j.at("interaction"));
  if (j.contains("sigma")) t.sigma = matrix_from_json(j.at("sigma"));
  if (j.contains("b2")) t.b2 = vector_from_json(j.at("b2"));
  if (j.contains("b")) t.b = vector_from_json(j.at("b"));
  return t;
}

void write_estimate_json(const std::string& path, const Estimate& estimate) {
  const auto& layout = *estimate.theta.layout();
  json sets = json::array();
  for (int a = 0; a < layout.num_sets(); ++a)
    sets.push_back(json{{"name", layout.set_name(a)}, {"values", matrix_to_json(estimate.theta.matrix(a))}});
  json singles = json::array();
  for (int l = 0; l < layout.num_singleton_sets(); ++l)
    singles.push_back(
        json{{"name", layout.singleton_name(l)}, {"values", vector_to_json(estimate.theta.singletons(l))}});
  json edges = json::array();
  for (const auto& [j, k] : support_edges(estimate.theta)) edges.push_back(json::array({j + 1, k + 1}));
  json j{{"lambda", estimate.lambda},
         {"kkt_residual", estimate.kkt_residual},
         {"iterations", estimate.iterations},
         {"converged", estimate.converged},
         {"m", layout.m()},
         {"matrices", std::move(sets)},
         {"singletons", std::move(singles)},
         {"support", std::move(edges)}};
  spit(path, j.dump(2) + "\n");
}

Estimate read_estimate_json(const std::string& path, const LayoutPtr& layout) {
  const json j = json::parse(slurp(path));
  Estimate est;
  est.lambda = j.at("lambda").get<double>();
  est.kkt_residual = j.at("kkt_residual").get<double>();
  est.iterations = j.at("iterations").get<int>();
  est.converged = j.at("converged").get<bool>();
  est.theta = ParameterVector(layout);
  const auto& matrices = j.at("matrices");
  for (int a = 0; a < layout->num_sets(); ++a) {
    const Eigen::MatrixXd mat = matrix_from_json(matrices.at(a).at("values"));
    if (!layout->diag_fixed_zero(a))
      for (int jj = 0; jj < layout->m(); ++jj)
        est.theta.reduced()[layout->diag_id(a, jj)] = mat(jj, jj);
    for (int jj = 0; jj < layout->m(); ++jj)
      for (int kk = jj + 1; kk < layout->m(); ++kk)
        est.theta.reduced()[layout->pair_id(a, jj, kk)] = mat(jj, kk);
  }
  const auto& singles = j.at("singletons");
  for (int l = 0; l < layout->num_singleton_sets(); ++l) {
    const Eigen::VectorXd v = vector_from_json(singles.at(l).at("values"));
    for (int jj = 0; jj < layout->m(); ++jj)
      est.theta.reduced()[layout->singleton_id(l, jj)] = v[jj];
  }
  return est;
}

void write_path_json(const std::string& path, const SolutionPath& sp) {
  const auto& layout = *sp.layout;
  json knots = json::array();
  for (std::size_t r = 0; r < sp.knots.size(); ++r) {
    json knot{{"lambda", sp.knots[r]}, {"coefficients", reduced_to_sparse(layout, sp.coefficients[r])}};
    knots.push_back(std::move(knot));
  }
  json segments = json::array();
  for (std::size_t r = 0; r < sp.num_segments(); ++r) {
    json act = json::array();
    for (int id : sp.active_sets[r]) {
      const CoordInfo& ci = layout.coord(id);
      act.push_back(json::array({ci.j + 1, ci.k + 1}));
    }
    segments.push_back(json{{"lambda_lo", sp.knots[r]},
                            {"lambda_hi", sp.knots[r + 1]},
                            {"slope", reduced_to_sparse(layout, sp.slopes[r])},
                            {"active", std::move(act)}});
  }
  json j{{"m", layout.m()},
         {"lambda_max", sp.lambda_max()},
         {"termination", termination_name(sp.termination)},
         {"knots", std::move(knots)},
         {"segments", std::move(segments)}};
  spit(path, j.dump() + "\n");
}

namespace {

Eigen::VectorXd sparse_to_reduced(const ParamLayout& layout, const json& arr) {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(layout.num_coords());
  std::map<std::string, int> names;
  for (int i = 0; i < layout.num_coords(); ++i) names[layout.coord_name(i)] = i;
  for (const auto& kv : arr) u[names.at(kv.at(0).get<std::string>())] = kv.at(1).get<double>();
  return u;
}

}  // namespace

SolutionPath read_path_json(const std::string& path, const LayoutPtr& layout) {
  const json j = json::parse(slurp(path));
  SolutionPath sp;
  sp.layout = layout;
  sp.termination = termination_from_name(j.at("termination").get<std::string>());
  for (const auto& knot : j.at("knots")) {
    sp.knots.push_back(knot.at("lambda").get<double>());
    sp.coefficients.push_back(sparse_to_reduced(*layout, knot.at("coefficients")));
  }
  for (const auto& seg : j.at("segments")) {
    sp.slopes.push_back(sparse_to_reduced(*layout, seg.at("slope")));
    std::vector<int> act;
    for (const auto& e : seg.at("active"))
      act.push_back(layout->pair_id(0, e.at(0).get<int>() - 1, e.at(1).get<int>() - 1));
    sp.active_sets.push_back(std::move(act));
  }
  return sp;
}

void write_path_csv(const std::string& path, const SolutionPath& sp) {
  const auto& layout = *sp.layout;
  std::ostringstream out;
  out.precision(12);
  out << "lambda,t,coord,value\n";
  for (std::size_t r = 0; r < sp.knots.size(); ++r) {
    double t_abs = 0;
    for (int id : layout.pair_coords())
      t_abs += layout.coord(id).n_locs * std::abs(sp.coefficients[r][id]);
    for (int i = 0; i < layout.num_coords(); ++i) {
      if (sp.coefficients[r][i] == 0.0 && layout.coord(i).kind == CoordKind::Pair) continue;
      out << sp.knots[r] << ',' << t_abs << ',' << layout.coord_name(i) << ','
          << sp.coefficients[r][i] << '\n';
    }
  }
  spit(path, out.str());
}

void write_loss_json(const std::string& path, const QuadraticLoss& loss) {
  const auto& layout = *loss.layout();
  json blocks = json::array();
  for (int j = 0; j < loss.m(); ++j) blocks.push_back(matrix_to_json(loss.block(j)));
  json names = json::array();
  for (int r = 0; r < layout.block_size(); ++r) {
    // Describe block-row meaning using block 0 as the template.
    if (r < layout.num_sets() * layout.m()) {
      const int set = r / layout.m();
      const int row = r % layout.m();
      names.push_back(layout.set_name(set) + "[" + std::to_string(row + 1) + ",j]");
    } else {
      names.push_back(layout.singleton_name(r - layout.num_sets() * layout.m()) + "[j]");
    }
  }
  json j{{"m", loss.m()},
         {"block_size", loss.block_size()},
         {"row_layout", std::move(names)},
         {"blocks", std::move(blocks)},
         {"g", vector_to_json(loss.g())},
         {"c", loss.constant()}};
  spit(path, j.dump() + "\n");
}

void write_roc_csv(const std::string& path, const RocCurve& curve) {
  std::ostringstream out;
  out.precision(12);
  out << "lambda,fpr,tpr\n";
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const double lam = i < curve.lambdas.size() ? curve.lambdas[i]
                                                : std::numeric_limits<double>::quiet_NaN();
    if (std::isnan(lam))
      out << "";  // empty lambda cell for synthetic sweeps
    else
      out << lam;
    out << ',' << curve.points[i].first << ',' << curve.points[i].second << '\n';
  }
  spit(path, out.str());
}

void write_recovery_csv(const std::string& path, const RecoveryTable& table) {
  std::ostringstream out;
  out.precision(12);
  out << "design,grid,n,rescaled_n,success,trials,failures\n";
  for (const auto& row : table.rows)
    out << design_name(table.design) << ',' << row.grid_value << ',' << row.n << ','
        << row.rescaled_n << ',' << row.success << ',' << row.trials << ',' << row.failures
        << '\n';
  spit(path, out.str());
}

void write_selection_json(const std::string& path, const EbicSelection& selection, double gamma,
                          bool refit) {
  json table = json::array();
  for (const auto& entry : selection.table)
    table.push_back(json{{"lambda", entry.lambda},
                         {"score", entry.score},
                         {"support", entry.support},
                         {"refit_ok", entry.refit_ok}});
  json j{{"lambda_star", selection.lambda},
         {"gamma", gamma},
         {"refit", refit},
         {"support_size", support_size(selection.estimate.theta)},
         {"table", std::move(table)}};
  spit(path, j.dump(2) + "\n");
}

void write_selection_csv(const std::string& path, const EbicSelection& selection) {
  std::ostringstream out;
  out.precision(12);
  out << "lambda,score,support,refit_ok\n";
  for (const auto& entry : selection.table)
    out << entry.lambda << ',' << entry.score << ',' << entry.support << ',' << entry.refit_ok
        << '\n';
  spit(path, out.str());
}

void write_theory_report_json(const std::string& path, const TheoryReport& report,
                              const std::string& extra_note) {
  json j{{"alpha", report.alpha},
         {"alpha_with_diag", report.alpha_with_diag},
         {"c_gamma_star", report.c_gamma_star},
         {"c_theta_star", report.c_theta_star},
         {"model_complexity", report.model_complexity},
         {"support_size", report.support.size()}};
  if (!extra_note.empty()) j["note"] = extra_note;
  spit(path, j.dump(2) + "\n");
}

}  // namespace scorematch::io
