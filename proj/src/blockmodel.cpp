#include "rds/blockmodel.hpp"

#include <cmath>

#include "json.hpp"
#include "rds/error.hpp"
#include "rds/json_config.hpp"

namespace rds {

Eigen::Matrix2d TwoBlockParams::transition() const {
  Eigen::Matrix2d m;
  m << p, 1.0 - p, 1.0 - q, q;
  return m;
}

BlockModel::BlockModel(TransitionMatrix p, Eigen::MatrixXd w, std::vector<double> trait, std::size_t block_size)
    : transition_(std::move(p)), weights_(std::move(w)), trait_(std::move(trait)), block_size_(block_size) {
  if (trait_.size() != transition_.size()) {
    throw InputError("block trait has " + std::to_string(trait_.size()) + " entries for " +
                     std::to_string(transition_.size()) + " blocks");
  }
}

BlockModel BlockModel::from_transition(const Eigen::MatrixXd& p, std::vector<double> trait, std::size_t block_size) {
  TransitionMatrix tm = TransitionMatrix::from_matrix(p);
  const auto k = static_cast<double>(tm.size());
  Eigen::MatrixXd w = k * tm.stationary().asDiagonal() * tm.matrix();
  w = 0.5 * (w + w.transpose()).eval();
  return BlockModel(std::move(tm), std::move(w), std::move(trait), block_size);
}

BlockModel BlockModel::from_weights(const Eigen::MatrixXd& w, std::vector<double> trait, std::size_t block_size) {
  if (w.rows() != w.cols() || w.rows() == 0) throw InputError("block weights must be a nonempty square matrix");
  if ((w - w.transpose()).cwiseAbs().maxCoeff() > 0.0) throw InputError("block weights must be symmetric");
  if (w.minCoeff() < 0.0) throw InputError("block weights must be nonnegative");
  const Eigen::VectorXd rows = w.rowwise().sum();
  if (rows.minCoeff() <= 0.0) throw InputError("every block needs positive total weight");
  Eigen::MatrixXd p = rows.cwiseInverse().asDiagonal() * w;
  TransitionMatrix tm(std::move(p), rows / rows.sum());
  return BlockModel(std::move(tm), w, std::move(trait), block_size);
}

BlockModel BlockModel::two_block(const TwoBlockParams& params, std::vector<double> trait, std::size_t block_size) {
  if (!(params.p > 0.0 && params.p < 1.0 && params.q > 0.0 && params.q < 1.0)) {
    throw InputError("two-block p and q must lie in (0, 1)");
  }
  const Eigen::Vector2d pi = params.stationary();
  TransitionMatrix tm(params.transition(), pi);
  // W_01 = 2 pi_0 (1-p) = 2 pi_1 (1-q) exactly in exact arithmetic; keep one.
  Eigen::MatrixXd w(2, 2);
  w(0, 0) = 2.0 * pi(0) * params.p;
  w(1, 1) = 2.0 * pi(1) * params.q;
  w(0, 1) = w(1, 0) = 2.0 * pi(0) * (1.0 - params.p);
  return BlockModel(std::move(tm), std::move(w), std::move(trait), block_size);
}

std::vector<double> BlockModel::block_degrees() const {
  std::vector<double> d(k());
  for (std::size_t a = 0; a < k(); ++a) d[a] = static_cast<double>(block_size_) * weights_.row(static_cast<Eigen::Index>(a)).sum();
  return d;
}

double BlockModel::mean_degree() const {
  const auto d = block_degrees();
  double total = 0.0;
  for (double v : d) total += v;
  return total / static_cast<double>(k());
}

double BlockModel::true_mean() const {
  double total = 0.0;
  for (double v : trait_) total += v;
  return total / static_cast<double>(k());
}

NodeExpansion BlockModel::expand() const {
  if (!has_expansion()) throw InputError("blockmodel has no node expansion (block_size is 0)");
  const std::size_t n = node_count();
  NodeExpansion out;
  out.assignment.resize(n);
  out.node_trait.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.assignment[i] = static_cast<int>(i / block_size_);
    out.node_trait[i] = trait_[i / block_size_];
  }
  std::vector<Edge> edges;
  edges.reserve(n * (n + 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double w = weights_(out.assignment[i], out.assignment[j]);
      if (w > 0.0) edges.push_back({static_cast<int>(i), static_cast<int>(j), w});
    }
  }
  out.graph = WeightedGraph(n, edges);
  return out;
}

TransitionMatrix block_process_from(const BlockModel& model) { return model.transition(); }

RdsSample project_node_walk(const RdsSample& node_walk, std::span<const int> assignment) {
  RdsSample out = node_walk;
  for (int& s : out.states) {
    if (s < 0 || static_cast<std::size_t>(s) >= assignment.size() || assignment[static_cast<std::size_t>(s)] < 0) {
      throw InputError("node " + std::to_string(s) + " has no block label");
    }
    s = assignment[static_cast<std::size_t>(s)];
  }
  if (node_walk.seed_state >= 0 && static_cast<std::size_t>(node_walk.seed_state) < assignment.size()) {
    out.seed_state = assignment[static_cast<std::size_t>(node_walk.seed_state)];
  }
  return out;
}

std::vector<double> induced_block_seed(std::span<const double> nu, std::span<const int> assignment, std::size_t k) {
  if (nu.size() != assignment.size()) throw InputError("seed law and assignment differ in length");
  std::vector<double> mu(k, 0.0);
  for (std::size_t i = 0; i < nu.size(); ++i) {
    const int b = assignment[i];
    if (b < 0 || static_cast<std::size_t>(b) >= k) throw InputError("node " + std::to_string(i) + " has no block label");
    mu[static_cast<std::size_t>(b)] += nu[i];
  }
  return mu;
}

BlockModel blockmodel_from_json(const nlohmann::json& j, const std::string& path) {
  check_keys(j, path, {"k", "transition", "block_weights", "trait", "block_size", "p", "q"});
  const std::size_t block_size = j.contains("block_size") ? get_size(j, path, "block_size") : 0;
  std::vector<double> trait = get_vector(j, path, "trait");
  const int given = int(j.contains("transition")) + int(j.contains("block_weights")) + int(j.contains("p") || j.contains("q"));
  if (given != 1) throw ConfigError(path, "exactly one of transition, block_weights or p/q is required");

  BlockModel model = [&] {
    try {
      if (j.contains("p") || j.contains("q")) {
        return BlockModel::two_block({get_number(j, path, "p"), get_number(j, path, "q")}, trait, block_size);
      }
      const char* key = j.contains("transition") ? "transition" : "block_weights";
      Eigen::MatrixXd m = get_matrix(j, path, key);
      return j.contains("transition") ? BlockModel::from_transition(m, trait, block_size)
                                      : BlockModel::from_weights(m, trait, block_size);
    } catch (const InputError& e) {
      throw ConfigError(path, e.what());
    }
  }();
  if (j.contains("k") && get_size(j, path, "k") != model.k()) {
    throw ConfigError(path + ".k", "does not match the matrix dimension");
  }
  return model;
}

nlohmann::json blockmodel_to_json_value(const BlockModel& model) {
  nlohmann::json j;
  j["k"] = model.k();
  nlohmann::json rows = nlohmann::json::array();
  const Eigen::MatrixXd& p = model.transition().matrix();
  for (Eigen::Index a = 0; a < p.rows(); ++a) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index b = 0; b < p.cols(); ++b) row.push_back(p(a, b));
    rows.push_back(row);
  }
  j["transition"] = rows;
  j["trait"] = model.trait();
  if (model.has_expansion()) j["block_size"] = model.block_size();
  return j;
}

BlockModel parse_blockmodel_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("$", e.what());
  }
  return blockmodel_from_json(j, "$");
}

std::string blockmodel_to_json(const BlockModel& model) { return blockmodel_to_json_value(model).dump(2); }

}  // namespace rds
