#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

#include "rds/graph.hpp"
#include "rds/sampler.hpp"

namespace rds {

// Two-block chain with diagonal entries p and q.
struct TwoBlockParams {
  double p = 0.5;
  double q = 0.5;

  double lambda2() const { return p + q - 1.0; }
  Eigen::Vector2d stationary() const { return {(1.0 - q) / (2.0 - p - q), (1.0 - p) / (2.0 - p - q)}; }
  Eigen::Matrix2d transition() const;
};

// Node-level realization of a blockmodel: block a holds nodes
// a*block_size .. (a+1)*block_size - 1, and every ordered node pair (i, j),
// including i == j, carries weight W(b(i), b(j)).
struct NodeExpansion {
  WeightedGraph graph;
  std::vector<int> assignment;     // b(i)
  std::vector<double> node_trait;  // y(b(i))
};

// k-block model: a reversible block transition matrix, one trait value per
// block, and optionally an equal-size node expansion.
class BlockModel {
 public:
  // Expansion weights default to W = k * diag(pi) P, which is symmetric
  // because P is reversible. block_size 0 means no expansion.
  static BlockModel from_transition(const Eigen::MatrixXd& p, std::vector<double> trait,
                                    std::size_t block_size = 0);
  // W symmetric and nonnegative with positive row sums; P = D^{-1} W.
  static BlockModel from_weights(const Eigen::MatrixXd& w, std::vector<double> trait,
                                 std::size_t block_size = 0);
  static BlockModel two_block(const TwoBlockParams& params, std::vector<double> trait,
                              std::size_t block_size = 0);

  std::size_t k() const { return trait_.size(); }
  const TransitionMatrix& transition() const { return transition_; }
  const std::vector<double>& trait() const { return trait_; }
  const Eigen::MatrixXd& block_weights() const { return weights_; }
  bool has_expansion() const { return block_size_ > 0; }
  std::size_t block_size() const { return block_size_; }
  std::size_t node_count() const { return block_size_ * k(); }

  // Degree shared by every node of each block in the expansion.
  std::vector<double> block_degrees() const;
  // vol(G) / N of the expansion.
  double mean_degree() const;
  // Population mean of the trait over nodes (blocks are equal-sized).
  double true_mean() const;

  NodeExpansion expand() const;

 private:
  BlockModel(TransitionMatrix p, Eigen::MatrixXd w, std::vector<double> trait, std::size_t block_size);

  TransitionMatrix transition_;
  Eigen::MatrixXd weights_;
  std::vector<double> trait_;
  std::size_t block_size_ = 0;
};

// The k x k block chain, validated as reversible.
TransitionMatrix block_process_from(const BlockModel& model);

// B_v = b(X_v) on the same tree; traits and degrees carry over.
RdsSample project_node_walk(const RdsSample& node_walk, std::span<const int> assignment);

// mu_a = sum over b(i) = a of nu_i.
std::vector<double> induced_block_seed(std::span<const double> nu, std::span<const int> assignment,
                                       std::size_t k);

// JSON text with keys "k", "transition" (rows) or "block_weights", "trait",
// and optional "block_size". Unknown keys are errors.
BlockModel parse_blockmodel_json(const std::string& text);
std::string blockmodel_to_json(const BlockModel& model);

}  // namespace rds
