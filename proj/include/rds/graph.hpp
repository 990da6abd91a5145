#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rds/rng.hpp"

namespace rds {

struct Edge {
  int u = 0;
  int v = 0;
  double weight = 1.0;
};

struct Neighbor {
  int node = 0;
  double weight = 0.0;
};

// Undirected weighted population graph with dense 0-based node ids.
// Immutable after construction. Self-weights are kept only when supplied.
class WeightedGraph {
 public:
  WeightedGraph() = default;

  // Duplicate entries for the same unordered pair collapse to the max weight.
  // Labels default to the decimal node ids.
  WeightedGraph(std::size_t node_count, std::span<const Edge> edges,
                std::vector<std::string> labels = {});

  std::size_t node_count() const { return adjacency_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  bool empty() const { return adjacency_.empty(); }

  std::span<const Neighbor> neighbors(int i) const { return adjacency_[static_cast<std::size_t>(i)]; }
  double degree(int i) const { return degree_[static_cast<std::size_t>(i)]; }
  std::span<const double> degrees() const { return degree_; }
  double volume() const { return volume_; }
  double weight(int i, int j) const;

  const std::string& label(int i) const { return labels_[static_cast<std::size_t>(i)]; }
  const std::vector<std::string>& labels() const { return labels_; }

  // Each undirected pair once, u <= v, sorted by (u, v).
  std::vector<Edge> edges() const;

  // Dense weighted adjacency matrix A.
  Eigen::MatrixXd adjacency_matrix() const;

  // Labeled equality: same labels on the same weighted edges, regardless of
  // the internal id assignment.
  friend bool operator==(const WeightedGraph& a, const WeightedGraph& b);

 private:
  std::vector<std::vector<Neighbor>> adjacency_;
  std::vector<double> degree_;
  std::vector<std::string> labels_;
  std::size_t edge_count_ = 0;
  double volume_ = 0.0;
};

// Row-stochastic, reversible transition matrix with its stationary law.
class TransitionMatrix {
 public:
  static constexpr double kTolerance = 1e-12;

  TransitionMatrix() = default;

  // Validates row sums, positivity and normalization of pi, and detailed
  // balance, all at kTolerance. Throws InputError on violation.
  TransitionMatrix(Eigen::MatrixXd p, Eigen::VectorXd stationary);

  // Stationary law solved from pi P = pi; then validated as above.
  static TransitionMatrix from_matrix(Eigen::MatrixXd p);

  std::size_t size() const { return static_cast<std::size_t>(p_.rows()); }
  const Eigen::MatrixXd& matrix() const { return p_; }
  const Eigen::VectorXd& stationary() const { return pi_; }
  double operator()(int i, int j) const { return p_(i, j); }

  // Draws the next state from row `from`.
  int step(int from, Rng& rng) const;

  // Largest |pi_i P_ij - pi_j P_ji|.
  double balance_defect() const;

 private:
  void build_row_samplers();

  Eigen::MatrixXd p_;
  Eigen::VectorXd pi_;
  // CSR layout of the nonzero entries of each row with cumulative weights.
  std::vector<std::size_t> row_start_;
  std::vector<int> col_;
  std::vector<double> cumulative_;
};

// P_ij = w_ij / deg(i), pi(i) = deg(i) / vol(G).
TransitionMatrix build_transition(const WeightedGraph& graph);

struct EdgeListFormat {
  char comment = '#';
  // When false a third column is a parse error.
  bool allow_weights = true;
};

// Reads "u v [w]" lines. Labels are arbitrary strings mapped to ids in order of
// first appearance. Both directions of a pair collapse to the max weight.
WeightedGraph read_edge_list(std::istream& in, const EdgeListFormat& format = {});
WeightedGraph read_edge_list_file(const std::string& path, const EdgeListFormat& format = {});

// Sorted "u v w" lines using node labels.
void write_edge_list(const WeightedGraph& graph, std::ostream& out);

struct ComponentExtraction {
  WeightedGraph graph;
  std::vector<int> old_to_new;  // -1 for nodes outside the component
  std::vector<int> new_to_old;
};

// Induced subgraph on the largest connected component; new ids follow the
// old id order. Ties go to the component holding the smallest old id.
ComponentExtraction largest_connected_component(const WeightedGraph& graph);

bool is_connected(const WeightedGraph& graph);

}  // namespace rds

namespace rds {

// Reads "label value" lines into a per-node vector. Every node of `graph`
// must receive a value; labels not in the graph are skipped so one trait file
// serves the full network and its largest component.
std::vector<double> read_node_values(std::istream& in, const WeightedGraph& graph);
std::vector<double> read_node_values_file(const std::string& path, const WeightedGraph& graph);
void write_node_values(const WeightedGraph& graph, std::span<const double> values, std::ostream& out);

}  // namespace rds
