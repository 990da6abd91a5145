#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "rds/rng.hpp"

namespace rds {

// Offspring distribution of a referral tree, held as a pmf over 0..max.
class OffspringLaw {
 public:
  enum class Kind { Deterministic, OnePlusBinomial, Custom };

  static OffspringLaw deterministic(int m);
  // 1 + Binomial(trials, prob).
  static OffspringLaw one_plus_binomial(int trials, double prob);
  static OffspringLaw custom(std::vector<double> pmf);

  Kind kind() const { return kind_; }
  std::span<const double> pmf() const { return pmf_; }
  int max_offspring() const { return static_cast<int>(pmf_.size()) - 1; }
  double mean() const { return mean_; }
  // Parameters of the named kinds (m; trials and prob).
  int trials() const { return trials_; }
  double prob() const { return prob_; }

  int sample(Rng& rng) const;

 private:
  OffspringLaw(Kind kind, std::vector<double> pmf);

  Kind kind_ = Kind::Custom;
  std::vector<double> pmf_;
  std::vector<double> cdf_;
  double mean_ = 0.0;
  int trials_ = 0;
  double prob_ = 0.0;
};

// Rooted referral tree. Vertex 0 is the seed; vertices are stored in
// breadth-first order, so every generation-t vertex precedes every
// generation-(t+1) vertex and the children of a vertex are contiguous.
class ReferralTree {
 public:
  ReferralTree() : ReferralTree(std::vector<int>{-1}) {}

  // parents[0] must be -1 and parents[k] in [0, k), non-decreasing in k.
  explicit ReferralTree(std::vector<int> parents);

  std::size_t size() const { return parent_.size(); }
  int parent(int v) const { return parent_[static_cast<std::size_t>(v)]; }
  int generation(int v) const { return generation_[static_cast<std::size_t>(v)]; }
  int child_count(int v) const { return child_count_[static_cast<std::size_t>(v)]; }
  int first_child(int v) const { return first_child_[static_cast<std::size_t>(v)]; }
  // Degree of v as a vertex of the tree: children plus one edge to the parent.
  int tree_degree(int v) const { return child_count(v) + (v == 0 ? 0 : 1); }
  int depth() const { return generation_.back(); }
  std::span<const int> parents() const { return parent_; }

  // Vertices per generation, 0..depth().
  std::vector<std::size_t> generation_sizes() const;
  // Number of vertices with generation <= t.
  std::size_t count_through_generation(int t) const;

  // Tree on the first n vertices (a BFS prefix is always a tree).
  ReferralTree prefix(std::size_t n) const;
  ReferralTree truncate_to_generation(int t) const;

  // Path length between two vertices.
  int distance(int a, int b) const;
  // All pairwise distances, row-major n x n.
  std::vector<int> distance_matrix() const;

  friend bool operator==(const ReferralTree& a, const ReferralTree& b) { return a.parent_ == b.parent_; }

 private:
  std::vector<int> parent_;
  std::vector<int> generation_;
  std::vector<int> child_count_;
  std::vector<int> first_child_;
};

// Complete m-ary tree of the given depth: 1 + m + ... + m^depth vertices.
ReferralTree m_tree(int m, int depth);

// Every vertex above generation `depth` draws an iid offspring count. The tree
// may die out early under laws with mass at zero.
ReferralTree galton_watson(const OffspringLaw& law, int depth, Rng& rng);

// "vertex,parent,generation" with parent -1 for the root.
void write_tree_csv(const ReferralTree& tree, std::ostream& out);
ReferralTree read_tree_csv(std::istream& in);

}  // namespace rds
