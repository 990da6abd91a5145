#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rds/graph.hpp"
#include "rds/rng.hpp"
#include "rds/tree.hpp"

namespace rds {

// Law of the seed participant X_0.
struct SeedSpec {
  enum class Kind { FixedNode, Distribution, Stationary, DegreeProportional };

  Kind kind = Kind::Stationary;
  int node = 0;                      // FixedNode
  std::vector<double> distribution;  // Distribution, one entry per state

  static SeedSpec fixed(int node);
  static SeedSpec from_distribution(std::vector<double> nu);
  static SeedSpec stationary() { return {}; }
  static SeedSpec degree_proportional();

  // Throws InputError for an out-of-range node or a malformed distribution.
  void validate(std::size_t state_count) const;

  // Stationary and DegreeProportional both draw from `pi`; on a graph chain
  // pi is degree-proportional by construction.
  int draw(const Eigen::VectorXd& pi, Rng& rng) const;
};

std::string seed_kind_name(SeedSpec::Kind kind);

// A realized referral sample. Vertex v of `tree` holds state states[v].
struct RdsSample {
  ReferralTree tree;
  std::vector<int> states;
  std::vector<double> traits;   // y(X_v)
  std::vector<double> degrees;  // deg(X_v); empty when no degrees are known
  int seed_state = 0;
  bool with_replacement = true;
  int attempts = 1;             // without-replacement restarts used, plus one

  std::size_t size() const { return states.size(); }
  bool has_degrees() const { return !degrees.empty(); }
  int depth() const { return tree.depth(); }

  // Vertices with generation <= t, or the first n vertices.
  RdsSample truncate_to_generation(int t) const;
  RdsSample prefix(std::size_t n) const;
};

// (tree, P)-walk: X_0 from `seed`, each child drawn from its parent's row of
// P. `state_degrees` (optional) attaches deg(X_v) to the sample.
RdsSample walk(const TransitionMatrix& p, const ReferralTree& tree, const SeedSpec& seed,
               std::span<const double> y, Rng& rng, std::span<const double> state_degrees = {});

// Without-replacement recruitment on a graph, breadth-first. Each participant
// draws xi from `law` and recruits min(xi, eligible) distinct unrecruited
// contacts uniformly (edge weights are ignored). Recruiters claim contacts
// in arrival order. Stops at exactly target_n participants; an attempt that
// runs out of recruiters first restarts with a fresh seed, up to
// max_restarts restarts.
RdsSample walk_without_replacement(const WeightedGraph& graph, const OffspringLaw& law,
                                   const SeedSpec& seed, std::size_t target_n, int max_restarts,
                                   std::span<const double> y, Rng& rng);

// y'(v) = 1/deg(X_v) and y''(v) = y(X_v)/deg(X_v). Require degrees.
std::vector<double> inverse_degree_trait(const RdsSample& sample);
std::vector<double> degree_scaled_trait(const RdsSample& sample);

// "# key=value" metadata lines, then
// "vertex,parent,generation,state_id,trait_value,degree" rows. The degree
// column is empty when the sample carries no degrees.
void write_sample_csv(const RdsSample& sample, std::ostream& out);
RdsSample read_sample_csv(std::istream& in);

}  // namespace rds
