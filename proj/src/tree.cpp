#include "rds/tree.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

#include "rds/csv.hpp"
#include "rds/error.hpp"

namespace rds {

OffspringLaw::OffspringLaw(Kind kind, std::vector<double> pmf) : kind_(kind), pmf_(std::move(pmf)) {
  if (pmf_.empty()) throw InputError("offspring pmf is empty");
  double total = 0.0;
  for (double p : pmf_) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw InputError("offspring pmf has a negative or non-finite entry");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InputError("offspring pmf sums to " + format_double(total));
  cdf_.resize(pmf_.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < pmf_.size(); ++k) {
    acc += pmf_[k];
    cdf_[k] = acc;
    mean_ += static_cast<double>(k) * pmf_[k];
  }
}

OffspringLaw OffspringLaw::deterministic(int m) {
  if (m < 0) throw InputError("offspring count must be non-negative");
  std::vector<double> pmf(static_cast<std::size_t>(m) + 1, 0.0);
  pmf.back() = 1.0;
  OffspringLaw law(Kind::Deterministic, std::move(pmf));
  law.trials_ = m;
  return law;
}

OffspringLaw OffspringLaw::one_plus_binomial(int trials, double prob) {
  if (trials < 0 || !(prob >= 0.0 && prob <= 1.0)) throw InputError("invalid binomial offspring parameters");
  std::vector<double> pmf(static_cast<std::size_t>(trials) + 2, 0.0);
  for (int k = 0; k <= trials; ++k) {
    const double log_choose = std::lgamma(trials + 1.0) - std::lgamma(k + 1.0) - std::lgamma(trials - k + 1.0);
    double pk = std::exp(log_choose) * std::pow(prob, k) * std::pow(1.0 - prob, trials - k);
    pmf[static_cast<std::size_t>(k) + 1] = pk;
  }
  // Exact binomial coefficients can still leave a few ulps of slack.
  const double total = std::accumulate(pmf.begin(), pmf.end(), 0.0);
  for (double& p : pmf) p /= total;
  OffspringLaw law(Kind::OnePlusBinomial, std::move(pmf));
  law.trials_ = trials;
  law.prob_ = prob;
  return law;
}

OffspringLaw OffspringLaw::custom(std::vector<double> pmf) { return OffspringLaw(Kind::Custom, std::move(pmf)); }

int OffspringLaw::sample(Rng& rng) const {
  if (kind_ == Kind::Deterministic) return trials_;
  const double u = rng.uniform();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) {
    // u landed in rounding slack above the last cdf value.
    for (std::size_t k = pmf_.size(); k-- > 0;) {
      if (pmf_[k] > 0.0) return static_cast<int>(k);
    }
  }
  return static_cast<int>(it - cdf_.begin());
}

// ---------------------------------------------------------------------------

ReferralTree::ReferralTree(std::vector<int> parents) : parent_(std::move(parents)) {
  const std::size_t n = parent_.size();
  if (n == 0 || parent_[0] != -1) throw InputError("tree root must be vertex 0 with parent -1");
  generation_.assign(n, 0);
  child_count_.assign(n, 0);
  first_child_.assign(n, -1);
  for (std::size_t k = 1; k < n; ++k) {
    const int p = parent_[k];
    if (p < 0 || static_cast<std::size_t>(p) >= k) {
      throw InputError("vertex " + std::to_string(k) + " has parent " + std::to_string(p) + " outside [0, k)");
    }
    if (p < parent_[k - 1]) throw InputError("vertices are not in breadth-first order at " + std::to_string(k));
    generation_[k] = generation_[static_cast<std::size_t>(p)] + 1;
    if (child_count_[static_cast<std::size_t>(p)]++ == 0) first_child_[static_cast<std::size_t>(p)] = static_cast<int>(k);
  }
}

std::vector<std::size_t> ReferralTree::generation_sizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(depth()) + 1, 0);
  for (int g : generation_) ++sizes[static_cast<std::size_t>(g)];
  return sizes;
}

std::size_t ReferralTree::count_through_generation(int t) const {
  return static_cast<std::size_t>(std::upper_bound(generation_.begin(), generation_.end(), t) - generation_.begin());
}

ReferralTree ReferralTree::prefix(std::size_t n) const {
  if (n == 0 || n > size()) throw InputError("tree prefix length out of range");
  return ReferralTree(std::vector<int>(parent_.begin(), parent_.begin() + static_cast<std::ptrdiff_t>(n)));
}

ReferralTree ReferralTree::truncate_to_generation(int t) const {
  if (t < 0) throw InputError("generation must be non-negative");
  return prefix(count_through_generation(t));
}

int ReferralTree::distance(int a, int b) const {
  int d = 0;
  while (generation(a) > generation(b)) { a = parent(a); ++d; }
  while (generation(b) > generation(a)) { b = parent(b); ++d; }
  while (a != b) {
    a = parent(a);
    b = parent(b);
    d += 2;
  }
  return d;
}

std::vector<int> ReferralTree::distance_matrix() const {
  const std::size_t n = size();
  std::vector<int> d(n * n, 0);
  // Vertex k differs from its parent only by the edge to p(k):
  // d(k, j) = d(p(k), j) + 1 for j outside the subtree of k, and the
  // BFS order guarantees every j < k is outside it.
  for (std::size_t k = 1; k < n; ++k) {
    const std::size_t p = static_cast<std::size_t>(parent_[k]);
    for (std::size_t j = 0; j < k; ++j) {
      const int v = d[p * n + j] + 1;
      d[k * n + j] = v;
      d[j * n + k] = v;
    }
    // j = p is the only earlier vertex at distance 1; the recursion above
    // gives d(p,p)+1 = 1 already.
  }
  return d;
}

ReferralTree m_tree(int m, int depth) {
  if (m < 1) throw InputError("m-tree requires m >= 1");
  if (depth < 0) throw InputError("tree depth must be non-negative");
  std::vector<int> parents{-1};
  std::size_t level_begin = 0, level_end = 1;
  for (int g = 0; g < depth; ++g) {
    for (std::size_t v = level_begin; v < level_end; ++v) {
      for (int c = 0; c < m; ++c) parents.push_back(static_cast<int>(v));
    }
    level_begin = level_end;
    level_end = parents.size();
  }
  return ReferralTree(std::move(parents));
}

ReferralTree galton_watson(const OffspringLaw& law, int depth, Rng& rng) {
  if (depth < 0) throw InputError("tree depth must be non-negative");
  std::vector<int> parents{-1};
  std::size_t level_begin = 0, level_end = 1;
  for (int g = 0; g < depth && level_begin < level_end; ++g) {
    for (std::size_t v = level_begin; v < level_end; ++v) {
      const int k = law.sample(rng);
      for (int c = 0; c < k; ++c) parents.push_back(static_cast<int>(v));
    }
    level_begin = level_end;
    level_end = parents.size();
  }
  return ReferralTree(std::move(parents));
}

void write_tree_csv(const ReferralTree& tree, std::ostream& out) {
  out << "vertex,parent,generation\n";
  for (std::size_t v = 0; v < tree.size(); ++v) {
    out << v << ',' << tree.parent(static_cast<int>(v)) << ',' << tree.generation(static_cast<int>(v)) << '\n';
  }
}

ReferralTree read_tree_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<int> parents;
  std::vector<std::array<long long, 3>> generations;  // line, vertex, generation
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("vertex", 0) == 0) continue;
    const auto f = split_csv_line(line);
    long long v = 0, p = 0;
    if (f.size() < 2 || !parse_int(f[0], v) || !parse_int(f[1], p)) throw ParseError(line_no, "bad tree row");
    if (v != static_cast<long long>(parents.size())) throw ParseError(line_no, "vertices must be listed 0, 1, 2, ...");
    parents.push_back(static_cast<int>(p));
    long long g = -1;
    if (f.size() >= 3 && !f[2].empty()) {
      if (!parse_int(f[2], g)) throw ParseError(line_no, "bad generation");
      generations.push_back({static_cast<long long>(line_no), v, g});
    }
  }
  if (parents.empty()) throw InputError("tree file is empty");
  ReferralTree tree(std::move(parents));
  // The generation column is redundant; a mismatch means a corrupted file.
  for (const auto& [row, v, g] : generations) {
    if (g != tree.generation(static_cast<int>(v))) {
      throw ParseError(static_cast<std::size_t>(row), "generation does not match the parent chain");
    }
  }
  return tree;
}

}  // namespace rds
