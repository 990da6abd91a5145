#include "rds/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include "rds/csv.hpp"
#include "rds/error.hpp"

namespace rds {

SeedSpec SeedSpec::fixed(int node) {
  SeedSpec s;
  s.kind = Kind::FixedNode;
  s.node = node;
  return s;
}

SeedSpec SeedSpec::from_distribution(std::vector<double> nu) {
  SeedSpec s;
  s.kind = Kind::Distribution;
  s.distribution = std::move(nu);
  return s;
}

SeedSpec SeedSpec::degree_proportional() {
  SeedSpec s;
  s.kind = Kind::DegreeProportional;
  return s;
}

void SeedSpec::validate(std::size_t state_count) const {
  switch (kind) {
    case Kind::FixedNode:
      if (node < 0 || static_cast<std::size_t>(node) >= state_count) {
        throw InputError("seed node " + std::to_string(node) + " out of range [0, " +
                         std::to_string(state_count) + ")");
      }
      break;
    case Kind::Distribution: {
      if (distribution.size() != state_count) throw InputError("seed distribution length does not match state count");
      double total = 0.0;
      for (double v : distribution) {
        if (!(v >= 0.0)) throw InputError("seed distribution has a negative entry");
        total += v;
      }
      if (std::abs(total - 1.0) > 1e-12) throw InputError("seed distribution sums to " + format_double(total));
      break;
    }
    case Kind::Stationary:
    case Kind::DegreeProportional:
      break;
  }
}

int SeedSpec::draw(const Eigen::VectorXd& pi, Rng& rng) const {
  switch (kind) {
    case Kind::FixedNode:
      return node;
    case Kind::Distribution:
      return static_cast<int>(rng.discrete(distribution));
    case Kind::Stationary:
    case Kind::DegreeProportional:
      break;
  }
  return static_cast<int>(rng.discrete(std::span<const double>(pi.data(), static_cast<std::size_t>(pi.size()))));
}

std::string seed_kind_name(SeedSpec::Kind kind) {
  switch (kind) {
    case SeedSpec::Kind::FixedNode: return "fixed";
    case SeedSpec::Kind::Distribution: return "distribution";
    case SeedSpec::Kind::Stationary: return "stationary";
    case SeedSpec::Kind::DegreeProportional: return "degree_proportional";
  }
  return "unknown";
}

RdsSample RdsSample::prefix(std::size_t n) const {
  RdsSample out;
  out.tree = tree.prefix(n);
  out.states.assign(states.begin(), states.begin() + static_cast<std::ptrdiff_t>(n));
  out.traits.assign(traits.begin(), traits.begin() + static_cast<std::ptrdiff_t>(n));
  if (has_degrees()) out.degrees.assign(degrees.begin(), degrees.begin() + static_cast<std::ptrdiff_t>(n));
  out.seed_state = seed_state;
  out.with_replacement = with_replacement;
  out.attempts = attempts;
  return out;
}

RdsSample RdsSample::truncate_to_generation(int t) const {
  if (t < 0) throw InputError("generation must be non-negative");
  return prefix(tree.count_through_generation(t));
}

RdsSample walk(const TransitionMatrix& p, const ReferralTree& tree, const SeedSpec& seed,
               std::span<const double> y, Rng& rng, std::span<const double> state_degrees) {
  const std::size_t k = p.size();
  if (y.size() != k) throw InputError("trait length " + std::to_string(y.size()) + " does not match " + std::to_string(k) + " states");
  if (!state_degrees.empty() && state_degrees.size() != k) throw InputError("degree vector length does not match state count");
  seed.validate(k);

  RdsSample s;
  s.tree = tree;
  const std::size_t n = tree.size();
  s.states.resize(n);
  s.states[0] = seed.draw(p.stationary(), rng);
  for (std::size_t v = 1; v < n; ++v) {
    s.states[v] = p.step(s.states[static_cast<std::size_t>(tree.parent(static_cast<int>(v)))], rng);
  }
  s.traits.resize(n);
  for (std::size_t v = 0; v < n; ++v) s.traits[v] = y[static_cast<std::size_t>(s.states[v])];
  if (!state_degrees.empty()) {
    s.degrees.resize(n);
    for (std::size_t v = 0; v < n; ++v) s.degrees[v] = state_degrees[static_cast<std::size_t>(s.states[v])];
  }
  s.seed_state = s.states[0];
  s.with_replacement = true;
  return s;
}

RdsSample walk_without_replacement(const WeightedGraph& graph, const OffspringLaw& law,
                                   const SeedSpec& seed, std::size_t target_n, int max_restarts,
                                   std::span<const double> y, Rng& rng) {
  const std::size_t n_nodes = graph.node_count();
  if (n_nodes == 0) throw InputError("graph is empty");
  if (y.size() != n_nodes) throw InputError("trait length does not match node count");
  if (target_n == 0 || target_n > n_nodes) throw InputError("target sample size must lie in [1, N]");
  if (max_restarts < 0) throw InputError("max_restarts must be non-negative");
  seed.validate(n_nodes);

  Eigen::VectorXd seed_law(static_cast<Eigen::Index>(n_nodes));
  for (std::size_t i = 0; i < n_nodes; ++i) seed_law(static_cast<Eigen::Index>(i)) = graph.degree(static_cast<int>(i));
  seed_law /= graph.volume();

  std::vector<char> recruited(n_nodes, 0);
  std::vector<int> eligible;
  for (int attempt = 1; attempt <= max_restarts + 1; ++attempt) {
    std::fill(recruited.begin(), recruited.end(), 0);
    std::vector<int> parents{-1};
    std::vector<int> states{seed.draw(seed_law, rng)};
    recruited[static_cast<std::size_t>(states[0])] = 1;

    for (std::size_t cur = 0; cur < states.size() && states.size() < target_n; ++cur) {
      const int xi = law.sample(rng);
      if (xi <= 0) continue;
      eligible.clear();
      for (const Neighbor& nb : graph.neighbors(states[cur])) {
        if (!recruited[static_cast<std::size_t>(nb.node)]) eligible.push_back(nb.node);
      }
      const std::size_t take = std::min({static_cast<std::size_t>(xi), eligible.size(), target_n - states.size()});
      // Partial Fisher-Yates: the first `take` entries become a uniform subset.
      for (std::size_t j = 0; j < take; ++j) {
        const std::size_t pick = j + static_cast<std::size_t>(rng.below(eligible.size() - j));
        std::swap(eligible[j], eligible[pick]);
        recruited[static_cast<std::size_t>(eligible[j])] = 1;
        parents.push_back(static_cast<int>(cur));
        states.push_back(eligible[j]);
      }
    }
    if (states.size() < target_n) continue;

    RdsSample s;
    s.tree = ReferralTree(std::move(parents));
    s.states = std::move(states);
    s.traits.resize(target_n);
    s.degrees.resize(target_n);
    for (std::size_t v = 0; v < target_n; ++v) {
      s.traits[v] = y[static_cast<std::size_t>(s.states[v])];
      s.degrees[v] = graph.degree(s.states[v]);
    }
    s.seed_state = s.states[0];
    s.with_replacement = false;
    s.attempts = attempt;
    return s;
  }
  throw RestartsExhausted(max_restarts + 1);
}

std::vector<double> inverse_degree_trait(const RdsSample& sample) {
  if (!sample.has_degrees()) throw InputError("sample carries no degrees");
  std::vector<double> out(sample.size());
  for (std::size_t v = 0; v < out.size(); ++v) out[v] = 1.0 / sample.degrees[v];
  return out;
}

std::vector<double> degree_scaled_trait(const RdsSample& sample) {
  if (!sample.has_degrees()) throw InputError("sample carries no degrees");
  std::vector<double> out(sample.size());
  for (std::size_t v = 0; v < out.size(); ++v) out[v] = sample.traits[v] / sample.degrees[v];
  return out;
}

void write_sample_csv(const RdsSample& sample, std::ostream& out) {
  out << "# seed_state=" << sample.seed_state << '\n';
  out << "# with_replacement=" << (sample.with_replacement ? 1 : 0) << '\n';
  out << "# attempts=" << sample.attempts << '\n';
  out << "vertex,parent,generation,state_id,trait_value,degree\n";
  for (std::size_t v = 0; v < sample.size(); ++v) {
    const int iv = static_cast<int>(v);
    out << v << ',' << sample.tree.parent(iv) << ',' << sample.tree.generation(iv) << ','
        << sample.states[v] << ',' << format_double(sample.traits[v]) << ',';
    if (sample.has_degrees()) out << format_double(sample.degrees[v]);
    out << '\n';
  }
}

RdsSample read_sample_csv(std::istream& in) {
  RdsSample s;
  std::vector<int> parents;
  bool saw_header = false;
  bool any_degree = false, missing_degree = false;
  std::string line;
  std::size_t line_no = 0;
  long long meta = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(1, eq - 1);
      key.erase(0, key.find_first_not_of(' '));
      const std::string_view value = std::string_view(line).substr(eq + 1);
      if (!parse_int(value, meta)) continue;
      if (key == "seed_state") s.seed_state = static_cast<int>(meta);
      else if (key == "with_replacement") s.with_replacement = meta != 0;
      else if (key == "attempts") s.attempts = static_cast<int>(meta);
      continue;
    }
    if (!saw_header) {
      if (line.rfind("vertex,", 0) != 0) throw ParseError(line_no, "expected the sample header row");
      saw_header = true;
      continue;
    }
    const auto f = split_csv_line(line);
    long long vertex = 0, parent = 0, gen = 0, state = 0;
    double trait = 0.0, degree = 0.0;
    if (f.size() < 5 || !parse_int(f[0], vertex) || !parse_int(f[1], parent) || !parse_int(f[2], gen) ||
        !parse_int(f[3], state) || !parse_double(f[4], trait)) {
      throw ParseError(line_no, "malformed sample row");
    }
    if (vertex != static_cast<long long>(parents.size())) throw ParseError(line_no, "vertices must be listed 0, 1, 2, ...");
    if (f.size() >= 6 && !f[5].empty()) {
      if (!parse_double(f[5], degree) || !(degree > 0.0)) throw ParseError(line_no, "degree must be positive");
      any_degree = true;
    } else {
      missing_degree = true;
    }
    parents.push_back(static_cast<int>(parent));
    s.states.push_back(static_cast<int>(state));
    s.traits.push_back(trait);
    s.degrees.push_back(degree);
  }
  if (parents.empty()) throw InputError("sample file has no rows");
  if (any_degree && missing_degree) throw InputError("degree column is only partially filled");
  if (!any_degree) s.degrees.clear();
  s.tree = ReferralTree(std::move(parents));
  return s;
}

}  // namespace rds
