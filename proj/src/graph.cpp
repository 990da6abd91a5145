#include "rds/graph.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "rds/csv.hpp"
#include "rds/error.hpp"

namespace rds {

WeightedGraph::WeightedGraph(std::size_t node_count, std::span<const Edge> edges,
                             std::vector<std::string> labels)
    : adjacency_(node_count), degree_(node_count, 0.0), labels_(std::move(labels)) {
  if (labels_.empty()) {
    labels_.reserve(node_count);
    for (std::size_t i = 0; i < node_count; ++i) labels_.push_back(std::to_string(i));
  }
  if (labels_.size() != node_count) throw InputError("label count does not match node count");

  std::map<std::pair<int, int>, double> pairs;
  const int n = static_cast<int>(node_count);
  for (const Edge& e : edges) {
    if (e.u < 0 || e.v < 0 || e.u >= n || e.v >= n) {
      throw InputError("edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                       ") references a node outside [0, " + std::to_string(n) + ")");
    }
    if (!(e.weight >= 0.0) || !std::isfinite(e.weight)) {
      throw InputError("edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                       ") has negative or non-finite weight");
    }
    if (e.weight == 0.0) continue;
    auto key = std::minmax(e.u, e.v);
    auto [it, inserted] = pairs.try_emplace({key.first, key.second}, e.weight);
    if (!inserted) it->second = std::max(it->second, e.weight);
  }

  for (const auto& [key, w] : pairs) {
    const auto [u, v] = key;
    adjacency_[static_cast<std::size_t>(u)].push_back({v, w});
    if (u != v) adjacency_[static_cast<std::size_t>(v)].push_back({u, w});
  }
  for (std::size_t i = 0; i < node_count; ++i) {
    auto& row = adjacency_[i];
    std::sort(row.begin(), row.end(), [](const Neighbor& a, const Neighbor& b) { return a.node < b.node; });
    double d = 0.0;
    for (const Neighbor& nb : row) d += nb.weight;
    degree_[i] = d;
    volume_ += d;
  }
  edge_count_ = pairs.size();
}

double WeightedGraph::weight(int i, int j) const {
  const auto row = neighbors(i);
  auto it = std::lower_bound(row.begin(), row.end(), j,
                             [](const Neighbor& nb, int key) { return nb.node < key; });
  return (it != row.end() && it->node == j) ? it->weight : 0.0;
}

std::vector<Edge> WeightedGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (std::size_t u = 0; u < adjacency_.size(); ++u) {
    for (const Neighbor& nb : adjacency_[u]) {
      if (nb.node >= static_cast<int>(u)) out.push_back({static_cast<int>(u), nb.node, nb.weight});
    }
  }
  return out;
}

Eigen::MatrixXd WeightedGraph::adjacency_matrix() const {
  const auto n = static_cast<Eigen::Index>(node_count());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (const Neighbor& nb : adjacency_[static_cast<std::size_t>(i)]) a(i, nb.node) = nb.weight;
  }
  return a;
}

bool operator==(const WeightedGraph& a, const WeightedGraph& b) {
  if (a.node_count() != b.node_count() || a.edge_count() != b.edge_count()) return false;
  auto canonical = [](const WeightedGraph& g) {
    std::vector<std::tuple<std::string, std::string, double>> out;
    for (const Edge& e : g.edges()) {
      auto lu = g.label(e.u), lv = g.label(e.v);
      if (lv < lu) std::swap(lu, lv);
      out.emplace_back(lu, lv, e.weight);
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  auto la = a.labels(), lb = b.labels();
  std::sort(la.begin(), la.end());
  std::sort(lb.begin(), lb.end());
  return la == lb && canonical(a) == canonical(b);
}

// ---------------------------------------------------------------------------

TransitionMatrix::TransitionMatrix(Eigen::MatrixXd p, Eigen::VectorXd stationary)
    : p_(std::move(p)), pi_(std::move(stationary)) {
  const Eigen::Index n = p_.rows();
  if (n == 0 || p_.cols() != n || pi_.size() != n) {
    throw InputError("transition matrix must be square and match its stationary vector");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if ((p_.row(i).array() < 0.0).any()) {
      throw InputError("transition row " + std::to_string(i) + " has a negative entry");
    }
    const double s = p_.row(i).sum();
    if (std::abs(s - 1.0) > kTolerance) {
      throw InputError("transition row " + std::to_string(i) + " sums to " + format_double(s));
    }
    if (!(pi_(i) > 0.0)) throw InputError("stationary entry " + std::to_string(i) + " is not positive");
  }
  if (std::abs(pi_.sum() - 1.0) > kTolerance) throw InputError("stationary distribution does not sum to 1");
  if (balance_defect() > kTolerance) {
    throw InputError("transition matrix is not reversible (detailed balance defect " +
                     format_double(balance_defect()) + ")");
  }
  build_row_samplers();
}

TransitionMatrix TransitionMatrix::from_matrix(Eigen::MatrixXd p) {
  const Eigen::Index n = p.rows();
  if (n == 0 || p.cols() != n) throw InputError("transition matrix must be square and nonempty");
  // Solve (P^T - I) pi = 0 with the last equation replaced by sum(pi) = 1.
  Eigen::MatrixXd a = p.transpose() - Eigen::MatrixXd::Identity(n, n);
  a.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible()) throw InputError("transition matrix has no unique stationary distribution");
  Eigen::VectorXd pi = lu.solve(rhs);
  // One refinement step tightens pi to the 1e-12 checks on ill-scaled chains.
  pi += lu.solve(rhs - a * pi);
  return TransitionMatrix(std::move(p), std::move(pi));
}

double TransitionMatrix::balance_defect() const {
  double worst = 0.0;
  const Eigen::Index n = p_.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      worst = std::max(worst, std::abs(pi_(i) * p_(i, j) - pi_(j) * p_(j, i)));
    }
  }
  return worst;
}

void TransitionMatrix::build_row_samplers() {
  const Eigen::Index n = p_.rows();
  row_start_.assign(static_cast<std::size_t>(n) + 1, 0);
  col_.clear();
  cumulative_.clear();
  for (Eigen::Index i = 0; i < n; ++i) {
    row_start_[static_cast<std::size_t>(i)] = col_.size();
    double acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (p_(i, j) > 0.0) {
        acc += p_(i, j);
        col_.push_back(static_cast<int>(j));
        cumulative_.push_back(acc);
      }
    }
  }
  row_start_[static_cast<std::size_t>(n)] = col_.size();
}

int TransitionMatrix::step(int from, Rng& rng) const {
  const std::size_t begin = row_start_[static_cast<std::size_t>(from)];
  const std::size_t end = row_start_[static_cast<std::size_t>(from) + 1];
  const double u = rng.uniform() * cumulative_[end - 1];
  auto it = std::upper_bound(cumulative_.begin() + static_cast<std::ptrdiff_t>(begin),
                             cumulative_.begin() + static_cast<std::ptrdiff_t>(end), u);
  if (it == cumulative_.begin() + static_cast<std::ptrdiff_t>(end)) --it;
  return col_[static_cast<std::size_t>(it - cumulative_.begin())];
}

TransitionMatrix build_transition(const WeightedGraph& graph) {
  const auto n = static_cast<Eigen::Index>(graph.node_count());
  if (n == 0) throw InputError("graph is empty");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(graph.degree(static_cast<int>(i)) > 0.0)) {
      throw InputError("node '" + graph.label(static_cast<int>(i)) + "' (id " + std::to_string(i) +
                       ") has zero degree");
    }
  }
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd pi(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = graph.degree(static_cast<int>(i));
    for (const Neighbor& nb : graph.neighbors(static_cast<int>(i))) p(i, nb.node) = nb.weight / d;
    pi(i) = d / graph.volume();
  }
  return TransitionMatrix(std::move(p), std::move(pi));
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool is_blank_or_comment(std::string_view line, char comment) {
  for (char c : line) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    return c == comment;
  }
  return true;
}

}  // namespace

WeightedGraph read_edge_list(std::istream& in, const EdgeListFormat& format) {
  std::unordered_map<std::string, int> ids;
  std::vector<std::string> labels;
  std::vector<Edge> edges;
  auto id_of = [&](std::string_view label) {
    auto [it, inserted] = ids.try_emplace(std::string(label), static_cast<int>(labels.size()));
    if (inserted) labels.emplace_back(label);
    return it->second;
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank_or_comment(line, format.comment)) continue;
    const auto fields = split_ws(line);
    if (fields.size() < 2 || fields.size() > 3) {
      throw ParseError(line_no, "expected \"u v\" or \"u v w\", got " + std::to_string(fields.size()) + " fields");
    }
    double w = 1.0;
    if (fields.size() == 3) {
      if (!format.allow_weights) throw ParseError(line_no, "weights are not allowed in this format");
      if (!parse_double(fields[2], w)) throw ParseError(line_no, "bad weight '" + std::string(fields[2]) + "'");
      if (!(w >= 0.0) || !std::isfinite(w)) throw ParseError(line_no, "negative or non-finite weight");
    }
    const int u = id_of(fields[0]);
    const int v = id_of(fields[1]);
    edges.push_back({u, v, w});
  }
  if (labels.empty()) throw InputError("edge list is empty");
  const std::size_t n = labels.size();
  return WeightedGraph(n, edges, std::move(labels));
}

WeightedGraph read_edge_list_file(const std::string& path, const EdgeListFormat& format) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open edge list '" + path + "'");
  return read_edge_list(in, format);
}

void write_edge_list(const WeightedGraph& graph, std::ostream& out) {
  for (const Edge& e : graph.edges()) {
    out << graph.label(e.u) << ' ' << graph.label(e.v) << ' ' << format_double(e.weight) << '\n';
  }
}

std::vector<double> read_node_values(std::istream& in, const WeightedGraph& graph) {
  std::unordered_map<std::string, int> ids;
  for (std::size_t i = 0; i < graph.node_count(); ++i) ids.emplace(graph.label(static_cast<int>(i)), static_cast<int>(i));
  std::vector<double> values(graph.node_count(), 0.0);
  std::vector<bool> seen(graph.node_count(), false);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank_or_comment(line, '#')) continue;
    const auto fields = split_ws(line);
    if (fields.size() != 2) throw ParseError(line_no, "expected \"label value\"");
    auto it = ids.find(std::string(fields[0]));
    if (it == ids.end()) continue;  // nodes dropped by component extraction
    double v = 0.0;
    if (!parse_double(fields[1], v)) throw ParseError(line_no, "bad value '" + std::string(fields[1]) + "'");
    values[static_cast<std::size_t>(it->second)] = v;
    seen[static_cast<std::size_t>(it->second)] = true;
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) throw InputError("no value for node '" + graph.label(static_cast<int>(i)) + "'");
  }
  return values;
}

std::vector<double> read_node_values_file(const std::string& path, const WeightedGraph& graph) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open node value file '" + path + "'");
  return read_node_values(in, graph);
}

void write_node_values(const WeightedGraph& graph, std::span<const double> values, std::ostream& out) {
  for (std::size_t i = 0; i < graph.node_count(); ++i) {
    out << graph.label(static_cast<int>(i)) << ' ' << format_double(values[i]) << '\n';
  }
}

// ---------------------------------------------------------------------------

namespace {

std::vector<int> component_labels(const WeightedGraph& graph, int& count) {
  const std::size_t n = graph.node_count();
  std::vector<int> comp(n, -1);
  count = 0;
  std::vector<int> queue;
  for (std::size_t s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    queue.assign(1, static_cast<int>(s));
    comp[s] = count;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      for (const Neighbor& nb : graph.neighbors(queue[head])) {
        if (comp[static_cast<std::size_t>(nb.node)] < 0) {
          comp[static_cast<std::size_t>(nb.node)] = count;
          queue.push_back(nb.node);
        }
      }
    }
    ++count;
  }
  return comp;
}

}  // namespace

bool is_connected(const WeightedGraph& graph) {
  int count = 0;
  component_labels(graph, count);
  return count <= 1;
}

ComponentExtraction largest_connected_component(const WeightedGraph& graph) {
  if (graph.empty()) throw InputError("graph is empty");
  int count = 0;
  const auto comp = component_labels(graph, count);
  // Components are numbered in order of their smallest node id, so the first
  // maximum is the documented tie-break.
  std::vector<std::size_t> sizes(static_cast<std::size_t>(count), 0);
  for (int c : comp) ++sizes[static_cast<std::size_t>(c)];
  const int best = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());

  ComponentExtraction out;
  out.old_to_new.assign(graph.node_count(), -1);
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < graph.node_count(); ++i) {
    if (comp[i] != best) continue;
    out.old_to_new[i] = static_cast<int>(out.new_to_old.size());
    out.new_to_old.push_back(static_cast<int>(i));
    labels.push_back(graph.label(static_cast<int>(i)));
  }
  std::vector<Edge> edges;
  for (const Edge& e : graph.edges()) {
    const int u = out.old_to_new[static_cast<std::size_t>(e.u)];
    const int v = out.old_to_new[static_cast<std::size_t>(e.v)];
    if (u >= 0 && v >= 0) edges.push_back({u, v, e.weight});
  }
  out.graph = WeightedGraph(out.new_to_old.size(), edges, std::move(labels));
  return out;
}

}  // namespace rds
