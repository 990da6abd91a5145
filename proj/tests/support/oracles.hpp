#pragma once

// Independent reference computations used only by the tests. Everything here
// works by brute force so it shares no code path with the library.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <vector>

namespace oracle {

// Exact law of a tree-indexed chain: every assignment of states to the
// vertices (parents[v] < v, parents[0] = -1) with its probability.
inline std::map<std::vector<int>, double> walk_law(const Eigen::MatrixXd& p, const std::vector<int>& parents,
                                                   const std::vector<double>& seed_law) {
  const int k = static_cast<int>(p.rows());
  const std::size_t n = parents.size();
  std::map<std::vector<int>, double> law;
  std::vector<int> x(n, 0);
  std::function<void(std::size_t, double)> rec = [&](std::size_t v, double prob) {
    if (prob == 0.0) return;
    if (v == n) {
      law[x] += prob;
      return;
    }
    for (int s = 0; s < k; ++s) {
      x[v] = s;
      const double step = v == 0 ? seed_law[static_cast<std::size_t>(s)] : p(x[static_cast<std::size_t>(parents[v])], s);
      rec(v + 1, prob * step);
    }
  };
  rec(0, 1.0);
  return law;
}

// Projects a law on node assignments through b(.).
inline std::map<std::vector<int>, double> project(const std::map<std::vector<int>, double>& law,
                                                  const std::vector<int>& assignment) {
  std::map<std::vector<int>, double> out;
  for (const auto& [x, prob] : law) {
    std::vector<int> b(x.size());
    for (std::size_t v = 0; v < x.size(); ++v) b[v] = assignment[static_cast<std::size_t>(x[v])];
    out[b] += prob;
  }
  return out;
}

inline double total_variation(const std::map<std::vector<int>, double>& a, const std::map<std::vector<int>, double>& b) {
  double tv = 0.0;
  for (const auto& [x, pa] : a) {
    auto it = b.find(x);
    tv += std::abs(pa - (it == b.end() ? 0.0 : it->second));
  }
  for (const auto& [x, pb] : b) {
    if (!a.count(x)) tv += std::abs(pb);
  }
  return 0.5 * tv;
}

// All BFS parent arrays on n vertices: parents non-decreasing, parents[k] < k.
inline std::vector<std::vector<int>> bfs_trees(int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> par(static_cast<std::size_t>(n), -1);
  std::function<void(int)> rec = [&](int k) {
    if (k == n) {
      out.push_back(par);
      return;
    }
    const int lo = k == 1 ? 0 : par[static_cast<std::size_t>(k - 1)];
    for (int p = lo; p < k; ++p) {
      // A BFS order also needs the parent to be already reachable, which
      // holds for every p < k; non-decreasing parents keep generations sorted.
      par[static_cast<std::size_t>(k)] = p;
      rec(k + 1);
    }
  };
  if (n >= 1) rec(1);
  return out;
}

// Distance on a tree given by a parent array, by walking both ends to the root.
inline int tree_distance(const std::vector<int>& parents, int a, int b) {
  std::vector<int> pa, pb;
  for (int v = a; v != -1; v = parents[static_cast<std::size_t>(v)]) pa.push_back(v);
  for (int v = b; v != -1; v = parents[static_cast<std::size_t>(v)]) pb.push_back(v);
  while (pa.size() > 1 && pb.size() > 1 && pa[pa.size() - 2] == pb[pb.size() - 2]) {
    pa.pop_back();
    pb.pop_back();
  }
  return static_cast<int>(pa.size() + pb.size()) - 2;
}

// Stationary law by power iteration to a fixed point.
inline Eigen::VectorXd power_iteration(const Eigen::MatrixXd& p, int iterations = 100000) {
  Eigen::RowVectorXd x = Eigen::RowVectorXd::Constant(p.rows(), 1.0 / static_cast<double>(p.rows()));
  for (int i = 0; i < iterations; ++i) {
    Eigen::RowVectorXd next = 0.5 * (x + x * p);  // lazy chain: same fixed point, no periodicity
    if ((next - x).cwiseAbs().maxCoeff() < 1e-16) return next.transpose();
    x = next;
  }
  return x.transpose();
}

// Random reversible chain: symmetric positive weights, P = D^{-1} W.
inline Eigen::MatrixXd random_reversible(int n, std::mt19937_64& gen, double sparsity = 0.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      double v = u(gen);
      if (u(gen) < sparsity && i != j) v = 0.0;
      w(i, j) = w(j, i) = v;
    }
  }
  for (int i = 0; i + 1 < n; ++i) w(i, i + 1) = w(i + 1, i) = std::max(w(i, i + 1), 0.1);  // connected
  return w.rowwise().sum().cwiseInverse().asDiagonal() * w;
}

}  // namespace oracle
