#include "rds/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "rds/csv.hpp"
#include "rds/error.hpp"
#include "rds/simd/kernels.hpp"

namespace rds {

namespace {

// Flips each column so that its largest-magnitude entry is positive. The
// first entry within 1e-12 (relative) of the maximum decides.
void fix_signs(Eigen::MatrixXd& f) {
  for (Eigen::Index j = 0; j < f.cols(); ++j) {
    const double peak = f.col(j).cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < f.rows(); ++i) {
      if (std::abs(f(i, j)) >= peak * (1.0 - 1e-12)) {
        if (f(i, j) < 0.0) f.col(j) *= -1.0;
        break;
      }
    }
  }
}

}  // namespace

SpectralDecomposition decompose(const TransitionMatrix& p) {
  const Eigen::Index n = static_cast<Eigen::Index>(p.size());
  if (p.balance_defect() > TransitionMatrix::kTolerance) {
    throw InputError("decompose requires a reversible transition matrix");
  }
  const Eigen::VectorXd& pi = p.stationary();
  const Eigen::VectorXd sqrt_pi = pi.cwiseSqrt();

  // S = Pi^{1/2} P Pi^{-1/2} is symmetric for reversible P.
  Eigen::MatrixXd s = sqrt_pi.asDiagonal() * p.matrix() * sqrt_pi.cwiseInverse().asDiagonal();
  s = 0.5 * (s + s.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s);
  if (solver.info() != Eigen::Success) throw NumericError("symmetric eigensolver failed");
  const Eigen::VectorXd& values = solver.eigenvalues();
  const Eigen::MatrixXd& vectors = solver.eigenvectors();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  auto key = [&](Eigen::Index i) {
    return std::pair{std::llround(std::abs(values(i)) * 1e11), values(i)};
  };
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return key(a) > key(b); });

  SpectralDecomposition dec;
  dec.weights = pi;
  dec.eigenvalues.resize(n);
  Eigen::MatrixXd phi(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    dec.eigenvalues(j) = values(order[static_cast<std::size_t>(j)]);
    phi.col(j) = vectors.col(order[static_cast<std::size_t>(j)]);
  }

  // The leading eigenspace (lambda = 1) contains sqrt(pi); put it first and
  // re-orthonormalize the rest of that eigenspace against it.
  Eigen::Index group = 1;
  while (group < n && std::abs(dec.eigenvalues(group) - 1.0) < SpectralDecomposition::kRepeatTolerance) ++group;
  {
    // sqrt(pi) has unit norm; project it out of the group and keep the
    // dominant group-1 left singular directions of what remains.
    Eigen::MatrixXd rest = phi.leftCols(group);
    rest -= sqrt_pi * (sqrt_pi.transpose() * rest);
    phi.col(0) = sqrt_pi;
    if (group > 1) {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(rest, Eigen::ComputeThinU);
      phi.middleCols(1, group - 1) = svd.matrixU().leftCols(group - 1);
    }
    dec.eigenvalues.head(group).setOnes();
  }
  // Spectra of stochastic matrices lie in [-1, 1]; -1 (a bipartite chain) is
  // exact as well, so clear solver rounding there too.
  for (Eigen::Index j = group; j < n; ++j) {
    double& v = dec.eigenvalues(j);
    if (std::abs(v + 1.0) < 1e-12) v = -1.0;
    v = std::clamp(v, -1.0, 1.0);
  }

  dec.eigenvectors = sqrt_pi.cwiseInverse().asDiagonal() * phi;
  dec.eigenvectors.col(0).setOnes();
  fix_signs(dec.eigenvectors);

  dec.lambda2_repeated = n >= 3 && std::abs(dec.eigenvalues(1) - dec.eigenvalues(2)) < SpectralDecomposition::kRepeatTolerance;
  return dec;
}

Eigen::VectorXd expand_in_eigenbasis(std::span<const double> y, const SpectralDecomposition& dec) {
  if (y.size() != dec.size()) {
    throw InputError("trait length " + std::to_string(y.size()) + " does not match state count " +
                     std::to_string(dec.size()));
  }
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
  return dec.eigenvectors.transpose() * dec.weights.cwiseProduct(yv);
}

Eigen::VectorXd reconstruct_from_eigenbasis(const Eigen::VectorXd& coefficients, const SpectralDecomposition& dec) {
  return dec.eigenvectors * coefficients;
}

double pi_inner(std::span<const double> a, std::span<const double> b, const Eigen::VectorXd& pi) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i] * pi(static_cast<Eigen::Index>(i));
  return acc;
}

double mean_pi(std::span<const double> y, const Eigen::VectorXd& pi) {
  return simd::dot(y, std::span<const double>(pi.data(), static_cast<std::size_t>(pi.size())));
}

double var_pi(std::span<const double> y, const Eigen::VectorXd& pi) {
  const double mu = mean_pi(y, pi);
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) acc += pi(static_cast<Eigen::Index>(i)) * (y[i] - mu) * (y[i] - mu);
  return acc;
}

std::string_view regime_name(Regime r) {
  switch (r) {
    case Regime::LowVariance: return "low-variance";
    case Regime::HighVariance: return "high-variance";
    case Regime::Critical: return "critical";
  }
  return "unknown";
}

Regime classify_regime(double m, double lambda2) {
  const double x = m * lambda2 * lambda2;
  if (std::abs(x - 1.0) <= 1e-12) return Regime::Critical;
  return x > 1.0 ? Regime::HighVariance : Regime::LowVariance;
}

BottleneckStat bottleneck(const WeightedGraph& graph, std::span<const double> y) {
  const std::size_t n = graph.node_count();
  if (y.size() != n) throw InputError("trait length does not match node count");
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  BottleneckStat out;
  out.standardized_trait.resize(n);
  double norm2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out.standardized_trait[i] = y[i] - mean;
    norm2 += out.standardized_trait[i] * out.standardized_trait[i];
  }
  const double norm = std::sqrt(norm2);
  const double max_abs = std::abs(*std::max_element(y.begin(), y.end(), [](double a, double b) { return std::abs(a) < std::abs(b); }));
  if (!(norm > 1e-12 * std::max(1.0, max_abs) * std::sqrt(static_cast<double>(n)))) {
    throw InputError("bottleneck statistic is undefined for a constant trait");
  }
  for (double& v : out.standardized_trait) v /= norm;

  const auto& yt = out.standardized_trait;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double di = graph.degree(static_cast<int>(i));
    for (const Neighbor& nb : graph.neighbors(static_cast<int>(i))) {
      acc += yt[i] * nb.weight * yt[static_cast<std::size_t>(nb.node)] / std::sqrt(di * graph.degree(nb.node));
    }
  }
  out.lambda_tilde = acc;
  return out;
}

void write_decomposition_csv(const SpectralDecomposition& dec, std::ostream& out) {
  const Eigen::Index n = static_cast<Eigen::Index>(dec.size());
  out << "j,lambda";
  for (Eigen::Index i = 0; i < n; ++i) out << ",f_" << i;
  out << '\n';
  for (Eigen::Index j = 0; j < n; ++j) {
    out << (j + 1) << ',' << format_double(dec.eigenvalues(j));
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << format_double(dec.eigenvectors(i, j));
    out << '\n';
  }
}

}  // namespace rds
