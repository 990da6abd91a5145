#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "rds/graph.hpp"

namespace rds {

// Eigenpairs of a reversible transition matrix, orthonormal in the
// pi-weighted inner product <f, g>_pi = sum_i f(i) g(i) pi(i).
struct SpectralDecomposition {
  // Sorted by descending |lambda|, ties by descending signed value.
  Eigen::VectorXd eigenvalues;
  // Column j holds f_j as a function on states. Column 0 is the constant 1.
  Eigen::MatrixXd eigenvectors;
  Eigen::VectorXd weights;  // pi
  // |lambda_2 - lambda_3| < kRepeatTolerance: the single-eigenvalue limit
  // formulas do not apply directly.
  bool lambda2_repeated = false;

  static constexpr double kRepeatTolerance = 1e-9;

  std::size_t size() const { return static_cast<std::size_t>(eigenvalues.size()); }
  double lambda(std::size_t j) const { return eigenvalues(static_cast<Eigen::Index>(j)); }
  // Second eigenvalue (1 for a single-state chain is never asked for).
  double lambda2() const { return eigenvalues.size() > 1 ? eigenvalues(1) : 0.0; }
  Eigen::VectorXd f(std::size_t j) const { return eigenvectors.col(static_cast<Eigen::Index>(j)); }
};

SpectralDecomposition decompose(const TransitionMatrix& p);

// Coefficients c_j = <y, f_j>_pi.
Eigen::VectorXd expand_in_eigenbasis(std::span<const double> y, const SpectralDecomposition& dec);
Eigen::VectorXd reconstruct_from_eigenbasis(const Eigen::VectorXd& coefficients,
                                            const SpectralDecomposition& dec);

double pi_inner(std::span<const double> a, std::span<const double> b, const Eigen::VectorXd& pi);
double mean_pi(std::span<const double> y, const Eigen::VectorXd& pi);
double var_pi(std::span<const double> y, const Eigen::VectorXd& pi);

enum class Regime { LowVariance, HighVariance, Critical };
std::string_view regime_name(Regime r);

// Compares m * lambda2^2 with 1 (Critical when within 1e-12).
Regime classify_regime(double m, double lambda2);

struct BottleneckStat {
  double lambda_tilde = 0.0;
  std::vector<double> standardized_trait;
};

// lambda~ = y~' D^{-1/2} A D^{-1/2} y~ for the centered, unit-norm trait.
BottleneckStat bottleneck(const WeightedGraph& graph, std::span<const double> y);

// Rows "j,lambda,f_0,...,f_{N-1}" for auditing.
void write_decomposition_csv(const SpectralDecomposition& dec, std::ostream& out);

}  // namespace rds
