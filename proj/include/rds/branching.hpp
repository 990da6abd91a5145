#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "rds/graph.hpp"
#include "rds/rng.hpp"
#include "rds/sampler.hpp"
#include "rds/spectral.hpp"
#include "rds/tree.hpp"

namespace rds {

// Per-generation type counts of a tree-indexed walk.
struct TypeCounts {
  std::vector<std::vector<std::int64_t>> z;  // z[t][j]: generation-t vertices in state j
  std::vector<double> w;                     // W_t = sum_j y_j z[t][j]
  std::vector<double> s;                     // S_t = W_0 + ... + W_t
  std::vector<std::int64_t> n;               // vertices in generations 0..t

  int depth() const { return static_cast<int>(z.size()) - 1; }
  // Sample mean through generation t: S_t / n_t.
  double mean_through(int t) const { return s[static_cast<std::size_t>(t)] / static_cast<double>(n[static_cast<std::size_t>(t)]); }
  // Weighted analogue: sum over generations <= t of sum_j h_j z[.][j], divided by n_t.
  double average_of(std::span<const double> h, int t) const;
};

TypeCounts count_types(const RdsSample& sample, std::span<const double> y);

// Multinomial(total, probs) by sequential conditional binomials.
std::vector<std::int64_t> multinomial(std::int64_t total, std::span<const double> probs, Rng& rng);

// Simulates Z_0..Z_depth directly at the count level: the children of the
// type-k parents are split multinomially over row k of P. Same law as
// count_types(walk(...)) on a Galton-Watson tree with `law`, but the cost is
// independent of the generation sizes.
TypeCounts simulate_type_counts(const TransitionMatrix& p, const OffspringLaw& law, const SeedSpec& seed,
                                std::span<const double> y, int depth, Rng& rng);

// M = m P.
Eigen::MatrixXd mean_matrix(const TransitionMatrix& p, double m);

// E Z_t = Z_0 M^t as a row vector.
Eigen::RowVectorXd expected_counts(const TransitionMatrix& p, double m, int seed_state, int t);

// First and second moments of Z_0..Z_t for a fixed seed.
struct CountMoments {
  std::vector<Eigen::RowVectorXd> mean;  // E Z_t
  std::vector<Eigen::MatrixXd> second;   // C_t = E Z_t' Z_t

  // Var <Z_t, f>.
  double variance_along(const Eigen::VectorXd& f, int t) const;
};

// C_t = M' C_{t-1} M + sum_k V_k E Z_{t-1,k}, C_0 = Z_0' Z_0, with
// V_k = m (diag(P_k) - P_k' P_k) + s2 P_k' P_k for offspring variance s2.
// s2 = 0 is the m-tree.
CountMoments covariance_recursion(const TransitionMatrix& p, double m, int seed_state, int t,
                                  double offspring_variance = 0.0);

struct MartingaleTrace {
  // y_t[t](j) = (m lambda_j)^{-t} <Z_t, f_j>; NaN where lambda_j = 0.
  std::vector<Eigen::VectorXd> y_t;
  // m_n[n] for n = 0..size-1: sum over non-root vertices k = 1..n of
  // [y(X_k) - lambda2 y(X_p(k))] - n (1 - lambda2) E_pi(y).
  std::vector<double> m_n;
};

// `y` is indexed by state; the sample's states must index it.
MartingaleTrace martingale_traces(const RdsSample& sample, const SpectralDecomposition& dec,
                                  std::span<const double> y, double lambda2, double m);

struct MixtureComponentSummary {
  int seed_state = 0;
  double mean = 0.0;     // E X^(i)
  double lambda2 = 0.0;  // the estimator scales as lambda2^t
  Regime regime = Regime::HighVariance;
};

// E X^(i) = ((m-1) lambda2 / (m lambda2 - 1)) <y, f_2>_pi f_2(i). Requires the
// high-variance regime (InputError otherwise) and a simple lambda2
// (NumericError when it is repeated).
MixtureComponentSummary theorem1_mixture_mean(const SpectralDecomposition& dec, std::span<const double> y,
                                              double m, int seed_state);

// Limit mean of lambda2^{-t} (VH_t - mu_true):
// E_pi(y')^{-1} ((m-1) lambda2 / (m lambda2 - 1)) <y'' - mu_true y', f_2>_pi f_2(i),
// y' = 1/deg, y'' = y/deg, mu_true = E_pi(y'') / E_pi(y'). The mu_true y'
// term vanishes when y is centered so that mu_true = 0.
MixtureComponentSummary vh_mixture_mean(const SpectralDecomposition& dec, std::span<const double> y,
                                        std::span<const double> degrees, double m, int seed_state);

// "replicate,t_or_n,quantity,value" with quantity "Y_<j>" (1-based j) or "M".
void write_trace_csv(std::int64_t replicate, const MartingaleTrace& trace, std::ostream& out,
                     bool header = true);

}  // namespace rds
