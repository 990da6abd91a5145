#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rds/graph.hpp"
#include "rds/sampler.hpp"
#include "rds/spectral.hpp"
#include "rds/tree.hpp"

namespace rds {

enum class EstimatorKind { Mean, IPW, VH, GLS, GLS_IPW, GLS_VH, SBM_fGLS, SBM_fGLS_VH };

// Lower-case names used in configs and CSV output ("gls_vh", ...).
std::string_view estimator_name(EstimatorKind kind);
// "none", "ipw" or "vh".
std::string_view adjustment_name(EstimatorKind kind);
std::optional<EstimatorKind> parse_estimator_kind(std::string_view name);
bool needs_degrees(EstimatorKind kind);

struct EstimateRecord {
  EstimatorKind kind = EstimatorKind::Mean;
  double value = 0.0;
  std::size_t n = 0;
  int t = 0;  // deepest generation in the sample
  std::int64_t replicate = 0;
  int seed_state = 0;
};

struct GlsWeights {
  enum class Source { ClosedForm2Block, GeneralSolve };
  std::vector<double> w;
  Source source = Source::ClosedForm2Block;
};

// Sum of w_v * values_v.
double weighted_average(const GlsWeights& weights, std::span<const double> values);

EstimateRecord sample_mean(const RdsSample& sample);

// (vol(G)/N) * mean of y/deg. `mean_degree` is vol(G)/N.
EstimateRecord ipw(const RdsSample& sample, double mean_degree);
EstimateRecord ipw(const RdsSample& sample, const WeightedGraph& graph);

// (sum y/deg) / (sum 1/deg), from the degrees recorded in the sample.
EstimateRecord vh(const RdsSample& sample);

// Closed-form two-block GLS weights on any referral tree:
// w_v = (1 - lambda2 (deg_T(v) - 1)) / (n (1 - lambda2 (1 - 2/n))),
// deg_T the tree degree. Throws NumericError when the denominator vanishes.
GlsWeights gls_closed_form_weights(const ReferralTree& tree, double lambda2);
EstimateRecord gls_closed_form_2block(const RdsSample& sample, double lambda2);

// Solves Sigma x = 1 by Cholesky; w = x / sum(x). Throws NumericError unless
// Sigma is symmetric positive definite.
GlsWeights gls_general_weights(const Eigen::MatrixXd& sigma);
std::pair<GlsWeights, EstimateRecord> gls_general(const RdsSample& sample, const Eigen::MatrixXd& sigma);

// g(d) = sum_{j>=2} lambda_j^d <y, f_j>_pi^2 for d = 0..max_distance.
std::vector<double> sigma_kernel(const SpectralDecomposition& dec, std::span<const double> y, int max_distance);

// Stationary-start covariance of (y(X_v)) on the tree:
// Sigma_{v,u} = g(d(v, u)).
Eigen::MatrixXd build_sigma_blockmodel(const ReferralTree& tree, const SpectralDecomposition& dec,
                                       std::span<const double> y);
Eigen::MatrixXd build_sigma_from_kernel(const ReferralTree& tree, std::span<const double> kernel);

// GLS applied to y/(N pi) = y * mean_degree / deg.
EstimateRecord gls_ipw(const RdsSample& sample, const GlsWeights& weights, double mean_degree);
// GLS(y/deg) / GLS(1/deg) with the same weights.
EstimateRecord gls_vh(const RdsSample& sample, const GlsWeights& weights);
// Plain GLS with precomputed weights.
EstimateRecord gls(const RdsSample& sample, const GlsWeights& weights);

// Plug-in SBM-fGLS. Approximation: the two trait values label two blocks,
// the 2x2 block transition matrix is estimated from parent -> child label
// pairs with add-one smoothing, and its second eigenvalue feeds the
// closed-form weights.
struct SbmFglsFit {
  double p_hat = 0.5;
  double q_hat = 0.5;
  double lambda_hat = 0.0;
  GlsWeights weights;
};

// Throws InputError for a non-binary trait or fewer than 2 parent-child pairs.
SbmFglsFit sbm_fgls_fit(const RdsSample& sample);
EstimateRecord sbm_fgls(const RdsSample& sample);
// VH-adjusted variant using the fitted weights.
EstimateRecord sbm_fgls_vh(const RdsSample& sample);

// "replicate,estimator,adjustment,t,n,seed_state,value"
void write_estimates_csv(std::span<const EstimateRecord> records, std::ostream& out);

}  // namespace rds
