#include "rds/estimators.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>

#include "rds/csv.hpp"
#include "rds/error.hpp"
#include "rds/simd/kernels.hpp"

namespace rds {

namespace {

struct KindInfo {
  EstimatorKind kind;
  std::string_view name;
  std::string_view adjustment;
};

constexpr std::array<KindInfo, 8> kKinds{{
    {EstimatorKind::Mean, "mean", "none"},
    {EstimatorKind::IPW, "ipw", "ipw"},
    {EstimatorKind::VH, "vh", "vh"},
    {EstimatorKind::GLS, "gls", "none"},
    {EstimatorKind::GLS_IPW, "gls_ipw", "ipw"},
    {EstimatorKind::GLS_VH, "gls_vh", "vh"},
    {EstimatorKind::SBM_fGLS, "sbm_fgls", "none"},
    {EstimatorKind::SBM_fGLS_VH, "sbm_fgls_vh", "vh"},
}};

const KindInfo& info(EstimatorKind kind) {
  for (const auto& k : kKinds) {
    if (k.kind == kind) return k;
  }
  throw InputError("unknown estimator kind");
}

EstimateRecord make_record(const RdsSample& sample, EstimatorKind kind, double value) {
  if (!std::isfinite(value)) throw NumericError(std::string(estimator_name(kind)) + " estimate is not finite");
  EstimateRecord r;
  r.kind = kind;
  r.value = value;
  r.n = sample.size();
  r.t = sample.tree.depth();
  r.seed_state = sample.seed_state;
  return r;
}

void require_nonempty(const RdsSample& sample) {
  if (sample.size() == 0) throw InputError("sample is empty");
}

void require_weights(const RdsSample& sample, const GlsWeights& weights) {
  if (weights.w.size() != sample.size()) {
    throw InputError("GLS weights cover " + std::to_string(weights.w.size()) + " vertices, sample has " +
                     std::to_string(sample.size()));
  }
}

}  // namespace

std::string_view estimator_name(EstimatorKind kind) { return info(kind).name; }
std::string_view adjustment_name(EstimatorKind kind) { return info(kind).adjustment; }

std::optional<EstimatorKind> parse_estimator_kind(std::string_view name) {
  for (const auto& k : kKinds) {
    if (k.name == name) return k.kind;
  }
  return std::nullopt;
}

bool needs_degrees(EstimatorKind kind) { return adjustment_name(kind) != "none"; }

double weighted_average(const GlsWeights& weights, std::span<const double> values) {
  if (weights.w.size() != values.size()) throw InputError("weight and value lengths differ");
  return simd::dot(weights.w, values);
}

EstimateRecord sample_mean(const RdsSample& sample) {
  require_nonempty(sample);
  return make_record(sample, EstimatorKind::Mean, simd::sum(sample.traits) / static_cast<double>(sample.size()));
}

EstimateRecord ipw(const RdsSample& sample, double mean_degree) {
  require_nonempty(sample);
  if (!sample.has_degrees()) throw InputError("IPW needs node degrees; use vh when only sampled degrees are known");
  if (!(mean_degree > 0.0)) throw InputError("mean degree vol(G)/N must be positive");
  const auto yd = degree_scaled_trait(sample);
  return make_record(sample, EstimatorKind::IPW, mean_degree * simd::sum(yd) / static_cast<double>(sample.size()));
}

EstimateRecord ipw(const RdsSample& sample, const WeightedGraph& graph) {
  if (graph.empty()) throw InputError("graph is empty");
  return ipw(sample, graph.volume() / static_cast<double>(graph.node_count()));
}

EstimateRecord vh(const RdsSample& sample) {
  require_nonempty(sample);
  if (!sample.has_degrees()) throw InputError("VH needs the degrees recorded in the sample");
  const double num = simd::sum(degree_scaled_trait(sample));
  const double den = simd::sum(inverse_degree_trait(sample));
  return make_record(sample, EstimatorKind::VH, num / den);
}

GlsWeights gls_closed_form_weights(const ReferralTree& tree, double lambda2) {
  const std::size_t n = tree.size();
  const double nd = static_cast<double>(n);
  const double denom = nd * (1.0 - lambda2 * (1.0 - 2.0 / nd));
  if (std::abs(denom) < 1e-300) throw NumericError("closed-form GLS denominator is zero (lambda2 (1 - 2/n) = 1)");
  GlsWeights out;
  out.source = GlsWeights::Source::ClosedForm2Block;
  out.w.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    out.w[v] = (1.0 - lambda2 * (tree.tree_degree(static_cast<int>(v)) - 1)) / denom;
  }
  return out;
}

EstimateRecord gls_closed_form_2block(const RdsSample& sample, double lambda2) {
  require_nonempty(sample);
  return make_record(sample, EstimatorKind::GLS,
                     weighted_average(gls_closed_form_weights(sample.tree, lambda2), sample.traits));
}

GlsWeights gls_general_weights(const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() == 0) throw InputError("Sigma must be a nonempty square matrix");
  const double scale = sigma.cwiseAbs().maxCoeff();
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(scale, 1.0)) {
    throw NumericError("Sigma is not symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) throw NumericError("Sigma is singular or indefinite (Cholesky failed)");
  const Eigen::VectorXd x = llt.solve(Eigen::VectorXd::Ones(sigma.rows()));
  const double total = x.sum();
  if (!std::isfinite(total) || std::abs(total) < 1e-300) throw NumericError("GLS normalizer 1'x vanished");
  GlsWeights out;
  out.source = GlsWeights::Source::GeneralSolve;
  out.w.resize(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) out.w[static_cast<std::size_t>(i)] = x(i) / total;
  return out;
}

std::pair<GlsWeights, EstimateRecord> gls_general(const RdsSample& sample, const Eigen::MatrixXd& sigma) {
  require_nonempty(sample);
  if (static_cast<std::size_t>(sigma.rows()) != sample.size()) throw InputError("Sigma dimension does not match the sample");
  GlsWeights w = gls_general_weights(sigma);
  const double value = weighted_average(w, sample.traits);
  return {std::move(w), make_record(sample, EstimatorKind::GLS, value)};
}

std::vector<double> sigma_kernel(const SpectralDecomposition& dec, std::span<const double> y, int max_distance) {
  if (max_distance < 0) throw InputError("max_distance must be non-negative");
  const Eigen::VectorXd c = expand_in_eigenbasis(y, dec);
  std::vector<double> g(static_cast<std::size_t>(max_distance) + 1, 0.0);
  for (Eigen::Index j = 1; j < c.size(); ++j) {
    const double c2 = c(j) * c(j);
    const double lam = dec.eigenvalues(j);
    double pw = 1.0;
    for (int d = 0; d <= max_distance; ++d) {
      g[static_cast<std::size_t>(d)] += pw * c2;
      pw *= lam;
    }
  }
  return g;
}

Eigen::MatrixXd build_sigma_from_kernel(const ReferralTree& tree, std::span<const double> kernel) {
  const std::size_t n = tree.size();
  const std::vector<int> d = tree.distance_matrix();
  Eigen::MatrixXd sigma(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto dist = static_cast<std::size_t>(d[i * n + j]);
      if (dist >= kernel.size()) throw InputError("kernel is shorter than the tree diameter");
      sigma(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = kernel[dist];
    }
  }
  return sigma;
}

Eigen::MatrixXd build_sigma_blockmodel(const ReferralTree& tree, const SpectralDecomposition& dec,
                                       std::span<const double> y) {
  return build_sigma_from_kernel(tree, sigma_kernel(dec, y, 2 * tree.depth()));
}

EstimateRecord gls(const RdsSample& sample, const GlsWeights& weights) {
  require_nonempty(sample);
  require_weights(sample, weights);
  return make_record(sample, EstimatorKind::GLS, weighted_average(weights, sample.traits));
}

EstimateRecord gls_ipw(const RdsSample& sample, const GlsWeights& weights, double mean_degree) {
  require_nonempty(sample);
  require_weights(sample, weights);
  if (!(mean_degree > 0.0)) throw InputError("mean degree vol(G)/N must be positive");
  return make_record(sample, EstimatorKind::GLS_IPW, mean_degree * weighted_average(weights, degree_scaled_trait(sample)));
}

EstimateRecord gls_vh(const RdsSample& sample, const GlsWeights& weights) {
  require_nonempty(sample);
  require_weights(sample, weights);
  const double num = weighted_average(weights, degree_scaled_trait(sample));
  const double den = weighted_average(weights, inverse_degree_trait(sample));
  return make_record(sample, EstimatorKind::GLS_VH, num / den);
}

SbmFglsFit sbm_fgls_fit(const RdsSample& sample) {
  if (sample.size() < 3) throw InputError("SBM-fGLS needs at least 2 parent-child pairs");
  const auto [lo_it, hi_it] = std::minmax_element(sample.traits.begin(), sample.traits.end());
  const double lo = *lo_it, hi = *hi_it;
  for (double v : sample.traits) {
    if (v != lo && v != hi) throw InputError("SBM-fGLS needs a binary trait");
  }
  // counts[a][b]: parent label a, child label b; label 1 marks the larger value.
  double counts[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t v = 1; v < sample.size(); ++v) {
    const int a = sample.traits[static_cast<std::size_t>(sample.tree.parent(static_cast<int>(v)))] == hi && hi != lo;
    const int b = sample.traits[v] == hi && hi != lo;
    counts[a][b] += 1.0;
  }
  SbmFglsFit fit;
  fit.p_hat = (counts[0][0] + 1.0) / (counts[0][0] + counts[0][1] + 2.0);
  fit.q_hat = (counts[1][1] + 1.0) / (counts[1][0] + counts[1][1] + 2.0);
  fit.lambda_hat = fit.p_hat + fit.q_hat - 1.0;
  fit.weights = gls_closed_form_weights(sample.tree, fit.lambda_hat);
  return fit;
}

EstimateRecord sbm_fgls(const RdsSample& sample) {
  const SbmFglsFit fit = sbm_fgls_fit(sample);
  return make_record(sample, EstimatorKind::SBM_fGLS, weighted_average(fit.weights, sample.traits));
}

EstimateRecord sbm_fgls_vh(const RdsSample& sample) {
  const SbmFglsFit fit = sbm_fgls_fit(sample);
  EstimateRecord r = gls_vh(sample, fit.weights);
  r.kind = EstimatorKind::SBM_fGLS_VH;
  return r;
}

void write_estimates_csv(std::span<const EstimateRecord> records, std::ostream& out) {
  out << "replicate,estimator,adjustment,t,n,seed_state,value\n";
  for (const EstimateRecord& r : records) {
    out << r.replicate << ',' << estimator_name(r.kind) << ',' << adjustment_name(r.kind) << ',' << r.t << ','
        << r.n << ',' << r.seed_state << ',' << format_double(r.value) << '\n';
  }
}

}  // namespace rds
