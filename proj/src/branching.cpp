#include "rds/branching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include "rds/csv.hpp"
#include "rds/error.hpp"

namespace rds {

double TypeCounts::average_of(std::span<const double> h, int t) const {
  double total = 0.0;
  for (int g = 0; g <= t; ++g) {
    const auto& row = z[static_cast<std::size_t>(g)];
    for (std::size_t j = 0; j < row.size(); ++j) total += h[j] * static_cast<double>(row[j]);
  }
  return total / static_cast<double>(n[static_cast<std::size_t>(t)]);
}

namespace {

void finish_counts(TypeCounts& tc, std::span<const double> y) {
  tc.w.assign(tc.z.size(), 0.0);
  tc.s.assign(tc.z.size(), 0.0);
  tc.n.assign(tc.z.size(), 0);
  double s = 0.0;
  std::int64_t n = 0;
  for (std::size_t t = 0; t < tc.z.size(); ++t) {
    double w = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) {
      w += y[j] * static_cast<double>(tc.z[t][j]);
      n += tc.z[t][j];
    }
    s += w;
    tc.w[t] = w;
    tc.s[t] = s;
    tc.n[t] = n;
  }
}

}  // namespace

TypeCounts count_types(const RdsSample& sample, std::span<const double> y) {
  const std::size_t k = y.size();
  TypeCounts tc;
  tc.z.assign(static_cast<std::size_t>(sample.tree.depth()) + 1, std::vector<std::int64_t>(k, 0));
  for (std::size_t v = 0; v < sample.size(); ++v) {
    const int s = sample.states[v];
    if (s < 0 || static_cast<std::size_t>(s) >= k) throw InputError("sample state " + std::to_string(s) + " outside the trait vector");
    ++tc.z[static_cast<std::size_t>(sample.tree.generation(static_cast<int>(v)))][static_cast<std::size_t>(s)];
  }
  finish_counts(tc, y);
  return tc;
}

std::vector<std::int64_t> multinomial(std::int64_t total, std::span<const double> probs, Rng& rng) {
  std::vector<std::int64_t> out(probs.size(), 0);
  double mass = 0.0;
  for (double p : probs) mass += p;
  std::int64_t left = total;
  for (std::size_t j = 0; j < probs.size() && left > 0; ++j) {
    if (j + 1 == probs.size() || mass <= probs[j]) {
      out[j] = left;
      left = 0;
      break;
    }
    const double share = std::clamp(probs[j] / mass, 0.0, 1.0);
    std::binomial_distribution<std::int64_t> draw(left, share);
    out[j] = draw(rng.engine());
    left -= out[j];
    mass -= probs[j];
  }
  return out;
}

TypeCounts simulate_type_counts(const TransitionMatrix& p, const OffspringLaw& law, const SeedSpec& seed,
                                std::span<const double> y, int depth, Rng& rng) {
  const std::size_t k = p.size();
  if (y.size() != k) throw InputError("trait length does not match state count");
  if (depth < 0) throw InputError("depth must be non-negative");
  seed.validate(k);

  std::vector<std::vector<double>> rows(k, std::vector<double>(k));
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) rows[a][b] = p(static_cast<int>(a), static_cast<int>(b));
  }

  TypeCounts tc;
  tc.z.emplace_back(k, 0);
  tc.z[0][static_cast<std::size_t>(seed.draw(p.stationary(), rng))] = 1;
  for (int g = 0; g < depth; ++g) {
    std::vector<std::int64_t> next(k, 0);
    bool any = false;
    for (std::size_t a = 0; a < k; ++a) {
      const std::int64_t parents = tc.z.back()[a];
      if (parents == 0) continue;
      std::int64_t children = 0;
      switch (law.kind()) {
        case OffspringLaw::Kind::Deterministic:
          children = parents * law.trials();
          break;
        case OffspringLaw::Kind::OnePlusBinomial: {
          std::binomial_distribution<std::int64_t> extra(parents * law.trials(), law.prob());
          children = parents + extra(rng.engine());
          break;
        }
        case OffspringLaw::Kind::Custom: {
          const auto by_size = multinomial(parents, law.pmf(), rng);
          for (std::size_t c = 0; c < by_size.size(); ++c) children += static_cast<std::int64_t>(c) * by_size[c];
          break;
        }
      }
      if (children == 0) continue;
      any = true;
      const auto split = multinomial(children, rows[a], rng);
      for (std::size_t b = 0; b < k; ++b) next[b] += split[b];
    }
    if (!any) break;  // extinct
    tc.z.push_back(std::move(next));
  }
  finish_counts(tc, y);
  return tc;
}

Eigen::MatrixXd mean_matrix(const TransitionMatrix& p, double m) { return m * p.matrix(); }

Eigen::RowVectorXd expected_counts(const TransitionMatrix& p, double m, int seed_state, int t) {
  if (seed_state < 0 || static_cast<std::size_t>(seed_state) >= p.size()) throw InputError("seed state out of range");
  Eigen::RowVectorXd z = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(p.size()));
  z(seed_state) = 1.0;
  const Eigen::MatrixXd mm = mean_matrix(p, m);
  for (int g = 0; g < t; ++g) z = (z * mm).eval();
  return z;
}

double CountMoments::variance_along(const Eigen::VectorXd& f, int t) const {
  const auto ut = static_cast<std::size_t>(t);
  const double mean_f = mean[ut].dot(f.transpose());
  return f.dot(second[ut] * f) - mean_f * mean_f;
}

CountMoments covariance_recursion(const TransitionMatrix& p, double m, int seed_state, int t,
                                  double offspring_variance) {
  const auto k = static_cast<Eigen::Index>(p.size());
  if (seed_state < 0 || seed_state >= k) throw InputError("seed state out of range");
  if (t < 0) throw InputError("t must be non-negative");
  const Eigen::MatrixXd mm = mean_matrix(p, m);

  std::vector<Eigen::MatrixXd> v(static_cast<std::size_t>(k));
  for (Eigen::Index a = 0; a < k; ++a) {
    const Eigen::RowVectorXd row = p.matrix().row(a);
    const Eigen::MatrixXd outer = row.transpose() * row;
    v[static_cast<std::size_t>(a)] = m * (Eigen::MatrixXd(row.asDiagonal()) - outer) + offspring_variance * outer;
  }

  CountMoments out;
  Eigen::RowVectorXd z0 = Eigen::RowVectorXd::Zero(k);
  z0(seed_state) = 1.0;
  out.mean.push_back(z0);
  out.second.push_back(z0.transpose() * z0);
  for (int g = 1; g <= t; ++g) {
    const Eigen::RowVectorXd& prev_mean = out.mean.back();
    Eigen::MatrixXd noise = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index a = 0; a < k; ++a) noise += prev_mean(a) * v[static_cast<std::size_t>(a)];
    Eigen::MatrixXd c = mm.transpose() * out.second.back() * mm + noise;
    out.mean.push_back(prev_mean * mm);
    out.second.push_back(std::move(c));
  }
  return out;
}

MartingaleTrace martingale_traces(const RdsSample& sample, const SpectralDecomposition& dec,
                                  std::span<const double> y, double lambda2, double m) {
  const std::size_t k = dec.size();
  if (y.size() != k) throw InputError("trait length does not match the decomposition");
  const TypeCounts tc = count_types(sample, y);

  MartingaleTrace out;
  for (std::size_t t = 0; t < tc.z.size(); ++t) {
    Eigen::VectorXd yt(static_cast<Eigen::Index>(k));
    for (std::size_t j = 0; j < k; ++j) {
      const double lam = dec.lambda(j);
      double inner = 0.0;
      for (std::size_t a = 0; a < k; ++a) {
        inner += static_cast<double>(tc.z[t][a]) * dec.eigenvectors(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(j));
      }
      yt(static_cast<Eigen::Index>(j)) = lam == 0.0 ? std::numeric_limits<double>::quiet_NaN()
                                                    : inner / std::pow(m * lam, static_cast<double>(t));
    }
    out.y_t.push_back(std::move(yt));
  }

  const double e_pi = mean_pi(y, dec.weights);
  const double drift = (1.0 - lambda2) * e_pi;
  out.m_n.assign(sample.size(), 0.0);
  double acc = 0.0;
  for (std::size_t v = 1; v < sample.size(); ++v) {
    const auto parent = static_cast<std::size_t>(sample.tree.parent(static_cast<int>(v)));
    acc += y[static_cast<std::size_t>(sample.states[v])] - lambda2 * y[static_cast<std::size_t>(sample.states[parent])] - drift;
    out.m_n[v] = acc;
  }
  return out;
}

namespace {

double limit_factor(const SpectralDecomposition& dec, double m, Regime& regime) {
  if (dec.size() < 2) throw InputError("the limit mean needs at least two states");
  const double lambda2 = dec.lambda2();
  regime = classify_regime(m, lambda2);
  if (regime != Regime::HighVariance) {
    throw InputError("limit mean requires the high-variance regime; classify_regime gives " +
                     std::string(regime_name(regime)));
  }
  if (dec.lambda2_repeated) {
    throw NumericError("lambda2 is repeated; the single-eigenvalue limit mean does not apply");
  }
  return (m - 1.0) * lambda2 / (m * lambda2 - 1.0);
}

}  // namespace

MixtureComponentSummary theorem1_mixture_mean(const SpectralDecomposition& dec, std::span<const double> y,
                                              double m, int seed_state) {
  if (y.size() != dec.size()) throw InputError("trait length does not match the decomposition");
  if (seed_state < 0 || static_cast<std::size_t>(seed_state) >= dec.size()) throw InputError("seed state out of range");
  MixtureComponentSummary s;
  const double factor = limit_factor(dec, m, s.regime);
  const Eigen::VectorXd c = expand_in_eigenbasis(y, dec);
  s.seed_state = seed_state;
  s.lambda2 = dec.lambda2();
  s.mean = factor * c(1) * dec.eigenvectors(seed_state, 1);
  return s;
}

MixtureComponentSummary vh_mixture_mean(const SpectralDecomposition& dec, std::span<const double> y,
                                        std::span<const double> degrees, double m, int seed_state) {
  const std::size_t k = dec.size();
  if (y.size() != k || degrees.size() != k) throw InputError("trait or degree length does not match the decomposition");
  if (seed_state < 0 || static_cast<std::size_t>(seed_state) >= k) throw InputError("seed state out of range");
  MixtureComponentSummary s;
  const double factor = limit_factor(dec, m, s.regime);
  std::vector<double> y1(k), y2(k);
  for (std::size_t a = 0; a < k; ++a) {
    if (!(degrees[a] > 0.0)) throw InputError("degrees must be positive");
    y1[a] = 1.0 / degrees[a];
    y2[a] = y[a] / degrees[a];
  }
  const double e1 = mean_pi(y1, dec.weights);
  const double mu_true = mean_pi(y2, dec.weights) / e1;
  std::vector<double> centered(k);
  for (std::size_t a = 0; a < k; ++a) centered[a] = y2[a] - mu_true * y1[a];
  const Eigen::VectorXd c = expand_in_eigenbasis(centered, dec);
  s.seed_state = seed_state;
  s.lambda2 = dec.lambda2();
  s.mean = factor * c(1) * dec.eigenvectors(seed_state, 1) / e1;
  return s;
}

void write_trace_csv(std::int64_t replicate, const MartingaleTrace& trace, std::ostream& out, bool header) {
  if (header) out << "replicate,t_or_n,quantity,value\n";
  for (std::size_t t = 0; t < trace.y_t.size(); ++t) {
    for (Eigen::Index j = 0; j < trace.y_t[t].size(); ++j) {
      const double v = trace.y_t[t](j);
      if (std::isnan(v)) continue;
      out << replicate << ',' << t << ",Y_" << (j + 1) << ',' << format_double(v) << '\n';
    }
  }
  for (std::size_t n = 0; n < trace.m_n.size(); ++n) {
    out << replicate << ',' << n << ",M," << format_double(trace.m_n[n]) << '\n';
  }
}

}  // namespace rds
