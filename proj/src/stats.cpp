#include "rds/stats.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>

#include "rds/csv.hpp"
#include "rds/error.hpp"
#include "rds/simd/kernels.hpp"

namespace rds {

namespace {

void require_finite(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) throw InputError("values must be finite");
  }
}

// Linear interpolation between order statistics (type 7).
double quantile_sorted(const std::vector<double>& sorted, double prob) {
  const double pos = prob * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

double mean(std::span<const double> values) {
  if (values.empty()) throw InputError("no values");
  return simd::sum(values) / static_cast<double>(values.size());
}

double variance(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  return simd::sum_sq_dev(values, mean(values)) / static_cast<double>(values.size() - 1);
}

double silverman_bandwidth(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double sd = std::sqrt(variance(values));
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  return 0.9 * spread * std::pow(static_cast<double>(values.size()), -0.2);
}

KdeCurve kde(std::span<const double> values, std::optional<double> bandwidth, std::size_t points) {
  require_finite(values);
  if (points < 2) throw InputError("KDE grid needs at least 2 points");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  if (values.size() < 2 || *lo_it == *hi_it) {
    throw InputError("KDE needs at least two distinct values; the sample is degenerate");
  }
  KdeCurve c;
  c.bandwidth = bandwidth.value_or(silverman_bandwidth(values));
  if (!(c.bandwidth > 0.0)) throw InputError("KDE bandwidth must be positive");
  const double lo = *lo_it - 3.0 * c.bandwidth;
  const double hi = *hi_it + 3.0 * c.bandwidth;
  const double step = (hi - lo) / static_cast<double>(points - 1);
  const double inv_h = 1.0 / c.bandwidth;
  const double norm = inv_h / (static_cast<double>(values.size()) * std::sqrt(2.0 * M_PI));
  c.grid.resize(points);
  c.density.resize(points);
  for (std::size_t g = 0; g < points; ++g) {
    const double x = lo + step * static_cast<double>(g);
    c.grid[g] = x;
    c.density[g] = norm * simd::gaussian_kernel_sum(values, x, inv_h);
  }
  return c;
}

std::vector<double> modes(const KdeCurve& curve, double min_relative_height) {
  std::vector<double> out;
  const auto& d = curve.density;
  if (d.size() < 3) return out;
  const double top = *std::max_element(d.begin(), d.end());
  for (std::size_t g = 1; g + 1 < d.size(); ++g) {
    // A plateau counts once, at its left end.
    if (d[g] > d[g - 1] && d[g] >= d[g + 1] && d[g] >= min_relative_height * top) {
      std::size_t e = g;
      while (e + 1 < d.size() && d[e + 1] == d[g]) ++e;
      if (e + 1 < d.size() && d[e + 1] > d[g]) continue;
      out.push_back(curve.grid[g]);
    }
  }
  return out;
}

double kde_mass(const KdeCurve& curve) {
  double total = 0.0;
  for (std::size_t g = 1; g < curve.grid.size(); ++g) {
    total += 0.5 * (curve.density[g] + curve.density[g - 1]) * (curve.grid[g] - curve.grid[g - 1]);
  }
  return total;
}

std::vector<QqPoint> qq_normal(std::span<const double> values) {
  require_finite(values);
  if (values.size() < 2) throw InputError("Q-Q needs at least 2 values");
  const double mu = mean(values);
  const double sd = std::sqrt(variance(values));
  if (!(sd > 0.0)) throw InputError("Q-Q needs a non-constant sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const boost::math::normal standard;
  const double n = static_cast<double>(sorted.size());
  std::vector<QqPoint> out(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    out[i].theoretical = boost::math::quantile(standard, (static_cast<double>(i) + 0.5) / n);
    out[i].empirical = (sorted[i] - mu) / sd;
  }
  return out;
}

double ks_to_fitted_normal(std::span<const double> values) {
  require_finite(values);
  if (values.empty()) throw InputError("no values");
  const double mu = mean(values);
  const double sd = std::sqrt(variance(values));
  if (!(sd > 0.0)) return 0.5;  // CDF step against a half-mass point
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const boost::math::normal fitted(mu, sd);
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = boost::math::cdf(fitted, sorted[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  require_finite(a);
  require_finite(b);
  if (a.empty() || b.empty()) throw InputError("both samples must be nonempty");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return d;
}

SeparationReport mixture_separation(std::span<const LabeledValues> classes) {
  if (classes.size() < 2) throw InputError("separation needs at least two classes");
  SeparationReport r;
  for (const auto& c : classes) {
    if (c.values.size() < 2) throw InputError("class '" + c.label + "' has fewer than 2 values");
    require_finite(c.values);
    r.classes.push_back({c.label, c.values.size(), mean(c.values), variance(c.values)});
  }
  double best = -1.0;
  for (std::size_t a = 0; a < r.classes.size(); ++a) {
    for (std::size_t b = a + 1; b < r.classes.size(); ++b) {
      const auto& ca = r.classes[a];
      const auto& cb = r.classes[b];
      const double diff = ca.mean - cb.mean;
      const double se = std::sqrt(ca.variance / static_cast<double>(ca.n) + cb.variance / static_cast<double>(cb.n));
      const double z = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff));
      if (std::abs(z) > best) {
        best = std::abs(z);
        r.difference = diff;
        r.pooled_se = se;
        r.z = z;
      }
      if (std::abs(diff) > 3.0 * se) r.separated = true;
    }
  }
  return r;
}

SeparationReport mixture_separation(std::span<const double> a, std::span<const double> b) {
  const LabeledValues classes[2] = {{"a", {a.begin(), a.end()}}, {"b", {b.begin(), b.end()}}};
  return mixture_separation(classes);
}

DistributionSummary summarize(std::span<const double> values) {
  require_finite(values);
  DistributionSummary s;
  s.n = values.size();
  s.mean = mean(values);
  s.variance = variance(values);
  s.ks = ks_to_fitted_normal(values);
  if (values.size() >= 2 && s.variance > 0.0) {
    s.kde = kde(values);
    s.modes = modes(s.kde);
    s.qq = qq_normal(values);
  }
  return s;
}

void write_kde_csv(const KdeCurve& curve, std::ostream& out) {
  out << "x,density\n";
  for (std::size_t g = 0; g < curve.grid.size(); ++g) {
    out << format_double(curve.grid[g]) << ',' << format_double(curve.density[g]) << '\n';
  }
}

void write_qq_csv(std::span<const QqPoint> qq, std::ostream& out) {
  out << "theoretical,empirical\n";
  for (const QqPoint& p : qq) out << format_double(p.theoretical) << ',' << format_double(p.empirical) << '\n';
}

}  // namespace rds
