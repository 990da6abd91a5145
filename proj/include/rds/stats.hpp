#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rds {

double mean(std::span<const double> values);
// Unbiased (n-1) sample variance; 0 for a single value.
double variance(std::span<const double> values);

struct KdeCurve {
  std::vector<double> grid;
  std::vector<double> density;
  double bandwidth = 0.0;
};

// Silverman: 0.9 min(sd, IQR/1.34) n^{-1/5}, falling back to sd when the
// IQR is zero.
double silverman_bandwidth(std::span<const double> values);

// Gaussian-kernel density on `points` equally spaced grid values over
// [min - 3h, max + 3h]. Needs at least two distinct values.
KdeCurve kde(std::span<const double> values, std::optional<double> bandwidth = std::nullopt,
             std::size_t points = 512);

// Grid locations of strict local maxima whose height is at least
// min_relative_height times the global maximum.
std::vector<double> modes(const KdeCurve& curve, double min_relative_height = 0.05);

// Trapezoid integral of the density over the grid.
double kde_mass(const KdeCurve& curve);

struct QqPoint {
  double theoretical = 0.0;  // standard-normal quantile at (i - 0.5)/n
  double empirical = 0.0;    // i-th order statistic, standardized
};

// Needs n >= 2 and a non-constant sample.
std::vector<QqPoint> qq_normal(std::span<const double> values);

// Sup distance between the empirical CDF and the normal with the sample mean
// and (n-1) standard deviation. A constant sample gives 0.5.
double ks_to_fitted_normal(std::span<const double> values);

double ks_two_sample(std::span<const double> a, std::span<const double> b);

struct ClassMoments {
  std::string label;
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;
};

struct SeparationReport {
  std::vector<ClassMoments> classes;
  // For the pair of classes with the largest |z|.
  double difference = 0.0;
  double pooled_se = 0.0;
  double z = 0.0;
  bool separated = false;
};

struct LabeledValues {
  std::string label;
  std::vector<double> values;
};

// Two-sample z statistic of the class means, pooled SE
// sqrt(var_a/n_a + var_b/n_b). "Separated" when some pair has
// |mean difference| > 3 pooled SE. Needs at least two classes of size >= 2.
SeparationReport mixture_separation(std::span<const LabeledValues> classes);
SeparationReport mixture_separation(std::span<const double> a, std::span<const double> b);

struct DistributionSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;
  double ks = 0.0;
  KdeCurve kde;  // empty for degenerate samples
  std::vector<QqPoint> qq;
  std::vector<double> modes;
};

// KDE/Q-Q parts are left empty when the sample is constant or has n < 2.
DistributionSummary summarize(std::span<const double> values);

void write_kde_csv(const KdeCurve& curve, std::ostream& out);
void write_qq_csv(std::span<const QqPoint> qq, std::ostream& out);

}  // namespace rds
