#include "rds/school.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "rds/error.hpp"
#include "rds/rng.hpp"
#include "rds/spectral.hpp"

namespace rds {

SchoolNetwork generate_school(const SyntheticSchoolSpec& spec) {
  if (spec.grades < 2 || spec.middle_grades < 1 || spec.middle_grades >= spec.grades) {
    throw InputError("school needs at least one middle and one high-school grade");
  }
  if (spec.students_per_grade < 2 || spec.nominations < 1) throw InputError("school sizes must be positive");
  if (spec.within_grade < 0 || spec.within_school < 0 || spec.between_school < 0) {
    throw InputError("affinities must be non-negative");
  }
  const int per = spec.students_per_grade;
  const int n = spec.grades * per;
  const int middle_n = spec.middle_grades * per;
  auto grade_of = [per](int i) { return i / per; };
  auto high = [&](int i) { return grade_of(i) >= spec.middle_grades; };

  Rng rng(spec.seed);
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(spec.nominations));
  std::unordered_set<int> chosen;
  for (int i = 0; i < n; ++i) {
    const int g = grade_of(i);
    const int school_begin = high(i) ? middle_n : 0;
    const int school_end = high(i) ? n : middle_n;
    const int other_begin = high(i) ? 0 : middle_n;
    const int other_end = high(i) ? middle_n : n;
    const double pools[3] = {
        spec.within_grade * (per - 1),
        spec.within_school * (school_end - school_begin - per),
        spec.between_school * (other_end - other_begin),
    };
    chosen.clear();
    // Duplicate picks are dropped, so a student may end with fewer nominations.
    for (int k = 0; k < spec.nominations; ++k) {
      const std::size_t pool = rng.discrete(pools);
      int friend_id = 0;
      if (pool == 0) {
        friend_id = g * per + static_cast<int>(rng.below(static_cast<std::uint64_t>(per - 1)));
        if (friend_id >= i) ++friend_id;
      } else if (pool == 1) {
        friend_id = school_begin + static_cast<int>(rng.below(static_cast<std::uint64_t>(school_end - school_begin - per)));
        if (friend_id >= g * per) friend_id += per;
      } else {
        friend_id = other_begin + static_cast<int>(rng.below(static_cast<std::uint64_t>(other_end - other_begin)));
      }
      if (chosen.insert(friend_id).second) edges.push_back({i, friend_id, 1.0});
    }
  }

  const WeightedGraph full(static_cast<std::size_t>(n), edges);
  ComponentExtraction lcc = largest_connected_component(full);
  SchoolNetwork out;
  out.original_id = lcc.new_to_old;
  for (int old : lcc.new_to_old) {
    out.trait.push_back(high(old) ? 1.0 : 0.0);
    out.grade.push_back(grade_of(old));
  }
  out.graph = std::move(lcc.graph);
  out.lambda_tilde = bottleneck(out.graph, out.trait).lambda_tilde;
  return out;
}

SchoolNetwork calibrate_school(SyntheticSchoolSpec spec, double target, double tolerance, int max_iterations,
                               SyntheticSchoolSpec* chosen) {
  if (!(target > -1.0 && target < 1.0)) throw InputError("target lambda~ must lie in (-1, 1)");
  // lambda~ falls as between-school affinity grows.
  double lo = std::log(1e-5), hi = std::log(std::max(spec.within_grade, spec.within_school) + 1.0);
  SchoolNetwork best;
  SyntheticSchoolSpec best_spec = spec;
  double best_gap = INFINITY;
  for (int it = 0; it < max_iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    spec.between_school = std::exp(mid);
    SchoolNetwork net = generate_school(spec);
    const double gap = net.lambda_tilde - target;
    if (std::abs(gap) < best_gap) {
      best_gap = std::abs(gap);
      best = std::move(net);
      best_spec = spec;
    }
    if (best_gap <= tolerance) break;
    if (gap > 0.0) lo = mid; else hi = mid;
  }
  if (chosen) *chosen = best_spec;
  return best;
}

}  // namespace rds
