#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rds/graph.hpp"

namespace rds {

// Synthetic middle/high-school friendship network. Students sit in grades;
// the first `middle_grades` grades form the middle school and the rest the
// high school. Each student nominates up to `nominations` distinct friends,
// choosing a pool (own grade, other grades of the same school, the other
// school) with probability proportional to affinity times pool size and then
// a member of that pool uniformly. Nominations are symmetrized by max and the
// graph is cut down to its largest connected component.
struct SyntheticSchoolSpec {
  int grades = 6;
  int middle_grades = 2;
  int students_per_grade = 200;
  int nominations = 10;
  double within_grade = 1.0;
  double within_school = 0.15;
  double between_school = 0.01;
  std::uint64_t seed = 1;
};

struct SchoolNetwork {
  WeightedGraph graph;            // largest connected component
  std::vector<double> trait;      // 1 for high-school students
  std::vector<int> grade;
  std::vector<int> original_id;   // id before component extraction
  double lambda_tilde = 0.0;
};

// Throws InputError for inconsistent sizes or negative affinities.
SchoolNetwork generate_school(const SyntheticSchoolSpec& spec);

// Bisects between_school (on a log scale, generator seed held fixed) so that
// the network's lambda~ is within `tolerance` of `target`. Returns the closest
// network found.
SchoolNetwork calibrate_school(SyntheticSchoolSpec spec, double target, double tolerance = 0.005,
                               int max_iterations = 40, SyntheticSchoolSpec* chosen = nullptr);

}  // namespace rds
