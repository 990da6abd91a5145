#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rds/error.hpp"
#include "rds/experiment.hpp"
#include "rds/school.hpp"

using namespace rds;

namespace {
const char* kSmoke = R"({
  "schema_version": 1,
  "model": {"type": "blockmodel", "p": 0.9, "q": 0.8, "trait": [1, 0]},
  "tree": {"type": "m_tree", "m": 2, "depth": 4},
  "seed": {"type": "stationary"},
  "estimators": ["mean", "gls", "sbm_fgls"],
  "generations": [2, 4],
  "replicates": 1,
  "master_seed": 5
})";

std::string with(const std::string& key, const std::string& value) {
  std::string s = kSmoke;
  const auto pos = s.find("\"" + key + "\"");
  REQUIRE(pos != std::string::npos);
  const auto colon = s.find(':', pos);
  const auto end = s.find_first_of(",\n", s[colon + 2] == '{' || s[colon + 2] == '[' ? s.find_first_of("}]", colon) : colon);
  return s.substr(0, colon + 1) + " " + value + s.substr(end);
}

std::string config_error_path(const std::string& text) {
  try {
    parse_experiment_config(text);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<none>";
}

std::string csv_of(const ExperimentResult& r) {
  std::ostringstream out;
  write_experiment_estimates_csv(r, out);
  return out.str();
}
}  // namespace

TEST_CASE("config errors carry field paths") {
  CHECK(config_error_path("{") == "$");
  CHECK(config_error_path(with("schema_version", "2")) == "$.schema_version");
  CHECK(config_error_path(with("replicates", "0")) == "$.replicates");
  CHECK(config_error_path(with("estimators", R"(["mean", "median"])")) == "$.estimators[1]");
  CHECK(config_error_path(with("estimators", R"(["mean", "mean"])")) == "$.estimators[1]");
  CHECK(config_error_path(with("generations", "[7]")) == "$.generations[0]");
  CHECK(config_error_path(with("seed", R"({"type": "fixed"})")) == "$.seed.state");
  CHECK(config_error_path(with("tree", R"({"type": "m_tree", "m": 2, "depth": 4, "extra": 1})")) == "$.tree.extra");
  CHECK(config_error_path(with("model", R"({"type": "edge_list", "path": "/nonexistent/e.txt", "trait_path": "/nonexistent/t.txt"})")) ==
        "$.model.path");
  std::string unknown = kSmoke;
  unknown.insert(1, "\"colour\": 1,");
  CHECK(config_error_path(unknown) == "$.colour");
  CHECK(config_error_path(with("tree", R"({"type": "type_counts", "offspring": {"kind": "one_plus_binomial", "trials": 2, "prob": 0.5}, "depth": 4})")) ==
        "$.estimators");
  CHECK_NOTHROW(parse_experiment_config(kSmoke));
}

TEST_CASE("smoke run gives one record per estimator and generation") {
  auto c = parse_experiment_config(kSmoke);
  auto r = run_experiment(c, 1);
  CHECK(r.records.size() == 6);
  CHECK(r.failures.empty());
  CHECK(r.lambda2 == doctest::Approx(0.7));
  CHECK(r.true_mean == doctest::Approx(0.5));
  for (const auto& rec : r.records) CHECK((rec.seed_class == "y=1" || rec.seed_class == "y=0"));
  CHECK(r.records[3].estimate.t == 4);
  CHECK(r.records[3].estimate.n == 31);
}

TEST_CASE("replicate results do not depend on the thread count") {
  auto c = parse_experiment_config(with("replicates", "40"));
  c.estimators = {EstimatorKind::Mean, EstimatorKind::GLS, EstimatorKind::SBM_fGLS};
  CHECK(csv_of(run_experiment(c, 1)) == csv_of(run_experiment(c, 4)));
}

TEST_CASE("draw_sample is the replicate's sample") {
  auto c = parse_experiment_config(kSmoke);
  c.generations.clear();
  auto pop = build_population(c);
  auto r = run_experiment(c, 1);
  auto s = draw_sample(c, pop, 0);
  CHECK(r.records[0].estimate.value == sample_mean(s).value);
}

TEST_CASE("count-level and tree-level runs agree on estimator laws") {
  auto tree = parse_experiment_config(with("replicates", "1500"));
  tree.estimators = {EstimatorKind::Mean, EstimatorKind::GLS};
  tree.generations = {4};
  auto counts = tree;
  counts.tree.type = TreeSpec::Type::TypeCounts;
  counts.tree.law = OffspringLaw::deterministic(2);
  counts.master_seed = 99;
  auto a = run_experiment(tree, 1), b = run_experiment(counts, 1);
  for (std::size_t e = 0; e < 2; ++e) {
    std::vector<double> va, vb;
    for (std::size_t i = e; i < a.records.size(); i += 2) va.push_back(a.records[i].estimate.value);
    for (std::size_t i = e; i < b.records.size(); i += 2) vb.push_back(b.records[i].estimate.value);
    CHECK(!mixture_separation(va, vb).separated);
  }
}

TEST_CASE("experiment outputs are written") {
  auto c = parse_experiment_config(with("replicates", "30"));
  auto r = run_experiment(c, 2);
  auto dir = std::filesystem::temp_directory_path() / "rdslab_unit_outputs";
  std::filesystem::remove_all(dir);
  write_experiment_outputs(c, r, dir);
  CHECK(std::filesystem::exists(dir / "estimates.csv"));
  CHECK(std::filesystem::exists(dir / "summary.json"));
  CHECK(std::filesystem::exists(dir / "kde_gls_t4_all.csv"));
  CHECK(std::filesystem::exists(dir / "qq_mean_t2_y1.csv"));
  std::ifstream in(dir / "estimates.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "replicate,estimator,adjustment,t,n,seed_class,value");
  std::filesystem::remove_all(dir);
}

TEST_CASE("thread count resolution") {
  CHECK(resolve_thread_count(3) == 3);
  CHECK(resolve_thread_count(std::nullopt) >= 1);
  CHECK_THROWS(resolve_thread_count(0));
}

TEST_CASE("synthetic school networks") {
  SyntheticSchoolSpec spec;
  spec.students_per_grade = 60;
  auto net = generate_school(spec);
  CHECK(is_connected(net.graph));
  CHECK(net.trait.size() == net.graph.node_count());
  CHECK(net.lambda_tilde > 0.5);
  CHECK(net.lambda_tilde < 1.0);
  // Same spec, same network.
  auto again = generate_school(spec);
  CHECK(again.graph == net.graph);
  SyntheticSchoolSpec more = spec;
  more.between_school = 0.2;
  CHECK(generate_school(more).lambda_tilde < net.lambda_tilde);
  SyntheticSchoolSpec bad = spec;
  bad.middle_grades = 7;
  CHECK_THROWS_AS(generate_school(bad), InputError);
  SyntheticSchoolSpec chosen;
  auto cal = calibrate_school(spec, 0.8, 0.01, 40, &chosen);
  CHECK(std::abs(cal.lambda_tilde - 0.8) < 0.01);
}
