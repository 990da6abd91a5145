#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rds/blockmodel.hpp"
#include "rds/estimators.hpp"
#include "rds/sampler.hpp"
#include "rds/school.hpp"
#include "rds/spectral.hpp"
#include "rds/stats.hpp"
#include "rds/tree.hpp"

namespace rds {

inline constexpr int kSchemaVersion = 1;

struct ModelSpec {
  enum class Type { Blockmodel, EdgeList, SyntheticSchool };
  Type type = Type::Blockmodel;
  std::optional<BlockModel> blockmodel;
  bool walk_on_nodes = false;  // blockmodel: walk the node expansion instead of the block chain
  std::string edge_path;
  std::string trait_path;
  SyntheticSchoolSpec school;
  std::optional<double> target_lambda_tilde;
};

struct TreeSpec {
  enum class Type { MTree, GaltonWatson, WithoutReplacement, TypeCounts };
  Type type = Type::MTree;
  int m = 2;
  int depth = 10;
  std::optional<OffspringLaw> law;
  std::size_t target_n = 500;
  int max_restarts = 100;
};

enum class GlsMode { Auto, ClosedForm, General };

struct ExperimentConfig {
  ModelSpec model;
  TreeSpec tree;
  SeedSpec seed;
  std::vector<EstimatorKind> estimators;
  GlsMode gls_weights = GlsMode::Auto;
  std::vector<int> generations;  // empty: only the full depth
  std::int64_t replicates = 1;
  std::uint64_t master_seed = 1;
  std::string output_dir = "out";
  std::filesystem::path base_dir;  // relative paths resolve against this
};

// Throws ConfigError carrying the JSON path of the offending field.
ExperimentConfig parse_experiment_config(const std::string& json_text,
                                         const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// The chain the sampler walks on, with everything the estimators need.
struct Population {
  TransitionMatrix chain;
  std::vector<double> y;        // per state
  std::vector<double> degrees;  // per state; empty when unknown
  double mean_degree = 0.0;     // vol(G)/N; 0 when unknown
  double true_mean = 0.0;       // node-average of the trait
  double pi_mean = 0.0;         // E_pi(y)
  std::optional<WeightedGraph> graph;
  std::optional<double> lambda_tilde;
  std::optional<SpectralDecomposition> spectrum;  // filled when some consumer needs it

  double lambda2() const;
};

Population build_population(const ExperimentConfig& config);

// One replicate's sample, drawn from stream (master_seed, replicate).
// Unavailable for TypeCounts trees.
RdsSample draw_sample(const ExperimentConfig& config, const Population& population, std::int64_t replicate);

struct ExperimentRecord {
  EstimateRecord estimate;
  std::string seed_class;  // "y=<trait of the seed>"
};

// Groups are keyed by a stopping stage: the generation t for generation-
// stopped runs, the sample size n for size-stopped (without-replacement) runs,
// whose realized depth varies between replicates.
struct GroupSummary {
  std::string estimator;
  int stage = 0;
  std::string seed_class;  // "all" pools every class
  DistributionSummary summary;
  std::string key;         // file-name stem
};

struct SeparationEntry {
  std::string estimator;
  int stage = 0;
  SeparationReport report;
};

struct ReplicateFailure {
  std::int64_t replicate = 0;
  std::string message;
};

struct ExperimentResult {
  std::vector<ExperimentRecord> records;  // replicate-major, config order
  std::vector<GroupSummary> groups;
  std::vector<SeparationEntry> separations;
  std::vector<ReplicateFailure> failures;
  bool stage_is_size = false;  // stage holds n rather than t
  double lambda2 = 0.0;
  std::optional<double> lambda_tilde;
  double true_mean = 0.0;
  double pi_mean = 0.0;
};

// --threads value, else RDS_LAB_THREADS, else the hardware concurrency.
int resolve_thread_count(std::optional<int> requested);

// Runs every replicate on `threads` workers. Output does not depend on the
// thread count.
ExperimentResult run_experiment(const ExperimentConfig& config, int threads = 1);

// estimates.csv, summary.json, kde_<key>.csv and qq_<key>.csv under `dir`.
void write_experiment_outputs(const ExperimentConfig& config, const ExperimentResult& result,
                              const std::filesystem::path& dir);

void write_experiment_estimates_csv(const ExperimentResult& result, std::ostream& out);

}  // namespace rds
