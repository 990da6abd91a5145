#include "rds/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "rds/branching.hpp"
#include "rds/csv.hpp"
#include "rds/error.hpp"
#include "rds/json_config.hpp"

namespace rds {

namespace {

using nlohmann::json;

OffspringLaw parse_offspring(const json& j, const std::string& path) {
  check_keys(j, path, {"kind", "m", "trials", "prob", "pmf"});
  const std::string kind = get_string(j, path, "kind");
  try {
    if (kind == "deterministic") {
      check_keys(j, path, {"kind", "m"});
      return OffspringLaw::deterministic(static_cast<int>(get_int(j, path, "m")));
    }
    if (kind == "one_plus_binomial") {
      check_keys(j, path, {"kind", "trials", "prob"});
      return OffspringLaw::one_plus_binomial(static_cast<int>(get_int(j, path, "trials")), get_number(j, path, "prob"));
    }
    if (kind == "custom") {
      check_keys(j, path, {"kind", "pmf"});
      return OffspringLaw::custom(get_vector(j, path, "pmf"));
    }
  } catch (const InputError& e) {
    throw ConfigError(path, e.what());
  }
  throw ConfigError(path + ".kind", "expected deterministic, one_plus_binomial or custom");
}

ModelSpec parse_model(const json& j, const std::string& path) {
  ModelSpec m;
  const std::string type = get_string(j, path, "type");
  if (type == "blockmodel") {
    m.type = ModelSpec::Type::Blockmodel;
    json rest = j;
    rest.erase("type");
    if (rest.contains("walk_on")) {
      const std::string on = get_string(j, path, "walk_on");
      if (on != "blocks" && on != "nodes") throw ConfigError(path + ".walk_on", "expected blocks or nodes");
      m.walk_on_nodes = on == "nodes";
      rest.erase("walk_on");
    }
    m.blockmodel = blockmodel_from_json(rest, path);
    if (m.walk_on_nodes && !m.blockmodel->has_expansion()) {
      throw ConfigError(path + ".block_size", "walk_on nodes needs a positive block_size");
    }
  } else if (type == "edge_list") {
    check_keys(j, path, {"type", "path", "trait_path"});
    m.type = ModelSpec::Type::EdgeList;
    m.edge_path = get_string(j, path, "path");
    m.trait_path = get_string(j, path, "trait_path");
  } else if (type == "synthetic_school") {
    check_keys(j, path, {"type", "grades", "middle_grades", "students_per_grade", "nominations", "within_grade",
                         "within_school", "between_school", "seed", "target_lambda_tilde"});
    m.type = ModelSpec::Type::SyntheticSchool;
    auto& s = m.school;
    if (j.contains("grades")) s.grades = static_cast<int>(get_int(j, path, "grades"));
    if (j.contains("middle_grades")) s.middle_grades = static_cast<int>(get_int(j, path, "middle_grades"));
    if (j.contains("students_per_grade")) s.students_per_grade = static_cast<int>(get_int(j, path, "students_per_grade"));
    if (j.contains("nominations")) s.nominations = static_cast<int>(get_int(j, path, "nominations"));
    if (j.contains("within_grade")) s.within_grade = get_number(j, path, "within_grade");
    if (j.contains("within_school")) s.within_school = get_number(j, path, "within_school");
    if (j.contains("between_school")) s.between_school = get_number(j, path, "between_school");
    if (j.contains("seed")) s.seed = static_cast<std::uint64_t>(get_int(j, path, "seed"));
    if (j.contains("target_lambda_tilde")) m.target_lambda_tilde = get_number(j, path, "target_lambda_tilde");
  } else {
    throw ConfigError(path + ".type", "expected blockmodel, edge_list or synthetic_school");
  }
  return m;
}

TreeSpec parse_tree(const json& j, const std::string& path) {
  TreeSpec t;
  const std::string type = get_string(j, path, "type");
  auto depth = [&] {
    const std::int64_t d = get_int(j, path, "depth");
    if (d < 0 || d > 62) throw ConfigError(path + ".depth", "must lie in [0, 62]");
    return static_cast<int>(d);
  };
  if (type == "m_tree") {
    check_keys(j, path, {"type", "m", "depth"});
    t.type = TreeSpec::Type::MTree;
    t.m = static_cast<int>(get_int(j, path, "m"));
    if (t.m < 1) throw ConfigError(path + ".m", "must be at least 1");
    t.depth = depth();
    t.law = OffspringLaw::deterministic(t.m);
  } else if (type == "galton_watson" || type == "type_counts") {
    check_keys(j, path, {"type", "offspring", "depth"});
    t.type = type == "galton_watson" ? TreeSpec::Type::GaltonWatson : TreeSpec::Type::TypeCounts;
    t.law = parse_offspring(require(j, path, "offspring"), path + ".offspring");
    t.depth = depth();
  } else if (type == "without_replacement") {
    check_keys(j, path, {"type", "offspring", "target_n", "max_restarts"});
    t.type = TreeSpec::Type::WithoutReplacement;
    t.law = parse_offspring(require(j, path, "offspring"), path + ".offspring");
    t.target_n = get_size(j, path, "target_n");
    if (t.target_n == 0) throw ConfigError(path + ".target_n", "must be positive");
    if (j.contains("max_restarts")) t.max_restarts = static_cast<int>(get_int(j, path, "max_restarts"));
    if (t.max_restarts < 0) throw ConfigError(path + ".max_restarts", "must be non-negative");
  } else {
    throw ConfigError(path + ".type", "expected m_tree, galton_watson, without_replacement or type_counts");
  }
  return t;
}

SeedSpec parse_seed(const json& j, const std::string& path) {
  const std::string type = get_string(j, path, "type");
  if (type == "stationary") {
    check_keys(j, path, {"type"});
    return SeedSpec::stationary();
  }
  if (type == "degree_proportional") {
    check_keys(j, path, {"type"});
    return SeedSpec::degree_proportional();
  }
  if (type == "fixed") {
    check_keys(j, path, {"type", "state"});
    return SeedSpec::fixed(static_cast<int>(get_int(j, path, "state")));
  }
  if (type == "distribution") {
    check_keys(j, path, {"type", "weights"});
    return SeedSpec::from_distribution(get_vector(j, path, "weights"));
  }
  throw ConfigError(path + ".type", "expected stationary, degree_proportional, fixed or distribution");
}

std::string seed_class_of(const Population& pop, int state) {
  return "y=" + format_double(pop.y[static_cast<std::size_t>(state)]);
}

// Precomputed, read-only state shared by all replicate workers.
struct Shared {
  const ExperimentConfig* config = nullptr;
  const Population* pop = nullptr;
  bool general = false;
  double lambda2 = 0.0;
  std::vector<double> kernel_y;   // Sigma kernel for y
  std::vector<double> kernel_y2;  // Sigma kernel for y/deg
  std::vector<int> generations;
  bool needs_gls = false;
  bool needs_gls_adjusted = false;
};

struct WeightPair {
  GlsWeights plain;
  GlsWeights adjusted;
};

WeightPair weights_for(const Shared& sh, const ReferralTree& tree) {
  WeightPair w;
  if (!sh.general) {
    w.plain = gls_closed_form_weights(tree, sh.lambda2);
    w.adjusted = w.plain;
    return w;
  }
  if (sh.needs_gls) w.plain = gls_general_weights(build_sigma_from_kernel(tree, sh.kernel_y));
  if (sh.needs_gls_adjusted) w.adjusted = gls_general_weights(build_sigma_from_kernel(tree, sh.kernel_y2));
  return w;
}

void estimate_sample(const Shared& sh, const RdsSample& s, std::int64_t replicate, std::vector<ExperimentRecord>& out) {
  const Population& pop = *sh.pop;
  std::optional<WeightPair> w;
  auto weights = [&]() -> const WeightPair& {
    if (!w) w = weights_for(sh, s.tree);
    return *w;
  };
  for (EstimatorKind kind : sh.config->estimators) {
    EstimateRecord r;
    switch (kind) {
      case EstimatorKind::Mean: r = sample_mean(s); break;
      case EstimatorKind::IPW: r = ipw(s, pop.mean_degree); break;
      case EstimatorKind::VH: r = vh(s); break;
      case EstimatorKind::GLS: r = gls(s, weights().plain); break;
      case EstimatorKind::GLS_IPW: r = gls_ipw(s, weights().adjusted, pop.mean_degree); break;
      case EstimatorKind::GLS_VH: r = gls_vh(s, weights().adjusted); break;
      case EstimatorKind::SBM_fGLS: r = sbm_fgls(s); break;
      case EstimatorKind::SBM_fGLS_VH: r = sbm_fgls_vh(s); break;
    }
    r.replicate = replicate;
    out.push_back({r, seed_class_of(pop, s.seed_state)});
  }
}

void estimate_counts(const Shared& sh, const TypeCounts& tc, std::int64_t replicate, std::vector<ExperimentRecord>& out) {
  const Population& pop = *sh.pop;
  const std::size_t k = pop.y.size();
  std::vector<double> y1(k), y2(k);
  for (std::size_t a = 0; a < k; ++a) {
    y1[a] = 1.0 / pop.degrees[a];
    y2[a] = pop.y[a] / pop.degrees[a];
  }
  int seed_state = 0;
  for (std::size_t a = 0; a < k; ++a) {
    if (tc.z[0][a] == 1) seed_state = static_cast<int>(a);
  }
  const double m = static_cast<double>(sh.config->tree.law->trials());
  const double lam = sh.lambda2;
  // Closed-form GLS weights of an m-tree depend only on the generation.
  auto gls_sum = [&](std::span<const double> h, int t) {
    double total = 0.0;
    for (int g = 0; g <= t; ++g) {
      double deg = g == 0 ? (t == 0 ? 0.0 : m) : (g == t ? 1.0 : m + 1.0);
      double gen = 0.0;
      for (std::size_t a = 0; a < k; ++a) gen += h[a] * static_cast<double>(tc.z[static_cast<std::size_t>(g)][a]);
      total += (1.0 - lam * (deg - 1.0)) * gen;
    }
    const double n = static_cast<double>(tc.n[static_cast<std::size_t>(t)]);
    return total / (n * (1.0 - lam * (1.0 - 2.0 / n)));
  };
  for (int t : sh.generations) {
    if (t > tc.depth()) continue;
    for (EstimatorKind kind : sh.config->estimators) {
      EstimateRecord r;
      r.kind = kind;
      r.t = t;
      r.n = static_cast<std::size_t>(tc.n[static_cast<std::size_t>(t)]);
      r.replicate = replicate;
      r.seed_state = seed_state;
      switch (kind) {
        case EstimatorKind::Mean: r.value = tc.mean_through(t); break;
        case EstimatorKind::IPW: r.value = pop.mean_degree * tc.average_of(y2, t); break;
        case EstimatorKind::VH: r.value = tc.average_of(y2, t) / tc.average_of(y1, t); break;
        case EstimatorKind::GLS: r.value = gls_sum(pop.y, t); break;
        case EstimatorKind::GLS_IPW: r.value = pop.mean_degree * gls_sum(y2, t); break;
        case EstimatorKind::GLS_VH: r.value = gls_sum(y2, t) / gls_sum(y1, t); break;
        default: throw InputError("estimator not available at the count level");
      }
      out.push_back({r, seed_class_of(pop, seed_state)});
    }
  }
}

std::vector<ExperimentRecord> run_replicate(const Shared& sh, std::int64_t replicate) {
  const ExperimentConfig& cfg = *sh.config;
  std::vector<ExperimentRecord> out;
  if (cfg.tree.type == TreeSpec::Type::TypeCounts) {
    Rng rng(cfg.master_seed, static_cast<std::uint64_t>(replicate));
    const TypeCounts tc = simulate_type_counts(sh.pop->chain, *cfg.tree.law, cfg.seed, sh.pop->y, cfg.tree.depth, rng);
    estimate_counts(sh, tc, replicate, out);
    return out;
  }
  const RdsSample full = draw_sample(cfg, *sh.pop, replicate);
  if (cfg.tree.type == TreeSpec::Type::WithoutReplacement) {
    estimate_sample(sh, full, replicate, out);
    return out;
  }
  for (int t : sh.generations) {
    if (t > full.depth()) continue;
    if (t == full.depth()) {
      estimate_sample(sh, full, replicate, out);
    } else {
      estimate_sample(sh, full.truncate_to_generation(t), replicate, out);
    }
  }
  return out;
}

std::string file_key(const std::string& estimator, char stage_kind, int stage, const std::string& cls) {
  std::string c;
  for (char ch : cls) {
    if (std::isalnum(static_cast<unsigned char>(ch))) c += ch;
    else if (ch == '.') c += 'p';
    else if (ch == '-') c += 'm';
  }
  return estimator + "_" + stage_kind + std::to_string(stage) + "_" + c;
}

}  // namespace

double Population::lambda2() const {
  if (chain.size() == 2) return chain(0, 0) + chain(1, 1) - 1.0;
  if (!spectrum) throw InputError("lambda2 requested without a spectral decomposition");
  return spectrum->lambda2();
}

ExperimentConfig parse_experiment_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("$", std::string("invalid JSON: ") + e.what());
  }
  const std::string root = "$";
  check_keys(j, root, {"schema_version", "description", "model", "tree", "seed", "estimators", "gls_weights",
                       "generations", "replicates", "master_seed", "output_dir"});
  if (get_int(j, root, "schema_version") != kSchemaVersion) {
    throw ConfigError("$.schema_version", "unsupported; expected " + std::to_string(kSchemaVersion));
  }
  ExperimentConfig c;
  c.base_dir = base_dir;
  c.model = parse_model(require(j, root, "model"), "$.model");
  if (c.model.type == ModelSpec::Type::EdgeList) {
    for (const auto& [key, file] : {std::pair{"path", c.model.edge_path}, std::pair{"trait_path", c.model.trait_path}}) {
      const std::filesystem::path f(file);
      const auto resolved = f.is_absolute() || base_dir.empty() ? f : base_dir / f;
      if (!std::filesystem::exists(resolved)) {
        throw ConfigError(std::string("$.model.") + key, "file not found: " + resolved.string());
      }
    }
  }
  c.tree = parse_tree(require(j, root, "tree"), "$.tree");
  c.seed = j.contains("seed") ? parse_seed(j["seed"], "$.seed") : SeedSpec::stationary();

  const json& est = require(j, root, "estimators");
  if (!est.is_array() || est.empty()) throw ConfigError("$.estimators", "expected a nonempty array of names");
  for (std::size_t i = 0; i < est.size(); ++i) {
    const std::string where = "$.estimators[" + std::to_string(i) + "]";
    if (!est[i].is_string()) throw ConfigError(where, "expected a string");
    auto kind = parse_estimator_kind(est[i].get<std::string>());
    if (!kind) throw ConfigError(where, "unknown estimator '" + est[i].get<std::string>() + "'");
    if (std::find(c.estimators.begin(), c.estimators.end(), *kind) != c.estimators.end()) {
      throw ConfigError(where, "listed twice");
    }
    c.estimators.push_back(*kind);
  }

  if (j.contains("gls_weights")) {
    const std::string mode = get_string(j, root, "gls_weights");
    if (mode == "auto") c.gls_weights = GlsMode::Auto;
    else if (mode == "closed_form") c.gls_weights = GlsMode::ClosedForm;
    else if (mode == "general") c.gls_weights = GlsMode::General;
    else throw ConfigError("$.gls_weights", "expected auto, closed_form or general");
  }
  if (j.contains("generations")) {
    if (c.tree.type == TreeSpec::Type::WithoutReplacement) {
      throw ConfigError("$.generations", "not used with without_replacement trees (they stop by size)");
    }
    const json& g = j["generations"];
    if (!g.is_array() || g.empty()) throw ConfigError("$.generations", "expected a nonempty array of integers");
    for (std::size_t i = 0; i < g.size(); ++i) {
      const std::string where = "$.generations[" + std::to_string(i) + "]";
      if (!g[i].is_number_integer()) throw ConfigError(where, "expected an integer");
      const int t = g[i].get<int>();
      if (t < 0 || t > c.tree.depth) throw ConfigError(where, "must lie in [0, tree depth]");
      c.generations.push_back(t);
    }
    std::sort(c.generations.begin(), c.generations.end());
    c.generations.erase(std::unique(c.generations.begin(), c.generations.end()), c.generations.end());
  }
  c.replicates = j.contains("replicates") ? get_int(j, root, "replicates") : 1;
  if (c.replicates < 1) throw ConfigError("$.replicates", "must be at least 1");
  if (j.contains("master_seed")) c.master_seed = static_cast<std::uint64_t>(get_int(j, root, "master_seed"));
  if (j.contains("output_dir")) c.output_dir = get_string(j, root, "output_dir");

  if (c.tree.type == TreeSpec::Type::TypeCounts) {
    for (EstimatorKind k : c.estimators) {
      const bool gls_family = k == EstimatorKind::GLS || k == EstimatorKind::GLS_IPW || k == EstimatorKind::GLS_VH;
      if (k == EstimatorKind::SBM_fGLS || k == EstimatorKind::SBM_fGLS_VH) {
        throw ConfigError("$.estimators", "sbm_fgls needs the tree; not available with type_counts");
      }
      if (gls_family && c.tree.law->kind() != OffspringLaw::Kind::Deterministic) {
        throw ConfigError("$.estimators", "count-level GLS needs a deterministic offspring law");
      }
      // Generation-level GLS uses the closed-form weights, exact only for
      // covariances of the form lambda^d.
      if (gls_family && c.model.type == ModelSpec::Type::Blockmodel && c.model.blockmodel->k() != 2) {
        throw ConfigError("$.estimators", "count-level GLS needs a 2-block model");
      }
    }
    if (c.model.type != ModelSpec::Type::Blockmodel) {
      throw ConfigError("$.tree.type", "type_counts runs on blockmodels only");
    }
    if (c.gls_weights == GlsMode::General) throw ConfigError("$.gls_weights", "type_counts supports closed_form only");
  }
  if (c.tree.type == TreeSpec::Type::WithoutReplacement && c.model.type == ModelSpec::Type::Blockmodel &&
      !c.model.blockmodel->has_expansion()) {
    throw ConfigError("$.model.block_size", "without_replacement sampling needs a node expansion");
  }
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str(), path.parent_path());
}

Population build_population(const ExperimentConfig& config) {
  const ModelSpec& m = config.model;
  Population pop;
  auto from_graph = [&](WeightedGraph g, std::vector<double> y) {
    pop.chain = build_transition(g);
    pop.degrees.assign(g.degrees().begin(), g.degrees().end());
    pop.mean_degree = g.volume() / static_cast<double>(g.node_count());
    pop.true_mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    pop.y = std::move(y);
    pop.graph = std::move(g);
  };
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() || config.base_dir.empty() ? path : config.base_dir / path;
  };

  switch (m.type) {
    case ModelSpec::Type::Blockmodel: {
      const BlockModel& bm = *m.blockmodel;
      if (m.walk_on_nodes || config.tree.type == TreeSpec::Type::WithoutReplacement) {
        NodeExpansion ex = bm.expand();
        from_graph(std::move(ex.graph), std::move(ex.node_trait));
      } else {
        pop.chain = bm.transition();
        pop.y = bm.trait();
        // Relative block degrees are all the estimators use; a model without
        // an expansion gets the degrees of block_size 1.
        const double size = static_cast<double>(std::max<std::size_t>(bm.block_size(), 1));
        for (std::size_t a = 0; a < bm.k(); ++a) {
          pop.degrees.push_back(size * bm.block_weights().row(static_cast<Eigen::Index>(a)).sum());
        }
        pop.mean_degree = std::accumulate(pop.degrees.begin(), pop.degrees.end(), 0.0) / static_cast<double>(bm.k());
        pop.true_mean = bm.true_mean();
      }
      break;
    }
    case ModelSpec::Type::EdgeList: {
      const WeightedGraph g = read_edge_list_file(resolve(m.edge_path).string());
      ComponentExtraction lcc = largest_connected_component(g);
      std::vector<double> y = read_node_values_file(resolve(m.trait_path).string(), lcc.graph);
      pop.lambda_tilde = bottleneck(lcc.graph, y).lambda_tilde;
      from_graph(std::move(lcc.graph), std::move(y));
      break;
    }
    case ModelSpec::Type::SyntheticSchool: {
      SchoolNetwork net = m.target_lambda_tilde ? calibrate_school(m.school, *m.target_lambda_tilde)
                                                : generate_school(m.school);
      pop.lambda_tilde = net.lambda_tilde;
      from_graph(std::move(net.graph), std::move(net.trait));
      break;
    }
  }
  pop.pi_mean = mean_pi(pop.y, pop.chain.stationary());

  const bool wants_gls = std::any_of(config.estimators.begin(), config.estimators.end(), [](EstimatorKind k) {
    return k == EstimatorKind::GLS || k == EstimatorKind::GLS_IPW || k == EstimatorKind::GLS_VH;
  });
  if (wants_gls && (pop.chain.size() > 2 || config.gls_weights == GlsMode::General)) {
    pop.spectrum = decompose(pop.chain);
  }
  return pop;
}

RdsSample draw_sample(const ExperimentConfig& config, const Population& pop, std::int64_t replicate) {
  Rng rng(config.master_seed, static_cast<std::uint64_t>(replicate));
  const TreeSpec& t = config.tree;
  switch (t.type) {
    case TreeSpec::Type::MTree:
      return walk(pop.chain, m_tree(t.m, t.depth), config.seed, pop.y, rng, pop.degrees);
    case TreeSpec::Type::GaltonWatson: {
      const ReferralTree tree = galton_watson(*t.law, t.depth, rng);
      return walk(pop.chain, tree, config.seed, pop.y, rng, pop.degrees);
    }
    case TreeSpec::Type::WithoutReplacement:
      if (!pop.graph) throw InputError("without-replacement sampling needs a graph");
      return walk_without_replacement(*pop.graph, *t.law, config.seed, t.target_n, t.max_restarts, pop.y, rng);
    case TreeSpec::Type::TypeCounts:
      break;
  }
  throw InputError("type_counts experiments do not produce tree samples");
}

int resolve_thread_count(std::optional<int> requested) {
  if (requested) {
    if (*requested < 1) throw InputError("--threads must be at least 1");
    return *requested;
  }
  if (const char* env = std::getenv("RDS_LAB_THREADS")) {
    long long v = 0;
    if (!parse_int(env, v) || v < 1) throw InputError("RDS_LAB_THREADS must be a positive integer");
    return static_cast<int>(v);
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

ExperimentResult run_experiment(const ExperimentConfig& config, int threads) {
  if (threads < 1) throw InputError("thread count must be at least 1");
  const Population pop = build_population(config);

  Shared sh;
  sh.config = &config;
  sh.pop = &pop;
  sh.generations = config.generations;
  if (sh.generations.empty() && config.tree.type != TreeSpec::Type::WithoutReplacement) {
    sh.generations.push_back(config.tree.depth);
  }
  for (EstimatorKind k : config.estimators) {
    if (k == EstimatorKind::GLS) sh.needs_gls = true;
    if (k == EstimatorKind::GLS_IPW || k == EstimatorKind::GLS_VH) sh.needs_gls_adjusted = true;
  }
  if (sh.needs_gls || sh.needs_gls_adjusted) {
    sh.general = config.gls_weights == GlsMode::General ||
                 (config.gls_weights == GlsMode::Auto && pop.chain.size() > 2 &&
                  !(config.model.type == ModelSpec::Type::Blockmodel && config.model.blockmodel->k() == 2));
    sh.lambda2 = pop.lambda2();
    if (sh.general) {
      const int max_d = config.tree.type == TreeSpec::Type::WithoutReplacement
                            ? 2 * static_cast<int>(config.tree.target_n)
                            : 2 * config.tree.depth;
      if (sh.needs_gls) sh.kernel_y = sigma_kernel(*pop.spectrum, pop.y, max_d);
      if (sh.needs_gls_adjusted) {
        std::vector<double> y2(pop.y.size());
        for (std::size_t a = 0; a < y2.size(); ++a) y2[a] = pop.y[a] / pop.degrees[a];
        sh.kernel_y2 = sigma_kernel(*pop.spectrum, y2, max_d);
      }
    }
  }

  const auto reps = static_cast<std::size_t>(config.replicates);
  std::vector<std::vector<ExperimentRecord>> per_rep(reps);
  std::vector<std::string> errors(reps);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next.fetch_add(1); r < reps; r = next.fetch_add(1)) {
      try {
        per_rep[r] = run_replicate(sh, static_cast<std::int64_t>(r));
      } catch (const std::exception& e) {
        per_rep[r].clear();
        errors[r] = e.what();
      }
    }
  };
  const int n_workers = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(threads), reps));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  ExperimentResult result;
  result.lambda2 = (sh.needs_gls || sh.needs_gls_adjusted) ? sh.lambda2
                   : (pop.chain.size() == 2 || pop.spectrum) ? pop.lambda2() : std::nan("");
  result.lambda_tilde = pop.lambda_tilde;
  result.true_mean = pop.true_mean;
  result.pi_mean = pop.pi_mean;
  for (std::size_t r = 0; r < reps; ++r) {
    if (!errors[r].empty()) result.failures.push_back({static_cast<std::int64_t>(r), errors[r]});
    for (auto& rec : per_rep[r]) result.records.push_back(std::move(rec));
  }

  // Group by estimator (config order), stage, then seed class; "all" pools classes.
  result.stage_is_size = config.tree.type == TreeSpec::Type::WithoutReplacement;
  const char stage_kind = result.stage_is_size ? 'n' : 't';
  std::map<std::tuple<std::size_t, int, std::string>, std::vector<double>> by_class;
  std::map<std::pair<std::size_t, int>, std::vector<double>> pooled;
  for (const auto& rec : result.records) {
    const auto pos = static_cast<std::size_t>(
        std::find(config.estimators.begin(), config.estimators.end(), rec.estimate.kind) - config.estimators.begin());
    const int stage = result.stage_is_size ? static_cast<int>(rec.estimate.n) : rec.estimate.t;
    by_class[{pos, stage, rec.seed_class}].push_back(rec.estimate.value);
    pooled[{pos, stage}].push_back(rec.estimate.value);
  }
  for (const auto& [key, values] : pooled) {
    const auto [pos, t] = key;
    const std::string name(estimator_name(config.estimators[pos]));
    std::vector<LabeledValues> classes;
    for (auto it = by_class.lower_bound({pos, t, std::string()}); it != by_class.end(); ++it) {
      if (std::get<0>(it->first) != pos || std::get<1>(it->first) != t) break;
      const std::string& cls = std::get<2>(it->first);
      result.groups.push_back({name, t, cls, summarize(it->second), file_key(name, stage_kind, t, cls)});
      if (it->second.size() >= 2) classes.push_back({cls, it->second});
    }
    result.groups.push_back({name, t, "all", summarize(values), file_key(name, stage_kind, t, "all")});
    if (classes.size() >= 2) result.separations.push_back({name, t, mixture_separation(classes)});
  }
  return result;
}

void write_experiment_estimates_csv(const ExperimentResult& result, std::ostream& out) {
  out << "replicate,estimator,adjustment,t,n,seed_class,value\n";
  for (const auto& rec : result.records) {
    const EstimateRecord& r = rec.estimate;
    out << r.replicate << ',' << estimator_name(r.kind) << ',' << adjustment_name(r.kind) << ',' << r.t << ',' << r.n
        << ',' << rec.seed_class << ',' << format_double(r.value) << '\n';
  }
}

void write_experiment_outputs(const ExperimentConfig& config, const ExperimentResult& result,
                              const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file_atomically(dir / "estimates.csv", [&](std::ostream& out) { write_experiment_estimates_csv(result, out); });

  json summary;
  summary["schema_version"] = kSchemaVersion;
  summary["replicates"] = config.replicates;
  summary["master_seed"] = config.master_seed;
  summary["lambda2"] = std::isnan(result.lambda2) ? json(nullptr) : json(result.lambda2);
  summary["lambda_tilde"] = result.lambda_tilde ? json(*result.lambda_tilde) : json(nullptr);
  summary["true_mean"] = result.true_mean;
  summary["pi_mean"] = result.pi_mean;
  json groups = json::array();
  for (const auto& g : result.groups) {
    json e;
    e["estimator"] = g.estimator;
    e[result.stage_is_size ? "n" : "t"] = g.stage;
    e["seed_class"] = g.seed_class;
    e["n"] = g.summary.n;
    e["mean"] = g.summary.mean;
    e["variance"] = g.summary.variance;
    e["ks"] = g.summary.ks;
    e["modes"] = g.summary.modes;
    e["kde_bandwidth"] = g.summary.kde.bandwidth;
    e["key"] = g.key;
    groups.push_back(e);
    if (!g.summary.kde.grid.empty()) {
      write_file_atomically(dir / ("kde_" + g.key + ".csv"), [&](std::ostream& out) { write_kde_csv(g.summary.kde, out); });
      write_file_atomically(dir / ("qq_" + g.key + ".csv"), [&](std::ostream& out) { write_qq_csv(g.summary.qq, out); });
    }
  }
  summary["groups"] = groups;
  json seps = json::array();
  for (const auto& s : result.separations) {
    json e;
    e["estimator"] = s.estimator;
    e[result.stage_is_size ? "n" : "t"] = s.stage;
    e["separated"] = s.report.separated;
    e["z"] = s.report.z;
    e["difference"] = s.report.difference;
    e["pooled_se"] = s.report.pooled_se;
    json cls = json::array();
    for (const auto& c : s.report.classes) {
      cls.push_back({{"label", c.label}, {"n", c.n}, {"mean", c.mean}, {"variance", c.variance}});
    }
    e["classes"] = cls;
    seps.push_back(e);
  }
  summary["separation"] = seps;
  json fails = json::array();
  for (const auto& f : result.failures) fails.push_back({{"replicate", f.replicate}, {"error", f.message}});
  summary["failures"] = fails;
  if (std::any_of(config.estimators.begin(), config.estimators.end(), [](EstimatorKind k) {
        return k == EstimatorKind::SBM_fGLS || k == EstimatorKind::SBM_fGLS_VH;
      })) {
    summary["notes"] = {"sbm_fgls is a plug-in approximation: smoothed 2x2 transition counts feed the closed-form weights"};
  }
  write_file_atomically(dir / "summary.json", [&](std::ostream& out) { out << summary.dump(2) << '\n'; });
}

}  // namespace rds
