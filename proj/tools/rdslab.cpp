// rdslab: command-line front end for the RDS simulation toolkit.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rds/csv.hpp"
#include "rds/error.hpp"
#include "rds/estimators.hpp"
#include "rds/experiment.hpp"
#include "rds/graph.hpp"
#include "rds/json_config.hpp"
#include "rds/sampler.hpp"
#include "rds/school.hpp"
#include "rds/spectral.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonFlags {
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--seed", f.seed, "Master RNG seed (overrides the config)");
  cmd->add_option("--threads", f.threads, "Worker threads (default: RDS_LAB_THREADS or all cores)");
  cmd->add_option("--out", f.out, "Output directory or file");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw rds::InputError("cannot open " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cmd_spectrum(const std::string& edges, const std::string& trait_path, std::optional<double> m, bool all,
                 const CommonFlags& f) {
  const rds::WeightedGraph g = rds::read_edge_list_file(edges);
  const rds::TransitionMatrix p = rds::build_transition(g);
  const rds::SpectralDecomposition dec = rds::decompose(p);
  const std::size_t shown = all ? dec.size() : std::min<std::size_t>(dec.size(), 10);
  std::cout << "nodes " << g.node_count() << "\nedges " << g.edge_count() << "\nlambda";
  for (std::size_t j = 0; j < shown; ++j) std::cout << ' ' << rds::format_double(dec.lambda(j));
  if (shown < dec.size()) std::cout << " ...";
  std::cout << "\nlambda2 " << rds::format_double(dec.lambda2()) << '\n';
  if (dec.lambda2_repeated) std::cout << "warning: lambda2 is repeated; single-eigenvalue limit formulas do not apply\n";
  if (m && dec.size() > 1) {
    std::cout << "regime " << rds::regime_name(rds::classify_regime(*m, dec.lambda2())) << '\n';
  }
  if (!trait_path.empty()) {
    const auto y = rds::read_node_values_file(trait_path, g);
    std::cout << "lambda_tilde " << rds::format_double(rds::bottleneck(g, y).lambda_tilde) << '\n';
  }
  if (!f.out.empty()) {
    rds::write_file_atomically(f.out, [&](std::ostream& o) { rds::write_decomposition_csv(dec, o); });
  }
  return 0;
}

rds::ExperimentConfig load_config(const std::string& path, const CommonFlags& f) {
  rds::ExperimentConfig c = rds::load_experiment_config(path);
  if (f.seed) c.master_seed = *f.seed;
  if (!f.out.empty()) c.output_dir = f.out;
  else if (fs::path(c.output_dir).is_relative()) c.output_dir = (c.base_dir / c.output_dir).string();
  return c;
}

int cmd_simulate(const std::string& config_path, const CommonFlags& f) {
  const rds::ExperimentConfig c = load_config(config_path, f);
  const rds::Population pop = rds::build_population(c);
  fs::create_directories(c.output_dir);
  for (std::int64_t r = 0; r < c.replicates; ++r) {
    const rds::RdsSample s = rds::draw_sample(c, pop, r);
    const fs::path file = fs::path(c.output_dir) / ("sample_" + std::to_string(r) + ".csv");
    rds::write_file_atomically(file, [&](std::ostream& o) {
      o << "# replicate=" << r << '\n';
      rds::write_sample_csv(s, o);
    });
  }
  std::cout << "wrote " << c.replicates << " samples to " << c.output_dir << '\n';
  return 0;
}

int cmd_estimate(const std::string& sample_path, std::optional<double> lambda2, std::optional<double> mean_degree,
                 const std::vector<std::string>& names, const CommonFlags& f) {
  std::ifstream in(sample_path);
  if (!in) throw rds::InputError("cannot open " + sample_path);
  const rds::RdsSample s = rds::read_sample_csv(in);

  std::vector<rds::EstimatorKind> kinds;
  if (names.empty()) {
    kinds.push_back(rds::EstimatorKind::Mean);
    if (mean_degree && s.has_degrees()) kinds.push_back(rds::EstimatorKind::IPW);
    if (s.has_degrees()) kinds.push_back(rds::EstimatorKind::VH);
    if (lambda2) kinds.push_back(rds::EstimatorKind::GLS);
    if (lambda2 && mean_degree && s.has_degrees()) kinds.push_back(rds::EstimatorKind::GLS_IPW);
    if (lambda2 && s.has_degrees()) kinds.push_back(rds::EstimatorKind::GLS_VH);
  } else {
    for (const auto& n : names) {
      auto k = rds::parse_estimator_kind(n);
      if (!k) throw rds::InputError("unknown estimator '" + n + "'");
      kinds.push_back(*k);
    }
  }
  auto need = [](const auto& opt, const char* flag) {
    if (!opt) throw rds::InputError(std::string("this estimator needs ") + flag);
    return *opt;
  };
  std::vector<rds::EstimateRecord> records;
  for (auto k : kinds) {
    switch (k) {
      case rds::EstimatorKind::Mean: records.push_back(rds::sample_mean(s)); break;
      case rds::EstimatorKind::IPW: records.push_back(rds::ipw(s, need(mean_degree, "--mean-degree"))); break;
      case rds::EstimatorKind::VH: records.push_back(rds::vh(s)); break;
      case rds::EstimatorKind::GLS: records.push_back(rds::gls_closed_form_2block(s, need(lambda2, "--lambda2"))); break;
      case rds::EstimatorKind::GLS_IPW:
        records.push_back(rds::gls_ipw(s, rds::gls_closed_form_weights(s.tree, need(lambda2, "--lambda2")),
                                       need(mean_degree, "--mean-degree")));
        break;
      case rds::EstimatorKind::GLS_VH:
        records.push_back(rds::gls_vh(s, rds::gls_closed_form_weights(s.tree, need(lambda2, "--lambda2"))));
        break;
      case rds::EstimatorKind::SBM_fGLS: records.push_back(rds::sbm_fgls(s)); break;
      case rds::EstimatorKind::SBM_fGLS_VH: records.push_back(rds::sbm_fgls_vh(s)); break;
    }
  }
  if (f.out.empty()) {
    rds::write_estimates_csv(records, std::cout);
  } else {
    rds::write_file_atomically(f.out, [&](std::ostream& o) { rds::write_estimates_csv(records, o); });
  }
  return 0;
}

int cmd_experiment(const std::string& config_path, const CommonFlags& f) {
  const rds::ExperimentConfig c = load_config(config_path, f);
  const int threads = rds::resolve_thread_count(f.threads);
  const rds::ExperimentResult r = rds::run_experiment(c, threads);
  rds::write_experiment_outputs(c, r, c.output_dir);
  std::cout << "replicates " << c.replicates << "\nrecords " << r.records.size() << "\noutput " << c.output_dir << '\n';
  for (const auto& s : r.separations) {
    std::cout << "separation " << s.estimator << (r.stage_is_size ? " n=" : " t=") << s.stage << ' ' << (s.report.separated ? "separated" : "not separated")
              << " z=" << rds::format_double(s.report.z) << '\n';
  }
  if (!r.failures.empty()) {
    std::cerr << r.failures.size() << " replicate(s) failed; first: replicate " << r.failures.front().replicate << ": "
              << r.failures.front().message << '\n';
    return 3;
  }
  return 0;
}

int cmd_synth_school(const std::string& spec_path, const CommonFlags& f) {
  const nlohmann::json j = nlohmann::json::parse(slurp(spec_path));
  const std::string root = "$";
  rds::check_keys(j, root, {"schema_version", "grades", "middle_grades", "students_per_grade", "nominations",
                            "within_grade", "within_school", "between_school", "seed", "target_lambda_tilde"});
  if (rds::get_int(j, root, "schema_version") != rds::kSchemaVersion) {
    throw rds::ConfigError("$.schema_version", "unsupported version");
  }
  rds::SyntheticSchoolSpec spec;
  if (j.contains("grades")) spec.grades = static_cast<int>(rds::get_int(j, root, "grades"));
  if (j.contains("middle_grades")) spec.middle_grades = static_cast<int>(rds::get_int(j, root, "middle_grades"));
  if (j.contains("students_per_grade")) spec.students_per_grade = static_cast<int>(rds::get_int(j, root, "students_per_grade"));
  if (j.contains("nominations")) spec.nominations = static_cast<int>(rds::get_int(j, root, "nominations"));
  if (j.contains("within_grade")) spec.within_grade = rds::get_number(j, root, "within_grade");
  if (j.contains("within_school")) spec.within_school = rds::get_number(j, root, "within_school");
  if (j.contains("between_school")) spec.between_school = rds::get_number(j, root, "between_school");
  if (j.contains("seed")) spec.seed = static_cast<std::uint64_t>(rds::get_int(j, root, "seed"));
  if (f.seed) spec.seed = *f.seed;

  rds::SyntheticSchoolSpec used = spec;
  const rds::SchoolNetwork net = j.contains("target_lambda_tilde")
                                     ? rds::calibrate_school(spec, rds::get_number(j, root, "target_lambda_tilde"), 0.005, 40, &used)
                                     : rds::generate_school(spec);
  const fs::path dir = f.out.empty() ? fs::path("school") : fs::path(f.out);
  fs::create_directories(dir);
  rds::write_file_atomically(dir / "network.edges", [&](std::ostream& o) { rds::write_edge_list(net.graph, o); });
  rds::write_file_atomically(dir / "trait.txt", [&](std::ostream& o) { rds::write_node_values(net.graph, net.trait, o); });
  std::cout << "nodes " << net.graph.node_count() << "\nedges " << net.graph.edge_count() << "\nbetween_school "
            << rds::format_double(used.between_school) << "\nlambda_tilde " << rds::format_double(net.lambda_tilde)
            << "\noutput " << dir.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Respondent-driven sampling simulation and estimation"};
  app.require_subcommand(1);

  CommonFlags spectrum_flags, simulate_flags, estimate_flags, experiment_flags, school_flags;

  std::string edges, trait_path;
  std::optional<double> m;
  bool all = false;
  auto* spectrum = app.add_subcommand("spectrum", "Eigenvalues, lambda~ and regime of an edge-list graph");
  spectrum->add_option("edgelist", edges, "Edge list \"u v [w]\"")->required();
  spectrum->add_option("--trait", trait_path, "\"label value\" file for lambda~");
  spectrum->add_option("--m", m, "Mean offspring, for the regime classification");
  spectrum->add_flag("--all", all, "Print every eigenvalue");
  add_common(spectrum, spectrum_flags);

  std::string sim_config;
  auto* simulate = app.add_subcommand("simulate", "Write raw samples for each replicate of a config");
  simulate->add_option("config", sim_config, "Experiment config (JSON)")->required();
  add_common(simulate, simulate_flags);

  std::string sample_path;
  std::optional<double> lambda2, mean_degree;
  std::vector<std::string> names;
  auto* estimate = app.add_subcommand("estimate", "Estimators on an exported sample");
  estimate->add_option("sample", sample_path, "Sample CSV")->required();
  estimate->add_option("--lambda2", lambda2, "Second eigenvalue for the closed-form GLS weights");
  estimate->add_option("--mean-degree", mean_degree, "vol(G)/N for IPW");
  estimate->add_option("--estimators", names, "Estimator names")->delimiter(',');
  add_common(estimate, estimate_flags);

  std::string exp_config;
  auto* experiment = app.add_subcommand("experiment", "Run a full replicate experiment");
  experiment->add_option("config", exp_config, "Experiment config (JSON)")->required();
  add_common(experiment, experiment_flags);

  std::string school_spec;
  auto* school = app.add_subcommand("synth-school", "Generate a synthetic school network");
  school->add_option("spec", school_spec, "Generator spec (JSON)")->required();
  add_common(school, school_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*spectrum) return cmd_spectrum(edges, trait_path, m, all, spectrum_flags);
    if (*simulate) return cmd_simulate(sim_config, simulate_flags);
    if (*estimate) return cmd_estimate(sample_path, lambda2, mean_degree, names, estimate_flags);
    if (*experiment) return cmd_experiment(exp_config, experiment_flags);
    if (*school) return cmd_synth_school(school_spec, school_flags);
  } catch (const rds::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const rds::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
