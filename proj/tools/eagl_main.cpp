#include <CLI11.hpp>

#include <eagl/errors.hpp>
#include <eagl/harness.hpp>
#include <eagl/invariance.hpp>
#include <eagl/vc.hpp>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <set>
#include <string>

using namespace eagl;

namespace {

// Problem selection shared by the inspection commands: a config file sets
// the baseline, direct flags override it.
struct ProblemArgs {
  std::string config;
  std::string name;
  int size = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config, "TOML file with a [problem] section");
    cmd->add_option("--name", name, "problem family (cycle_pair | cycle_vs_star)");
    cmd->add_option("--size", size, "problem size parameter");
  }

  ProblemSpec resolve() const {
    ProblemSpec spec;
    if (!config.empty()) {
      TomlTable t = load_toml(config);
      spec.name = toml_string(t, "problem.name", spec.name);
      spec.size = static_cast<int>(toml_int(t, "problem.size", spec.size));
    }
    if (!name.empty()) spec.name = name;
    if (size > 0) spec.size = size;
    return spec;
  }
};

nlohmann::json describe_problem(const ProblemSpec& spec, const ExactProblem& p) {
  std::vector<double> class_mass(static_cast<std::size_t>(p.num_classes), 0.0);
  nlohmann::json graphs = nlohmann::json::array();
  for (const ExactEntry& e : p.entries) {
    const std::size_t gi = static_cast<std::size_t>(e.graph_id);
    class_mass[static_cast<std::size_t>(e.label)] += e.prob;
    char fp[20];
    std::snprintf(fp, sizeof(fp), "%016llx",
                  static_cast<unsigned long long>(p.graph_keys[gi].fingerprint()));
    graphs.push_back({{"key", fp},
                      {"nodes", p.graphs[gi].node_count},
                      {"edges", p.graphs[gi].edges.size()},
                      {"label", e.label},
                      {"prob", e.prob},
                      {"expl_edges", p.explanations[gi].edge_subset.size()}});
  }
  std::set<std::string> expl_keys;
  for (const CanonicalKey& k : p.expl_keys) expl_keys.insert(k.hex());
  return {{"name", spec.name},
          {"size", spec.size},
          {"classes", p.num_classes},
          {"support", p.graphs.size()},
          {"canonical_cap", p.canonical_cap},
          {"class_mass", class_mass},
          {"distinct_explanations", expl_keys.size()},
          {"graphs", graphs}};
}

std::uint64_t wall_ms_since(const std::chrono::steady_clock::time_point& t0) {
  return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                        std::chrono::steady_clock::now() - t0)
                                        .count());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact laboratory for explanation-assisted graph learning"};
  app.require_subcommand(1);

  ProblemArgs describe_args;
  CLI::App* problem = app.add_subcommand("problem", "inspect a problem family");
  problem->require_subcommand(1);
  CLI::App* describe = problem->add_subcommand("describe", "print the support as JSON");
  describe_args.attach(describe);

  ProblemArgs inv_args;
  CLI::App* invariance = app.add_subcommand(
      "invariance", "exact distributional statistics; nonzero exit on a violated identity");
  inv_args.attach(invariance);

  ProblemArgs vc_args;
  std::string vc_hclass = "key_table";
  std::string vc_kind = "explained";
  int vc_cap = 30;
  CLI::App* vc = app.add_subcommand("vc", "shattering dimension with witness certificate");
  vc_args.attach(vc);
  vc->add_option("--hclass", vc_hclass, "key_table | edge_count")
      ->check(CLI::IsMember({"key_table", "edge_count"}));
  vc->add_option("--kind", vc_kind, "explained | standard")
      ->check(CLI::IsMember({"explained", "standard"}));
  vc->add_option("--cap", vc_cap, "witness size cap for the search");

  std::string sweep_config;
  std::uint64_t cli_seed = 0;
  int cli_workers = 0;
  std::string cli_out;
  CLI::App* sweep = app.add_subcommand("sweep", "run a learning-curve sweep from a config");
  sweep->add_option("--config", sweep_config, "sweep TOML file")->required();
  CLI::Option* sweep_seed = sweep->add_option("--seed", cli_seed, "override the config seed");
  sweep->add_option("--workers", cli_workers, "override the config worker count");
  sweep->add_option("--out", cli_out, "override the output directory");

  std::string study_config;
  CLI::App* study = app.add_subcommand("train-study", "run the training study from a config");
  study->add_option("--config", study_config, "study TOML file")->required();
  CLI::Option* study_seed = study->add_option("--seed", cli_seed, "override the config seed");
  study->add_option("--workers", cli_workers, "override the config worker count");
  study->add_option("--out", cli_out, "override the output directory");

  std::string report_records;
  std::string report_out;
  CLI::App* report = app.add_subcommand("report", "rebuild summary and plot from records");
  report->add_option("--records", report_records, "records.csv produced by a run")->required();
  report->add_option("--out", report_out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (describe->parsed()) {
      ProblemSpec spec = describe_args.resolve();
      std::cout << describe_problem(spec, build_problem(spec)).dump(2) << "\n";
      return 0;
    }

    if (invariance->parsed()) {
      ProblemSpec spec = inv_args.resolve();
      ExactProblem p = build_problem(spec);
      InvarianceReport rep;
      try {
        rep = invariance_report(p);
      } catch (const Error& e) {
        std::cerr << "invariance violation: " << e.what() << "\n";
        return 2;
      }
      std::cout << report_to_json(rep).dump(2) << "\n";
      return 0;
    }

    if (vc->parsed()) {
      ProblemSpec spec = vc_args.resolve();
      ExactProblem p = build_problem(spec);
      HypothesisClass h = problem_hclass(p, vc_hclass);
      ShatterCertificate cert = vc_kind == "standard"
                                    ? standard_vc_dim(h, p.graphs, vc_cap)
                                    : explained_vc_dim(h, p, vc_cap);
      nlohmann::json witness = nlohmann::json::array();
      for (int idx : cert.witness) {
        const std::size_t gi = static_cast<std::size_t>(idx);
        witness.push_back({{"index", idx},
                           {"graph_key", p.graph_keys[gi].hex()},
                           {"expl_key", p.expl_keys[gi].hex()},
                           {"nodes", p.graphs[gi].node_count},
                           {"edges", p.graphs[gi].edges.size()}});
      }
      std::cout << nlohmann::json{{"hclass", vc_hclass},
                                  {"kind", vc_kind},
                                  {"cap", vc_cap},
                                  {"dimension", cert.dimension},
                                  {"witness", witness}}
                       .dump(2)
                << "\n";
      return 0;
    }

    if (sweep->parsed()) {
      SweepConfig cfg = sweep_config_from_toml(load_toml(sweep_config));
      if (sweep_seed->count() > 0) cfg.seed = cli_seed;
      if (cli_workers > 0) cfg.workers = cli_workers;
      if (!cli_out.empty()) cfg.out_dir = cli_out;
      auto t0 = std::chrono::steady_clock::now();
      std::vector<RunRecord> records = run_learning_sweep(cfg);
      nlohmann::json manifest{{"command", "sweep"},
                              {"config_path", sweep_config},
                              {"config", sweep_config_to_json(cfg)},
                              {"wall_ms", wall_ms_since(t0)}};
      emit_report(records, cfg.out_dir, manifest);
      std::cout << "wrote " << records.size() << " records to " << cfg.out_dir << "\n";
      return 0;
    }

    if (study->parsed()) {
      StudyConfig cfg = study_config_from_toml(load_toml(study_config));
      if (study_seed->count() > 0) cfg.seed = cli_seed;
      if (cli_workers > 0) cfg.workers = cli_workers;
      if (!cli_out.empty()) cfg.out_dir = cli_out;
      auto t0 = std::chrono::steady_clock::now();
      std::vector<RunRecord> records = run_training_study(cfg);
      nlohmann::json manifest{{"command", "train-study"},
                              {"config_path", study_config},
                              {"config", study_config_to_json(cfg)},
                              {"wall_ms", wall_ms_since(t0)}};
      emit_report(records, cfg.out_dir, manifest);
      std::cout << "wrote " << records.size() << " records to " << cfg.out_dir << "\n";
      return 0;
    }

    if (report->parsed()) {
      std::vector<RunRecord> records = load_records_csv(report_records);
      emit_report(records, report_out,
                  nlohmann::json{{"command", "report"}, {"source", report_records}});
      std::cout << "wrote " << records.size() << " records to " << report_out << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
