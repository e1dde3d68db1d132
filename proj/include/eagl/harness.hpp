#pragma once

#include <eagl/learners.hpp>
#include <eagl/problems.hpp>
#include <eagl/toml.hpp>

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace eagl {

inline constexpr const char* kToolVersion = "0.1.0";

struct ProblemSpec {
  std::string name = "cycle_pair";  // cycle_pair | cycle_vs_star
  int size = 12;
};

ExactProblem build_problem(const ProblemSpec& spec);

// Hypothesis class sized for the problem: "key_table" keyed at the
// problem's canonical cap, or "edge_count" spanning the support's range.
HypothesisClass problem_hclass(const ExactProblem& p, const std::string& name);

// One column of a sweep. kind selects the fitting rule, hclass the base
// hypothesis class; gamma and universe apply to the augmented kind only.
struct LearnerSpec {
  std::string id;
  std::string kind = "erm";                // erm | explained | augmented
  std::string hclass = "key_table";        // key_table | edge_count
  double gamma = 0.0;
  std::string universe = "combinatorial";  // combinatorial | support
};

struct SweepConfig {
  ProblemSpec problem;
  std::vector<LearnerSpec> learners;
  std::vector<int> m_list;  // strictly increasing
  int trials = 1;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string out_dir = "out";
};

// One finished (or failed) trial. value is the exact statistical error for
// sweeps and the test accuracy for training studies; a failed trial stores
// NaN plus the reason in note. Wall time lives in the manifest, never here,
// so identical runs produce identical records.
struct RunRecord {
  std::string learner;
  int m = 0;
  int trial = 0;
  double value = 0.0;
  std::uint64_t seed = 0;
  std::string note;
};

SweepConfig sweep_config_from_toml(const TomlTable& t);
nlohmann::json sweep_config_to_json(const SweepConfig& cfg);

// Runs |learners| x |m_list| x trials fits. Training sets are paired: every
// learner sees the same draw for a given (m, trial). Trials run on
// cfg.workers threads; records come back in a fixed order regardless of
// scheduling. A learner failure marks its record and the sweep continues.
std::vector<RunRecord> run_learning_sweep(const SweepConfig& cfg);

// Motif-classification study: a vanilla arm (plain training), an
// explanation-preserving augmentation arm, and one arm per entry of
// ood_weights whose augmenter adds edges outside the explanation. All arms
// score on the same held-out test draw.
struct StudyConfig {
  int num_nodes = 25;
  int pool_size = 300;
  int test_size = 100;
  int num_seeds = 10;
  std::vector<int> m_list;
  double keep_fraction = 0.9;
  int copies = 2;
  double aug_weight = 0.5;
  std::vector<double> ood_weights;
  double ood_rate = 1.0;
  int warmup_epochs = 50;
  int train_epochs = 150;
  double lr = 1e-3;
  int hidden = 20;
  int num_layers = 3;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string out_dir = "out";
};

StudyConfig study_config_from_toml(const TomlTable& t);
nlohmann::json study_config_to_json(const StudyConfig& cfg);
std::vector<RunRecord> run_training_study(const StudyConfig& cfg);

// records.csv, summary.json, curves.svg, manifest.json under out_dir.
// records.csv and summary.json depend only on the records; the manifest
// carries config hash, seeds, timestamps, and wall time.
void emit_report(const std::vector<RunRecord>& records, const std::string& out_dir,
                 nlohmann::json manifest);

std::string records_to_csv(const std::vector<RunRecord>& records);
std::vector<RunRecord> records_from_csv(const std::string& text);
std::vector<RunRecord> load_records_csv(const std::string& path);

// Per learner, per m: mean/std over the non-failed trials (sample standard
// deviation), plus counts.
nlohmann::json summarize_records(const std::vector<RunRecord>& records);

// Mean-value curves on a log-x grid, one polyline per learner.
std::string curves_svg(const std::vector<RunRecord>& records);

}  // namespace eagl
