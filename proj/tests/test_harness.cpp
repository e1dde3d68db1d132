#include <doctest.h>

#include <eagl/errors.hpp>
#include <eagl/harness.hpp>
#include <eagl/rng.hpp>
#include <eagl/toml.hpp>

#include <climits>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

using namespace eagl;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::filesystem::path fresh_dir(const std::string& name) {
  std::filesystem::path dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  return dir;
}

int count_occurrences(const std::string& hay, const std::string& needle) {
  int n = 0;
  for (std::size_t at = hay.find(needle); at != std::string::npos;
       at = hay.find(needle, at + needle.size()))
    ++n;
  return n;
}

bool same_value(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
  return a == b;
}

bool same_records(const std::vector<RunRecord>& a, const std::vector<RunRecord>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].learner != b[i].learner || a[i].m != b[i].m || a[i].trial != b[i].trial ||
        a[i].seed != b[i].seed || a[i].note != b[i].note)
      return false;
    if (!same_value(a[i].value, b[i].value)) return false;
  }
  return true;
}

std::map<int, double> mean_by_m(const std::vector<RunRecord>& records, const std::string& id) {
  std::map<int, std::pair<double, int>> acc;
  for (const RunRecord& r : records) {
    if (r.learner != id) continue;
    REQUIRE(!std::isnan(r.value));
    acc[r.m].first += r.value;
    acc[r.m].second += 1;
  }
  std::map<int, double> out;
  for (const auto& [m, cell] : acc) out[m] = cell.first / cell.second;
  return out;
}

// Smallest listed m whose mean is at or below eps; INT_MAX when none is.
int sample_size_needed(const std::map<int, double>& means, double eps) {
  for (const auto& [m, mu] : means)
    if (mu <= eps) return m;
  return INT_MAX;
}

}  // namespace

TEST_SUITE("toml") {

TEST_CASE("document with sections, scalars, and arrays") {
  const std::string doc =
      "# run settings\n"
      "title = \"sweep \\\"alpha\\\"\\n\"\n"
      "count = 42\n"
      "ratio = -0.5\n"
      "big = 1e3\n"
      "flag = true\n"
      "off = false\n"
      "names = [\"a\", \"b\"]\n"
      "\n"
      "[problem]\n"
      "name = \"cycle_pair\"  # trailing comment\n"
      "size = 12\n"
      "m_list = [2, 4,\n"
      "          8]\n"
      "weights = [0.1, 0.5, 2.0]\n"
      "empty = []\n";
  TomlTable t = parse_toml(doc);

  CHECK(toml_string(t, "title") == "sweep \"alpha\"\n");
  CHECK(toml_int(t, "count") == 42);
  CHECK(toml_double(t, "ratio") == -0.5);
  CHECK(toml_double(t, "big") == 1000.0);
  CHECK(toml_bool(t, "flag"));
  CHECK_FALSE(toml_bool(t, "off"));
  CHECK(toml_string_list(t, "names") == std::vector<std::string>{"a", "b"});
  CHECK(toml_string(t, "problem.name") == "cycle_pair");
  CHECK(toml_int(t, "problem.size") == 12);
  CHECK(toml_int_list(t, "problem.m_list") == std::vector<std::int64_t>{2, 4, 8});
  CHECK(toml_double_list(t, "problem.weights") == std::vector<double>{0.1, 0.5, 2.0});
  CHECK(toml_int_list(t, "problem.empty").empty());
  CHECK(toml_has(t, "problem.size"));
  CHECK_FALSE(toml_has(t, "problem.sizes"));
}

TEST_CASE("integers widen to double, never the reverse") {
  TomlTable t = parse_toml("n = 3\nx = 3.5\n");
  CHECK(toml_double(t, "n") == 3.0);
  CHECK_THROWS_AS(toml_int(t, "x"), ParseError);
}

TEST_CASE("fallbacks cover missing keys only") {
  TomlTable t = parse_toml("s = \"text\"\n");
  CHECK(toml_string(t, "gone", "dflt") == "dflt");
  CHECK(toml_int(t, "gone", 7) == 7);
  CHECK(toml_double(t, "gone", 0.25) == 0.25);
  CHECK(toml_bool(t, "gone", true));
  CHECK_THROWS_AS(toml_string(t, "gone"), ParseError);
  // A present key of the wrong type is a config bug, not a missing key.
  CHECK_THROWS_AS(toml_int(t, "s", 7), ParseError);
}

TEST_CASE("malformed documents fail with a line number") {
  CHECK_THROWS_AS(parse_toml("a = 1\na = 2\n"), ParseError);
  CHECK_THROWS_AS(parse_toml("[sec\n"), ParseError);
  CHECK_THROWS_AS(parse_toml("x = \"abc\n"), ParseError);
  CHECK_THROWS_AS(parse_toml("x = [1, 2\n"), ParseError);
  CHECK_THROWS_AS(parse_toml("x = @bad\n"), ParseError);
  CHECK_THROWS_AS(parse_toml("= 3\n"), ParseError);
  CHECK_THROWS_AS(parse_toml("x\n"), ParseError);
  try {
    parse_toml("ok = 1\nbroken = @\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("loading a missing file reports an io error") {
  CHECK_THROWS_AS(load_toml("/nonexistent/dir/conf.toml"), IoError);
}

}  // TEST_SUITE("toml")

TEST_SUITE("harness") {

TEST_CASE("sweep produces one record per learner, size, and trial") {
  SweepConfig cfg;
  cfg.problem = {"cycle_pair", 6};
  cfg.learners = {{"erm", "erm", "key_table", 0.0, "combinatorial"},
                  {"ea", "explained", "key_table", 0.0, "combinatorial"},
                  {"edges", "erm", "edge_count", 0.0, "combinatorial"}};
  cfg.m_list = {2, 4, 8, 16};
  cfg.trials = 10;
  cfg.seed = 0x4a01;
  std::vector<RunRecord> records = run_learning_sweep(cfg);

  REQUIRE(records.size() == 3 * 4 * 10);
  std::set<std::tuple<std::string, int, int>> keys;
  for (const RunRecord& r : records) {
    keys.insert({r.learner, r.m, r.trial});
    CHECK(r.note.empty());
    CHECK(r.value >= 0.0);
    CHECK(r.value <= 1.0);
  }
  CHECK(keys.size() == records.size());

  // Errors here are exact, so the assisted learner's edge at small m is a
  // fixed-seed fact, not a statistical one.
  std::map<int, double> erm = mean_by_m(records, "erm");
  std::map<int, double> ea = mean_by_m(records, "ea");
  CHECK(erm.at(4) - ea.at(4) > 0.2);
}

TEST_CASE("every learner sees the same draw for a given size and trial") {
  SweepConfig cfg;
  cfg.problem = {"cycle_pair", 6};
  cfg.learners = {{"erm", "erm", "key_table", 0.0, "combinatorial"},
                  {"ea", "explained", "key_table", 0.0, "combinatorial"}};
  cfg.m_list = {2, 8};
  cfg.trials = 6;
  cfg.seed = 0x4a02;
  std::vector<RunRecord> records = run_learning_sweep(cfg);

  std::map<std::pair<int, int>, std::set<std::uint64_t>> by_task;
  for (const RunRecord& r : records) by_task[{r.m, r.trial}].insert(r.seed);
  REQUIRE(by_task.size() == 2 * 6);
  std::set<std::uint64_t> all;
  for (const auto& [task, seeds] : by_task) {
    CHECK(seeds.size() == 1);
    all.insert(*seeds.begin());
  }
  CHECK(all.size() == by_task.size());

  // Dropping a learner must not move the other's draws.
  SweepConfig solo = cfg;
  solo.learners = {cfg.learners[0]};
  std::vector<RunRecord> alone = run_learning_sweep(solo);
  std::map<std::pair<int, int>, double> paired;
  for (const RunRecord& r : records)
    if (r.learner == "erm") paired[{r.m, r.trial}] = r.value;
  for (const RunRecord& r : alone) CHECK(paired.at({r.m, r.trial}) == r.value);
}

TEST_CASE("records are independent of the worker count") {
  SweepConfig cfg;
  cfg.problem = {"cycle_pair", 12};
  cfg.learners = {{"erm", "erm", "key_table", 0.0, "combinatorial"},
                  {"ea", "explained", "key_table", 0.0, "combinatorial"}};
  cfg.m_list = {2, 4, 8};
  cfg.trials = 8;
  cfg.seed = 0x4a03;
  cfg.workers = 1;
  std::vector<RunRecord> serial = run_learning_sweep(cfg);
  cfg.workers = 4;
  std::vector<RunRecord> threaded = run_learning_sweep(cfg);
  CHECK(same_records(serial, threaded));
  CHECK(records_to_csv(serial) == records_to_csv(threaded));
}

TEST_CASE("a failing learner is recorded and the sweep continues") {
  SweepConfig cfg;
  cfg.problem = {"cycle_pair", 6};
  cfg.learners = {{"erm", "erm", "key_table", 0.0, "combinatorial"},
                  {"mystery", "mystery", "key_table", 0.0, "combinatorial"}};
  cfg.m_list = {2, 4};
  cfg.trials = 5;
  cfg.seed = 0x4a04;
  std::vector<RunRecord> records = run_learning_sweep(cfg);

  REQUIRE(records.size() == 2 * 2 * 5);
  int failed = 0;
  for (const RunRecord& r : records) {
    if (r.learner == "mystery") {
      CHECK(std::isnan(r.value));
      CHECK(r.note.find("unknown learner kind") != std::string::npos);
      ++failed;
    } else {
      CHECK(!std::isnan(r.value));
      CHECK(r.note.empty());
    }
  }
  CHECK(failed == 2 * 5);

  nlohmann::json summary = summarize_records(records);
  CHECK(summary["mystery"]["2"]["failed"] == 5);
  CHECK(summary["mystery"]["2"]["count"] == 0);
  CHECK(!summary["mystery"]["2"].contains("mean"));
  CHECK(summary["erm"]["2"]["failed"] == 0);
}

TEST_CASE("sweep configs are validated before any work runs") {
  SweepConfig cfg;
  cfg.problem = {"cycle_pair", 6};
  cfg.learners = {{"erm", "erm", "key_table", 0.0, "combinatorial"}};
  cfg.m_list = {4, 4};
  CHECK_THROWS_AS(run_learning_sweep(cfg), InvalidRange);
  cfg.m_list = {8, 4};
  CHECK_THROWS_AS(run_learning_sweep(cfg), InvalidRange);
  cfg.m_list = {4};
  cfg.trials = 0;
  CHECK_THROWS_AS(run_learning_sweep(cfg), InvalidRange);
  cfg.trials = 1;
  cfg.learners.clear();
  CHECK_THROWS_AS(run_learning_sweep(cfg), InvalidSize);
  cfg.learners = {{"erm", "erm", "key_table", 0.0, "combinatorial"}};
  cfg.m_list.clear();
  CHECK_THROWS_AS(run_learning_sweep(cfg), InvalidSize);
  cfg.m_list = {4};
  cfg.learners[0].hclass = "spline";
  CHECK_THROWS_AS(run_learning_sweep(cfg), ParseError);
  cfg.learners[0].hclass = "key_table";
  cfg.problem.name = "parity";
  CHECK_THROWS_AS(run_learning_sweep(cfg), ParseError);
}

TEST_CASE("csv serialization round-trips every field") {
  std::vector<RunRecord> records;
  records.push_back({"plain", 4, 0, 1.0 / 3.0, 7, ""});
  records.push_back({"with,comma", 8, 1, 0.0, 18446744073709551615ull, "bad \"seed\", skipped"});
  records.push_back({"failed", 16, 2, std::numeric_limits<double>::quiet_NaN(), 3, "no fit"});

  std::string csv = records_to_csv(records);
  CHECK(count_occurrences(csv, "\r\n") == 4);
  CHECK(csv.rfind("learner,m,trial,value,seed,note\r\n", 0) == 0);
  CHECK(csv.find("\"with,comma\"") != std::string::npos);
  CHECK(csv.find("\"bad \"\"seed\"\", skipped\"") != std::string::npos);

  std::vector<RunRecord> back = records_from_csv(csv);
  CHECK(same_records(records, back));

  CHECK_THROWS_AS(records_from_csv("who,what\r\n"), ParseError);
  CHECK_THROWS_AS(records_from_csv("learner,m,trial,value,seed,note\r\na,1,2,3\r\n"), ParseError);
}

TEST_CASE("summary holds exact means, spreads, and failure counts") {
  std::vector<RunRecord> records;
  records.push_back({"a", 2, 0, 0.0, 1, ""});
  records.push_back({"a", 2, 1, 0.5, 2, ""});
  records.push_back({"a", 2, 2, 0.25, 3, ""});
  records.push_back({"a", 4, 0, 0.1, 4, ""});
  records.push_back({"b", 2, 0, std::numeric_limits<double>::quiet_NaN(), 5, "boom"});
  records.push_back({"b", 2, 1, 0.75, 6, ""});

  nlohmann::json s = summarize_records(records);
  CHECK(s["a"]["2"]["count"] == 3);
  CHECK(s["a"]["2"]["failed"] == 0);
  CHECK(s["a"]["2"]["mean"] == 0.25);
  CHECK(s["a"]["2"]["std"] == 0.25);
  CHECK(s["a"]["4"]["count"] == 1);
  CHECK(s["a"]["4"]["std"] == 0.0);
  CHECK(s["b"]["2"]["count"] == 1);
  CHECK(s["b"]["2"]["failed"] == 1);
  CHECK(s["b"]["2"]["mean"] == 0.75);
  CHECK_THROWS_AS(summarize_records({}), InvalidSize);
}

TEST_CASE("curve plot draws one line per learner with data") {
  std::vector<RunRecord> records;
  records.push_back({"a", 2, 0, 0.4, 1, ""});
  records.push_back({"a", 8, 0, 0.1, 2, ""});
  records.push_back({"b", 2, 0, std::numeric_limits<double>::quiet_NaN(), 3, "boom"});
  records.push_back({"b", 8, 0, std::numeric_limits<double>::quiet_NaN(), 4, "boom"});
  records.push_back({"c", 2, 0, 0.9, 5, ""});
  records.push_back({"c", 8, 0, std::numeric_limits<double>::quiet_NaN(), 6, "boom"});

  std::string svg = curves_svg(records);
  CHECK(svg.rfind("<svg xmlns=\"http://www.w3.org/2000/svg\"", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(count_occurrences(svg, "<polyline") == 2);
  CHECK(svg.find("data-learner=\"a\"") != std::string::npos);
  CHECK(svg.find("data-learner=\"b\"") == std::string::npos);
  CHECK(svg.find("data-learner=\"c\"") != std::string::npos);
  CHECK(svg.find("training set size") != std::string::npos);
  CHECK_THROWS_AS(curves_svg({}), InvalidSize);
}

TEST_CASE("report directory contains the four artifacts") {
  std::filesystem::path dir = fresh_dir("eagl_report_test");
  std::vector<RunRecord> records;
  records.push_back({"a", 2, 0, 0.5, 1, ""});
  records.push_back({"a", 4, 0, 0.25, 9, ""});
  emit_report(records, dir.string(), nlohmann::json{{"config_hash", "abc123"}});

  for (const char* name : {"records.csv", "summary.json", "curves.svg", "manifest.json"})
    CHECK(std::filesystem::exists(dir / name));

  nlohmann::json manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["config_hash"] == "abc123");
  CHECK(manifest["tool_version"] == kToolVersion);
  CHECK(manifest["records"] == 2);
  CHECK(manifest["run_seeds"] == nlohmann::json::array({1, 9}));
  CHECK(manifest.contains("written_at"));
  CHECK(same_records(load_records_csv((dir / "records.csv").string()), records));
  std::filesystem::remove_all(dir);

  std::filesystem::path blocked = fresh_dir("eagl_report_blocked");
  std::filesystem::create_directories(blocked);
  std::ofstream(blocked / "file").put('x');
  CHECK_THROWS_AS(emit_report(records, (blocked / "file" / "sub").string(), {}), IoError);
  std::filesystem::remove_all(blocked);
}

TEST_CASE("re-running a sweep reproduces records and summary byte for byte") {
  SweepConfig cfg;
  cfg.problem = {"cycle_pair", 6};
  cfg.learners = {{"erm", "erm", "key_table", 0.0, "combinatorial"},
                  {"ea", "explained", "key_table", 0.0, "combinatorial"}};
  cfg.m_list = {2, 8};
  cfg.trials = 5;
  cfg.seed = 0x4a05;

  std::filesystem::path first = fresh_dir("eagl_rerun_a");
  std::filesystem::path second = fresh_dir("eagl_rerun_b");
  emit_report(run_learning_sweep(cfg), first.string(), {{"config", sweep_config_to_json(cfg)}});
  cfg.workers = 3;
  emit_report(run_learning_sweep(cfg), second.string(), {{"config", sweep_config_to_json(cfg)}});

  CHECK(slurp(first / "records.csv") == slurp(second / "records.csv"));
  CHECK(slurp(first / "summary.json") == slurp(second / "summary.json"));
  CHECK(slurp(first / "curves.svg") == slurp(second / "curves.svg"));
  std::filesystem::remove_all(first);
  std::filesystem::remove_all(second);
}

// The assisted learner only needs to see each explanation once, so the
// sample size it needs to clear a fixed error bar stays put as the class
// count grows; the plain learner has to see nearly every graph, and each
// doubling of the class count doubles what it needs.
TEST_CASE("sample size needed grows with class count only when unassisted") {
  const double eps = 0.1;
  std::map<int, int> ea_needed;
  std::map<int, int> erm_needed;
  for (int k : {4, 8, 16}) {
    SweepConfig cfg;
    cfg.problem = {"cycle_pair", k};
    cfg.learners = {{"erm", "erm", "key_table", 0.0, "combinatorial"},
                    {"ea", "explained", "key_table", 0.0, "combinatorial"}};
    cfg.m_list = {4, 8, 16, 32, 64};
    cfg.trials = 40;
    cfg.seed = mix_seed(0x4a06, static_cast<std::uint64_t>(k));
    cfg.workers = 2;
    std::vector<RunRecord> records = run_learning_sweep(cfg);
    ea_needed[k] = sample_size_needed(mean_by_m(records, "ea"), eps);
    erm_needed[k] = sample_size_needed(mean_by_m(records, "erm"), eps);
  }
  CHECK(ea_needed[4] == 4);
  CHECK(ea_needed[8] == 4);
  CHECK(ea_needed[16] == 4);
  CHECK(erm_needed[4] == 16);
  CHECK(erm_needed[8] == 32);
  CHECK(erm_needed[16] == 64);
}

TEST_CASE("sweep config reads sections and leaves defaults alone") {
  const std::string doc =
      "[problem]\n"
      "name = \"cycle_vs_star\"\n"
      "size = 10\n"
      "\n"
      "[sweep]\n"
      "m_list = [2, 10, 50]\n"
      "trials = 100\n"
      "seed = 31\n"
      "workers = 4\n"
      "out = \"runs/demo\"\n"
      "learners = [\"erm\", \"da\"]\n"
      "\n"
      "[learner.da]\n"
      "kind = \"augmented\"\n"
      "gamma = 0.1\n"
      "universe = \"support\"\n";
  SweepConfig cfg = sweep_config_from_toml(parse_toml(doc));

  CHECK(cfg.problem.name == "cycle_vs_star");
  CHECK(cfg.problem.size == 10);
  CHECK(cfg.m_list == std::vector<int>{2, 10, 50});
  CHECK(cfg.trials == 100);
  CHECK(cfg.seed == 31);
  CHECK(cfg.workers == 4);
  CHECK(cfg.out_dir == "runs/demo");
  REQUIRE(cfg.learners.size() == 2);
  CHECK(cfg.learners[0].id == "erm");
  CHECK(cfg.learners[0].kind == "erm");
  CHECK(cfg.learners[0].hclass == "key_table");
  CHECK(cfg.learners[1].id == "da");
  CHECK(cfg.learners[1].kind == "augmented");
  CHECK(cfg.learners[1].gamma == 0.1);
  CHECK(cfg.learners[1].universe == "support");

  nlohmann::json j = sweep_config_to_json(cfg);
  CHECK(j["problem"]["name"] == "cycle_vs_star");
  CHECK(j["learners"][1]["gamma"] == 0.1);
}

TEST_CASE("study config reads trainer settings and defaults") {
  const std::string doc =
      "[study]\n"
      "num_nodes = 25\n"
      "pool = 40\n"
      "test = 30\n"
      "seeds = 3\n"
      "m_list = [8, 16]\n"
      "seed = 5\n"
      "out = \"runs/study\"\n"
      "\n"
      "[trainer]\n"
      "keep_fraction = 0.8\n"
      "copies = 3\n"
      "aug_weight = 0.25\n"
      "ood_weights = [0.1, 2.0]\n"
      "warmup_epochs = 7\n"
      "train_epochs = 9\n"
      "hidden = 6\n"
      "layers = 2\n";
  StudyConfig cfg = study_config_from_toml(parse_toml(doc));

  CHECK(cfg.num_nodes == 25);
  CHECK(cfg.pool_size == 40);
  CHECK(cfg.test_size == 30);
  CHECK(cfg.num_seeds == 3);
  CHECK(cfg.m_list == std::vector<int>{8, 16});
  CHECK(cfg.keep_fraction == 0.8);
  CHECK(cfg.copies == 3);
  CHECK(cfg.aug_weight == 0.25);
  CHECK(cfg.ood_weights == std::vector<double>{0.1, 2.0});
  CHECK(cfg.ood_rate == 1.0);
  CHECK(cfg.warmup_epochs == 7);
  CHECK(cfg.train_epochs == 9);
  CHECK(cfg.lr == 1e-3);
  CHECK(cfg.hidden == 6);
  CHECK(cfg.num_layers == 2);
  CHECK(cfg.seed == 5);
  CHECK(cfg.out_dir == "runs/study");
  CHECK(study_config_to_json(cfg)["layers"] == 2);
}

TEST_CASE("training study covers every arm, seed, and size deterministically") {
  StudyConfig cfg;
  cfg.num_nodes = 25;
  cfg.pool_size = 16;
  cfg.test_size = 8;
  cfg.num_seeds = 2;
  cfg.m_list = {6};
  cfg.copies = 1;
  cfg.aug_weight = 0.5;
  cfg.ood_weights = {0.5};
  cfg.ood_rate = 0.5;
  cfg.warmup_epochs = 2;
  cfg.train_epochs = 3;
  cfg.hidden = 4;
  cfg.num_layers = 2;
  cfg.seed = 0x4a07;

  std::vector<RunRecord> records = run_training_study(cfg);
  REQUIRE(records.size() == 3 * 2);
  std::set<std::string> arms;
  std::set<std::uint64_t> seeds;
  for (const RunRecord& r : records) {
    arms.insert(r.learner);
    seeds.insert(r.seed);
    CHECK(r.note.empty());
    CHECK(r.value >= 0.0);
    CHECK(r.value <= 1.0);
    CHECK(r.m == 6);
    CHECK((r.trial == 0 || r.trial == 1));
  }
  CHECK(arms == std::set<std::string>{"vanilla", "expl_aug", "ood_0.5"});
  CHECK(seeds.size() == 2);

  std::vector<RunRecord> again = run_training_study(cfg);
  CHECK(same_records(records, again));
  cfg.workers = 3;
  std::vector<RunRecord> threaded = run_training_study(cfg);
  CHECK(same_records(records, threaded));

  StudyConfig bad = cfg;
  bad.m_list = {17};
  CHECK_THROWS_AS(run_training_study(bad), InvalidRange);
  bad.m_list.clear();
  CHECK_THROWS_AS(run_training_study(bad), InvalidSize);
}

}  // TEST_SUITE("harness")
