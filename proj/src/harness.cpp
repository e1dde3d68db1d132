#include <eagl/harness.hpp>

#include <eagl/augment.hpp>
#include <eagl/errors.hpp>
#include <eagl/gnn.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace eagl {

namespace {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

// Runs tasks [0, count) on up to `workers` threads. Each task writes only
// its own output slot, so the result is independent of scheduling.
void run_tasks(std::size_t count, int workers, const std::function<void(std::size_t)>& task) {
  int n = std::max(1, workers);
  if (n == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      task(i);
    }
  };
  std::vector<std::thread> pool;
  const std::size_t nthreads = std::min(static_cast<std::size_t>(n), count);
  for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
}

Classifier fit_learner(const LearnerSpec& spec, const HypothesisClass& h, const TrainSet& train,
                       const ExactProblem& p, std::uint64_t seed) {
  if (spec.kind == "erm") return erm_fit(h, train);
  if (spec.kind == "explained") return explained_erm_fit(h, train, seed);
  if (spec.kind == "augmented") {
    if (spec.universe == "support") return augmented_erm_fit(h, train, spec.gamma, p, seed);
    if (spec.universe == "combinatorial") return augmented_erm_fit(h, train, spec.gamma, seed);
    throw ParseError("unknown universe: " + spec.universe);
  }
  throw ParseError("unknown learner kind: " + spec.kind);
}

std::string iso_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("short write to " + path.string());
}

}  // namespace

ExactProblem build_problem(const ProblemSpec& spec) {
  if (spec.name == "cycle_pair") return cycle_pair_problem(spec.size);
  if (spec.name == "cycle_vs_star") return cycle_vs_star_problem(spec.size);
  throw ParseError("unknown problem: " + spec.name);
}

HypothesisClass problem_hclass(const ExactProblem& p, const std::string& name) {
  if (name == "key_table") return key_table_class(p.num_classes, p.canonical_cap);
  if (name == "edge_count") {
    int most = 0;
    for (const Graph& g : p.graphs) most = std::max(most, static_cast<int>(g.edges.size()));
    return edge_count_class(0, most + 8, p.num_classes);
  }
  throw ParseError("unknown hypothesis class: " + name);
}

SweepConfig sweep_config_from_toml(const TomlTable& t) {
  SweepConfig cfg;
  cfg.problem.name = toml_string(t, "problem.name", cfg.problem.name);
  cfg.problem.size = static_cast<int>(toml_int(t, "problem.size", cfg.problem.size));
  for (std::int64_t m : toml_int_list(t, "sweep.m_list")) cfg.m_list.push_back(static_cast<int>(m));
  cfg.trials = static_cast<int>(toml_int(t, "sweep.trials", 1));
  cfg.seed = static_cast<std::uint64_t>(toml_int(t, "sweep.seed", 0));
  cfg.workers = static_cast<int>(toml_int(t, "sweep.workers", 1));
  cfg.out_dir = toml_string(t, "sweep.out", cfg.out_dir);
  for (const std::string& id : toml_string_list(t, "sweep.learners")) {
    LearnerSpec spec;
    spec.id = id;
    std::string base = "learner." + id + ".";
    spec.kind = toml_string(t, base + "kind", spec.kind);
    spec.hclass = toml_string(t, base + "hclass", spec.hclass);
    spec.gamma = toml_double(t, base + "gamma", spec.gamma);
    spec.universe = toml_string(t, base + "universe", spec.universe);
    cfg.learners.push_back(std::move(spec));
  }
  return cfg;
}

nlohmann::json sweep_config_to_json(const SweepConfig& cfg) {
  nlohmann::json learners = nlohmann::json::array();
  for (const LearnerSpec& l : cfg.learners)
    learners.push_back({{"id", l.id},
                        {"kind", l.kind},
                        {"hclass", l.hclass},
                        {"gamma", l.gamma},
                        {"universe", l.universe}});
  return {{"problem", {{"name", cfg.problem.name}, {"size", cfg.problem.size}}},
          {"learners", learners},
          {"m_list", cfg.m_list},
          {"trials", cfg.trials},
          {"seed", cfg.seed},
          {"out", cfg.out_dir}};
}

std::vector<RunRecord> run_learning_sweep(const SweepConfig& cfg) {
  if (cfg.learners.empty()) throw InvalidSize("no learners configured");
  if (cfg.m_list.empty()) throw InvalidSize("empty m_list");
  for (std::size_t i = 1; i < cfg.m_list.size(); ++i)
    if (cfg.m_list[i] <= cfg.m_list[i - 1])
      throw InvalidRange("m_list must be strictly increasing");
  if (cfg.trials < 1) throw InvalidRange("trials must be >= 1");

  const ExactProblem problem = build_problem(cfg.problem);
  std::vector<HypothesisClass> classes;
  for (const LearnerSpec& spec : cfg.learners) classes.push_back(problem_hclass(problem, spec.hclass));

  const std::size_t num_learners = cfg.learners.size();
  const std::size_t tasks = cfg.m_list.size() * static_cast<std::size_t>(cfg.trials);
  std::vector<RunRecord> records(tasks * num_learners);

  // One task = one (m, trial) draw shared by every learner.
  run_tasks(tasks, cfg.workers, [&](std::size_t task) {
    const std::size_t mi = task / static_cast<std::size_t>(cfg.trials);
    const int trial = static_cast<int>(task % static_cast<std::size_t>(cfg.trials));
    const int m = cfg.m_list[mi];
    const std::uint64_t draw_seed =
        mix_seed(mix_seed(cfg.seed, static_cast<std::uint64_t>(m)),
                 static_cast<std::uint64_t>(trial));
    RngStream rng(draw_seed);
    const TrainSet train = sample_training_set(problem, m, rng);
    for (std::size_t li = 0; li < num_learners; ++li) {
      RunRecord& rec = records[task * num_learners + li];
      rec.learner = cfg.learners[li].id;
      rec.m = m;
      rec.trial = trial;
      rec.seed = draw_seed;
      try {
        std::uint64_t fit_seed = mix_seed(draw_seed, fnv1a64(cfg.learners[li].id));
        Classifier c = fit_learner(cfg.learners[li], classes[li], train, problem, fit_seed);
        rec.value = eval_error_exact(c, problem);
      } catch (const std::exception& e) {
        rec.value = std::numeric_limits<double>::quiet_NaN();
        rec.note = e.what();
      }
    }
  });
  return records;
}

StudyConfig study_config_from_toml(const TomlTable& t) {
  StudyConfig cfg;
  cfg.num_nodes = static_cast<int>(toml_int(t, "study.num_nodes", cfg.num_nodes));
  cfg.pool_size = static_cast<int>(toml_int(t, "study.pool", cfg.pool_size));
  cfg.test_size = static_cast<int>(toml_int(t, "study.test", cfg.test_size));
  cfg.num_seeds = static_cast<int>(toml_int(t, "study.seeds", cfg.num_seeds));
  for (std::int64_t m : toml_int_list(t, "study.m_list")) cfg.m_list.push_back(static_cast<int>(m));
  cfg.seed = static_cast<std::uint64_t>(toml_int(t, "study.seed", 0));
  cfg.workers = static_cast<int>(toml_int(t, "study.workers", 1));
  cfg.out_dir = toml_string(t, "study.out", cfg.out_dir);
  cfg.keep_fraction = toml_double(t, "trainer.keep_fraction", cfg.keep_fraction);
  cfg.copies = static_cast<int>(toml_int(t, "trainer.copies", cfg.copies));
  cfg.aug_weight = toml_double(t, "trainer.aug_weight", cfg.aug_weight);
  if (toml_has(t, "trainer.ood_weights"))
    cfg.ood_weights = toml_double_list(t, "trainer.ood_weights");
  cfg.ood_rate = toml_double(t, "trainer.ood_rate", cfg.ood_rate);
  cfg.warmup_epochs = static_cast<int>(toml_int(t, "trainer.warmup_epochs", cfg.warmup_epochs));
  cfg.train_epochs = static_cast<int>(toml_int(t, "trainer.train_epochs", cfg.train_epochs));
  cfg.lr = toml_double(t, "trainer.lr", cfg.lr);
  cfg.hidden = static_cast<int>(toml_int(t, "trainer.hidden", cfg.hidden));
  cfg.num_layers = static_cast<int>(toml_int(t, "trainer.layers", cfg.num_layers));
  return cfg;
}

nlohmann::json study_config_to_json(const StudyConfig& cfg) {
  return {{"num_nodes", cfg.num_nodes},
          {"pool", cfg.pool_size},
          {"test", cfg.test_size},
          {"seeds", cfg.num_seeds},
          {"m_list", cfg.m_list},
          {"keep_fraction", cfg.keep_fraction},
          {"copies", cfg.copies},
          {"aug_weight", cfg.aug_weight},
          {"ood_weights", cfg.ood_weights},
          {"ood_rate", cfg.ood_rate},
          {"warmup_epochs", cfg.warmup_epochs},
          {"train_epochs", cfg.train_epochs},
          {"lr", cfg.lr},
          {"hidden", cfg.hidden},
          {"layers", cfg.num_layers},
          {"seed", cfg.seed},
          {"out", cfg.out_dir}};
}

namespace {

struct StudyArm {
  std::string id;
  double aug_weight = 0.0;
  bool augmented = false;
  bool ood = false;
};

struct SeedData {
  TrainSet pool;
  std::vector<LabeledGraph> test;
  std::uint64_t seed = 0;
};

std::string arm_label(double w) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "ood_%g", w);
  return buf;
}

}  // namespace

std::vector<RunRecord> run_training_study(const StudyConfig& cfg) {
  if (cfg.m_list.empty()) throw InvalidSize("empty m_list");
  if (cfg.num_seeds < 1) throw InvalidRange("seeds must be >= 1");
  for (int m : cfg.m_list)
    if (m < 1 || m > cfg.pool_size) throw InvalidRange("m outside the pool");

  SamplerProblem sampler = ba2motifs_sampler(cfg.num_nodes);

  std::vector<StudyArm> arms;
  arms.push_back({"vanilla", 0.0, false, false});
  arms.push_back({"expl_aug", cfg.aug_weight, true, false});
  for (double w : cfg.ood_weights) arms.push_back({arm_label(w), w, true, true});

  // Pools and test sets are drawn once per seed and shared across arms.
  std::vector<SeedData> seeds(static_cast<std::size_t>(cfg.num_seeds));
  for (int s = 0; s < cfg.num_seeds; ++s) {
    SeedData& sd = seeds[static_cast<std::size_t>(s)];
    sd.seed = mix_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(s));
    RngStream rng(sd.seed);
    sd.pool = sample_training_set(sampler, cfg.pool_size, rng);
    for (int i = 0; i < cfg.test_size; ++i) {
      Sample smp = sampler.draw(rng);
      sd.test.push_back({std::move(smp.graph), smp.label});
    }
  }

  const std::size_t per_seed = arms.size() * cfg.m_list.size();
  std::vector<RunRecord> records(per_seed * static_cast<std::size_t>(cfg.num_seeds));

  run_tasks(records.size(), cfg.workers, [&](std::size_t task) {
    const std::size_t s = task / per_seed;
    const std::size_t rest = task % per_seed;
    const std::size_t ai = rest / cfg.m_list.size();
    const std::size_t mi = rest % cfg.m_list.size();
    const StudyArm& arm = arms[ai];
    const SeedData& sd = seeds[s];
    const int m = cfg.m_list[mi];

    RunRecord& rec = records[task];
    rec.learner = arm.id;
    rec.m = m;
    rec.trial = static_cast<int>(s);
    rec.seed = sd.seed;
    try {
      TrainSet train(sd.pool.begin(), sd.pool.begin() + m);
      GnnTrainConfig tc;
      tc.lr = cfg.lr;
      tc.hidden = cfg.hidden;
      tc.num_layers = cfg.num_layers;
      tc.seed = mix_seed(sd.seed, fnv1a64(arm.id) ^ static_cast<std::uint64_t>(m));
      Augmenter augment;
      if (arm.augmented) {
        tc.warmup_epochs = cfg.warmup_epochs;
        tc.train_epochs = cfg.train_epochs;
        tc.copies = cfg.copies;
        tc.aug_weight = arm.aug_weight;
        AugmentSpec spec = arm.ood ? AugmentSpec{"ood_add", cfg.ood_rate}
                                   : AugmentSpec{"keep_explained", cfg.keep_fraction};
        augment = make_augmenter(spec, train);
      } else {
        // Plain training gets the same total epoch budget.
        tc.warmup_epochs = cfg.warmup_epochs + cfg.train_epochs;
        tc.train_epochs = 0;
        augment = [](const TrainItem& item, RngStream&) { return item.graph; };
      }
      GnnParams params = train_gnn(train, tc, augment);
      // Every arm is scored on the same held-out draw from the sampler; the
      // distribution shift of an ood_* arm lives in its augmenter alone.
      rec.value = gnn_accuracy(params, sd.test);
    } catch (const std::exception& e) {
      rec.value = std::numeric_limits<double>::quiet_NaN();
      rec.note = e.what();
    }
  });
  return records;
}

std::string records_to_csv(const std::vector<RunRecord>& records) {
  std::string out = "learner,m,trial,value,seed,note\r\n";
  for (const RunRecord& r : records) {
    out += csv_field(r.learner);
    out += ',';
    out += std::to_string(r.m);
    out += ',';
    out += std::to_string(r.trial);
    out += ',';
    out += format_double(r.value);
    out += ',';
    out += std::to_string(r.seed);
    out += ',';
    out += csv_field(r.note);
    out += "\r\n";
  }
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line, std::size_t& at) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  while (at < line.size()) {
    char c = line[at];
    if (quoted) {
      if (c == '"' && at + 1 < line.size() && line[at + 1] == '"') {
        cur.push_back('"');
        at += 2;
        continue;
      }
      if (c == '"') {
        quoted = false;
        ++at;
        continue;
      }
      cur.push_back(c);
      ++at;
      continue;
    }
    if (c == '"') {
      quoted = true;
      ++at;
      continue;
    }
    if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
      ++at;
      continue;
    }
    if (c == '\r' || c == '\n') break;
    cur.push_back(c);
    ++at;
  }
  fields.push_back(std::move(cur));
  while (at < line.size() && (line[at] == '\r' || line[at] == '\n')) ++at;
  return fields;
}

}  // namespace

std::vector<RunRecord> records_from_csv(const std::string& text) {
  std::size_t at = 0;
  std::vector<std::string> header = split_csv_line(text, at);
  if (header.size() != 6 || header[0] != "learner")
    throw ParseError("unrecognized records csv header");
  std::vector<RunRecord> out;
  while (at < text.size()) {
    std::vector<std::string> f = split_csv_line(text, at);
    if (f.size() == 1 && f[0].empty()) continue;
    if (f.size() != 6) throw ParseError("records csv row with " + std::to_string(f.size()) +
                                        " fields");
    RunRecord r;
    r.learner = f[0];
    r.m = std::stoi(f[1]);
    r.trial = std::stoi(f[2]);
    r.value = f[3] == "nan" ? std::numeric_limits<double>::quiet_NaN() : std::stod(f[3]);
    r.seed = std::stoull(f[4]);
    r.note = f[5];
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RunRecord> load_records_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return records_from_csv(buf.str());
}

nlohmann::json summarize_records(const std::vector<RunRecord>& records) {
  if (records.empty()) throw InvalidSize("no records to summarize");
  std::map<std::string, std::map<int, std::vector<double>>> groups;
  std::map<std::string, std::map<int, int>> failures;
  for (const RunRecord& r : records) {
    if (std::isnan(r.value))
      failures[r.learner][r.m] += 1;
    else
      groups[r.learner][r.m].push_back(r.value);
    failures[r.learner];  // ensure learner appears even when all failed
  }
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [learner, by_m] : failures) {
    nlohmann::json entry = nlohmann::json::object();
    std::set<int> ms;
    for (const auto& [m, _] : by_m) ms.insert(m);
    if (groups.count(learner))
      for (const auto& [m, _] : groups.at(learner)) ms.insert(m);
    for (int m : ms) {
      const std::vector<double>* vals = nullptr;
      if (groups.count(learner) && groups.at(learner).count(m)) vals = &groups.at(learner).at(m);
      double mean = 0.0, sd = 0.0;
      std::size_t n = vals ? vals->size() : 0;
      if (n > 0) {
        for (double v : *vals) mean += v;
        mean /= static_cast<double>(n);
        if (n > 1) {
          for (double v : *vals) sd += (v - mean) * (v - mean);
          sd = std::sqrt(sd / static_cast<double>(n - 1));
        }
      }
      int failed = 0;
      if (by_m.count(m)) failed = by_m.at(m);
      nlohmann::json cell{{"count", n}, {"failed", failed}};
      if (n > 0) {
        cell["mean"] = mean;
        cell["std"] = sd;
      }
      entry[std::to_string(m)] = std::move(cell);
    }
    out[learner] = std::move(entry);
  }
  return out;
}

namespace {

const char* kPalette[] = {"#1f6feb", "#d1242f", "#1a7f37", "#9a6700",
                          "#8250df", "#bc4c00", "#0969da", "#57606a"};

std::string fmt2(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", x);
  return buf;
}

}  // namespace

std::string curves_svg(const std::vector<RunRecord>& records) {
  if (records.empty()) throw InvalidSize("no records to plot");
  std::map<std::string, std::map<int, std::pair<double, int>>> sums;
  std::set<int> ms;
  for (const RunRecord& r : records) {
    if (std::isnan(r.value)) continue;
    auto& cell = sums[r.learner][r.m];
    cell.first += r.value;
    cell.second += 1;
    ms.insert(r.m);
  }
  const double width = 720, height = 480;
  const double left = 70, right = 30, top = 40, bottom = 60;
  const double plot_w = width - left - right, plot_h = height - top - bottom;
  double lo = ms.empty() ? 1.0 : std::log(static_cast<double>(*ms.begin()));
  double hi = ms.empty() ? 2.0 : std::log(static_cast<double>(*ms.rbegin()));
  if (hi <= lo) hi = lo + 1.0;
  auto x_of = [&](int m) { return left + (std::log(static_cast<double>(m)) - lo) / (hi - lo) * plot_w; };
  auto y_of = [&](double v) { return top + (1.0 - std::clamp(v, 0.0, 1.0)) * plot_h; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  svg << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    double v = 0.25 * i;
    double y = y_of(v);
    svg << "<line x1=\"" << left << "\" y1=\"" << fmt2(y) << "\" x2=\"" << left + plot_w
        << "\" y2=\"" << fmt2(y) << "\" stroke=\"#dddddd\"/>\n";
    svg << "<text x=\"" << left - 8 << "\" y=\"" << fmt2(y + 4)
        << "\" text-anchor=\"end\" font-size=\"12\" font-family=\"sans-serif\">" << fmt2(v)
        << "</text>\n";
  }
  for (int m : ms) {
    double x = x_of(m);
    svg << "<line x1=\"" << fmt2(x) << "\" y1=\"" << top << "\" x2=\"" << fmt2(x) << "\" y2=\""
        << top + plot_h << "\" stroke=\"#eeeeee\"/>\n";
    svg << "<text x=\"" << fmt2(x) << "\" y=\"" << top + plot_h + 20
        << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">" << m
        << "</text>\n";
  }
  svg << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w
      << "\" y2=\"" << top + plot_h << "\" stroke=\"#333333\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
      << top + plot_h << "\" stroke=\"#333333\"/>\n";
  svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 16
      << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">training set size"
      << "</text>\n";

  int color = 0;
  double legend_y = top + 8;
  for (const auto& [learner, by_m] : sums) {
    const char* stroke = kPalette[color % 8];
    ++color;
    std::ostringstream pts;
    for (const auto& [m, cell] : by_m) {
      double mean = cell.first / cell.second;
      pts << fmt2(x_of(m)) << "," << fmt2(y_of(mean)) << " ";
    }
    svg << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"2\" points=\""
        << pts.str() << "\" data-learner=\"" << learner << "\"/>\n";
    svg << "<text x=\"" << left + plot_w - 8 << "\" y=\"" << fmt2(legend_y)
        << "\" text-anchor=\"end\" font-size=\"12\" font-family=\"sans-serif\" fill=\"" << stroke
        << "\">" << learner << "</text>\n";
    legend_y += 16;
  }
  svg << "</svg>\n";
  return svg.str();
}

void emit_report(const std::vector<RunRecord>& records, const std::string& out_dir,
                 nlohmann::json manifest) {
  if (records.empty()) throw InvalidSize("no records to report");
  std::filesystem::path dir(out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());

  write_file(dir / "records.csv", records_to_csv(records));
  write_file(dir / "summary.json", summarize_records(records).dump(2) + "\n");
  write_file(dir / "curves.svg", curves_svg(records));

  manifest["tool_version"] = kToolVersion;
  manifest["records"] = records.size();
  manifest["written_at"] = iso_timestamp();
  nlohmann::json seeds = nlohmann::json::array();
  std::set<std::uint64_t> seen;
  for (const RunRecord& r : records)
    if (seen.insert(r.seed).second) seeds.push_back(r.seed);
  manifest["run_seeds"] = std::move(seeds);
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace eagl
