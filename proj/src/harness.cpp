#include "dmta/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "dmta/errors.hpp"
#include "dmta/plots.hpp"

namespace dmta {

namespace {

enum Stream : std::uint64_t { kBootstrapStream = 1, kGeneratorStream = 2, kTestStream = 3, kStrategyStream = 4 };

std::string fmt_fixed(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.9f", v);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t fingerprint_hash(const Fingerprint& fp) {
  std::uint64_t h = 0x62616c6c;
  for (const auto& [d, c] : fp.entries()) h = hash_combine(hash_combine(h, d), c);
  return h;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

struct MeanCi {
  int n = 0;
  double mean = 0.0;
  double half_width = 0.0;
};

MeanCi mean_ci(const std::vector<double>& xs) {
  MeanCi out;
  out.n = static_cast<int>(xs.size());
  if (xs.empty()) return out;
  out.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    const double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    out.half_width = 1.96 * sd / std::sqrt(static_cast<double>(xs.size()));
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

}  // namespace

std::optional<double> novelty(std::span<const Fingerprint> current, std::span<const Fingerprint> past) {
  if (current.empty() || past.empty()) return std::nullopt;
  double outer = 0.0;
  for (const Fingerprint& p : past) {
    double inner = 0.0;
    for (const Fingerprint& c : current) inner += jaccard_distance(p, c);
    outer += inner / static_cast<double>(current.size());
  }
  return outer / static_cast<double>(past.size());
}

double normalized_cum_reward(std::span<const int> round_rewards, std::size_t k) {
  if (round_rewards.empty() || k == 0) return 0.0;
  const double total = std::accumulate(round_rewards.begin(), round_rewards.end(), 0.0);
  return total / (static_cast<double>(k) * static_cast<double>(round_rewards.size()));
}

std::optional<double> mean_reward_novelty(double normalized_reward, std::optional<double> novelty) {
  if (!novelty) return std::nullopt;
  return (normalized_reward + *novelty) / 2.0;
}

std::uint64_t run_seed_for(std::uint64_t master_seed, std::uint64_t seed) {
  return derive_seed(master_seed, seed);
}

DmtaRun::DmtaRun(const RunConfig& cfg, std::string strategy, std::uint64_t seed)
    : cfg_(cfg),
      strategy_name_(std::move(strategy)),
      run_seed_(run_seed_for(cfg.master_seed, seed)),
      bootstrap_rng_(derive_seed(run_seed_, kBootstrapStream)),
      generator_rng_(derive_seed(run_seed_, kGeneratorStream)),
      test_rng_(derive_seed(run_seed_, kTestStream)),
      strategy_rng_(derive_seed(run_seed_, kStrategyStream)),
      strategy_(make_strategy(strategy_name_, StrategyOptions{cfg.epsilon, cfg.backfill})),
      generator_(cfg.generator) {
  bootstrap_ = bootstrap_initial(&Generator::sample_prior, cfg_.truth, bootstrap_rng_,
                                 cfg_.bootstrap_active, cfg_.bootstrap_inactive);

  std::vector<Observation> history;
  std::vector<Molecule> seeds;
  for (const LabeledMolecule& lm : bootstrap_) {
    const int label = reward_of(cfg_.train_on_true_labels ? lm.truth : lm.observed);
    training_.push_back({lm.fp, label});
    history.push_back({0, lm.fp, reward_of(lm.observed)});
    seeds.push_back(lm.mol);
  }
  model_ = fit(training_, cfg_.scoring);
  strategy_->initialize(history);
  generator_.seed_population(seeds);
}

CycleRecord DmtaRun::run_cycle(int t) {
  if (t != last_round_ + 1) throw Error("rounds must run consecutively");
  const auto started = std::chrono::steady_clock::now();
  const auto k = static_cast<std::size_t>(cfg_.k);

  // Design
  CycleRecord rec;
  rec.round = t;
  rec.strategy = strategy_name_;
  GenerationStats stats;
  CandidateSet cands;
  try {
    cands = generator_.generate(model_, selected_, k, generator_rng_, &stats);
  } catch (const GenerationStarved&) {
    GeneratorConfig relaxed = cfg_.generator;
    relaxed.min_score = 0.0;
    rec.starvation_fallback = true;
    cands = generator_.generate(model_, selected_, k, generator_rng_, &stats, &relaxed);
  }
  rec.candidates = cands.size();
  rec.generator_iterations = stats.iterations;

  // Select
  const CandidateView view{cands.fingerprints, cands.scores};
  const SuperArm chosen = strategy_->select(view, t, k, strategy_rng_);
  if (chosen.size() != k) throw Error("strategy returned " + std::to_string(chosen.size()) + " arms");
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    if (chosen[i] >= cands.size() || (i > 0 && chosen[i] <= chosen[i - 1]))
      throw Error("strategy returned invalid or repeated positions");
    if (selected_.contains(cands.hashes[chosen[i]]))
      throw Error("strategy selected a previously played molecule");
  }

  // Make and test
  std::vector<int> rewards;
  std::vector<Fingerprint> current_actives;
  double score_sum = 0.0;
  for (std::size_t m : chosen) {
    const Molecule& mol = cands.molecules[m];
    make_.make(mol);
    const Activity truth = true_activity(count_atoms(mol), cfg_.truth);
    const Activity observed = noisy_test(truth, test_rng_, cfg_.truth);
    rewards.push_back(reward_of(observed));
    rec.selected.push_back(cands.hashes[m]);
    rec.true_labels.push_back(reward_of(truth));
    score_sum += cands.scores[m];
    if (truth == Activity::kActive) current_actives.push_back(cands.fingerprints[m]);
    training_.push_back({cands.fingerprints[m], reward_of(cfg_.train_on_true_labels ? truth : observed)});
  }

  // Analyze: strategy first, then the scoring model.
  strategy_->update(view, chosen, rewards, t);
  model_ = fit(training_, cfg_.scoring);
  for (std::uint64_t h : rec.selected) selected_.insert(h);
  std::vector<Molecule> tested;
  for (std::size_t m : chosen) tested.push_back(cands.molecules[m]);
  generator_.add_anchors(tested);

  rec.rewards = rewards;
  rec.round_reward = std::accumulate(rewards.begin(), rewards.end(), 0);
  cumulative_reward_ += rec.round_reward;
  rec.cumulative_reward = cumulative_reward_;
  rec.normalized_cumulative_reward =
      static_cast<double>(cumulative_reward_) / (static_cast<double>(k) * static_cast<double>(t));
  rec.true_actives = static_cast<int>(current_actives.size());
  rec.novelty = novelty(current_actives, past_actives_);
  rec.mean_reward_novelty = mean_reward_novelty(rec.normalized_cumulative_reward, rec.novelty);
  for (Fingerprint& fp : current_actives) past_actives_.push_back(std::move(fp));
  const StrategyDiagnostics diag = strategy_->diagnostics();
  rec.active_balls = diag.active_balls;
  rec.horizon = diag.horizon;
  rec.epsilon = diag.epsilon;
  rec.mean_selected_score = score_sum / static_cast<double>(k);
  rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  last_round_ = t;

  if (observer_) observer_(RoundContext{t, cands, chosen, rewards, *strategy_, model_, rec});
  return rec;
}

RunResult run_single(const RunConfig& cfg, const std::string& strategy, std::uint64_t seed,
                     const RoundObserver& observer, const std::optional<std::filesystem::path>& run_dir) {
  RunResult result;
  result.strategy = strategy;
  result.seed = seed;
  result.run_seed = run_seed_for(cfg.master_seed, seed);

  std::ofstream cycles_out, timing_out, balls_out;
  try {
    if (run_dir) {
      std::filesystem::create_directories(*run_dir);
      write_text(*run_dir / "manifest.json", manifest_json(cfg, &strategy, &seed));
      cycles_out.open(*run_dir / "cycles.csv", std::ios::binary);
      timing_out.open(*run_dir / "timing.csv", std::ios::binary);
      if (!cycles_out || !timing_out) throw Error("cannot write into " + run_dir->string());
      cycles_out << cycles_csv_header() << '\n' << std::flush;
      timing_out << "round,wall_ms,generator_iterations\n";
      if (cfg.dump_balls && strategy.starts_with("zooming")) {
        balls_out.open(*run_dir / "balls.csv", std::ios::binary);
        balls_out << "round,ball,center_hash,radius,n,rew,preindex\n";
      }
    }

    DmtaRun run(cfg, strategy, seed);
    run.set_observer([&](const RoundContext& ctx) {
      if (balls_out.is_open()) {
        if (const auto* zs = dynamic_cast<const ZoomingStrategy*>(&ctx.strategy)) {
          const auto balls = zs->bandit().balls();
          const std::int64_t horizon = phase_horizon(ctx.round);
          for (std::size_t i = 0; i < balls.size(); ++i) {
            balls_out << ctx.round << ',' << i << ',' << hex64(fingerprint_hash(balls[i].center)) << ','
                      << fmt_fixed(balls[i].radius) << ',' << balls[i].n << ',' << balls[i].rew << ','
                      << fmt_fixed(preindex(balls[i], horizon)) << '\n';
          }
        }
      }
      if (observer) observer(ctx);
    });

    for (int t = 1; t <= cfg.cycles; ++t) {
      CycleRecord rec = run.run_cycle(t);
      if (cycles_out.is_open()) {
        cycles_out << to_csv_row(rec) << '\n' << std::flush;
        timing_out << rec.round << ',' << fmt_fixed(rec.wall_ms) << ',' << rec.generator_iterations << '\n';
      }
      result.cycles.push_back(std::move(rec));
    }
    if (run_dir) {
      std::ofstream model_out(*run_dir / "model.bin", std::ios::binary);
      run.model().save(model_out);
    }
  } catch (const std::exception& e) {
    result.error = e.what();
    if (run_dir) {
      std::error_code ec;
      std::filesystem::create_directories(*run_dir, ec);
      std::ofstream err(*run_dir / "error.txt");
      err << e.what() << '\n';
    }
  }
  return result;
}

std::filesystem::path run_directory(const std::filesystem::path& out_dir, const std::string& strategy,
                                    std::uint64_t seed) {
  return out_dir / strategy / ("seed-" + std::to_string(seed));
}

std::vector<RunResult> run_experiment(const RunConfig& cfg, bool write_outputs) {
  struct Task {
    std::string strategy;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (const auto& s : cfg.strategies)
    for (auto seed : cfg.seeds) tasks.push_back({s, seed});

  const std::filesystem::path out_dir = cfg.out_dir;
  if (write_outputs) {
    std::filesystem::create_directories(out_dir);
    write_text(out_dir / "manifest.json", manifest_json(cfg));
  }

  std::vector<RunResult> results(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      std::optional<std::filesystem::path> dir;
      if (write_outputs) dir = run_directory(out_dir, tasks[i].strategy, tasks[i].seed);
      results[i] = run_single(cfg, tasks[i].strategy, tasks[i].seed, {}, dir);
    }
  };
  unsigned n_threads = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                       : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(tasks.size()));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  }

  if (write_outputs) {
    // Aggregates come from the files so `plot` on the same directory agrees byte for byte.
    auto on_disk = read_results(out_dir);
    write_text(out_dir / "summary.csv", summary_csv(summarize(on_disk)));
    if (cfg.emit_plots) emit_plots(on_disk, out_dir);
  }
  return results;
}

const std::vector<std::string>& cycles_csv_columns() {
  static const std::vector<std::string> cols = {
      "round",          "strategy",        "candidates",
      "selected_hashes", "rewards",        "true_labels",
      "round_reward",   "cumulative_reward", "normalized_cumulative_reward",
      "true_actives",   "novelty",         "mean_reward_novelty",
      "active_balls",   "phase_horizon",   "epsilon",
      "generator_iterations", "starvation_fallback", "mean_selected_score"};
  return cols;
}

std::string cycles_csv_header() {
  std::string out;
  for (const auto& c : cycles_csv_columns()) out += (out.empty() ? "" : ",") + c;
  return out;
}

std::string to_csv_row(const CycleRecord& r) {
  std::string hashes, rewards, truths;
  for (auto h : r.selected) hashes += (hashes.empty() ? "" : ";") + hex64(h);
  for (int v : r.rewards) rewards += static_cast<char>('0' + v);
  for (int v : r.true_labels) truths += static_cast<char>('0' + v);
  auto opt = [](const auto& v, auto fmt) { return v ? fmt(*v) : std::string(); };
  auto num = [](auto v) { return std::to_string(v); };

  std::vector<std::string> f = {std::to_string(r.round),
                                r.strategy,
                                std::to_string(r.candidates),
                                hashes,
                                rewards,
                                truths,
                                std::to_string(r.round_reward),
                                std::to_string(r.cumulative_reward),
                                fmt_fixed(r.normalized_cumulative_reward),
                                std::to_string(r.true_actives),
                                opt(r.novelty, fmt_fixed),
                                opt(r.mean_reward_novelty, fmt_fixed),
                                opt(r.active_balls, num),
                                opt(r.horizon, num),
                                opt(r.epsilon, fmt_fixed),
                                std::to_string(r.generator_iterations),
                                r.starvation_fallback ? "1" : "0",
                                fmt_fixed(r.mean_selected_score)};
  std::string out;
  for (std::size_t i = 0; i < f.size(); ++i) out += (i ? "," : "") + f[i];
  return out;
}

CycleRecord parse_csv_row(const std::string& line) {
  const auto f = split(line, ',');
  if (f.size() != cycles_csv_columns().size())
    throw ParseError("cycles.csv row has " + std::to_string(f.size()) + " fields");
  auto opt_d = [](const std::string& s) { return s.empty() ? std::nullopt : std::optional<double>(std::stod(s)); };
  CycleRecord r;
  try {
    r.round = std::stoi(f[0]);
    r.strategy = f[1];
    r.candidates = std::stoull(f[2]);
    if (!f[3].empty())
      for (const auto& h : split(f[3], ';')) r.selected.push_back(std::stoull(h, nullptr, 16));
    for (char c : f[4]) r.rewards.push_back(c - '0');
    for (char c : f[5]) r.true_labels.push_back(c - '0');
    r.round_reward = std::stoi(f[6]);
    r.cumulative_reward = std::stoll(f[7]);
    r.normalized_cumulative_reward = std::stod(f[8]);
    r.true_actives = std::stoi(f[9]);
    r.novelty = opt_d(f[10]);
    r.mean_reward_novelty = opt_d(f[11]);
    if (!f[12].empty()) r.active_balls = std::stoull(f[12]);
    if (!f[13].empty()) r.horizon = std::stoll(f[13]);
    r.epsilon = opt_d(f[14]);
    r.generator_iterations = std::stoi(f[15]);
    r.starvation_fallback = f[16] == "1";
    r.mean_selected_score = std::stod(f[17]);
  } catch (const std::logic_error&) {
    throw ParseError("malformed cycles.csv row: " + line);
  }
  return r;
}

std::vector<RunResult> read_results(const std::filesystem::path& out_dir) {
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(out_dir))
    for (const auto& entry : std::filesystem::recursive_directory_iterator(out_dir))
      if (entry.is_regular_file() && entry.path().filename() == "cycles.csv") files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  std::vector<RunResult> out;
  for (const auto& file : files) {
    std::ifstream in(file, std::ios::binary);
    std::string line;
    if (!std::getline(in, line) || line != cycles_csv_header())
      throw ParseError(file.string() + ": unexpected cycles.csv header");
    RunResult rr;
    const std::string dir = file.parent_path().filename().string();
    if (dir.starts_with("seed-")) rr.seed = std::stoull(dir.substr(5));
    rr.strategy = file.parent_path().parent_path().filename().string();
    while (std::getline(in, line))
      if (!line.empty()) rr.cycles.push_back(parse_csv_row(line));
    if (!rr.cycles.empty()) rr.strategy = rr.cycles.front().strategy;
    out.push_back(std::move(rr));
  }
  return out;
}

std::vector<SummaryRow> summarize(std::span<const RunResult> results) {
  std::vector<std::string> order;
  for (const auto& r : results)
    if (std::find(order.begin(), order.end(), r.strategy) == order.end()) order.push_back(r.strategy);

  std::vector<SummaryRow> rows;
  for (const auto& strategy : order) {
    int max_round = 0;
    for (const auto& r : results)
      if (r.strategy == strategy)
        for (const auto& c : r.cycles) max_round = std::max(max_round, c.round);
    for (int t = 1; t <= max_round; ++t) {
      std::vector<double> reward, nov, both;
      for (const auto& r : results) {
        if (r.strategy != strategy) continue;
        for (const auto& c : r.cycles) {
          if (c.round != t) continue;
          reward.push_back(c.normalized_cumulative_reward);
          if (c.novelty) nov.push_back(*c.novelty);
          if (c.mean_reward_novelty) both.push_back(*c.mean_reward_novelty);
        }
      }
      SummaryRow row;
      row.strategy = strategy;
      row.round = t;
      const MeanCi rw = mean_ci(reward), nv = mean_ci(nov), bt = mean_ci(both);
      row.runs = rw.n;
      row.reward_mean = rw.mean;
      row.reward_ci95 = rw.half_width;
      row.novelty_runs = nv.n;
      if (nv.n > 0) row.novelty_mean = nv.mean;
      row.novelty_ci95 = nv.half_width;
      row.mean_of_two_runs = bt.n;
      if (bt.n > 0) row.mean_of_two = bt.mean;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string summary_csv(std::span<const SummaryRow> rows) {
  std::string out =
      "strategy,round,runs,reward_mean,reward_ci95,novelty_runs,novelty_mean,novelty_ci95,"
      "mean_of_two_runs,mean_of_two\n";
  for (const auto& r : rows) {
    out += r.strategy + ',' + std::to_string(r.round) + ',' + std::to_string(r.runs) + ',' +
           fmt_fixed(r.reward_mean) + ',' + fmt_fixed(r.reward_ci95) + ',' + std::to_string(r.novelty_runs) +
           ',' + (r.novelty_mean ? fmt_fixed(*r.novelty_mean) : "") + ',' + fmt_fixed(r.novelty_ci95) + ',' +
           std::to_string(r.mean_of_two_runs) + ',' + (r.mean_of_two ? fmt_fixed(*r.mean_of_two) : "") + '\n';
  }
  return out;
}

std::string manifest_json(const RunConfig& cfg, const std::string* strategy, const std::uint64_t* seed) {
  RunConfig echo = cfg;
  if (strategy) echo.strategies = {*strategy};
  if (seed) echo.seeds = {*seed};
  nlohmann::ordered_json doc;
  doc["artifact"] = kArtifactName;
  doc["version"] = kArtifactVersion;
  if (strategy) doc["strategy"] = *strategy;
  if (seed) {
    doc["seed"] = *seed;
    doc["run_seed"] = hex64(run_seed_for(cfg.master_seed, *seed));
  }
  nlohmann::ordered_json flat = nlohmann::ordered_json::object();
  for (const auto& [key, value] : config_echo(echo)) flat[key] = value;
  doc["config"] = flat;
  return doc.dump(2) + "\n";
}

}  // namespace dmta
