#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "dmta/config.hpp"
#include "dmta/generator.hpp"
#include "dmta/scoring.hpp"
#include "dmta/strategy.hpp"
#include "dmta/twin.hpp"

namespace dmta {

inline constexpr const char* kArtifactName = "dmta-zooming";
inline constexpr const char* kArtifactVersion = "1.0.0";

struct CycleRecord {
  int round = 0;
  std::string strategy;
  std::size_t candidates = 0;
  std::vector<std::uint64_t> selected;  // canonical hashes, in selection order
  std::vector<int> rewards;             // observed (noisy) outcomes
  std::vector<int> true_labels;
  int round_reward = 0;
  std::int64_t cumulative_reward = 0;
  double normalized_cumulative_reward = 0.0;
  int true_actives = 0;
  std::optional<double> novelty;
  std::optional<double> mean_reward_novelty;
  std::optional<std::size_t> active_balls;
  std::optional<std::int64_t> horizon;
  std::optional<double> epsilon;
  int generator_iterations = 0;
  bool starvation_fallback = false;
  double mean_selected_score = 0.0;
  double wall_ms = 0.0;  // kept out of cycles.csv so it stays reproducible
};

struct RunResult {
  std::string strategy;
  std::uint64_t seed = 0;
  std::uint64_t run_seed = 0;
  std::vector<CycleRecord> cycles;
  std::optional<std::string> error;
};

// Mean over past actives of the mean distance to the current actives;
// nullopt when either set is empty.
std::optional<double> novelty(std::span<const Fingerprint> current, std::span<const Fingerprint> past);

// Sum of round rewards divided by k times the number of rounds.
double normalized_cum_reward(std::span<const int> round_rewards, std::size_t k);

std::optional<double> mean_reward_novelty(double normalized_reward, std::optional<double> novelty);

struct RoundContext {
  int round;
  const CandidateSet& candidates;
  const SuperArm& selected;
  std::span<const int> rewards;
  const SelectionStrategy& strategy;
  const ScoringModel& model;  // already refit on this round's labels
  const CycleRecord& record;
};

using RoundObserver = std::function<void(const RoundContext&)>;

// One closed DMTA loop for a (strategy, seed) pair.
class DmtaRun {
 public:
  DmtaRun(const RunConfig& cfg, std::string strategy, std::uint64_t seed);

  // Design, make, test and analyze for round t (1-based, consecutive).
  CycleRecord run_cycle(int t);

  void set_observer(RoundObserver observer) { observer_ = std::move(observer); }

  const std::string& strategy_name() const noexcept { return strategy_name_; }
  std::uint64_t run_seed() const noexcept { return run_seed_; }
  const SelectionStrategy& strategy() const noexcept { return *strategy_; }
  const ScoringModel& model() const noexcept { return model_; }
  const TrainingSet& training() const noexcept { return training_; }
  const std::vector<LabeledMolecule>& bootstrap() const noexcept { return bootstrap_; }
  const std::unordered_set<std::uint64_t>& selected_hashes() const noexcept { return selected_; }
  const MakeStation& make_station() const noexcept { return make_; }
  std::int64_t cumulative_reward() const noexcept { return cumulative_reward_; }

 private:
  RunConfig cfg_;
  std::string strategy_name_;
  std::uint64_t run_seed_;
  Rng bootstrap_rng_;
  Rng generator_rng_;
  Rng test_rng_;
  Rng strategy_rng_;
  std::unique_ptr<SelectionStrategy> strategy_;
  Generator generator_;
  MakeStation make_;
  std::vector<LabeledMolecule> bootstrap_;
  TrainingSet training_;
  ScoringModel model_;
  std::unordered_set<std::uint64_t> selected_;
  std::vector<Fingerprint> past_actives_;
  std::int64_t cumulative_reward_ = 0;
  int last_round_ = 0;
  RoundObserver observer_;
};

// Seed of the rng streams for (master_seed, replicate seed). Shared by all
// strategies so they start from the same bootstrap set.
std::uint64_t run_seed_for(std::uint64_t master_seed, std::uint64_t seed);

// Runs cfg.cycles rounds. With `run_dir` set, writes cycles.csv (flushed
// every round), timing.csv, manifest.json, model.bin and, if enabled,
// balls.csv. Failures are captured in RunResult::error.
RunResult run_single(const RunConfig& cfg, const std::string& strategy, std::uint64_t seed,
                     const RoundObserver& observer = {},
                     const std::optional<std::filesystem::path>& run_dir = std::nullopt);

// Every (strategy, seed) pair, in parallel over cfg.threads workers.
// Results are ordered strategy-major, then by seed. With `write_outputs`
// each run lands in <out_dir>/<strategy>/seed-<seed>/ and summary.csv plus
// manifest.json (and plots if cfg.emit_plots) go to <out_dir>.
std::vector<RunResult> run_experiment(const RunConfig& cfg, bool write_outputs = true);

std::filesystem::path run_directory(const std::filesystem::path& out_dir, const std::string& strategy,
                                    std::uint64_t seed);

// cycles.csv
const std::vector<std::string>& cycles_csv_columns();
std::string cycles_csv_header();
std::string to_csv_row(const CycleRecord& rec);
CycleRecord parse_csv_row(const std::string& line);
std::vector<RunResult> read_results(const std::filesystem::path& out_dir);

struct SummaryRow {
  std::string strategy;
  int round = 0;
  int runs = 0;
  double reward_mean = 0.0;
  double reward_ci95 = 0.0;
  int novelty_runs = 0;
  std::optional<double> novelty_mean;
  double novelty_ci95 = 0.0;
  int mean_of_two_runs = 0;
  std::optional<double> mean_of_two;
};

// Per strategy and round across runs: means with normal-approximation 95%
// half-widths (1.96 * sample sd / sqrt(n)). Null novelties are skipped.
std::vector<SummaryRow> summarize(std::span<const RunResult> results);
std::string summary_csv(std::span<const SummaryRow> rows);

std::string manifest_json(const RunConfig& cfg, const std::string* strategy = nullptr,
                          const std::uint64_t* seed = nullptr);

}  // namespace dmta
