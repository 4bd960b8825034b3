#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dmta/bandit.hpp"
#include "dmta/generator.hpp"
#include "dmta/scoring.hpp"
#include "dmta/twin.hpp"

namespace dmta {

// Every knob of an experiment. Defaults are the desk-scale setup.
struct RunConfig {
  int cycles = 100;
  int k = 20;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  std::uint64_t master_seed = 2024;
  std::vector<std::string> strategies = {"zooming-weighted", "zooming-unweighted", "greedy",
                                         "eps-greedy", "random"};
  std::string out_dir = "runs";
  bool paper_scale = false;
  bool dump_balls = false;
  bool emit_plots = false;
  int threads = 0;  // 0: one per hardware thread
  int bootstrap_active = 20;
  int bootstrap_inactive = 100;
  bool train_on_true_labels = false;

  GeneratorConfig generator;
  GroundTruthConfig truth;
  EpsilonConfig epsilon;
  ScoringHyper scoring;
  BackfillMode backfill = BackfillMode::kDomain;

  std::vector<std::string> check() const;
};

// Paper-scale preset: 200 cycles, K = 100, seeds 1..10.
void apply_paper_scale(RunConfig& cfg);

using ConfigOverrides = std::vector<std::pair<std::string, std::string>>;

// Reads `key = value` lines ('#' starts a comment) or, for a .json path,
// the "config" object of a run manifest. Precedence, lowest first:
// defaults, paper-scale preset (when paper_scale is true anywhere), file,
// overrides. Unknown keys and malformed values throw ParseError naming the
// key (and line); failed invariants throw ValidationError listing all of
// them.
RunConfig parse_config(const std::filesystem::path& file, const ConfigOverrides& overrides = {});
RunConfig parse_config_text(const std::string& text, const ConfigOverrides& overrides = {});

// Resolved config as flat key -> value strings, values round-trip exactly.
std::map<std::string, std::string> config_echo(const RunConfig& cfg);

std::vector<std::string> config_keys();

}  // namespace dmta
