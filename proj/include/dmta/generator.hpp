#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "dmta/fingerprint.hpp"
#include "dmta/molgraph.hpp"
#include "dmta/rng.hpp"
#include "dmta/scoring.hpp"

namespace dmta {

struct GeneratorConfig {
  int batch_size = 128;
  int min_iterations = 50;
  int max_iterations = 300;
  int patience = 50;
  // A batch mean must beat the best so far by more than this to reset patience.
  double min_improvement = 1e-3;
  int bucket_size = 100;
  double min_score = 0.2;
  double min_similarity = 0.6;
  int population_size = 64;
  // Children lie at most this many edits from the anchor they descend from.
  int max_edit_depth = 3;
  int max_candidates_per_cycle = 1000;

  std::vector<std::string> check() const;
};

// The volatile arm set offered to a selection strategy in one round.
struct CandidateSet {
  std::vector<Molecule> molecules;
  std::vector<std::uint64_t> hashes;
  std::vector<Fingerprint> fingerprints;
  std::vector<double> scores;

  std::size_t size() const noexcept { return molecules.size(); }
};

struct GenerationStats {
  int iterations = 0;
  int generated = 0;
  int mutation_failures = 0;
  int rejected_score = 0;
  int rejected_duplicate = 0;
  int rejected_selected = 0;
  int rejected_bucket = 0;
  int buckets = 0;
  int accepted = 0;
  double best_batch_mean = 0.0;
};

// Score-guided evolutionary sampler. Each call to generate() runs one design
// campaign. The population starts as the population_size best-scoring
// anchors (the bootstrap set plus every molecule tested so far), parents
// drawn uniformly from members below max_edit_depth are mutated, the batch is
// scored, children pass through the diversity filter and the population
// keeps its best members.
//
// Diversity filter: a child joins the first bucket (creation order) whose
// representative it matches with Jaccard similarity > min_similarity, or
// founds a new bucket keyed by its own canonical hash. Children landing in a
// bucket that already holds bucket_size members are rejected and given
// score 0 for survival.
class Generator {
 public:
  explicit Generator(GeneratorConfig cfg);

  const GeneratorConfig& config() const noexcept { return cfg_; }

  // Replaces the anchor set.
  void seed_population(std::span<const Molecule> molecules);
  // Adds molecules (typically the ones just tested) to the anchor set.
  void add_anchors(std::span<const Molecule> molecules);
  std::size_t anchor_count() const noexcept { return anchors_.size(); }

  // `selected` holds canonical hashes played in earlier rounds; none of
  // them is ever returned. Throws GenerationStarved when k + 1 candidates
  // do not survive.
  CandidateSet generate(const ScoringModel& model, const std::unordered_set<std::uint64_t>& selected,
                        std::size_t k, Rng& rng, GenerationStats* stats = nullptr,
                        const GeneratorConfig* override_cfg = nullptr);

  // Prior sampler used without a scoring model: grows a random tree to a
  // random size in [4, 40] atoms then closes a few rings.
  static Molecule sample_prior(Rng& rng);

 private:
  struct Member {
    Molecule mol;
    std::uint64_t hash = 0;
    Fingerprint fp;
    double score = 0.0;
    int depth = 0;
  };

  GeneratorConfig cfg_;
  std::vector<Member> anchors_;
  std::unordered_set<std::uint64_t> anchor_hashes_;
};

}  // namespace dmta
