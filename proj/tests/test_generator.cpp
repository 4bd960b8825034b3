#include <doctest.h>

#include <set>

#include "dmta/errors.hpp"
#include "dmta/generator.hpp"
#include "fixtures.hpp"

using namespace dmta;

namespace {

GeneratorConfig small_config() {
  GeneratorConfig cfg;
  cfg.batch_size = 32;
  cfg.min_iterations = 5;
  cfg.patience = 5;
  cfg.max_iterations = 20;
  cfg.population_size = 16;
  cfg.max_candidates_per_cycle = 200;
  return cfg;
}

Generator seeded(const GeneratorConfig& cfg, std::uint64_t seed = 1) {
  Generator g(cfg);
  const auto mols = fixtures::random_molecules(40, seed);
  g.seed_population(mols);
  return g;
}

}  // namespace

TEST_CASE("prior sampler") {
  for (const Molecule& m : fixtures::random_molecules(500, 3)) {
    CHECK(is_valid(m));
    CHECK(m.atom_count() >= 4);
    CHECK(m.atom_count() <= 40);
  }
}

TEST_CASE("stopping rule with a flat scorer") {
  GeneratorConfig cfg = small_config();
  cfg.min_iterations = 1;
  cfg.patience = 1;
  cfg.min_improvement = 0.0;
  Generator g = seeded(cfg);
  Rng rng(5);
  GenerationStats stats;
  const CandidateSet c = g.generate(ScoringModel::constant(0.5), {}, 2, rng, &stats);
  CHECK(stats.iterations == 2);
  CHECK(c.size() > 2);
}

TEST_CASE("candidate set contract") {
  const GeneratorConfig cfg = small_config();
  Generator g = seeded(cfg);
  const auto model = ScoringModel::constant(0.5);

  Rng first(9);
  const CandidateSet earlier = g.generate(model, {}, 3, first);
  std::unordered_set<std::uint64_t> played(earlier.hashes.begin(), earlier.hashes.begin() + 10);

  Rng rng(10);
  GenerationStats stats;
  const CandidateSet c = g.generate(model, played, 3, rng, &stats);
  REQUIRE(c.size() > 3);
  CHECK(c.size() <= static_cast<std::size_t>(cfg.max_candidates_per_cycle));
  CHECK(c.hashes.size() == c.size());
  CHECK(c.fingerprints.size() == c.size());
  CHECK(c.scores.size() == c.size());
  CHECK(stats.iterations >= cfg.min_iterations);
  CHECK(stats.iterations <= cfg.max_iterations);
  std::set<std::uint64_t> seen;
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(is_valid(c.molecules[i]));
    CHECK(c.hashes[i] == canonical_hash(c.molecules[i]));
    CHECK(c.fingerprints[i] == morgan_fingerprint(c.molecules[i]));
    CHECK(c.scores[i] == model.predict(c.fingerprints[i]));
    CHECK(c.scores[i] >= cfg.min_score);
    CHECK(!played.contains(c.hashes[i]));
    CHECK(seen.insert(c.hashes[i]).second);
  }
}

TEST_CASE("seeded generation is deterministic") {
  const GeneratorConfig cfg = small_config();
  Generator a = seeded(cfg), b = seeded(cfg);
  Rng ra(4), rb(4);
  const auto model = ScoringModel::constant(0.5);
  CHECK(a.generate(model, {}, 2, ra).hashes == b.generate(model, {}, 2, rb).hashes);
}

TEST_CASE("diversity filter with single-member buckets") {
  GeneratorConfig cfg = small_config();
  cfg.bucket_size = 1;
  cfg.min_similarity = 0.7;
  Generator g = seeded(cfg);
  Rng rng(6);
  GenerationStats stats;
  const CandidateSet c = g.generate(ScoringModel::constant(0.5), {}, 1, rng, &stats);
  CHECK(stats.rejected_bucket > 0);
  // Every survivor founded its bucket, so survivors are pairwise dissimilar.
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = i + 1; j < c.size(); ++j)
      CHECK(1.0 - jaccard_distance(c.fingerprints[i], c.fingerprints[j]) <= cfg.min_similarity);
}

TEST_CASE("starvation and anchors") {
  GeneratorConfig cfg = small_config();
  cfg.min_score = 0.6;
  Generator g = seeded(cfg);
  Rng rng(2);
  CHECK_THROWS_AS(g.generate(ScoringModel::constant(0.5), {}, 2, rng), GenerationStarved);

  GeneratorConfig relaxed = cfg;
  relaxed.min_score = 0.0;
  CHECK(g.generate(ScoringModel::constant(0.5), {}, 2, rng, nullptr, &relaxed).size() > 2);

  // Without anchors the generator seeds itself from the prior.
  Generator empty(small_config());
  CHECK(empty.generate(ScoringModel::constant(0.5), {}, 2, rng).size() > 2);
  CHECK(empty.anchor_count() == 16);

  const auto mols = fixtures::random_molecules(10, 77);
  g.seed_population(mols);
  CHECK(g.anchor_count() == 10);
  g.add_anchors(mols);
  CHECK(g.anchor_count() == 10);
  g.add_anchors(fixtures::random_molecules(5, 78));
  CHECK(g.anchor_count() == 15);
}

TEST_CASE("config checks") {
  CHECK(GeneratorConfig{}.check().empty());
  GeneratorConfig bad;
  bad.min_score = 1.5;
  bad.min_similarity = -0.1;
  bad.max_edit_depth = 0;
  bad.min_improvement = -1;
  CHECK(bad.check().size() >= 4);
  CHECK_THROWS_AS(Generator{bad}, ValidationError);
}
