#include "dmta/generator.hpp"

#include <algorithm>
#include <limits>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "dmta/errors.hpp"

namespace dmta {

namespace {

constexpr int kPriorMinAtoms = 4;
constexpr int kPriorMaxAtoms = 40;
constexpr int kPriorMaxRings = 2;

// Diversity buckets with an inverted index over representative features, so
// the first matching bucket is found without scanning every representative.
class BucketIndex {
 public:
  // First bucket (creation order) whose representative has Jaccard
  // similarity > min_similarity with fp, or npos.
  std::size_t find(const Fingerprint& fp, double min_similarity) {
    std::vector<std::size_t> touched;
    for (const auto& [d, c] : fp.entries()) {
      auto it = postings_.find(d);
      if (it == postings_.end()) continue;
      for (const auto& [b, rc] : it->second) {
        if (overlap_[b] == 0) touched.push_back(b);
        overlap_[b] += std::min(c, rc);
      }
    }
    std::size_t best = npos;
    const double t = static_cast<double>(fp.total());
    for (std::size_t b : touched) {
      const double inter = static_cast<double>(overlap_[b]);
      const double uni = t + static_cast<double>(totals_[b]) - inter;
      if (b < best && inter / uni > min_similarity) best = b;
      overlap_[b] = 0;
    }
    return best;
  }

  std::size_t add(const Fingerprint& rep) {
    const std::size_t b = totals_.size();
    for (const auto& [d, c] : rep.entries()) postings_[d].emplace_back(b, c);
    totals_.push_back(rep.total());
    members_.push_back(0);
    overlap_.push_back(0);
    return b;
  }

  int& members(std::size_t b) { return members_[b]; }
  std::size_t size() const noexcept { return totals_.size(); }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::unordered_map<std::uint32_t, std::vector<std::pair<std::size_t, std::uint32_t>>> postings_;
  std::vector<std::uint64_t> totals_;
  std::vector<int> members_;
  std::vector<std::uint64_t> overlap_;
};

}  // namespace

std::vector<std::string> GeneratorConfig::check() const {
  std::vector<std::string> errors;
  auto positive = [&](const char* name, int v) {
    if (v <= 0) errors.push_back(std::string(name) + " must be positive");
  };
  positive("batch_size", batch_size);
  positive("min_iterations", min_iterations);
  positive("max_iterations", max_iterations);
  positive("patience", patience);
  if (!(min_improvement >= 0.0)) errors.emplace_back("min_improvement must be >= 0");
  positive("bucket_size", bucket_size);
  positive("population_size", population_size);
  positive("max_edit_depth", max_edit_depth);
  positive("max_candidates_per_cycle", max_candidates_per_cycle);
  if (max_iterations < min_iterations) errors.emplace_back("max_iterations must be >= min_iterations");
  if (!(min_score >= 0.0 && min_score <= 1.0)) errors.emplace_back("min_score must be in [0, 1]");
  if (!(min_similarity >= 0.0 && min_similarity <= 1.0))
    errors.emplace_back("min_similarity must be in [0, 1]");
  return errors;
}

Generator::Generator(GeneratorConfig cfg) : cfg_(std::move(cfg)) {
  const auto errors = cfg_.check();
  if (!errors.empty()) throw ValidationError("generator config: " + errors.front());
}

void Generator::seed_population(std::span<const Molecule> molecules) {
  anchors_.clear();
  anchor_hashes_.clear();
  add_anchors(molecules);
}

void Generator::add_anchors(std::span<const Molecule> molecules) {
  for (const Molecule& mol : molecules) {
    Member m;
    m.hash = canonical_hash(mol);
    if (!anchor_hashes_.insert(m.hash).second) continue;
    m.mol = mol;
    m.fp = morgan_fingerprint(mol);
    anchors_.push_back(std::move(m));
  }
}

Molecule Generator::sample_prior(Rng& rng) {
  const int target =
      kPriorMinAtoms + static_cast<int>(rng.below(kPriorMaxAtoms - kPriorMinAtoms + 1));
  Molecule mol{{Element::C}, {}};
  while (static_cast<int>(mol.atom_count()) < target) {
    auto grown = try_edit(mol, EditKind::kAddAtom, rng);
    if (!grown) break;  // fully saturated
    mol = std::move(*grown);
  }
  const int rings = static_cast<int>(rng.below(kPriorMaxRings + 1));
  for (int i = 0; i < rings; ++i)
    if (auto closed = try_edit(mol, EditKind::kAddRingBond, rng)) mol = std::move(*closed);
  return mol;
}

CandidateSet Generator::generate(const ScoringModel& model,
                                 const std::unordered_set<std::uint64_t>& selected,
                                 std::size_t k, Rng& rng, GenerationStats* stats_out,
                                 const GeneratorConfig* override_cfg) {
  const GeneratorConfig& cfg = override_cfg ? *override_cfg : cfg_;
  if (anchors_.empty()) {
    std::vector<Molecule> seeds;
    for (int i = 0; i < cfg.population_size; ++i) seeds.push_back(sample_prior(rng));
    add_anchors(seeds);
  }
  for (Member& m : anchors_) m.score = model.predict(m.fp);
  std::vector<Member> population = anchors_;
  std::stable_sort(population.begin(), population.end(),
                   [](const Member& a, const Member& b) { return a.score > b.score; });
  if (population.size() > static_cast<std::size_t>(cfg.population_size))
    population.resize(static_cast<std::size_t>(cfg.population_size));
  const std::vector<Member> roots = population;

  GenerationStats stats;
  BucketIndex buckets;
  std::vector<Member> accepted;
  std::unordered_set<std::uint64_t> accepted_hashes;
  std::vector<Member> children;
  std::unordered_map<std::uint64_t, std::pair<Fingerprint, double>> seen;
  double best_mean = -std::numeric_limits<double>::infinity();
  int stall = 0;

  for (int it = 1;; ++it) {
    children.clear();
    double score_sum = 0.0;
    std::vector<const Member*> parents;
    for (const Member& m : population)
      if (m.depth < cfg.max_edit_depth) parents.push_back(&m);
    if (parents.empty())
      for (const Member& m : roots) parents.push_back(&m);
    for (int b = 0; b < cfg.batch_size; ++b) {
      const Member& parent = *parents[rng.below(parents.size())];
      Member child;
      try {
        child.mol = mutate(parent.mol, rng);
      } catch (const MutationExhausted&) {
        ++stats.mutation_failures;
        continue;
      }
      child.depth = parent.depth + 1;
      child.hash = canonical_hash(child.mol);
      // Populations converge, so most children repeat an earlier one.
      auto [hit, fresh] = seen.try_emplace(child.hash);
      if (fresh) {
        hit->second.first = morgan_fingerprint(child.mol);
        hit->second.second = model.predict(hit->second.first);
      }
      child.fp = hit->second.first;
      child.score = hit->second.second;
      score_sum += child.score;
      children.push_back(std::move(child));
    }
    stats.generated += static_cast<int>(children.size());
    const double mean = children.empty() ? 0.0 : score_sum / static_cast<double>(children.size());

    for (Member& child : children) {
      if (child.score < cfg.min_score) {
        ++stats.rejected_score;
      } else if (selected.contains(child.hash)) {
        ++stats.rejected_selected;
      } else if (accepted_hashes.contains(child.hash)) {
        ++stats.rejected_duplicate;
      } else {
        std::size_t bi = buckets.find(child.fp, cfg.min_similarity);
        if (bi == BucketIndex::npos) bi = buckets.add(child.fp);
        if (buckets.members(bi) >= cfg.bucket_size) {
          ++stats.rejected_bucket;
          child.score = 0.0;
        } else {
          ++buckets.members(bi);
          accepted_hashes.insert(child.hash);
          accepted.push_back(child);
        }
      }
    }

    // Truncation selection over parents and children, one member per hash.
    std::vector<Member> pool;
    pool.reserve(population.size() + children.size());
    for (Member& m : population) pool.push_back(std::move(m));
    for (Member& c : children) pool.push_back(std::move(c));
    std::stable_sort(pool.begin(), pool.end(),
                     [](const Member& a, const Member& b) { return a.score > b.score; });
    population.clear();
    std::unordered_set<std::uint64_t> kept;
    for (Member& m : pool) {
      if (static_cast<int>(population.size()) >= cfg.population_size) break;
      if (kept.insert(m.hash).second) population.push_back(std::move(m));
    }

    if (mean > best_mean + cfg.min_improvement) {
      best_mean = mean;
      stall = 0;
    } else {
      ++stall;
    }
    stats.iterations = it;
    if (it >= cfg.max_iterations || (it >= cfg.min_iterations && stall >= cfg.patience)) break;
  }

  // Random order, capped.
  for (std::size_t i = accepted.size(); i > 1; --i) std::swap(accepted[i - 1], accepted[rng.below(i)]);
  if (accepted.size() > static_cast<std::size_t>(cfg.max_candidates_per_cycle))
    accepted.resize(static_cast<std::size_t>(cfg.max_candidates_per_cycle));

  stats.buckets = static_cast<int>(buckets.size());
  stats.accepted = static_cast<int>(accepted.size());
  stats.best_batch_mean = best_mean;
  if (stats_out) *stats_out = stats;
  if (accepted.size() < k + 1)
    throw GenerationStarved("only " + std::to_string(accepted.size()) + " candidates survived, need " +
                                std::to_string(k + 1),
                            accepted.size());

  CandidateSet out;
  out.molecules.reserve(accepted.size());
  for (Member& m : accepted) {
    out.molecules.push_back(std::move(m.mol));
    out.hashes.push_back(m.hash);
    out.fingerprints.push_back(std::move(m.fp));
    out.scores.push_back(m.score);
  }
  return out;
}

}  // namespace dmta
