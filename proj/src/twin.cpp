#include "dmta/twin.hpp"

#include <cmath>
#include <unordered_set>

#include "dmta/errors.hpp"

namespace dmta {

namespace {

constexpr std::int64_t kRatioScale = 10'000;

std::int64_t scaled(double bound) { return std::llround(bound * kRatioScale); }

// lo <= num / den <= hi, with den > 0.
bool ratio_in(int num, int den, double lo, double hi) {
  const std::int64_t lhs = static_cast<std::int64_t>(num) * kRatioScale;
  return lhs >= scaled(lo) * den && lhs <= scaled(hi) * den;
}

}  // namespace

std::vector<std::string> GroundTruthConfig::check() const {
  std::vector<std::string> errors;
  auto pair = [&](const char* name, double lo, double hi) {
    if (!(lo >= 0.0)) errors.push_back(std::string(name) + "_lo must be >= 0");
    if (!(lo <= hi)) errors.push_back(std::string(name) + "_lo must be <= " + name + "_hi");
  };
  pair("co", co_lo, co_hi);
  pair("cn", cn_lo, cn_hi);
  pair("on", on_lo, on_hi);
  if (!(flip_prob >= 0.0 && flip_prob <= 1.0)) errors.emplace_back("flip_prob must be in [0, 1]");
  return errors;
}

Activity true_activity(const AtomCounts& c, const GroundTruthConfig& cfg) {
  const int nonzero = (c.n_c > 0) + (c.n_n > 0) + (c.n_o > 0);
  if (nonzero < 2) return Activity::kInactive;
  if (c.n_c > 0 && c.n_o > 0 && !ratio_in(c.n_c, c.n_o, cfg.co_lo, cfg.co_hi))
    return Activity::kInactive;
  if (c.n_c > 0 && c.n_n > 0 && !ratio_in(c.n_c, c.n_n, cfg.cn_lo, cfg.cn_hi))
    return Activity::kInactive;
  if (c.n_o > 0 && c.n_n > 0 && !ratio_in(c.n_o, c.n_n, cfg.on_lo, cfg.on_hi))
    return Activity::kInactive;
  return Activity::kActive;
}

Activity noisy_test(Activity label, Rng& rng, const GroundTruthConfig& cfg) {
  return rng.uniform() < cfg.flip_prob ? flipped(label) : label;
}

double expected_reward(Activity label, const GroundTruthConfig& cfg) noexcept {
  return reward_of(label) * (1.0 - 2.0 * cfg.flip_prob) + cfg.flip_prob;
}

bool MakeStation::make(const Molecule&) {
  ++cost_;
  return true;
}

std::vector<LabeledMolecule> bootstrap_initial(const MoleculeSampler& sampler,
                                               const GroundTruthConfig& cfg, Rng& rng,
                                               int n_active, int n_inactive,
                                               std::uint64_t max_attempts) {
  std::vector<LabeledMolecule> out;
  out.reserve(static_cast<std::size_t>(n_active + n_inactive));
  std::unordered_set<std::uint64_t> seen;
  int actives = 0, inactives = 0;
  for (std::uint64_t attempt = 0; actives < n_active || inactives < n_inactive; ++attempt) {
    if (attempt >= max_attempts)
      throw BootstrapExhausted("bootstrap collected " + std::to_string(actives) + "/" +
                               std::to_string(n_active) + " actives and " +
                               std::to_string(inactives) + "/" + std::to_string(n_inactive) +
                               " inactives in " + std::to_string(max_attempts) + " attempts");
    Molecule mol = sampler(rng);
    Activity truth = true_activity(count_atoms(mol), cfg);
    int& have = truth == Activity::kActive ? actives : inactives;
    const int quota = truth == Activity::kActive ? n_active : n_inactive;
    if (have >= quota) continue;
    std::uint64_t hash = canonical_hash(mol);
    if (!seen.insert(hash).second) continue;
    ++have;
    LabeledMolecule lm;
    lm.fp = morgan_fingerprint(mol);
    lm.hash = hash;
    lm.truth = truth;
    lm.observed = noisy_test(truth, rng, cfg);
    lm.mol = std::move(mol);
    out.push_back(std::move(lm));
  }
  return out;
}

}  // namespace dmta
