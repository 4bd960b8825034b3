#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dmta/fingerprint.hpp"
#include "dmta/molgraph.hpp"
#include "dmta/rng.hpp"

namespace dmta {

// Atom-count ratio window for the simulated target, plus assay noise.
struct GroundTruthConfig {
  double co_lo = 5.5;   // n_c / n_o
  double co_hi = 5.67;
  double cn_lo = 7.0;   // n_c / n_n
  double cn_hi = 7.39;
  double on_lo = 1.18;  // n_o / n_n
  double on_hi = 1.34;
  double flip_prob = 0.01;

  // Messages for every violated invariant; empty when valid.
  std::vector<std::string> check() const;
};

enum class Activity : std::uint8_t { kInactive = 0, kActive = 1 };

constexpr int reward_of(Activity a) noexcept { return static_cast<int>(a); }
constexpr Activity flipped(Activity a) noexcept {
  return a == Activity::kActive ? Activity::kInactive : Activity::kActive;
}

// Active iff at least two of (n_c, n_n, n_o) are non-zero and every ratio
// between non-zero counts lies inside its closed window. Bounds are
// compared exactly in integer arithmetic at 1e-4 resolution.
Activity true_activity(const AtomCounts& counts, const GroundTruthConfig& cfg);

// Flips `label` with probability cfg.flip_prob. Consumes one draw.
Activity noisy_test(Activity label, Rng& rng, const GroundTruthConfig& cfg);

// E[R(x)] for a molecule whose true label is `label`.
double expected_reward(Activity label, const GroundTruthConfig& cfg) noexcept;

// Make step: every molecule can be synthesised at unit cost.
class MakeStation {
 public:
  bool make(const Molecule& mol);
  std::uint64_t cost() const noexcept { return cost_; }

 private:
  std::uint64_t cost_ = 0;
};

struct LabeledMolecule {
  Molecule mol;
  std::uint64_t hash = 0;
  Fingerprint fp;
  Activity truth = Activity::kInactive;
  Activity observed = Activity::kInactive;
};

using MoleculeSampler = std::function<Molecule(Rng&)>;

inline constexpr std::uint64_t kBootstrapMaxAttempts = 1'000'000;

// Draws molecules until exactly `n_active` true actives and `n_inactive`
// true inactives with distinct canonical hashes are collected. Observed
// labels come from noisy_test. Throws BootstrapExhausted when
// `max_attempts` samples do not fill the quotas.
std::vector<LabeledMolecule> bootstrap_initial(const MoleculeSampler& sampler,
                                               const GroundTruthConfig& cfg, Rng& rng,
                                               int n_active = 20, int n_inactive = 100,
                                               std::uint64_t max_attempts = kBootstrapMaxAttempts);

}  // namespace dmta
