#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dmta/fingerprint.hpp"
#include "dmta/rng.hpp"

namespace dmta {

// A region of the fingerprint space carrying play statistics.
struct Ball {
  Fingerprint center;
  double radius = 1.0;
  std::int64_t n = 0;    // plays
  std::int64_t rew = 0;  // summed 0/1 rewards
  int created_at = 0;    // round; 0 for the root
  int parent = -1;       // index of the ball that spawned it

  double mean_reward() const noexcept {
    return static_cast<double>(rew) / static_cast<double>(std::max<std::int64_t>(1, n));
  }
};

struct Observation {
  int round = 0;  // 0 for the initial history
  Fingerprint fp;
  int reward = 0;
};

// Append-only record of every play.
class ObservationLog {
 public:
  void append(Observation obs) { entries_.push_back(std::move(obs)); }
  std::span<const Observation> entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::vector<Observation> entries_;
};

// Positions into the current candidate set, ascending, all distinct.
using SuperArm = std::vector<std::size_t>;

enum class ZoomingMode { kWeighted, kUnweighted };
enum class BackfillMode { kDomain, kBall };

// Doubling-trick horizon of the phase containing round t: the smallest power
// of two >= t, floored at 2.
std::int64_t phase_horizon(std::int64_t t);

// 4 * sqrt(ln(horizon) / (1 + n))
double conf_radius(const Ball& ball, std::int64_t horizon);

// mean reward + radius + confidence radius
double preindex(const Ball& ball, std::int64_t horizon);

// radius(B) + min over all active B' of (preindex(B') + D(center B, center B')).
double ball_index(std::size_t ball, std::span<const Ball> active, std::int64_t horizon);

// Weighted: f * g. Unweighted: g.
double arm_index(double score, double ball_index, ZoomingMode mode) noexcept;

// For each fingerprint, the active ball whose domain holds it: the
// smallest-radius ball containing it (distance <= radius), earliest created
// among equal radii.
std::vector<std::size_t> assign_domains(std::span<const Ball> active,
                                        std::span<const Fingerprint> fps);

// Top-k positions by value, ties to the lower position. Equivalent to the
// max-sum k-subset. Throws InsufficientArms unless values.size() > k.
SuperArm select_super_arm(std::span<const double> values, std::size_t k);

// (n, rew) over log entries within `radius` of `center`. In domain mode,
// entries inside any active ball of strictly smaller radius are excluded.
struct Counts {
  std::int64_t n = 0;
  std::int64_t rew = 0;
  friend bool operator==(const Counts&, const Counts&) = default;
};
Counts backfill_counts(const Fingerprint& center, double radius, std::span<const Observation> log,
                       std::span<const Ball> active, BackfillMode mode);

struct RefinementEvent {
  int round = 0;
  std::size_t parent = 0;
  std::size_t child = 0;
  std::size_t log_size = 0;       // log entries visible to the backfill
  std::size_t active_before = 0;  // active balls when the child was created
};

// Everything decided in one round, kept so update() uses the same domains.
struct ZoomingDecision {
  int round = 0;
  std::int64_t horizon = 2;
  std::vector<std::size_t> assignment;   // ball per arm
  std::vector<double> ball_indices;      // per active ball; NaN if not relevant
  std::vector<double> arm_indices;
  SuperArm selected;
};

// Zooming with multiple plays and volatile arms.
class ZoomingBandit {
 public:
  explicit ZoomingBandit(ZoomingMode mode, BackfillMode backfill = BackfillMode::kDomain);

  // Creates the root ball of radius 1 centred on the highest-reward entry
  // of the history (earliest among ties) and replays the history into it.
  void initialize(std::span<const Observation> history);

  ZoomingDecision select(std::span<const Fingerprint> fps, std::span<const double> scores, int round,
                         std::size_t k) const;

  // Counter updates, log append and refinement for the played arms.
  void update(const ZoomingDecision& decision, std::span<const Fingerprint> fps,
              std::span<const int> rewards);

  ZoomingMode mode() const noexcept { return mode_; }
  BackfillMode backfill_mode() const noexcept { return backfill_; }
  std::span<const Ball> balls() const noexcept { return balls_; }
  const ObservationLog& log() const noexcept { return log_; }
  std::span<const RefinementEvent> refinements() const noexcept { return refinements_; }

 private:
  // Spawns a half-radius child of `ball` if conf <= radius.
  std::optional<std::size_t> maybe_refine(std::size_t ball, const ZoomingDecision& decision,
                                          std::span<const Fingerprint> fps,
                                          std::span<const int> rewards);

  ZoomingMode mode_;
  BackfillMode backfill_;
  std::vector<Ball> balls_;
  ObservationLog log_;
  std::vector<RefinementEvent> refinements_;
};

struct EpsilonConfig {
  double eps_min = 0.0;
  double eps_max = 0.6;
  double c_d = 0.015;
  // Growing form exp(+c_d (t-1)) instead of the decaying one; the result
  // is clamped to [0, 1].
  bool literal_sign = false;

  std::vector<std::string> check() const;
};

// eps_min + (eps_max - eps_min) * exp(-c_d (t - 1))
double epsilon_t(int t, const EpsilonConfig& cfg);

SuperArm greedy_select(std::span<const double> scores, std::size_t k);

// k sequential picks; each is uniform over unpicked arms with probability
// eps, else the best-scoring unpicked arm.
SuperArm eps_greedy_select(std::span<const double> scores, std::size_t k, double eps, Rng& rng);
SuperArm eps_greedy_select(std::span<const double> scores, std::size_t k, int t,
                           const EpsilonConfig& cfg, Rng& rng);

// Uniform k-subset without replacement.
SuperArm random_select(std::size_t m, std::size_t k, Rng& rng);

}  // namespace dmta
