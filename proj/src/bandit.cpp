#include "dmta/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dmta/errors.hpp"

namespace dmta {

namespace {

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

void require_more_arms(std::size_t m, std::size_t k) {
  if (m <= k)
    throw InsufficientArms("need more than " + std::to_string(k) + " arms, got " + std::to_string(m));
}

bool contains(const Ball& ball, const Fingerprint& fp) {
  return jaccard_distance(ball.center, fp) <= ball.radius;
}

// radius(B) + min_{B'} (pre[B'] + D(B, B'))
double index_from_preindices(std::size_t ball, std::span<const Ball> active,
                             std::span<const double> pre) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < active.size(); ++j) {
    const double d = j == ball ? 0.0 : jaccard_distance(active[ball].center, active[j].center);
    best = std::min(best, pre[j] + d);
  }
  return active[ball].radius + best;
}

}  // namespace

std::int64_t phase_horizon(std::int64_t t) {
  std::int64_t h = 2;
  while (h < t) h *= 2;
  return h;
}

double conf_radius(const Ball& ball, std::int64_t horizon) {
  return 4.0 * std::sqrt(std::log(static_cast<double>(horizon)) / (1.0 + static_cast<double>(ball.n)));
}

double preindex(const Ball& ball, std::int64_t horizon) {
  return ball.mean_reward() + ball.radius + conf_radius(ball, horizon);
}

double ball_index(std::size_t ball, std::span<const Ball> active, std::int64_t horizon) {
  std::vector<double> pre;
  pre.reserve(active.size());
  for (const Ball& b : active) pre.push_back(preindex(b, horizon));
  return index_from_preindices(ball, active, pre);
}

double arm_index(double score, double ball_index, ZoomingMode mode) noexcept {
  return mode == ZoomingMode::kWeighted ? score * ball_index : ball_index;
}

std::vector<std::size_t> assign_domains(std::span<const Ball> active,
                                        std::span<const Fingerprint> fps) {
  std::vector<std::size_t> out(fps.size(), kNone);
  for (std::size_t m = 0; m < fps.size(); ++m) {
    std::size_t best = kNone;
    for (std::size_t i = 0; i < active.size(); ++i) {
      if (best != kNone && active[i].radius >= active[best].radius) continue;
      if (contains(active[i], fps[m])) best = i;
    }
    out[m] = best;
  }
  return out;
}

SuperArm select_super_arm(std::span<const double> values, std::size_t k) {
  require_more_arms(values.size(), k);
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return values[a] > values[b] || (values[a] == values[b] && a < b);
                    });
  SuperArm out(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(out.begin(), out.end());
  return out;
}

Counts backfill_counts(const Fingerprint& center, double radius, std::span<const Observation> log,
                       std::span<const Ball> active, BackfillMode mode) {
  Counts counts;
  for (const Observation& obs : log) {
    if (jaccard_distance(center, obs.fp) > radius) continue;
    if (mode == BackfillMode::kDomain) {
      bool shadowed = std::any_of(active.begin(), active.end(), [&](const Ball& b) {
        return b.radius < radius && contains(b, obs.fp);
      });
      if (shadowed) continue;
    }
    ++counts.n;
    counts.rew += obs.reward;
  }
  return counts;
}

ZoomingBandit::ZoomingBandit(ZoomingMode mode, BackfillMode backfill)
    : mode_(mode), backfill_(backfill) {}

void ZoomingBandit::initialize(std::span<const Observation> history) {
  balls_.clear();
  refinements_.clear();
  log_ = ObservationLog{};

  Ball root;
  root.radius = 1.0;
  std::size_t best = kNone;
  for (std::size_t i = 0; i < history.size(); ++i)
    if (best == kNone || history[i].reward > history[best].reward) best = i;
  if (best != kNone) root.center = history[best].fp;
  for (const Observation& obs : history) {
    ++root.n;
    root.rew += obs.reward;
    log_.append(obs);
  }
  balls_.push_back(std::move(root));
}

ZoomingDecision ZoomingBandit::select(std::span<const Fingerprint> fps,
                                      std::span<const double> scores, int round,
                                      std::size_t k) const {
  ZoomingDecision d;
  d.round = round;
  d.horizon = phase_horizon(round);
  d.assignment = assign_domains(balls_, fps);

  std::vector<double> pre;
  pre.reserve(balls_.size());
  for (const Ball& b : balls_) pre.push_back(preindex(b, d.horizon));

  d.ball_indices.assign(balls_.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t b : d.assignment)
    if (std::isnan(d.ball_indices[b])) d.ball_indices[b] = index_from_preindices(b, balls_, pre);

  d.arm_indices.resize(fps.size());
  for (std::size_t m = 0; m < fps.size(); ++m)
    d.arm_indices[m] = arm_index(scores[m], d.ball_indices[d.assignment[m]], mode_);
  d.selected = select_super_arm(d.arm_indices, k);
  return d;
}

void ZoomingBandit::update(const ZoomingDecision& decision, std::span<const Fingerprint> fps,
                           std::span<const int> rewards) {
  std::vector<std::size_t> played;
  for (std::size_t i = 0; i < decision.selected.size(); ++i) {
    const std::size_t m = decision.selected[i];
    const std::size_t b = decision.assignment[m];
    ++balls_[b].n;
    balls_[b].rew += rewards[i];
    log_.append({decision.round, fps[m], rewards[i]});
    if (std::find(played.begin(), played.end(), b) == played.end()) played.push_back(b);
  }
  for (std::size_t b : played) maybe_refine(b, decision, fps, rewards);
}

std::optional<std::size_t> ZoomingBandit::maybe_refine(std::size_t ball,
                                                       const ZoomingDecision& decision,
                                                       std::span<const Fingerprint> fps,
                                                       std::span<const int> rewards) {
  if (conf_radius(balls_[ball], decision.horizon) > balls_[ball].radius) return std::nullopt;

  // Largest-reward arm played in this ball; selected is ascending so the
  // first maximum is the lowest position.
  std::size_t center_arm = kNone;
  int center_reward = -1;
  for (std::size_t i = 0; i < decision.selected.size(); ++i) {
    const std::size_t m = decision.selected[i];
    if (decision.assignment[m] != ball) continue;
    if (rewards[i] > center_reward) {
      center_reward = rewards[i];
      center_arm = m;
    }
  }

  Ball child;
  child.center = fps[center_arm];
  child.radius = balls_[ball].radius / 2.0;
  child.created_at = decision.round;
  child.parent = static_cast<int>(ball);
  const Counts counts = backfill_counts(child.center, child.radius, log_.entries(), balls_, backfill_);
  child.n = counts.n;
  child.rew = counts.rew;

  refinements_.push_back({decision.round, ball, balls_.size(), log_.size(), balls_.size()});
  balls_.push_back(std::move(child));
  return balls_.size() - 1;
}

std::vector<std::string> EpsilonConfig::check() const {
  std::vector<std::string> errors;
  if (!(eps_min >= 0.0 && eps_min <= eps_max && eps_max <= 1.0))
    errors.emplace_back("need 0 <= eps_min <= eps_max <= 1");
  if (!(c_d > 0.0)) errors.emplace_back("c_d must be positive");
  return errors;
}

double epsilon_t(int t, const EpsilonConfig& cfg) {
  const double sign = cfg.literal_sign ? 1.0 : -1.0;
  const double eps = cfg.eps_min + (cfg.eps_max - cfg.eps_min) * std::exp(sign * cfg.c_d * (t - 1));
  return std::clamp(eps, 0.0, 1.0);
}

SuperArm greedy_select(std::span<const double> scores, std::size_t k) {
  return select_super_arm(scores, k);
}

SuperArm eps_greedy_select(std::span<const double> scores, std::size_t k, double eps, Rng& rng) {
  const std::size_t m = scores.size();
  require_more_arms(m, k);
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::vector<char> picked(m, 0);
  std::size_t next_best = 0;
  SuperArm out;
  out.reserve(k);
  for (std::size_t pick = 0; pick < k; ++pick) {
    std::size_t choice;
    if (rng.uniform() < eps) {
      std::size_t r = rng.below(m - pick);
      choice = 0;
      for (;; ++choice) {
        if (picked[choice]) continue;
        if (r == 0) break;
        --r;
      }
    } else {
      while (picked[order[next_best]]) ++next_best;
      choice = order[next_best];
    }
    picked[choice] = 1;
    out.push_back(choice);
  }
  std::sort(out.begin(), out.end());
  return out;
}

SuperArm eps_greedy_select(std::span<const double> scores, std::size_t k, int t,
                           const EpsilonConfig& cfg, Rng& rng) {
  return eps_greedy_select(scores, k, epsilon_t(t, cfg), rng);
}

SuperArm random_select(std::size_t m, std::size_t k, Rng& rng) {
  require_more_arms(m, k);
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = 0; i < k; ++i) std::swap(perm[i], perm[i + rng.below(m - i)]);
  SuperArm out(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace dmta
