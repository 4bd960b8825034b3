#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "dmta/bandit.hpp"

namespace dmta {

struct CandidateView {
  std::span<const Fingerprint> fps;
  std::span<const double> scores;
  std::size_t size() const noexcept { return fps.size(); }
};

// Strategy internals worth logging per round.
struct StrategyDiagnostics {
  std::optional<std::size_t> active_balls;
  std::optional<std::int64_t> horizon;
  std::optional<double> epsilon;
};

class SelectionStrategy {
 public:
  virtual ~SelectionStrategy() = default;

  virtual std::string name() const = 0;
  virtual void initialize(std::span<const Observation> /*history*/) {}
  virtual SuperArm select(const CandidateView& arms, int round, std::size_t k, Rng& rng) = 0;
  virtual void update(const CandidateView& /*arms*/, const SuperArm& /*selected*/,
                      std::span<const int> /*rewards*/, int /*round*/) {}
  virtual StrategyDiagnostics diagnostics() const { return {}; }
};

class ZoomingStrategy final : public SelectionStrategy {
 public:
  ZoomingStrategy(ZoomingMode mode, BackfillMode backfill);

  std::string name() const override;
  void initialize(std::span<const Observation> history) override;
  SuperArm select(const CandidateView& arms, int round, std::size_t k, Rng& rng) override;
  void update(const CandidateView& arms, const SuperArm& selected, std::span<const int> rewards,
              int round) override;
  StrategyDiagnostics diagnostics() const override;

  const ZoomingBandit& bandit() const noexcept { return bandit_; }
  const std::optional<ZoomingDecision>& last_decision() const noexcept { return last_; }

 private:
  ZoomingBandit bandit_;
  std::optional<ZoomingDecision> last_;
};

class GreedyStrategy final : public SelectionStrategy {
 public:
  std::string name() const override { return "greedy"; }
  SuperArm select(const CandidateView& arms, int round, std::size_t k, Rng& rng) override;
};

class EpsilonGreedyStrategy final : public SelectionStrategy {
 public:
  explicit EpsilonGreedyStrategy(EpsilonConfig cfg) : cfg_(cfg) {}
  std::string name() const override;
  SuperArm select(const CandidateView& arms, int round, std::size_t k, Rng& rng) override;
  StrategyDiagnostics diagnostics() const override;

 private:
  EpsilonConfig cfg_;
  std::optional<double> last_eps_;
};

class RandomStrategy final : public SelectionStrategy {
 public:
  std::string name() const override { return "random"; }
  SuperArm select(const CandidateView& arms, int round, std::size_t k, Rng& rng) override;
};

struct StrategyOptions {
  EpsilonConfig epsilon;
  BackfillMode backfill = BackfillMode::kDomain;
};

// zooming-weighted | zooming-unweighted | greedy | random | eps-greedy,
// where "eps-greedy@0.4" overrides eps_max. Throws ValidationError for
// anything else.
std::unique_ptr<SelectionStrategy> make_strategy(std::string_view name, const StrategyOptions& opts);
bool is_known_strategy(std::string_view name);

}  // namespace dmta
