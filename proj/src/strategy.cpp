#include "dmta/strategy.hpp"

#include <charconv>
#include <cstdio>

#include "dmta/errors.hpp"

namespace dmta {

ZoomingStrategy::ZoomingStrategy(ZoomingMode mode, BackfillMode backfill) : bandit_(mode, backfill) {}

std::string ZoomingStrategy::name() const {
  return bandit_.mode() == ZoomingMode::kWeighted ? "zooming-weighted" : "zooming-unweighted";
}

void ZoomingStrategy::initialize(std::span<const Observation> history) {
  bandit_.initialize(history);
  last_.reset();
}

SuperArm ZoomingStrategy::select(const CandidateView& arms, int round, std::size_t k, Rng&) {
  last_ = bandit_.select(arms.fps, arms.scores, round, k);
  return last_->selected;
}

void ZoomingStrategy::update(const CandidateView& arms, const SuperArm& selected,
                             std::span<const int> rewards, int round) {
  if (!last_ || last_->round != round || last_->selected != selected)
    throw Error("zooming update does not match the last selection");
  bandit_.update(*last_, arms.fps, rewards);
}

StrategyDiagnostics ZoomingStrategy::diagnostics() const {
  StrategyDiagnostics d;
  d.active_balls = bandit_.balls().size();
  if (last_) d.horizon = last_->horizon;
  return d;
}

SuperArm GreedyStrategy::select(const CandidateView& arms, int, std::size_t k, Rng&) {
  return greedy_select(arms.scores, k);
}

std::string EpsilonGreedyStrategy::name() const {
  char buf[48];
  std::snprintf(buf, sizeof buf, "eps-greedy@%g", cfg_.eps_max);
  return buf;
}

SuperArm EpsilonGreedyStrategy::select(const CandidateView& arms, int round, std::size_t k, Rng& rng) {
  last_eps_ = epsilon_t(round, cfg_);
  return eps_greedy_select(arms.scores, k, *last_eps_, rng);
}

StrategyDiagnostics EpsilonGreedyStrategy::diagnostics() const {
  StrategyDiagnostics d;
  d.epsilon = last_eps_;
  return d;
}

SuperArm RandomStrategy::select(const CandidateView& arms, int, std::size_t k, Rng& rng) {
  return random_select(arms.size(), k, rng);
}

namespace {

std::optional<double> parse_eps_suffix(std::string_view name) {
  constexpr std::string_view prefix = "eps-greedy@";
  if (!name.starts_with(prefix)) return std::nullopt;
  std::string tail(name.substr(prefix.size()));
  char* end = nullptr;
  double v = std::strtod(tail.c_str(), &end);
  if (tail.empty() || end != tail.c_str() + tail.size()) return std::nullopt;
  return v;
}

}  // namespace

bool is_known_strategy(std::string_view name) {
  return name == "zooming-weighted" || name == "zooming-unweighted" || name == "greedy" ||
         name == "random" || name == "eps-greedy" || parse_eps_suffix(name).has_value();
}

std::unique_ptr<SelectionStrategy> make_strategy(std::string_view name, const StrategyOptions& opts) {
  if (name == "zooming-weighted")
    return std::make_unique<ZoomingStrategy>(ZoomingMode::kWeighted, opts.backfill);
  if (name == "zooming-unweighted")
    return std::make_unique<ZoomingStrategy>(ZoomingMode::kUnweighted, opts.backfill);
  if (name == "greedy") return std::make_unique<GreedyStrategy>();
  if (name == "random") return std::make_unique<RandomStrategy>();
  if (name == "eps-greedy") return std::make_unique<EpsilonGreedyStrategy>(opts.epsilon);
  if (auto eps_max = parse_eps_suffix(name)) {
    EpsilonConfig cfg = opts.epsilon;
    cfg.eps_max = *eps_max;
    cfg.eps_min = std::min(cfg.eps_min, cfg.eps_max);
    if (auto errors = cfg.check(); !errors.empty())
      throw ValidationError("strategy '" + std::string(name) + "': " + errors.front());
    return std::make_unique<EpsilonGreedyStrategy>(cfg);
  }
  throw ValidationError("unknown strategy '" + std::string(name) + "'");
}

}  // namespace dmta
