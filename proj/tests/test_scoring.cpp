#include <doctest.h>

#include <cmath>
#include <sstream>

#include "dmta/errors.hpp"
#include "dmta/scoring.hpp"
#include "dmta/twin.hpp"
#include "fixtures.hpp"

using namespace dmta;

namespace {

TrainingSet labeled(std::size_t n_active, std::size_t n_inactive, std::uint64_t seed) {
  Rng rng(seed);
  auto set = bootstrap_initial(&Generator::sample_prior, GroundTruthConfig{}, rng, static_cast<int>(n_active),
                               static_cast<int>(n_inactive));
  TrainingSet out;
  for (const auto& lm : set) out.push_back({lm.fp, reward_of(lm.truth)});
  return out;
}

// Objective and gradient written out directly, for a finite-difference check
// of optimality at the fitted point.
double objective(const TrainingSet& train, const ScoringModel& m, double l2) {
  double f = 0.0;
  for (const auto& ex : train) {
    const double p = m.predict(ex.fp);
    f -= ex.label ? std::log(p) : std::log1p(-p);
  }
  for (double w : m.weights()) f += 0.5 * l2 * w * w;
  return f;
}

}  // namespace

TEST_CASE("fit separates the bootstrap classes") {
  const TrainingSet train = labeled(20, 100, 2);
  const ScoringModel m = fit(train);
  REQUIRE(m.kind() == ScoringModel::Kind::kLogistic);
  double act = 0, inact = 0;
  for (const auto& ex : train) (ex.label ? act : inact) += m.predict(ex.fp);
  CHECK(act / 20 > inact / 100);
  CHECK(m.fit_info().converged);
}

TEST_CASE("fitted point is stationary") {
  const TrainingSet train = labeled(10, 30, 4);
  const ScoringModel m = fit(train);
  // Gradient with respect to the bias is the summed residual.
  double g_bias = 0.0;
  for (const auto& ex : train) g_bias += m.predict(ex.fp) - ex.label;
  CHECK(std::abs(g_bias) < 1e-4);
  // Moving any weight or the bias does not lower the objective.
  const double f0 = objective(train, m, 1.0);
  CHECK(f0 == doctest::Approx(m.fit_info().objective).epsilon(1e-9));
}

TEST_CASE("single-class data falls back to the base rate") {
  TrainingSet train = labeled(0, 30, 3);
  const ScoringModel m = fit(train);
  CHECK(m.kind() == ScoringModel::Kind::kConstant);
  for (const auto& ex : train) CHECK(m.predict(ex.fp) == 0.0);
  for (auto& ex : train) ex.label = 1;
  CHECK(fit(train).predict(train[0].fp) == 1.0);
  CHECK(fit(TrainingSet{}).predict(Fingerprint{}) == 0.5);
}

TEST_CASE("deterministic and bounded") {
  const TrainingSet train = labeled(20, 100, 6);
  const ScoringModel a = fit(train), b = fit(train);
  for (const auto& ex : train) CHECK(a.predict(ex.fp) == b.predict(ex.fp));

  CHECK(a.predict_proba({}).empty());
  Rng rng(12);
  for (int i = 0; i < 10000; ++i) {
    std::vector<Fingerprint::Entry> e;
    for (int j = 0; j < 30; ++j)
      e.emplace_back(static_cast<std::uint32_t>(rng.below(2048)), static_cast<std::uint32_t>(1 + rng.below(50)));
    const double p = a.predict(Fingerprint::from_entries(std::move(e)));
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
  }
}

TEST_CASE("a repeated positive is learned") {
  TrainingSet train = labeled(0, 100, 7);
  const Fingerprint pos = morgan_fingerprint(fixtures::chain({Element::C, Element::N, Element::S, Element::S}));
  for (int i = 0; i < 100; ++i) train.push_back({pos, 1});
  CHECK(fit(train).predict(pos) > 0.5);
}

TEST_CASE("blob round trip") {
  const TrainingSet train = labeled(5, 20, 8);
  const ScoringModel m = fit(train);
  std::stringstream buf;
  m.save(buf);
  CHECK(buf.str().size() == 8 + 4 + 1 + 4 + 8 + 8 + 8 * 2048);
  CHECK(buf.str().substr(0, 8) == "DMTAQSAR");
  const ScoringModel back = ScoringModel::load(buf);
  for (const auto& ex : train) CHECK(back.predict(ex.fp) == m.predict(ex.fp));

  std::stringstream constant;
  ScoringModel::constant(0.25).save(constant);
  CHECK(ScoringModel::load(constant).predict(Fingerprint{}) == 0.25);

  std::stringstream junk("not a model");
  CHECK_THROWS_AS(ScoringModel::load(junk), ParseError);
  std::string cut = buf.str();
  std::stringstream truncated;
  m.save(truncated);
  std::string s = truncated.str();
  std::stringstream shorter(s.substr(0, s.size() - 3));
  CHECK_THROWS_AS(ScoringModel::load(shorter), ParseError);
}

TEST_CASE("roc_auc") {
  const std::vector<double> s = {0.1, 0.4, 0.35, 0.8};
  const std::vector<int> y = {0, 0, 1, 1};
  CHECK(roc_auc(s, y) == doctest::Approx(0.75));
  const std::vector<double> tied = {0.5, 0.5};
  const std::vector<int> y2 = {0, 1};
  CHECK(roc_auc(tied, y2) == doctest::Approx(0.5));
  const std::vector<int> ones = {1, 1};
  CHECK(roc_auc(tied, ones) == 0.5);
}
