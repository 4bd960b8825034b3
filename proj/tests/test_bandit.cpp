#include <doctest.h>

#include <cmath>
#include <bit>
#include <map>

#include "dmta/bandit.hpp"
#include "dmta/errors.hpp"
#include "fixtures.hpp"

using namespace dmta;

namespace {

Fingerprint fp_of(std::vector<Fingerprint::Entry> e) { return Fingerprint::from_entries(std::move(e)); }

Ball ball_at(Fingerprint c, double radius, std::int64_t n, std::int64_t rew, int created = 0) {
  Ball b;
  b.center = std::move(c);
  b.radius = radius;
  b.n = n;
  b.rew = rew;
  b.created_at = created;
  return b;
}

// Exhaustive max-sum k-subset; among ties the lexicographically smallest.
SuperArm brute_force(const std::vector<double>& v, std::size_t k) {
  SuperArm best;
  double best_sum = -1e300;
  const std::size_t m = v.size();
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) != k) continue;
    SuperArm s;
    double sum = 0;
    for (std::size_t i = 0; i < m; ++i)
      if (mask & (1u << i)) {
        s.push_back(i);
        sum += v[i];
      }
    if (sum > best_sum || (sum == best_sum && s < best)) {
      best_sum = sum;
      best = s;
    }
  }
  return best;
}

Fingerprint random_fp(Rng& rng, std::uint32_t dims) {
  std::vector<Fingerprint::Entry> e;
  for (int j = 0; j < 6; ++j)
    e.emplace_back(static_cast<std::uint32_t>(rng.below(dims)), static_cast<std::uint32_t>(1 + rng.below(3)));
  return fp_of(std::move(e));
}

}  // namespace

TEST_CASE("phase horizon") {
  CHECK(phase_horizon(1) == 2);
  CHECK(phase_horizon(2) == 2);
  CHECK(phase_horizon(3) == 4);
  CHECK(phase_horizon(5) == 8);
  CHECK(phase_horizon(8) == 8);
  CHECK(phase_horizon(9) == 16);
  CHECK(phase_horizon(1000) == 1024);
}

TEST_CASE("index formulas") {
  const Ball fresh = ball_at({}, 1.0, 0, 0);
  CHECK(conf_radius(fresh, 2) == doctest::Approx(3.3302184446307908).epsilon(1e-12));
  CHECK(conf_radius(fresh, 2) == doctest::Approx(4.0 * std::sqrt(std::log(2.0))).epsilon(1e-15));
  CHECK(preindex(fresh, 2) == doctest::Approx(4.3302184446307908).epsilon(1e-12));

  const Ball played = ball_at({}, 0.25, 4, 3);
  CHECK(conf_radius(played, 16) == doctest::Approx(4.0 * std::sqrt(std::log(16.0) / 5.0)).epsilon(1e-15));
  CHECK(preindex(played, 16) == doctest::Approx(3.978637928847227).epsilon(1e-12));

  CHECK(arm_index(0.5, 4.2288, ZoomingMode::kWeighted) == doctest::Approx(2.1144).epsilon(1e-12));
  CHECK(arm_index(0.5, 4.2288, ZoomingMode::kUnweighted) == 4.2288);
}

TEST_CASE("refinement threshold at radius 1, horizon 256") {
  Ball b = ball_at({}, 1.0, 87, 0);
  CHECK(conf_radius(b, 256) > 1.0);
  b.n = 88;
  CHECK(conf_radius(b, 256) <= 1.0);
}

TEST_CASE("ball index minimizes over active balls") {
  const Fingerprint a = fp_of({{1, 1}}), b = fp_of({{1, 1}, {2, 1}});
  std::vector<Ball> balls = {ball_at(a, 1.0, 100, 10), ball_at(b, 0.5, 0, 0)};
  const std::int64_t h = 64;
  const double d = jaccard_distance(a, b);
  CHECK(d == doctest::Approx(0.5));
  const double g0 = 1.0 + std::min(preindex(balls[0], h), preindex(balls[1], h) + d);
  const double g1 = 0.5 + std::min(preindex(balls[0], h) + d, preindex(balls[1], h));
  CHECK(ball_index(0, balls, h) == doctest::Approx(g0).epsilon(1e-15));
  CHECK(ball_index(1, balls, h) == doctest::Approx(g1).epsilon(1e-15));
}

TEST_CASE("select_super_arm") {
  const std::vector<double> v = {0.2, 0.9, 0.4, 0.9};
  CHECK(select_super_arm(v, 2) == SuperArm{1, 3});
  CHECK(select_super_arm(v, 1) == SuperArm{1});
  CHECK_THROWS_AS(select_super_arm(v, 4), InsufficientArms);
  CHECK_THROWS_AS(select_super_arm(v, 5), InsufficientArms);

  Rng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t m = 2 + rng.below(12);
    const std::size_t k = 1 + rng.below(std::min<std::size_t>(5, m - 1));
    std::vector<double> vals(m);
    for (double& x : vals) x = static_cast<double>(rng.below(5)) / 4.0;  // plenty of ties
    CHECK(select_super_arm(vals, k) == brute_force(vals, k));
  }
}

TEST_CASE("domains") {
  const Fingerprint root_c = fp_of({{1, 1}});
  const Fingerprint near = fp_of({{1, 1}, {2, 1}});
  std::vector<Ball> balls = {ball_at(root_c, 1.0, 0, 0), ball_at(near, 0.5, 0, 0, 1),
                             ball_at(near, 0.5, 0, 0, 2)};
  const std::vector<Fingerprint> fps = {near, fp_of({{9, 1}}), root_c};
  const auto dom = assign_domains(balls, fps);
  CHECK(dom == std::vector<std::size_t>{1, 0, 1});  // root_c is at 0.5 from `near`

  // Soundness on random data: containing ball, and no smaller container.
  Rng rng(17);
  std::vector<Ball> many = {ball_at(random_fp(rng, 12), 1.0, 0, 0)};
  for (int i = 1; i < 30; ++i) many.push_back(ball_at(random_fp(rng, 12), std::ldexp(1.0, -1 - static_cast<int>(rng.below(3))), 0, 0, i));
  std::vector<Fingerprint> pts;
  for (int i = 0; i < 300; ++i) pts.push_back(random_fp(rng, 12));
  const auto assigned = assign_domains(many, pts);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Ball& own = many[assigned[i]];
    CHECK(jaccard_distance(pts[i], own.center) <= own.radius);
    for (std::size_t j = 0; j < many.size(); ++j) {
      if (jaccard_distance(pts[i], many[j].center) > many[j].radius) continue;
      CHECK(many[j].radius >= own.radius);
      if (many[j].radius == own.radius) CHECK(j >= assigned[i]);
    }
  }
}

TEST_CASE("backfill modes") {
  const Fingerprint c = fp_of({{1, 2}});
  const Fingerprint inner = fp_of({{1, 2}, {5, 1}});
  std::vector<Ball> active = {ball_at(c, 1.0, 0, 0), ball_at(inner, 0.25, 0, 0, 1)};
  std::vector<Observation> log = {
      {0, c, 1},                     // distance 0
      {1, inner, 1},                 // inside the small ball
      {1, fp_of({{1, 1}}), 0},       // distance 0.5
      {2, fp_of({{7, 1}}), 1},       // distance 1
  };
  CHECK(backfill_counts(c, 0.5, log, active, BackfillMode::kBall) == Counts{3, 2});
  CHECK(backfill_counts(c, 0.5, log, active, BackfillMode::kDomain) == Counts{2, 1});
  CHECK(backfill_counts(c, 1.0, log, active, BackfillMode::kBall) == Counts{4, 3});
}

TEST_CASE("zooming bandit bookkeeping") {
  Rng rng(11);
  std::vector<Observation> history;
  for (int i = 0; i < 20; ++i) history.push_back({0, random_fp(rng, 10), i == 7 || i == 9});

  ZoomingBandit z(ZoomingMode::kUnweighted);
  z.initialize(history);
  REQUIRE(z.balls().size() == 1);
  CHECK(z.balls()[0].center == history[7].fp);
  CHECK(z.balls()[0].n == 20);
  CHECK(z.balls()[0].rew == 2);
  CHECK(z.log().size() == 20);

  for (int t = 1; t <= 40; ++t) {
    std::vector<Fingerprint> fps;
    std::vector<double> scores;
    for (int i = 0; i < 30; ++i) {
      fps.push_back(random_fp(rng, 10));
      scores.push_back(rng.uniform());
    }
    const ZoomingDecision d = z.select(fps, scores, t, 5);
    CHECK(d.horizon == phase_horizon(t));
    CHECK(d.selected.size() == 5);
    for (std::size_t m = 0; m < fps.size(); ++m)
      CHECK(d.arm_indices[m] == d.ball_indices[d.assignment[m]]);

    std::vector<int> rewards;
    for (std::size_t m : d.selected) rewards.push_back(fps[m].count(0) > 0);
    const std::size_t before = z.balls().size();
    const std::int64_t plays_before = [&] {
      std::int64_t s = 0;
      for (const Ball& b : z.balls()) s += b.n;
      return s;
    }();
    z.update(d, fps, rewards);

    std::int64_t plays_after = 0;
    for (std::size_t b = 0; b < before; ++b) plays_after += z.balls()[b].n;
    CHECK(plays_after == plays_before + 5);
    CHECK(z.log().size() == 20 + 5 * static_cast<std::size_t>(t));
  }
  CHECK(z.balls().size() > 1);
  for (const RefinementEvent& ev : z.refinements()) {
    const Ball& child = z.balls()[ev.child];
    CHECK(child.radius == z.balls()[ev.parent].radius / 2);
    CHECK(child.parent == static_cast<int>(ev.parent));
    CHECK(child.created_at == ev.round);
  }
}

TEST_CASE("epsilon schedule") {
  EpsilonConfig cfg;
  CHECK(epsilon_t(1, cfg) == 0.6);
  CHECK(epsilon_t(101, cfg) == doctest::Approx(0.13387809608905787).epsilon(1e-12));
  CHECK(epsilon_t(101, cfg) == doctest::Approx(0.6 * std::exp(-1.5)).epsilon(1e-15));
  for (int t = 1; t < 300; ++t) CHECK(epsilon_t(t + 1, cfg) < epsilon_t(t, cfg));
  cfg.literal_sign = true;
  CHECK(epsilon_t(2, cfg) > 0.6);
  CHECK(epsilon_t(500, cfg) == 1.0);
  CHECK(cfg.check().empty());
  cfg.eps_min = 0.7;
  CHECK(!cfg.check().empty());
}

TEST_CASE("baseline selectors") {
  const std::vector<double> s = {0.1, 0.5, 0.3, 0.5, 0.2};
  CHECK(greedy_select(s, 2) == SuperArm{1, 3});
  Rng rng(1);
  CHECK(eps_greedy_select(s, 3, 0.0, rng) == SuperArm{1, 2, 3});
  CHECK_THROWS_AS(random_select(3, 3, rng), InsufficientArms);

  std::map<std::size_t, int> freq;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const SuperArm a = random_select(10, 2, rng);
    REQUIRE(a.size() == 2);
    CHECK(a[0] < a[1]);
    for (std::size_t x : a) ++freq[x];
  }
  for (std::size_t m = 0; m < 10; ++m) CHECK(std::abs(freq[m] / static_cast<double>(draws) - 0.2) <= 0.02);

  // eps = 1 is uniform over subsets too.
  std::map<std::size_t, int> eps_freq;
  for (int i = 0; i < draws; ++i)
    for (std::size_t x : eps_greedy_select(std::vector<double>(10, 0.0), 2, 1.0, rng)) ++eps_freq[x];
  for (std::size_t m = 0; m < 10; ++m) CHECK(std::abs(eps_freq[m] / static_cast<double>(draws) - 0.2) <= 0.02);
}
