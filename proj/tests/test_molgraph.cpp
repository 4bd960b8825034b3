#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "dmta/errors.hpp"
#include "dmta/molgraph.hpp"
#include "fixtures.hpp"

using namespace dmta;
using fixtures::chain;

namespace {

bool has_kind(const std::vector<Violation>& v, ViolationKind k) {
  return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.kind == k; });
}

// 22 C, 3 N, 4 O arranged as a branched tree, counted by an explicit walk.
Molecule mixed_29() {
  Molecule m;
  for (int i = 0; i < 22; ++i) m.atoms.push_back(Element::C);
  for (int i = 0; i < 3; ++i) m.atoms.push_back(Element::N);
  for (int i = 0; i < 4; ++i) m.atoms.push_back(Element::O);
  for (int i = 1; i < 22; ++i) m.bonds.push_back({i - 1, i, 1});
  for (int i = 22; i < 29; ++i) m.bonds.push_back({(i - 22) * 3, i, 1});
  return m;
}

}  // namespace

TEST_CASE("count_atoms") {
  CHECK(count_atoms(chain({Element::C, Element::C, Element::C})) == AtomCounts{3, 0, 0});
  CHECK(count_atoms(Molecule{{Element::O}, {}}) == AtomCounts{0, 0, 1});

  const Molecule m = mixed_29();
  REQUIRE(is_valid(m));
  int c = 0, n = 0, o = 0;
  for (std::size_t i = 0; i < m.atoms.size(); ++i) {
    c += m.atoms[i] == Element::C;
    n += m.atoms[i] == Element::N;
    o += m.atoms[i] == Element::O;
  }
  CHECK(m.atom_count() == 29);
  CHECK(count_atoms(m) == AtomCounts{c, n, o});
  CHECK(count_atoms(m) == AtomCounts{22, 3, 4});
}

TEST_CASE("validate reports each violated invariant") {
  CHECK(validate(Molecule{{Element::C}, {}}).empty());

  Molecule oxo{{Element::O, Element::C, Element::C}, {{0, 1, 2}, {0, 2, 2}}};
  auto v = validate(oxo);
  REQUIRE(v.size() == 1);
  CHECK(v[0].kind == ViolationKind::kValenceExceeded);
  CHECK(v[0].atom == 0);

  Molecule split{{Element::C, Element::C, Element::C, Element::C}, {{0, 1, 1}, {2, 3, 1}}};
  CHECK(has_kind(validate(split), ViolationKind::kDisconnected));

  CHECK(has_kind(validate(Molecule{}), ViolationKind::kEmpty));
  CHECK(has_kind(validate(Molecule{{Element::C, Element::C}, {{0, 0, 1}, {0, 1, 1}}}), ViolationKind::kSelfLoop));
  CHECK(has_kind(validate(Molecule{{Element::C, Element::C}, {{0, 1, 1}, {1, 0, 1}}}),
                 ViolationKind::kDuplicateBond));
  CHECK(has_kind(validate(Molecule{{Element::C, Element::C}, {{0, 1, 4}}}), ViolationKind::kInvalidBondOrder));
  CHECK(has_kind(validate(Molecule{{Element::C, Element::C}, {{0, 5, 1}}}),
                 ViolationKind::kBondIndexOutOfRange));

  Molecule big;
  big.atoms.assign(61, Element::C);
  for (int i = 1; i < 61; ++i) big.bonds.push_back({i - 1, i, 1});
  CHECK(has_kind(validate(big), ViolationKind::kTooManyAtoms));

  // Several problems at once are all listed.
  Molecule bad{{Element::F, Element::F, Element::C}, {{0, 1, 2}}};
  auto many = validate(bad);
  CHECK(has_kind(many, ViolationKind::kValenceExceeded));
  CHECK(has_kind(many, ViolationKind::kDisconnected));
}

TEST_CASE("canonical_hash distinguishes and is permutation invariant") {
  const Molecule cc = chain({Element::C, Element::C});
  const Molecule c_eq_c = chain({Element::C, Element::C}, 2);
  CHECK(canonical_hash(cc) != canonical_hash(c_eq_c));
  CHECK(canonical_hash(chain({Element::C, Element::N})) != canonical_hash(chain({Element::C, Element::O})));
  CHECK(canonical_hash(chain({Element::C, Element::N})) == canonical_hash(chain({Element::N, Element::C})));

  Rng rng(11);
  int checked = 0;
  for (const Molecule& m : fixtures::random_molecules(1000, 5)) {
    const Molecule r = relabel(m, fixtures::random_permutation(m.atom_count(), rng));
    REQUIRE(is_valid(r));
    CHECK(canonical_hash(r) == canonical_hash(m));
    ++checked;
  }
  CHECK(checked == 1000);
}

TEST_CASE("mutate") {
  SUBCASE("single carbon can only grow") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      Rng rng(seed);
      const Molecule out = mutate(Molecule{{Element::C}, {}}, rng);
      CHECK(out.atom_count() == 2);
      CHECK(out.bonds.size() == 1);
      CHECK(out.atoms[0] == Element::C);
      CHECK(is_valid(out));
    }
  }
  SUBCASE("outputs are valid and differ from the input") {
    Rng rng(3);
    for (const Molecule& m : fixtures::random_molecules(300, 9)) {
      const Molecule out = mutate(m, rng);
      CHECK(is_valid(out));
      CHECK(out != m);
    }
  }
  SUBCASE("deterministic for a fixed seed") {
    const Molecule m = fixtures::random_molecules(1, 4)[0];
    Rng a(77), b(77);
    for (int i = 0; i < 20; ++i) CHECK(mutate(m, a) == mutate(m, b));
  }
  SUBCASE("never grows past the atom cap") {
    Molecule capped;
    capped.atoms.assign(kMaxAtoms, Element::C);
    for (int i = 1; i < kMaxAtoms; ++i) capped.bonds.push_back({i - 1, i, 1});
    Rng rng(1);
    for (int i = 0; i < 50; ++i) {
      const Molecule out = mutate(capped, rng);
      CHECK(out.atom_count() <= static_cast<std::size_t>(kMaxAtoms));
      CHECK(is_valid(out));
    }
  }
}

TEST_CASE("text round trip") {
  const Molecule m = Molecule{{Element::C, Element::Cl, Element::N}, {{0, 1, 1}, {0, 2, 3}}};
  const std::string text = to_text(m);
  CHECK(from_text(text) == m);

  std::istringstream in("# two records\n" + text + "end\natoms O\nend\n");
  auto first = read_molecule(in);
  auto second = read_molecule(in);
  REQUIRE(first);
  REQUIRE(second);
  CHECK(*first == m);
  CHECK(*second == Molecule{{Element::O}, {}});
  CHECK_FALSE(read_molecule(in));

  CHECK_THROWS_AS(from_text("atoms C Xx\n"), ParseError);
  CHECK_THROWS_AS(from_text("atoms C C\nbond 0 1\n"), ParseError);
}
