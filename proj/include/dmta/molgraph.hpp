#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dmta/rng.hpp"

namespace dmta {

enum class Element : std::uint8_t { C, N, O, S, F, Cl };

inline constexpr std::array<Element, 6> kElements = {Element::C, Element::N, Element::O,
                                                    Element::S, Element::F, Element::Cl};

inline constexpr int kMaxAtoms = 60;

constexpr int valence_cap(Element e) noexcept {
  switch (e) {
    case Element::C: return 4;
    case Element::N: return 3;
    case Element::O: return 2;
    case Element::S: return 2;
    case Element::F: return 1;
    case Element::Cl: return 1;
  }
  return 0;
}

std::string_view symbol(Element e) noexcept;
std::optional<Element> parse_element(std::string_view sym) noexcept;

struct Bond {
  int a = 0;
  int b = 0;
  int order = 1;

  friend bool operator==(const Bond&, const Bond&) = default;
};

// Heavy-atom graph; hydrogens are implicit. Validity is checked by
// validate(), not enforced at construction, so fixtures can hold broken
// graphs on purpose.
struct Molecule {
  std::vector<Element> atoms;
  std::vector<Bond> bonds;

  std::size_t atom_count() const noexcept { return atoms.size(); }
  friend bool operator==(const Molecule&, const Molecule&) = default;
};

struct AtomCounts {
  int n_c = 0;
  int n_n = 0;
  int n_o = 0;

  friend bool operator==(const AtomCounts&, const AtomCounts&) = default;
};

AtomCounts count_atoms(const Molecule& mol) noexcept;

enum class ViolationKind {
  kEmpty,
  kTooManyAtoms,
  kBondIndexOutOfRange,
  kSelfLoop,
  kDuplicateBond,
  kInvalidBondOrder,
  kValenceExceeded,
  kDisconnected,
};

std::string_view to_string(ViolationKind kind) noexcept;

struct Violation {
  ViolationKind kind;
  int atom = -1;  // offending atom, or -1 when the violation is global
  std::string detail;
};

// Every violated invariant; empty means the molecule is valid.
std::vector<Violation> validate(const Molecule& mol);
inline bool is_valid(const Molecule& mol) { return validate(mol).empty(); }

// Neighbour lists as (atom, bond order). Bond indices must be in range.
using Adjacency = std::vector<std::vector<std::pair<int, int>>>;
Adjacency adjacency(const Molecule& mol);

// Same neighbour lists packed into one array; atom a owns
// items[start[a] .. start[a + 1]).
struct FlatAdjacency {
  std::vector<int> start;
  std::vector<std::pair<int, int>> items;

  std::span<const std::pair<int, int>> operator[](std::size_t a) const noexcept {
    return {items.data() + start[a], items.data() + start[a + 1]};
  }
  std::size_t degree(std::size_t a) const noexcept { return static_cast<std::size_t>(start[a + 1] - start[a]); }
};
FlatAdjacency flat_adjacency(const Molecule& mol);

// Sum of bond orders per atom.
std::vector<int> bond_order_sums(const Molecule& mol);

// Permutation-invariant 64-bit id from 8 rounds of neighbourhood refinement.
// Collisions between non-isomorphic graphs are possible but rare.
std::uint64_t canonical_hash(const Molecule& mol);

enum class EditKind { kAddAtom, kDeleteLeaf, kChangeElement, kChangeBondOrder, kAddRingBond, kRemoveRingBond };

// One attempt at a specific edit; nullopt when the edit does not apply.
// Change-element only touches bonded atoms; ring closures span 3- to
// 8-membered rings.
std::optional<Molecule> try_edit(const Molecule& mol, EditKind kind, Rng& rng);

// One random structural edit that yields a different valid molecule.
// Throws MutationExhausted after 100 failed attempts.
Molecule mutate(const Molecule& mol, Rng& rng);

// Applies `mapping[old] = new` to atom indices.
Molecule relabel(const Molecule& mol, const std::vector<int>& mapping);

// Line format:
//   atoms C C N O
//   bond 0 1 1
//   bond 1 2 2
// Blank lines and '#' comments are ignored; a lone "end" line terminates a
// record so several molecules can share one stream.
std::string to_text(const Molecule& mol);
Molecule from_text(std::string_view text);
std::optional<Molecule> read_molecule(std::istream& in);

}  // namespace dmta
