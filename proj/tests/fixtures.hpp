#pragma once

#include <initializer_list>
#include <numeric>
#include <vector>

#include "dmta/generator.hpp"
#include "dmta/molgraph.hpp"
#include "dmta/rng.hpp"

namespace fixtures {

inline dmta::Molecule chain(std::initializer_list<dmta::Element> atoms, int order = 1) {
  dmta::Molecule m;
  m.atoms.assign(atoms.begin(), atoms.end());
  for (int i = 0; i + 1 < static_cast<int>(m.atoms.size()); ++i) m.bonds.push_back({i, i + 1, order});
  return m;
}

inline std::vector<int> random_permutation(std::size_t n, dmta::Rng& rng) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[rng.below(i)]);
  return p;
}

inline std::vector<dmta::Molecule> random_molecules(std::size_t n, std::uint64_t seed) {
  dmta::Rng rng(seed);
  std::vector<dmta::Molecule> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(dmta::Generator::sample_prior(rng));
  return out;
}

}  // namespace fixtures
