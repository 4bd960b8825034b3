#include "dmta/molgraph.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <queue>
#include <sstream>

#include "dmta/errors.hpp"
#include "dmta/hash.hpp"

namespace dmta {

namespace {

constexpr int kMaxMutationAttempts = 100;
constexpr int kCanonicalIterations = 8;
constexpr int kMinRingPath = 2;  // ring of 3
constexpr int kMaxRingPath = 7;  // ring of 8

// Draw weights for atoms introduced by mutation, in percent. C-heavy like
// drug-like chemistry.
constexpr std::array<int, 6> kElementWeights = {60, 14, 16, 4, 3, 3};

Element draw_element(Rng& rng, const std::vector<Element>& allowed) {
  int total = 0;
  for (Element e : allowed) total += kElementWeights[static_cast<int>(e)];
  int pick = static_cast<int>(rng.below(static_cast<std::size_t>(total)));
  for (Element e : allowed) {
    pick -= kElementWeights[static_cast<int>(e)];
    if (pick < 0) return e;
  }
  return allowed.back();
}

bool connected(int n_atoms, const std::vector<Bond>& bonds) {
  if (n_atoms <= 1) return true;
  // Union-find; molecules are small enough that path halving suffices.
  std::vector<int> parent(static_cast<std::size_t>(n_atoms));
  for (int i = 0; i < n_atoms; ++i) parent[i] = i;
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  int components = n_atoms;
  for (const Bond& b : bonds) {
    int ra = find(b.a), rb = find(b.b);
    if (ra != rb) {
      parent[ra] = rb;
      --components;
    }
  }
  return components == 1;
}

// Bonds whose removal keeps the molecule connected (the non-bridges).
std::vector<int> ring_bonds(const Molecule& mol) {
  const int n = static_cast<int>(mol.atom_count());
  std::vector<std::vector<std::pair<int, int>>> adj(static_cast<std::size_t>(n));
  for (int i = 0; i < static_cast<int>(mol.bonds.size()); ++i) {
    adj[mol.bonds[i].a].emplace_back(mol.bonds[i].b, i);
    adj[mol.bonds[i].b].emplace_back(mol.bonds[i].a, i);
  }
  std::vector<int> disc(static_cast<std::size_t>(n), -1), low(static_cast<std::size_t>(n), 0);
  std::vector<char> bridge(mol.bonds.size(), 0);
  int timer = 0;
  auto dfs = [&](auto& self, int u, int via) -> void {
    disc[u] = low[u] = timer++;
    for (auto [v, bond] : adj[u]) {
      if (bond == via) continue;
      if (disc[v] >= 0) {
        low[u] = std::min(low[u], disc[v]);
      } else {
        self(self, v, bond);
        low[u] = std::min(low[u], low[v]);
        if (low[v] > disc[u]) bridge[bond] = 1;
      }
    }
  };
  if (n > 0) dfs(dfs, 0, -1);
  std::vector<int> out;
  if (std::find(disc.begin(), disc.end(), -1) != disc.end()) return out;
  for (int i = 0; i < static_cast<int>(mol.bonds.size()); ++i)
    if (!bridge[i]) out.push_back(i);
  return out;
}

std::vector<int> free_valence(const Molecule& mol) {
  std::vector<int> sums = bond_order_sums(mol);
  for (std::size_t i = 0; i < sums.size(); ++i) sums[i] = valence_cap(mol.atoms[i]) - sums[i];
  return sums;
}

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& items) {
  return items[rng.below(items.size())];
}

std::optional<Molecule> add_atom(const Molecule& mol, Rng& rng) {
  if (static_cast<int>(mol.atom_count()) >= kMaxAtoms) return std::nullopt;
  std::vector<int> free = free_valence(mol);
  std::vector<int> anchors;
  for (int i = 0; i < static_cast<int>(free.size()); ++i)
    if (free[i] >= 1) anchors.push_back(i);
  if (anchors.empty()) return std::nullopt;

  int anchor = pick(rng, anchors);
  Element e = draw_element(rng, {kElements.begin(), kElements.end()});
  double u = rng.uniform();
  int order = u < 0.80 ? 1 : (u < 0.95 ? 2 : 3);
  order = std::min({order, free[anchor], valence_cap(e)});

  Molecule out = mol;
  out.atoms.push_back(e);
  out.bonds.push_back({anchor, static_cast<int>(out.atoms.size()) - 1, order});
  return out;
}

std::optional<Molecule> delete_leaf(const Molecule& mol, Rng& rng) {
  if (mol.atom_count() < 2) return std::nullopt;
  std::vector<int> degree(mol.atom_count(), 0);
  for (const Bond& b : mol.bonds) {
    ++degree[b.a];
    ++degree[b.b];
  }
  std::vector<int> leaves;
  for (int i = 0; i < static_cast<int>(degree.size()); ++i)
    if (degree[i] == 1) leaves.push_back(i);
  if (leaves.empty()) return std::nullopt;

  int leaf = pick(rng, leaves);
  Molecule out;
  out.atoms.reserve(mol.atom_count() - 1);
  for (int i = 0; i < static_cast<int>(mol.atom_count()); ++i)
    if (i != leaf) out.atoms.push_back(mol.atoms[i]);
  for (const Bond& b : mol.bonds) {
    if (b.a == leaf || b.b == leaf) continue;
    out.bonds.push_back({b.a > leaf ? b.a - 1 : b.a, b.b > leaf ? b.b - 1 : b.b, b.order});
  }
  return out;
}

std::optional<Molecule> change_element(const Molecule& mol, Rng& rng) {
  std::vector<int> sums = bond_order_sums(mol);
  std::vector<int> bonded;
  for (const Bond& b : mol.bonds) {
    bonded.push_back(b.a);
    bonded.push_back(b.b);
  }
  std::sort(bonded.begin(), bonded.end());
  bonded.erase(std::unique(bonded.begin(), bonded.end()), bonded.end());
  if (bonded.empty()) return std::nullopt;

  int atom = pick(rng, bonded);
  std::vector<Element> allowed;
  for (Element e : kElements)
    if (e != mol.atoms[atom] && valence_cap(e) >= sums[atom]) allowed.push_back(e);
  if (allowed.empty()) return std::nullopt;

  Molecule out = mol;
  out.atoms[atom] = draw_element(rng, allowed);
  return out;
}

std::optional<Molecule> change_bond_order(const Molecule& mol, Rng& rng) {
  if (mol.bonds.empty()) return std::nullopt;
  std::vector<int> free = free_valence(mol);
  std::size_t bi = rng.below(mol.bonds.size());
  const Bond& b = mol.bonds[bi];
  std::vector<int> orders;
  for (int o = 1; o <= 3; ++o) {
    if (o == b.order) continue;
    int delta = o - b.order;
    if (delta <= free[b.a] && delta <= free[b.b]) orders.push_back(o);
  }
  if (orders.empty()) return std::nullopt;

  Molecule out = mol;
  out.bonds[bi].order = pick(rng, orders);
  return out;
}

std::optional<Molecule> add_ring_bond(const Molecule& mol, Rng& rng) {
  std::vector<int> free = free_valence(mol);
  std::vector<int> open;
  for (int i = 0; i < static_cast<int>(free.size()); ++i)
    if (free[i] >= 1) open.push_back(i);
  if (open.size() < 2) return std::nullopt;

  int start = pick(rng, open);
  Adjacency adj = adjacency(mol);
  std::vector<int> dist(mol.atom_count(), -1);
  std::queue<int> q;
  q.push(start);
  dist[start] = 0;
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    if (dist[u] >= kMaxRingPath) continue;
    for (auto [v, order] : adj[u]) {
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        q.push(v);
      }
    }
  }
  std::vector<int> partners;
  for (int v : open)
    if (dist[v] >= kMinRingPath && dist[v] <= kMaxRingPath) partners.push_back(v);
  if (partners.empty()) return std::nullopt;

  Molecule out = mol;
  int other = pick(rng, partners);
  out.bonds.push_back({std::min(start, other), std::max(start, other), 1});
  return out;
}

std::optional<Molecule> remove_ring_bond(const Molecule& mol, Rng& rng) {
  const std::vector<int> candidates = ring_bonds(mol);
  if (candidates.empty()) return std::nullopt;

  Molecule out = mol;
  out.bonds.erase(out.bonds.begin() + pick(rng, candidates));
  return out;
}

}  // namespace

std::string_view symbol(Element e) noexcept {
  switch (e) {
    case Element::C: return "C";
    case Element::N: return "N";
    case Element::O: return "O";
    case Element::S: return "S";
    case Element::F: return "F";
    case Element::Cl: return "Cl";
  }
  return "?";
}

std::optional<Element> parse_element(std::string_view sym) noexcept {
  for (Element e : kElements)
    if (symbol(e) == sym) return e;
  return std::nullopt;
}

std::string_view to_string(ViolationKind kind) noexcept {
  switch (kind) {
    case ViolationKind::kEmpty: return "empty";
    case ViolationKind::kTooManyAtoms: return "too-many-atoms";
    case ViolationKind::kBondIndexOutOfRange: return "bond-index-out-of-range";
    case ViolationKind::kSelfLoop: return "self-loop";
    case ViolationKind::kDuplicateBond: return "duplicate-bond";
    case ViolationKind::kInvalidBondOrder: return "invalid-bond-order";
    case ViolationKind::kValenceExceeded: return "valence-exceeded";
    case ViolationKind::kDisconnected: return "disconnected";
  }
  return "unknown";
}

AtomCounts count_atoms(const Molecule& mol) noexcept {
  AtomCounts counts;
  for (Element e : mol.atoms) {
    if (e == Element::C) ++counts.n_c;
    else if (e == Element::N) ++counts.n_n;
    else if (e == Element::O) ++counts.n_o;
  }
  return counts;
}

std::vector<Violation> validate(const Molecule& mol) {
  std::vector<Violation> out;
  const int n = static_cast<int>(mol.atom_count());
  if (n == 0) out.push_back({ViolationKind::kEmpty, -1, "molecule has no atoms"});
  if (n > kMaxAtoms)
    out.push_back({ViolationKind::kTooManyAtoms, -1,
                   std::to_string(n) + " atoms exceeds cap " + std::to_string(kMaxAtoms)});

  std::vector<Bond> usable;
  std::vector<std::uint64_t> pairs;
  for (const Bond& b : mol.bonds) {
    if (b.a < 0 || b.b < 0 || b.a >= n || b.b >= n) {
      out.push_back({ViolationKind::kBondIndexOutOfRange, -1,
                     "bond " + std::to_string(b.a) + "-" + std::to_string(b.b)});
      continue;
    }
    if (b.a == b.b) {
      out.push_back({ViolationKind::kSelfLoop, b.a, "bond from atom to itself"});
      continue;
    }
    if (b.order < 1 || b.order > 3)
      out.push_back({ViolationKind::kInvalidBondOrder, -1, "order " + std::to_string(b.order)});
    auto key = (static_cast<std::uint64_t>(std::min(b.a, b.b)) << 32) |
               static_cast<std::uint32_t>(std::max(b.a, b.b));
    if (std::find(pairs.begin(), pairs.end(), key) != pairs.end()) {
      out.push_back({ViolationKind::kDuplicateBond, std::min(b.a, b.b),
                     "repeated bond " + std::to_string(b.a) + "-" + std::to_string(b.b)});
      continue;
    }
    pairs.push_back(key);
    usable.push_back(b);
  }

  std::vector<int> sums(static_cast<std::size_t>(std::max(n, 0)), 0);
  for (const Bond& b : usable) {
    sums[b.a] += b.order;
    sums[b.b] += b.order;
  }
  for (int i = 0; i < n; ++i) {
    if (sums[i] > valence_cap(mol.atoms[i]))
      out.push_back({ViolationKind::kValenceExceeded, i,
                     std::string(symbol(mol.atoms[i])) + " bond order sum " +
                         std::to_string(sums[i]) + " > " +
                         std::to_string(valence_cap(mol.atoms[i]))});
  }
  if (n > 1 && !connected(n, usable))
    out.push_back({ViolationKind::kDisconnected, -1, "graph has more than one component"});
  return out;
}

Adjacency adjacency(const Molecule& mol) {
  Adjacency adj(mol.atom_count());
  for (const Bond& b : mol.bonds) {
    adj[b.a].emplace_back(b.b, b.order);
    adj[b.b].emplace_back(b.a, b.order);
  }
  return adj;
}

FlatAdjacency flat_adjacency(const Molecule& mol) {
  const std::size_t n = mol.atom_count();
  FlatAdjacency adj;
  adj.start.assign(n + 1, 0);
  for (const Bond& b : mol.bonds) {
    ++adj.start[b.a + 1];
    ++adj.start[b.b + 1];
  }
  for (std::size_t a = 0; a < n; ++a) adj.start[a + 1] += adj.start[a];
  adj.items.resize(2 * mol.bonds.size());
  std::vector<int> fill(adj.start.begin(), adj.start.end() - 1);
  for (const Bond& b : mol.bonds) {
    adj.items[fill[b.a]++] = {b.b, b.order};
    adj.items[fill[b.b]++] = {b.a, b.order};
  }
  return adj;
}

std::vector<int> bond_order_sums(const Molecule& mol) {
  std::vector<int> sums(mol.atom_count(), 0);
  for (const Bond& b : mol.bonds) {
    sums[b.a] += b.order;
    sums[b.b] += b.order;
  }
  return sums;
}

std::uint64_t canonical_hash(const Molecule& mol) {
  const FlatAdjacency adj = flat_adjacency(mol);
  const std::vector<int> sums = bond_order_sums(mol);
  const std::size_t n = mol.atom_count();

  std::vector<std::uint64_t> inv(n), next(n);
  for (std::size_t a = 0; a < n; ++a) {
    std::uint64_t h = hash_combine(0x6d6f6c, static_cast<std::uint64_t>(mol.atoms[a]) + 1);
    h = hash_combine(h, adj.degree(a));
    inv[a] = hash_combine(h, static_cast<std::uint64_t>(sums[a]));
  }

  std::vector<std::uint64_t> env;
  env.reserve(8);
  for (int it = 0; it < kCanonicalIterations; ++it) {
    for (std::size_t a = 0; a < n; ++a) {
      env.clear();
      for (auto [nbr, order] : adj[a]) env.push_back(hash_combine(order, inv[nbr]));
      std::sort(env.begin(), env.end());
      std::uint64_t h = hash_combine(inv[a], static_cast<std::uint64_t>(it));
      for (std::uint64_t v : env) h = hash_combine(h, v);
      next[a] = h;
    }
    inv.swap(next);
  }

  std::vector<std::uint64_t> bond_sigs;
  bond_sigs.reserve(mol.bonds.size());
  for (const Bond& b : mol.bonds) {
    std::uint64_t lo = std::min(inv[b.a], inv[b.b]);
    std::uint64_t hi = std::max(inv[b.a], inv[b.b]);
    bond_sigs.push_back(hash_combine(hash_combine(lo, hi), static_cast<std::uint64_t>(b.order)));
  }
  std::sort(inv.begin(), inv.end());
  std::sort(bond_sigs.begin(), bond_sigs.end());

  std::uint64_t h = hash_combine(n, mol.bonds.size());
  for (std::uint64_t v : inv) h = hash_combine(h, v);
  for (std::uint64_t v : bond_sigs) h = hash_combine(h, v);
  return h;
}

std::optional<Molecule> try_edit(const Molecule& mol, EditKind kind, Rng& rng) {
  switch (kind) {
    case EditKind::kAddAtom: return add_atom(mol, rng);
    case EditKind::kDeleteLeaf: return delete_leaf(mol, rng);
    case EditKind::kChangeElement: return change_element(mol, rng);
    case EditKind::kChangeBondOrder: return change_bond_order(mol, rng);
    case EditKind::kAddRingBond: return add_ring_bond(mol, rng);
    case EditKind::kRemoveRingBond: return remove_ring_bond(mol, rng);
  }
  return std::nullopt;
}

Molecule mutate(const Molecule& mol, Rng& rng) {
  for (int attempt = 0; attempt < kMaxMutationAttempts; ++attempt) {
    auto out = try_edit(mol, static_cast<EditKind>(rng.below(6)), rng);
    if (out && *out != mol && is_valid(*out)) return std::move(*out);
  }
  throw MutationExhausted("no valid edit found in " + std::to_string(kMaxMutationAttempts) +
                          " attempts");
}

Molecule relabel(const Molecule& mol, const std::vector<int>& mapping) {
  Molecule out;
  out.atoms.resize(mol.atom_count());
  for (std::size_t i = 0; i < mol.atom_count(); ++i) out.atoms[mapping[i]] = mol.atoms[i];
  out.bonds.reserve(mol.bonds.size());
  for (const Bond& b : mol.bonds) out.bonds.push_back({mapping[b.a], mapping[b.b], b.order});
  return out;
}

std::string to_text(const Molecule& mol) {
  std::ostringstream os;
  os << "atoms";
  for (Element e : mol.atoms) os << ' ' << symbol(e);
  os << '\n';
  for (const Bond& b : mol.bonds) os << "bond " << b.a << ' ' << b.b << ' ' << b.order << '\n';
  return os.str();
}

std::optional<Molecule> read_molecule(std::istream& in) {
  Molecule mol;
  bool have_atoms = false;
  bool any = false;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;
    if (word == "end") {
      if (any) break;
      continue;
    }
    any = true;
    if (word == "atoms") {
      if (have_atoms) throw ParseError("molecule record has two 'atoms' lines");
      have_atoms = true;
      std::string sym;
      while (ls >> sym) {
        auto e = parse_element(sym);
        if (!e) throw ParseError("unknown element '" + sym + "'");
        mol.atoms.push_back(*e);
      }
    } else if (word == "bond") {
      Bond b;
      if (!(ls >> b.a >> b.b >> b.order)) throw ParseError("malformed bond line: " + line);
      mol.bonds.push_back(b);
    } else {
      throw ParseError("unexpected token '" + word + "' in molecule record");
    }
  }
  if (!any) return std::nullopt;
  if (!have_atoms) throw ParseError("molecule record missing 'atoms' line");
  return mol;
}

Molecule from_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  auto mol = read_molecule(in);
  if (!mol) throw ParseError("empty molecule text");
  return std::move(*mol);
}

}  // namespace dmta
