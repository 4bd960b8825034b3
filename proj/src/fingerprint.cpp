#include "dmta/fingerprint.hpp"

#include <algorithm>
#include <charconv>

#include "dmta/errors.hpp"
#include "dmta/hash.hpp"

namespace dmta {

Fingerprint Fingerprint::from_entries(std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end());
  Fingerprint fp;
  std::size_t out = 0;
  for (const auto& [dim, count] : entries) {
    if (count == 0) continue;
    if (out > 0 && entries[out - 1].first == dim) {
      entries[out - 1].second += count;
    } else {
      entries[out++] = {dim, count};
    }
    fp.total_ += count;
  }
  entries.resize(out);
  fp.entries_ = std::move(entries);
  return fp;
}

std::uint32_t Fingerprint::count(std::uint32_t dim) const noexcept {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), Entry{dim, 0});
  return (it != entries_.end() && it->first == dim) ? it->second : 0;
}

Fingerprint morgan_fingerprint(const Molecule& mol, int radius, std::uint32_t dim) {
  const std::size_t n = mol.atom_count();
  const FlatAdjacency adj = flat_adjacency(mol);
  const std::vector<int> sums = bond_order_sums(mol);

  std::vector<Fingerprint::Entry> features;
  features.reserve(n * static_cast<std::size_t>(radius + 1));
  auto emit = [&](std::uint64_t h) {
    features.emplace_back(static_cast<std::uint32_t>(h % dim), 1u);
  };

  std::vector<std::uint64_t> inv(n), next(n);
  for (std::size_t a = 0; a < n; ++a) {
    std::uint64_t h = hash_combine(0x66707231, static_cast<std::uint64_t>(mol.atoms[a]) + 1);
    h = hash_combine(h, adj.degree(a));
    inv[a] = hash_combine(h, static_cast<std::uint64_t>(sums[a]));
    emit(inv[a]);
  }
  if (radius <= 0) return Fingerprint::from_entries(std::move(features));

  // within[a * stride + r]: bonds having an endpoint at graph distance < r from a.
  const std::size_t stride = static_cast<std::size_t>(radius) + 1;
  std::vector<int> within(n * stride, 0);
  std::vector<int> dist(n), queue;
  queue.reserve(n);
  for (std::size_t a = 0; a < n; ++a) {
    std::fill(dist.begin(), dist.end(), -1);
    queue.assign(1, static_cast<int>(a));
    dist[a] = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const int u = queue[head];
      if (dist[u] >= radius) continue;
      for (auto [v, order] : adj[u]) {
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          queue.push_back(v);
        }
      }
    }
    int* row = within.data() + a * stride;
    for (const Bond& b : mol.bonds) {
      const int du = dist[b.a] < 0 ? radius + 1 : dist[b.a];
      const int dv = dist[b.b] < 0 ? radius + 1 : dist[b.b];
      for (int r = std::min(du, dv) + 1; r <= radius; ++r) ++row[r];
    }
  }

  std::vector<std::uint64_t> env;
  env.reserve(8);
  for (int r = 1; r <= radius; ++r) {
    for (std::size_t a = 0; a < n; ++a) {
      env.clear();
      for (auto [nbr, order] : adj[a]) env.push_back(hash_combine(order, inv[nbr]));
      std::sort(env.begin(), env.end());
      std::uint64_t h = hash_combine(inv[a], static_cast<std::uint64_t>(r));
      for (std::uint64_t v : env) h = hash_combine(h, v);
      next[a] = h;
      if (within[a * stride + r] > within[a * stride + r - 1]) emit(h);
    }
    inv.swap(next);
  }
  return Fingerprint::from_entries(std::move(features));
}

std::uint64_t intersection_total(const Fingerprint& a, const Fingerprint& b) noexcept {
  auto ea = a.entries();
  auto eb = b.entries();
  std::size_t i = 0, j = 0;
  std::uint64_t shared = 0;
  while (i < ea.size() && j < eb.size()) {
    if (ea[i].first < eb[j].first) {
      ++i;
    } else if (eb[j].first < ea[i].first) {
      ++j;
    } else {
      shared += std::min(ea[i].second, eb[j].second);
      ++i;
      ++j;
    }
  }
  return shared;
}

double jaccard_distance(const Fingerprint& a, const Fingerprint& b) noexcept {
  const std::uint64_t union_total = a.total() + b.total();
  if (union_total == 0) return 0.0;
  const std::uint64_t shared = intersection_total(a, b);
  // sum max = sum a + sum b - sum min
  return 1.0 - static_cast<double>(shared) / static_cast<double>(union_total - shared);
}

std::string to_string(const Fingerprint& fp) {
  std::string out;
  for (const auto& [dim, count] : fp.entries()) {
    if (!out.empty()) out += ',';
    out += std::to_string(dim);
    out += ':';
    out += std::to_string(count);
  }
  return out;
}

Fingerprint parse_fingerprint(std::string_view text) {
  std::vector<Fingerprint::Entry> entries;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    std::string_view item = text.substr(pos, comma - pos);
    std::size_t colon = item.find(':');
    if (colon == std::string_view::npos)
      throw ParseError("fingerprint entry without ':': " + std::string(item));
    std::uint32_t dim = 0, count = 0;
    auto r1 = std::from_chars(item.data(), item.data() + colon, dim);
    auto r2 = std::from_chars(item.data() + colon + 1, item.data() + item.size(), count);
    if (r1.ec != std::errc{} || r1.ptr != item.data() + colon || r2.ec != std::errc{} ||
        r2.ptr != item.data() + item.size() || count == 0)
      throw ParseError("bad fingerprint entry: " + std::string(item));
    entries.emplace_back(dim, count);
    pos = comma + 1;
  }
  return Fingerprint::from_entries(std::move(entries));
}

}  // namespace dmta
