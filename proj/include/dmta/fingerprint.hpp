#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dmta/molgraph.hpp"

namespace dmta {

inline constexpr std::uint32_t kFingerprintDim = 2048;
inline constexpr int kFingerprintRadius = 2;

// Sparse count vector, entries sorted by dimension with strictly positive
// counts.
class Fingerprint {
 public:
  using Entry = std::pair<std::uint32_t, std::uint32_t>;  // (dim, count)

  Fingerprint() = default;

  // Sorts, merges repeated dimensions and drops zero counts.
  static Fingerprint from_entries(std::vector<Entry> entries);

  std::span<const Entry> entries() const noexcept { return entries_; }
  std::size_t nonzeros() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  std::uint64_t total() const noexcept { return total_; }
  std::uint32_t count(std::uint32_t dim) const noexcept;

  friend bool operator==(const Fingerprint& a, const Fingerprint& b) {
    return a.entries_ == b.entries_;
  }

 private:
  std::vector<Entry> entries_;
  std::uint64_t total_ = 0;
};

// Morgan-style count fingerprint. Every atom contributes its radius-0
// environment, plus one environment per radius r <= `radius` whose bond set
// is strictly larger than at r-1. Atom invariant is (element, degree, bond
// order sum); neighbourhoods are folded into the invariant by sorted
// (bond order, neighbour invariant) pairs and the result is folded modulo
// `dim`.
Fingerprint morgan_fingerprint(const Molecule& mol, int radius = kFingerprintRadius,
                               std::uint32_t dim = kFingerprintDim);

// Generalised Jaccard distance on counts:
//   1 - sum_d min(a_d, b_d) / sum_d max(a_d, b_d),  with d(empty, empty) = 0.
double jaccard_distance(const Fingerprint& a, const Fingerprint& b) noexcept;

// sum_d min(a_d, b_d)
std::uint64_t intersection_total(const Fingerprint& a, const Fingerprint& b) noexcept;

// "dim:count" pairs in ascending dimension, comma separated.
std::string to_string(const Fingerprint& fp);
Fingerprint parse_fingerprint(std::string_view text);

}  // namespace dmta
