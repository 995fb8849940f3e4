#pragma once
// String and vector distances: Levenshtein edit distance over normalized
// strings, cosine distance over integer distance groups, and the grouped
// record-to-smashed-vector distance that produces feature vectors.

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

#include "splitlink/common.hpp"
#include "splitlink/core.hpp"

namespace splitlink {

// Unit-cost Levenshtein distance (insert, delete, substitute; no
// transposition). Two-row DP; the short string indexes the rows so the
// stack buffer covers everyday attribute lengths without allocating.
inline uint32_t edit_distance(std::string_view a, std::string_view b) {
  if (a.size() > b.size()) std::swap(a, b);
  // Strip the common prefix and suffix; they never contribute.
  while (!a.empty() && a.front() == b.front()) {
    a.remove_prefix(1);
    b.remove_prefix(1);
  }
  while (!a.empty() && a.back() == b.back()) {
    a.remove_suffix(1);
    b.remove_suffix(1);
  }
  if (a.empty()) return static_cast<uint32_t>(b.size());

  constexpr size_t kStackCap = 64;
  uint32_t stack_row[kStackCap];
  std::vector<uint32_t> heap_row;
  uint32_t* row = stack_row;
  if (a.size() + 1 > kStackCap) {
    heap_row.resize(a.size() + 1);
    row = heap_row.data();
  }
  for (size_t j = 0; j <= a.size(); ++j) row[j] = static_cast<uint32_t>(j);
  for (size_t i = 1; i <= b.size(); ++i) {
    uint32_t diag = row[0];
    row[0] = static_cast<uint32_t>(i);
    char bc = b[i - 1];
    for (size_t j = 1; j <= a.size(); ++j) {
      uint32_t up = row[j];
      uint32_t subst = diag + (a[j - 1] != bc);
      uint32_t ins = std::min(up, row[j - 1]) + 1;
      row[j] = std::min(subst, ins);
      diag = up;
    }
  }
  return row[a.size()];
}

// Cosine distance 1 - cos(u, v) over non-negative integer vectors, in [0, 2]
// for general reals and [0, 1] here. Conventions: two zero vectors are
// identical (0); exactly one zero vector is maximally distant (1).
// Using sqrt(|u|^2 * |v|^2) keeps parallel small-integer vectors at exactly
// 0, and element-wise equal vectors short-circuit to 0.
inline double cosine_distance(const std::vector<uint32_t>& u, const std::vector<uint32_t>& v) {
  if (u.size() != v.size()) throw DataError("cosine distance needs equal-length vectors");
  if (u == v) return 0.0;
  uint64_t dot = 0, nu = 0, nv = 0;
  for (size_t i = 0; i < u.size(); ++i) {
    dot += static_cast<uint64_t>(u[i]) * v[i];
    nu += static_cast<uint64_t>(u[i]) * u[i];
    nv += static_cast<uint64_t>(v[i]) * v[i];
  }
  if (nu == 0 && nv == 0) return 0.0;
  if (nu == 0 || nv == 0) return 1.0;
  double c = static_cast<double>(dot) /
             std::sqrt(static_cast<double>(nu) * static_cast<double>(nv));
  return 1.0 - c;
}

// Grouped distance between two smashed vectors: one cosine distance per
// mapping pair, compared group-by-group in mapping order.
inline FeatureVector group_distance(const SmashedVector& x, const SmashedVector& y) {
  if (x.groups.size() != y.groups.size())
    throw DataError("smashed vectors have different group counts");
  FeatureVector f;
  f.reserve(x.groups.size());
  for (size_t g = 0; g < x.groups.size(); ++g)
    f.push_back(cosine_distance(x.groups[g], y.groups[g]));
  return f;
}

}  // namespace splitlink
