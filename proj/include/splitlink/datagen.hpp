#pragma once
// Synthetic data preparation: duplicate removal, the record corruption model
// (typo simulation), and construction of the balanced labeled training set
// from a party's own records and their corrupted twins.

#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "splitlink/common.hpp"
#include "splitlink/core.hpp"
#include "splitlink/distance.hpp"

namespace splitlink {

// Drops records whose full value tuple duplicates an earlier record, so the
// remaining attribute combination acts as a candidate key. Keeps first
// occurrences in order.
inline RecordSet deduplicate(const RecordSet& rs) {
  RecordSet out;
  out.party = rs.party;
  out.schema = rs.schema;
  out.records.reserve(rs.records.size());
  std::unordered_set<std::string> seen;
  for (const auto& rec : rs.records) {
    std::string key;
    for (const auto& v : rec.values) {
      key += v;
      key.push_back('\x1f');  // unit separator; cannot appear in normalized values
    }
    if (seen.insert(std::move(key)).second) out.records.push_back(rec);
  }
  return out;
}

struct CorruptionSpec {
  int errors_per_row = 1;
  int max_attempts = 100;
};

namespace detail {

enum class EditOp : int { Insert = 0, Delete = 1, Substitute = 2, Transpose = 3 };

// Applies one random edit to one randomly chosen attribute. Each op is
// guaranteed to change the chosen string or the draw is rejected: substitute
// never re-draws the current character and transpose needs differing
// neighbors. Returns false when the drawn (attribute, op, position) is
// infeasible, e.g. delete on an empty value.
inline bool try_single_edit(std::vector<std::string>& values, Rng& rng) {
  static constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZ";
  std::string& s = values[rng.index(values.size())];
  auto op = static_cast<EditOp>(rng.index(4));
  switch (op) {
    case EditOp::Insert: {
      size_t pos = rng.index(s.size() + 1);
      s.insert(s.begin() + static_cast<ptrdiff_t>(pos), kAlphabet[rng.index(26)]);
      return true;
    }
    case EditOp::Delete: {
      if (s.empty()) return false;
      s.erase(s.begin() + static_cast<ptrdiff_t>(rng.index(s.size())));
      return true;
    }
    case EditOp::Substitute: {
      if (s.empty()) return false;
      size_t pos = rng.index(s.size());
      size_t cur = static_cast<size_t>(s[pos] - 'A');
      if (cur < 26) {
        s[pos] = kAlphabet[rng.index_excluding(26, cur)];
      } else {
        s[pos] = kAlphabet[rng.index(26)];  // non-alphabetic char, any letter differs
      }
      return true;
    }
    case EditOp::Transpose: {
      if (s.size() < 2) return false;
      size_t pos = rng.index(s.size() - 1);
      if (s[pos] == s[pos + 1]) return false;
      std::swap(s[pos], s[pos + 1]);
      return true;
    }
  }
  return false;
}

}  // namespace detail

// Produces a corrupted copy of the record: errors_per_row random edits, with
// the whole draw repeated until the result differs from the original (single
// edits always change their string, but stacked edits can cancel). Throws
// DataError when no feasible corruption is found within max_attempts.
inline Record corrupt_record(const Record& record, const CorruptionSpec& spec, Rng& rng) {
  for (int attempt = 0; attempt < spec.max_attempts; ++attempt) {
    std::vector<std::string> values = record.values;
    bool ok = true;
    for (int e = 0; e < spec.errors_per_row && ok; ++e) {
      int tries = 0;
      while (!detail::try_single_edit(values, rng)) {
        if (++tries >= spec.max_attempts) {
          ok = false;
          break;
        }
      }
    }
    if (ok && values != record.values) return Record{record.record_id, std::move(values)};
  }
  throw DataError("could not corrupt record " + record.record_id);
}

// Corrupts every record with an independent per-record seed derived from the
// base seed and the record's position, so the output is stable under
// reordering of the work and reproducible from (seed, index) alone.
inline RecordSet corrupt_recordset(const RecordSet& rs, const CorruptionSpec& spec,
                                   uint64_t seed) {
  RecordSet out;
  out.party = rs.party;
  out.schema = rs.schema;
  out.records.resize(rs.records.size());
  parallel_for(rs.records.size(), [&](size_t i) {
    Rng rng(mix_seed(seed, i));
    out.records[i] = corrupt_record(rs.records[i], spec, rng);
  });
  return out;
}

// Balanced synthetic training set from parallel arrays of smashed originals
// and their smashed corrupted twins: for each index i one positive example
// d(original_i, corrupted_i) and one negative d(original_i, corrupted_k)
// with k != i drawn uniformly. 2n examples for n records.
inline std::vector<LabeledExample> build_training_data(
    const std::vector<SmashedVector>& originals, const std::vector<SmashedVector>& corrupted,
    uint64_t seed) {
  if (originals.size() != corrupted.size())
    throw DataError("training data needs matching original/corrupted counts");
  if (originals.size() < 2)
    throw DataError("training data needs at least two records for negative pairs");
  const size_t n = originals.size();
  std::vector<LabeledExample> out(2 * n);
  parallel_for(n, [&](size_t i) {
    Rng rng(mix_seed(seed, i));
    out[2 * i] = LabeledExample{group_distance(originals[i], corrupted[i]), 1};
    size_t k = rng.index_excluding(n, i);
    out[2 * i + 1] = LabeledExample{group_distance(originals[i], corrupted[k]), 0};
  });
  return out;
}

}  // namespace splitlink
