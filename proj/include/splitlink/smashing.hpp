#pragma once
// Smashing: turning a plaintext record into its reference-set distance
// vector. For each mapping pair the record attribute is compared against
// that reference column of every reference row, yielding one distance group
// per pair with one entry per row.

#include <cstdint>
#include <vector>

#include "splitlink/common.hpp"
#include "splitlink/core.hpp"
#include "splitlink/distance.hpp"

namespace splitlink {

inline SmashedVector smash_record(const Record& record, const ReferenceSet& rs,
                                  const ResolvedMapping& mapping) {
  SmashedVector sv;
  sv.record_id = record.record_id;
  sv.groups.reserve(mapping.index_pairs.size());
  for (const auto& [rec_col, ref_col] : mapping.index_pairs) {
    if (rec_col >= record.values.size()) throw DataError("mapping record column out of range");
    std::vector<uint32_t> group;
    group.reserve(rs.rows.size());
    for (const auto& row : rs.rows) {
      if (ref_col >= row.size()) throw DataError("mapping reference column out of range");
      group.push_back(edit_distance(record.values[rec_col], row[ref_col]));
    }
    sv.groups.push_back(std::move(group));
  }
  return sv;
}

inline std::vector<SmashedVector> smash_recordset(const RecordSet& records, const ReferenceSet& rs,
                                                  const ResolvedMapping& mapping) {
  std::vector<SmashedVector> out(records.records.size());
  parallel_for(records.records.size(),
               [&](size_t i) { out[i] = smash_record(records.records[i], rs, mapping); });
  return out;
}

// Convenience: resolve the mapping against both schemas, then smash.
inline std::vector<SmashedVector> smash_recordset(const RecordSet& records, const ReferenceSet& rs,
                                                  const AttributeMapping& mapping) {
  return smash_recordset(records, rs, resolve_mapping(mapping, records.schema, rs.schema));
}

}  // namespace splitlink
