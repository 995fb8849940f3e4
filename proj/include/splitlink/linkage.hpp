#pragma once
// Matching: the split matcher over exchanged smashed vectors, the plain
// (non-private) SVM baseline over direct attribute similarities, and the
// threshold-conjunction ideal-match oracle.

#include <cmath>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "splitlink/common.hpp"
#include "splitlink/core.hpp"
#include "splitlink/datagen.hpp"
#include "splitlink/distance.hpp"
#include "splitlink/svm.hpp"

namespace splitlink {

// Normalized edit similarity in [0, 1]: 1 - dist / max(|a|, |b|, 1).
inline double normalized_similarity(std::string_view a, std::string_view b) {
  double denom = static_cast<double>(std::max({a.size(), b.size(), size_t{1}}));
  return 1.0 - static_cast<double>(edit_distance(a, b)) / denom;
}

// ---------------------------------------------------------------------------
// Ideal match: a pair matches iff every attribute clears its similarity
// threshold. Used as a rule-based oracle for threshold experiments; the
// evaluation ground truth comes from corruption pairing instead.

struct IdealMatchConfig {
  std::vector<double> thresholds;

  void validate() const {
    for (double t : thresholds)
      if (t < 0.0 || t > 1.0) throw ConfigError("ideal-match thresholds must lie in [0, 1]");
  }
};

inline int ideal_match(const Record& a, const Record& b, const IdealMatchConfig& cfg) {
  if (a.values.size() != b.values.size())
    throw DataError("ideal match needs records with the same schema");
  if (cfg.thresholds.size() != a.values.size())
    throw ConfigError("ideal-match threshold count must equal the attribute count");
  for (size_t j = 0; j < a.values.size(); ++j)
    if (normalized_similarity(a.values[j], b.values[j]) < cfg.thresholds[j]) return 0;
  return 1;
}

// ---------------------------------------------------------------------------
// Split matching. Every pair in DA x DB is classified with the local model
// on the grouped cosine distance of the two smashed vectors. The inner loops
// work on flattened integer matrices with precomputed squared norms; the
// arithmetic is integer until the final divide, so results are identical to
// calling group_distance pair by pair.

namespace detail {

struct SmashedMatrix {
  size_t count = 0;
  size_t group_count = 0;
  size_t group_len = 0;
  std::vector<const std::string*> ids;
  // data[g] is count x group_len row-major; sqnorm[g] holds per-record norms.
  std::vector<std::vector<uint32_t>> data;
  std::vector<std::vector<uint64_t>> sqnorm;
  std::vector<uint32_t> max_value;  // per group, for overflow-free fast paths
};

inline SmashedMatrix flatten_smashed(const std::vector<SmashedVector>& vs, const char* side) {
  SmashedMatrix m;
  m.count = vs.size();
  if (vs.empty()) throw DataError(std::string("empty smashed input on side ") + side);
  m.group_count = vs[0].groups.size();
  m.group_len = m.group_count ? vs[0].groups[0].size() : 0;
  for (const auto& v : vs) {
    if (v.groups.size() != m.group_count)
      throw DataError("smashed vector " + v.record_id + " has mismatched group count");
    for (const auto& g : v.groups)
      if (g.size() != m.group_len)
        throw DataError("smashed vector " + v.record_id + " has mismatched group length");
  }
  m.ids.reserve(m.count);
  for (const auto& v : vs) m.ids.push_back(&v.record_id);
  m.data.assign(m.group_count, {});
  m.sqnorm.assign(m.group_count, {});
  m.max_value.assign(m.group_count, 0);
  for (size_t g = 0; g < m.group_count; ++g) {
    m.data[g].resize(m.count * m.group_len);
    m.sqnorm[g].resize(m.count);
    for (size_t i = 0; i < m.count; ++i) {
      const auto& src = vs[i].groups[g];
      std::copy(src.begin(), src.end(), m.data[g].begin() + i * m.group_len);
      uint64_t n2 = 0;
      for (uint32_t v : src) {
        n2 += static_cast<uint64_t>(v) * v;
        m.max_value[g] = std::max(m.max_value[g], v);
      }
      m.sqnorm[g][i] = n2;
    }
  }
  return m;
}

inline double cosine_from_parts(uint64_t dot, uint64_t na, uint64_t nb) {
  if (na == 0 && nb == 0) return 0.0;
  if (na == 0 || nb == 0) return 1.0;
  return 1.0 - static_cast<double>(dot) /
                   std::sqrt(static_cast<double>(na) * static_cast<double>(nb));
}

}  // namespace detail

inline MatchArray split_match(const std::vector<SmashedVector>& da,
                              const std::vector<SmashedVector>& db, const SvmModel& model) {
  auto ma_side = detail::flatten_smashed(da, "A");
  auto mb_side = detail::flatten_smashed(db, "B");
  if (ma_side.group_count != mb_side.group_count)
    throw DataError("pair (" + *ma_side.ids[0] + ", " + *mb_side.ids[0] +
                    ") has mismatched group counts");
  if (ma_side.group_len != mb_side.group_len)
    throw DataError("pair (" + *ma_side.ids[0] + ", " + *mb_side.ids[0] +
                    ") has mismatched group lengths");
  if (model.dim != ma_side.group_count)
    throw DataError("model dimension does not match the mapping group count");

  const size_t na = ma_side.count, nb = mb_side.count;
  const size_t g_count = ma_side.group_count, g_len = ma_side.group_len;
  if (na > 100000000ull / nb)
    std::cerr << "warning: matching " << na << " x " << nb
              << " pairs without blocking; this may take a while\n";

  MatchArray out;
  out.entries.resize(na * nb);

  // Narrow 32-bit accumulation vectorizes much wider than the 64-bit MAC;
  // it is exact whenever the worst-case dot product fits.
  std::vector<bool> narrow(g_count);
  for (size_t g = 0; g < g_count; ++g) {
    uint64_t worst = uint64_t{ma_side.max_value[g]} * mb_side.max_value[g];
    narrow[g] = worst == 0 || g_len <= (uint64_t{1} << 32) / worst;
  }

  // Blocks of A rows keep the streamed B-side data hot across several rows.
  constexpr size_t kBlock = 8;
  const size_t block_count = (na + kBlock - 1) / kBlock;
  parallel_for(block_count, [&](size_t blk) {
    std::vector<double> features(g_count);
    size_t i_begin = blk * kBlock, i_end = std::min(na, i_begin + kBlock);
    for (size_t j = 0; j < nb; ++j) {
      for (size_t i = i_begin; i < i_end; ++i) {
        for (size_t g = 0; g < g_count; ++g) {
          const uint32_t* ra = ma_side.data[g].data() + i * g_len;
          const uint32_t* rb = mb_side.data[g].data() + j * g_len;
          uint64_t dot;
          if (narrow[g]) {
            uint32_t acc = 0;
            for (size_t k = 0; k < g_len; ++k) acc += ra[k] * rb[k];
            dot = acc;
          } else {
            dot = 0;
            for (size_t k = 0; k < g_len; ++k) dot += static_cast<uint64_t>(ra[k]) * rb[k];
          }
          features[g] =
              detail::cosine_from_parts(dot, ma_side.sqnorm[g][i], mb_side.sqnorm[g][j]);
        }
        double decision = model.decision_value(features.data());
        auto& e = out.entries[i * nb + j];
        e.record_id_a = *ma_side.ids[i];
        e.record_id_b = *mb_side.ids[j];
        e.decision_value = decision;
        e.predicted_match = decision >= 0.0;
      }
    }
  });
  out.canonicalize();
  return out;
}

// ---------------------------------------------------------------------------
// Plain baseline: no reference set, no smashing. Features are per-attribute
// normalized edit similarities computed directly on plaintext, classified by
// one centrally trained model.

inline FeatureVector plain_features(const Record& a, const Record& b) {
  if (a.values.size() != b.values.size())
    throw DataError("plain features need records with the same schema");
  FeatureVector f;
  f.reserve(a.values.size());
  for (size_t j = 0; j < a.values.size(); ++j)
    f.push_back(normalized_similarity(a.values[j], b.values[j]));
  return f;
}

inline MatchArray plain_match(const RecordSet& a, const RecordSet& b, const SvmModel& model) {
  if (a.schema != b.schema) throw DataError("plain match needs identical schemas");
  if (a.records.empty() || b.records.empty()) throw DataError("plain match needs records");
  if (model.dim != a.schema.size())
    throw DataError("model dimension does not match the attribute count");
  const size_t na = a.records.size(), nb = b.records.size();
  MatchArray out;
  out.entries.resize(na * nb);
  parallel_for(na, [&](size_t i) {
    for (size_t j = 0; j < nb; ++j) {
      FeatureVector f = plain_features(a.records[i], b.records[j]);
      double decision = model.decision_value(f);
      auto& e = out.entries[i * nb + j];
      e.record_id_a = a.records[i].record_id;
      e.record_id_b = b.records[j].record_id;
      e.decision_value = decision;
      e.predicted_match = decision >= 0.0;
    }
  });
  out.canonicalize();
  return out;
}

// Baseline training data uses the same corrupt-own-data scheme as the split
// models, but on direct similarity features: one positive per record (itself
// vs its corrupted twin), one negative (itself vs another record's corrupted
// twin). 2n examples for n records.
inline std::vector<LabeledExample> build_plain_training_data(const RecordSet& recs,
                                                             const CorruptionSpec& spec,
                                                             uint64_t seed) {
  if (recs.records.size() < 2) throw DataError("baseline training needs at least two records");
  RecordSet corrupted = corrupt_recordset(recs, spec, derive_seed(seed, "baseline-corrupt"));
  const size_t n = recs.records.size();
  std::vector<LabeledExample> data(2 * n);
  parallel_for(n, [&](size_t i) {
    Rng rng(mix_seed(derive_seed(seed, "baseline-pairs"), i));
    data[2 * i] = LabeledExample{plain_features(recs.records[i], corrupted.records[i]), 1};
    size_t k = rng.index_excluding(n, i);
    data[2 * i + 1] = LabeledExample{plain_features(recs.records[i], corrupted.records[k]), 0};
  });
  return data;
}

inline SvmModel train_plain_baseline(const RecordSet& recs, const CorruptionSpec& spec,
                                     const SvmParams& svm_params, uint64_t seed) {
  return train_svm(build_plain_training_data(recs, spec, seed), svm_params);
}

}  // namespace splitlink
