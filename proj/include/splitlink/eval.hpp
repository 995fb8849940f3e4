#pragma once
// Evaluation: precision/recall scoring against corruption-pairing ground
// truth, the repetition-averaged experiment runner over both pipelines
// (split and plain baseline), report CSVs, and figure-data emission.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "splitlink/common.hpp"
#include "splitlink/core.hpp"
#include "splitlink/datagen.hpp"
#include "splitlink/linkage.hpp"
#include "splitlink/namegen.hpp"
#include "splitlink/protocol.hpp"
#include "splitlink/svm.hpp"

namespace splitlink {

// Ground-truth pair set keyed on (record_id_a, record_id_b).
class TruthSet {
 public:
  void insert(const std::string& id_a, const std::string& id_b) {
    pairs_.insert(key(id_a, id_b));
  }
  bool contains(const std::string& id_a, const std::string& id_b) const {
    return pairs_.count(key(id_a, id_b)) != 0;
  }
  size_t size() const { return pairs_.size(); }

  void save_csv(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write truth set: " + path);
    csv::write_row(out, {"record_id_a", "record_id_b"});
    std::vector<std::string> sorted(pairs_.begin(), pairs_.end());
    std::sort(sorted.begin(), sorted.end());
    for (const auto& k : sorted) {
      size_t sep = k.find('\x1f');
      csv::write_row(out, {k.substr(0, sep), k.substr(sep + 1)});
    }
  }

  static TruthSet load_csv(const std::string& path) {
    auto rows = csv::read_file(path);
    if (rows.empty() || rows[0] != std::vector<std::string>{"record_id_a", "record_id_b"})
      throw DataError("truth csv missing expected header: " + path);
    TruthSet t;
    for (size_t i = 1; i < rows.size(); ++i) {
      if (rows[i].size() != 2) throw DataError("truth row has wrong arity: " + path);
      t.insert(rows[i][0], rows[i][1]);
    }
    return t;
  }

 private:
  static std::string key(const std::string& a, const std::string& b) { return a + '\x1f' + b; }
  std::unordered_set<std::string> pairs_;
};

struct MetricsReport {
  std::string party;   // "plain", "A", or "B"
  int repetition = 0;  // -1 on averaged rows
  bool averaged = false;
  uint64_t seed = 0;
  double tp = 0, fp = 0, fn = 0;  // doubles so averaged rows can carry means
  double precision = 1.0;
  bool precision_zero_den = false;
  double recall = 1.0;
  bool recall_zero_den = false;
  double match_seconds = 0.0;
  ExperimentConfig config;

  bool operator==(const MetricsReport&) const = default;
};

// Counts hits against the truth set. A truth pair missing from the match
// array counts as a miss, so tp + fn always equals |truth|.
inline MetricsReport score(const MatchArray& ma, const TruthSet& truth) {
  MetricsReport r;
  uint64_t tp = 0, fp = 0;
  for (const auto& e : ma.entries) {
    if (!e.predicted_match) continue;
    if (truth.contains(e.record_id_a, e.record_id_b))
      ++tp;
    else
      ++fp;
  }
  r.tp = static_cast<double>(tp);
  r.fp = static_cast<double>(fp);
  r.fn = static_cast<double>(truth.size() - tp);
  if (tp + fp > 0) {
    r.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  } else {
    r.precision = 1.0;
    r.precision_zero_den = true;
  }
  if (truth.size() > 0) {
    r.recall = static_cast<double>(tp) / static_cast<double>(truth.size());
  } else {
    r.recall = 1.0;
    r.recall_zero_den = true;
  }
  return r;
}

// Party B's database: a corrupted copy of every party A record under fresh
// B-side ids. Ground truth is the id pairing, not any similarity rule.
inline std::pair<RecordSet, TruthSet> make_party_b(const RecordSet& recs_a,
                                                   const CorruptionSpec& spec, uint64_t seed) {
  RecordSet recs_b = corrupt_recordset(recs_a, spec, seed);
  recs_b.party = Party::B;
  TruthSet truth;
  for (size_t i = 0; i < recs_b.records.size(); ++i) {
    std::string id_b = detail::mint_record_id(Party::B, i);
    truth.insert(recs_a.records[i].record_id, id_b);
    recs_b.records[i].record_id = std::move(id_b);
  }
  return {std::move(recs_b), std::move(truth)};
}

inline RecordSet training_prefix(const RecordSet& recs, size_t count) {
  RecordSet out;
  out.party = recs.party;
  out.schema = recs.schema;
  size_t n = std::min(count, recs.records.size());
  out.records.assign(recs.records.begin(), recs.records.begin() + static_cast<ptrdiff_t>(n));
  return out;
}

// One experiment cell: three pipelines (plain, split party A, split party B)
// per repetition, repetition seeds base + index, then one averaged row per
// party. Timing covers matching only.
inline std::vector<MetricsReport> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<MetricsReport> rows;
  for (int rep = 0; rep < cfg.repetitions; ++rep) {
    uint64_t rep_seed = cfg.rng_seed + static_cast<uint64_t>(rep);
    ExperimentConfig rep_cfg = cfg;
    rep_cfg.rng_seed = rep_seed;

    Fixture fx = generate_fixture({cfg.match_size, cfg.reference_size, rep_seed});
    CorruptionSpec corruption{cfg.errors_per_row, 100};
    auto [recs_b, truth] = make_party_b(fx.records, corruption, derive_seed(rep_seed, "party-b"));

    auto finish = [&](MetricsReport r, const char* party, double seconds) {
      r.party = party;
      r.repetition = rep;
      r.seed = rep_seed;
      r.match_seconds = seconds;
      r.config = rep_cfg;
      rows.push_back(std::move(r));
    };

    // Plain baseline: one central model on direct similarity features.
    SvmParams svm_params;
    svm_params.kernel = cfg.kernel;
    svm_params.c = cfg.c;
    svm_params.gamma = cfg.gamma;
    svm_params.seed = derive_seed(rep_seed, "plain-svm");
    SvmModel plain_model = train_plain_baseline(training_prefix(fx.records, cfg.training_size),
                                                corruption, svm_params,
                                                derive_seed(rep_seed, "plain"));
    auto t0 = std::chrono::steady_clock::now();
    MatchArray plain_ma = plain_match(fx.records, recs_b, plain_model);
    auto t1 = std::chrono::steady_clock::now();
    finish(score(plain_ma, truth), "plain", std::chrono::duration<double>(t1 - t0).count());

    // Split pipeline, both parties in process.
    auto [session_a, session_b] = run_in_process(fx.records, recs_b, fx.reference, rep_cfg);
    finish(score(session_a.matches, truth), "A", session_a.match_seconds);
    finish(score(session_b.matches, truth), "B", session_b.match_seconds);
  }

  // Averaged rows, arithmetic mean over repetitions in repetition order.
  for (const char* party : {"plain", "A", "B"}) {
    MetricsReport avg;
    avg.party = party;
    avg.repetition = -1;
    avg.averaged = true;
    avg.seed = cfg.rng_seed;
    avg.config = cfg;
    avg.precision = 0.0;
    avg.recall = 0.0;
    double n = 0;
    for (const auto& r : rows) {
      if (r.averaged || r.party != party) continue;
      avg.tp += r.tp;
      avg.fp += r.fp;
      avg.fn += r.fn;
      avg.precision += r.precision;
      avg.recall += r.recall;
      avg.match_seconds += r.match_seconds;
      avg.precision_zero_den |= r.precision_zero_den;
      avg.recall_zero_den |= r.recall_zero_den;
      n += 1.0;
    }
    avg.tp /= n;
    avg.fp /= n;
    avg.fn /= n;
    avg.precision /= n;
    avg.recall /= n;
    avg.match_seconds /= n;
    rows.push_back(std::move(avg));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Report CSV.

inline const std::vector<std::string>& report_header() {
  static const std::vector<std::string> header = {
      "party",          "repetition",    "averaged",       "seed",
      "kernel",         "c",             "gamma",          "errors_per_row",
      "mapping",        "training_size", "reference_size", "match_size",
      "repetitions",    "tp",            "fp",             "fn",
      "precision",      "precision_zero_den",              "recall",
      "recall_zero_den","match_seconds"};
  return header;
}

inline void save_reports(const std::vector<MetricsReport>& rows, std::ostream& out) {
  csv::write_row(out, report_header());
  for (const auto& r : rows) {
    const ExperimentConfig& c = r.config;
    csv::write_row(
        out, {r.party, std::to_string(r.repetition), r.averaged ? "1" : "0",
              std::to_string(r.seed), kernel_name(c.kernel), format_double(c.c),
              c.gamma == 0.0 ? std::string("auto") : format_double(c.gamma),
              std::to_string(c.errors_per_row), c.mapping, std::to_string(c.training_size),
              std::to_string(c.reference_size), std::to_string(c.match_size),
              std::to_string(c.repetitions), format_double(r.tp), format_double(r.fp),
              format_double(r.fn), format_double(r.precision), r.precision_zero_den ? "1" : "0",
              format_double(r.recall), r.recall_zero_den ? "1" : "0",
              format_double(r.match_seconds)});
  }
}

inline void save_reports(const std::vector<MetricsReport>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write reports: " + path);
  save_reports(rows, out);
}

inline std::vector<MetricsReport> load_reports(const std::string& path) {
  auto rows = csv::read_file(path);
  if (rows.empty() || rows[0] != report_header())
    throw DataError("report csv missing expected header: " + path);
  std::vector<MetricsReport> out;
  auto parse_bool = [&path](const std::string& s) {
    if (s == "1") return true;
    if (s == "0") return false;
    throw DataError("flag must be 0 or 1 in " + path);
  };
  for (size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() != report_header().size())
      throw DataError("report row has wrong arity: " + path);
    MetricsReport r;
    r.party = row[0];
    r.repetition = static_cast<int>(std::stol(row[1]));
    r.averaged = parse_bool(row[2]);
    r.seed = parse_u64(row[3], "seed");
    r.config.kernel = kernel_from_name(row[4]);
    r.config.c = parse_double(row[5], "c");
    r.config.gamma = row[6] == "auto" ? 0.0 : parse_double(row[6], "gamma");
    r.config.errors_per_row = static_cast<int>(parse_u64(row[7], "errors_per_row"));
    r.config.mapping = row[8];
    r.config.training_size = static_cast<size_t>(parse_u64(row[9], "training_size"));
    r.config.reference_size = static_cast<size_t>(parse_u64(row[10], "reference_size"));
    r.config.match_size = static_cast<size_t>(parse_u64(row[11], "match_size"));
    r.config.repetitions = static_cast<int>(parse_u64(row[12], "repetitions"));
    r.config.rng_seed = r.seed;
    r.tp = parse_double(row[13], "tp");
    r.fp = parse_double(row[14], "fp");
    r.fn = parse_double(row[15], "fn");
    r.precision = parse_double(row[16], "precision");
    r.precision_zero_den = parse_bool(row[17]);
    r.recall = parse_double(row[18], "recall");
    r.recall_zero_den = parse_bool(row[19]);
    r.match_seconds = parse_double(row[20], "match_seconds");
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Figure data: long-format (x, series, y) CSVs, one per metric, x = match
// size, one series per (method, kernel, reference size, training size).
// Averaged rows are preferred when present.

inline void emit_figure_data(const std::vector<MetricsReport>& rows, const std::string& out_dir) {
  if (rows.empty()) throw DataError("no reports to plot");
  std::vector<const MetricsReport*> selected;
  for (const auto& r : rows)
    if (r.averaged) selected.push_back(&r);
  if (selected.empty())
    for (const auto& r : rows) selected.push_back(&r);

  std::filesystem::create_directories(out_dir);
  auto emit = [&](const std::string& filename, auto metric) {
    std::ofstream out(std::filesystem::path(out_dir) / filename, std::ios::binary);
    if (!out) throw DataError("cannot write figure data: " + filename);
    csv::write_row(out, {"x", "series", "y"});
    for (const MetricsReport* r : selected) {
      std::string method = r->party == "plain" ? "plain" : "split-" + r->party;
      std::string series = method + "-" + kernel_name(r->config.kernel) + "-rs" +
                           std::to_string(r->config.reference_size) + "-train" +
                           std::to_string(r->config.training_size);
      csv::write_row(out, {std::to_string(r->config.match_size), series,
                           format_double(metric(*r))});
    }
  };
  emit("precision.csv", [](const MetricsReport& r) { return r.precision; });
  emit("recall.csv", [](const MetricsReport& r) { return r.recall; });
  emit("match_seconds.csv", [](const MetricsReport& r) { return r.match_seconds; });
}

}  // namespace splitlink
