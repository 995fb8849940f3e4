#pragma once
// Domain types shared by every other module: records and recordsets, the
// public reference set, the attribute mapping, smashed distance vectors,
// labeled training examples, match arrays, and the experiment configuration.
// Also owns the CSV/key-value serialization contracts for those types.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "splitlink/common.hpp"
#include "splitlink/csv.hpp"

namespace splitlink {

enum class Party : uint8_t { A, B };

inline char party_char(Party p) { return p == Party::A ? 'A' : 'B'; }

inline Party party_from_char(char c) {
  if (c == 'A' || c == 'a') return Party::A;
  if (c == 'B' || c == 'b') return Party::B;
  throw ConfigError(std::string("unknown party: ") + c);
}

enum class Kernel : uint8_t { Linear, Rbf };

inline const char* kernel_name(Kernel k) { return k == Kernel::Linear ? "linear" : "rbf"; }

inline Kernel kernel_from_name(std::string_view name) {
  if (name == "linear") return Kernel::Linear;
  if (name == "rbf") return Kernel::Rbf;
  throw ConfigError("unknown kernel: " + std::string(name));
}

// Formats a double with 17 significant digits, enough to reparse bit-exactly.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& s, const char* what) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError(std::string("cannot parse number for ") + what + ": '" + s + "'");
  }
}

inline uint64_t parse_u64(const std::string& s, const char* what) {
  // stoull tolerates signs and whitespace; counts and seeds must be plain digits
  try {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
      throw std::invalid_argument(s);
    return std::stoull(s);
  } catch (const std::exception&) {
    throw DataError(std::string("cannot parse integer for ") + what + ": '" + s + "'");
  }
}

// ---------------------------------------------------------------------------
// Records. A record's values are ordered exactly like its owning set's schema;
// the id is an opaque handle minted at load time and never derived from the
// attribute content.

struct Record {
  std::string record_id;
  std::vector<std::string> values;

  bool operator==(const Record&) const = default;
};

struct RecordSet {
  Party party = Party::A;
  std::vector<std::string> schema;
  std::vector<Record> records;

  size_t attribute_index(std::string_view name) const {
    for (size_t i = 0; i < schema.size(); ++i)
      if (schema[i] == name) return i;
    throw ConfigError("unknown record attribute: " + std::string(name));
  }

  bool operator==(const RecordSet&) const = default;
};

struct ReferenceSet {
  std::vector<std::string> schema;
  std::vector<std::vector<std::string>> rows;

  size_t attribute_index(std::string_view name) const {
    for (size_t i = 0; i < schema.size(); ++i)
      if (schema[i] == name) return i;
    throw ConfigError("unknown reference attribute: " + std::string(name));
  }

  bool operator==(const ReferenceSet&) const = default;
};

// ---------------------------------------------------------------------------
// Attribute mapping: which (record attribute, reference attribute) pairs get a
// distance group. Pair order is part of the cross-party agreement; both sides
// must use the identical mapping for cosine comparison to line up.

struct AttributeMapping {
  std::vector<std::pair<std::string, std::string>> pairs;

  bool operator==(const AttributeMapping&) const = default;

  // Record attributes whose name also appears in the reference schema map
  // 1:1 first (in record order); every remaining record attribute then maps
  // to all reference attributes.
  static AttributeMapping infer(const std::vector<std::string>& record_schema,
                                const std::vector<std::string>& reference_schema) {
    AttributeMapping m;
    auto in_reference = [&](const std::string& name) {
      return std::find(reference_schema.begin(), reference_schema.end(), name) !=
             reference_schema.end();
    };
    for (const auto& attr : record_schema)
      if (in_reference(attr)) m.pairs.emplace_back(attr, attr);
    for (const auto& attr : record_schema)
      if (!in_reference(attr))
        for (const auto& ref : reference_schema) m.pairs.emplace_back(attr, ref);
    if (m.pairs.empty()) throw ConfigError("inferred attribute mapping is empty");
    return m;
  }

  // Text form: "recattr:refattr,recattr:refattr,...". "auto" means infer.
  static AttributeMapping parse(std::string_view text) {
    AttributeMapping m;
    size_t pos = 0;
    while (pos <= text.size()) {
      size_t comma = text.find(',', pos);
      std::string_view item =
          text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
      size_t colon = item.find(':');
      if (colon == std::string_view::npos)
        throw ConfigError("mapping entry missing ':': " + std::string(item));
      m.pairs.emplace_back(std::string(item.substr(0, colon)), std::string(item.substr(colon + 1)));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (m.pairs.empty()) throw ConfigError("empty attribute mapping");
    return m;
  }

  std::string to_string() const {
    std::string out;
    for (size_t i = 0; i < pairs.size(); ++i) {
      if (i) out.push_back(',');
      out += pairs[i].first;
      out.push_back(':');
      out += pairs[i].second;
    }
    return out;
  }
};

// Mapping with attribute names resolved to column indices against concrete
// schemas. Checks every name and enforces the pairs <= k*m bound.
struct ResolvedMapping {
  std::vector<std::pair<size_t, size_t>> index_pairs;
};

inline ResolvedMapping resolve_mapping(const AttributeMapping& mapping,
                                       const std::vector<std::string>& record_schema,
                                       const std::vector<std::string>& reference_schema) {
  ResolvedMapping r;
  r.index_pairs.reserve(mapping.pairs.size());
  auto find_in = [](const std::vector<std::string>& schema, const std::string& name,
                    const char* side) {
    auto it = std::find(schema.begin(), schema.end(), name);
    if (it == schema.end())
      throw ConfigError(std::string("mapping names unknown ") + side + " attribute: " + name);
    return static_cast<size_t>(it - schema.begin());
  };
  for (const auto& [rec_attr, ref_attr] : mapping.pairs)
    r.index_pairs.emplace_back(find_in(record_schema, rec_attr, "record"),
                               find_in(reference_schema, ref_attr, "reference"));
  if (r.index_pairs.size() > record_schema.size() * reference_schema.size())
    throw ConfigError("mapping has more pairs than record x reference attribute combinations");
  return r;
}

// ---------------------------------------------------------------------------
// Smashed vector: per record, one distance group per mapping pair, each group
// holding the edit distances to every reference row. Carries the opaque id
// and numbers only; this is the sole payload that crosses the party boundary.

struct SmashedVector {
  std::string record_id;
  std::vector<std::vector<uint32_t>> groups;

  bool operator==(const SmashedVector&) const = default;
};

// One cosine distance per mapping pair, each in [0, 2].
using FeatureVector = std::vector<double>;

struct LabeledExample {
  FeatureVector features;
  int label = 0;  // 1 = match, 0 = non-match

  bool operator==(const LabeledExample&) const = default;
};

// ---------------------------------------------------------------------------
// Match array: classified cross-party record pairs, canonically ordered.

struct MatchArray {
  struct Entry {
    std::string record_id_a;
    std::string record_id_b;
    double decision_value = 0.0;
    bool predicted_match = false;

    bool operator==(const Entry&) const = default;
  };

  std::vector<Entry> entries;

  bool operator==(const MatchArray&) const = default;

  // Sorts lexicographically by (record_id_a, record_id_b) and rejects
  // duplicate pairs. Predicted flags must agree with the decision sign.
  void canonicalize() {
    auto key_less = [](const Entry& x, const Entry& y) {
      return x.record_id_a != y.record_id_a ? x.record_id_a < y.record_id_a
                                            : x.record_id_b < y.record_id_b;
    };
    if (!std::is_sorted(entries.begin(), entries.end(), key_less))
      std::sort(entries.begin(), entries.end(), key_less);
    for (size_t i = 1; i < entries.size(); ++i)
      if (entries[i - 1].record_id_a == entries[i].record_id_a &&
          entries[i - 1].record_id_b == entries[i].record_id_b)
        throw DataError("duplicate match pair: (" + entries[i].record_id_a + ", " +
                        entries[i].record_id_b + ")");
    for (const auto& e : entries)
      if (e.predicted_match != (e.decision_value >= 0.0))
        throw DataError("predicted flag disagrees with decision sign for (" + e.record_id_a +
                        ", " + e.record_id_b + ")");
  }

  size_t predicted_match_count() const {
    size_t n = 0;
    for (const auto& e : entries) n += e.predicted_match;
    return n;
  }

  void write_csv(std::ostream& out) const {
    csv::write_row(out, {"record_id_a", "record_id_b", "decision_value", "predicted"});
    for (const auto& e : entries)
      csv::write_row(out, {e.record_id_a, e.record_id_b, format_double(e.decision_value),
                           e.predicted_match ? "1" : "0"});
  }

  void save_csv(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write match array: " + path);
    write_csv(out);
  }

  static MatchArray load_csv(const std::string& path) {
    auto rows = csv::read_file(path);
    if (rows.empty() || rows[0] != std::vector<std::string>{"record_id_a", "record_id_b",
                                                            "decision_value", "predicted"})
      throw DataError("match array csv missing expected header: " + path);
    MatchArray ma;
    ma.entries.reserve(rows.size() - 1);
    for (size_t i = 1; i < rows.size(); ++i) {
      if (rows[i].size() != 4) throw DataError("match array row has wrong arity: " + path);
      Entry e;
      e.record_id_a = rows[i][0];
      e.record_id_b = rows[i][1];
      e.decision_value = parse_double(rows[i][2], "decision_value");
      if (rows[i][3] == "1")
        e.predicted_match = true;
      else if (rows[i][3] == "0")
        e.predicted_match = false;
      else
        throw DataError("predicted must be 0 or 1: " + path);
      ma.entries.push_back(std::move(e));
    }
    return ma;
  }
};

// ---------------------------------------------------------------------------
// Experiment configuration. Loads from a flat key=value file; every key can
// also be set from the command line.

struct ExperimentConfig {
  Kernel kernel = Kernel::Linear;
  double c = 100.0;
  double gamma = 0.0;  // 0 = auto (resolved from training data when kernel is rbf)
  uint64_t rng_seed = 1;
  int errors_per_row = 1;
  std::string mapping = "auto";  // "auto" or AttributeMapping::parse text
  size_t training_size = 2000;
  size_t reference_size = 2000;
  size_t match_size = 2000;
  int repetitions = 3;

  bool operator==(const ExperimentConfig&) const = default;

  void validate() const {
    if (c <= 0.0) throw ConfigError("c must be positive");
    if (gamma < 0.0) throw ConfigError("gamma must be positive or auto");
    if (errors_per_row < 1) throw ConfigError("errors_per_row must be >= 1");
    if (training_size < 2) throw ConfigError("training_size must be >= 2");
    if (reference_size < 1) throw ConfigError("reference_size must be >= 1");
    if (match_size < 1) throw ConfigError("match_size must be >= 1");
    if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
  }

  void set(const std::string& key, const std::string& value) {
    if (key == "kernel")
      kernel = kernel_from_name(value);
    else if (key == "c")
      c = parse_double(value, "c");
    else if (key == "gamma")
      gamma = value == "auto" ? 0.0 : parse_double(value, "gamma");
    else if (key == "rng_seed")
      rng_seed = parse_u64(value, "rng_seed");
    else if (key == "errors_per_row")
      errors_per_row = static_cast<int>(parse_u64(value, "errors_per_row"));
    else if (key == "mapping")
      mapping = value;
    else if (key == "training_size")
      training_size = static_cast<size_t>(parse_u64(value, "training_size"));
    else if (key == "reference_size")
      reference_size = static_cast<size_t>(parse_u64(value, "reference_size"));
    else if (key == "match_size")
      match_size = static_cast<size_t>(parse_u64(value, "match_size"));
    else if (key == "repetitions")
      repetitions = static_cast<int>(parse_u64(value, "repetitions"));
    else
      throw ConfigError("unknown config key: " + key);
  }

  static ExperimentConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    ExperimentConfig cfg;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      std::string_view v(line);
      size_t start = v.find_first_not_of(" \t");
      if (start == std::string_view::npos) continue;
      v = v.substr(start);
      if (v[0] == '#') continue;
      size_t eq = v.find('=');
      if (eq == std::string_view::npos)
        throw ConfigError("config line " + std::to_string(lineno) + " is not key=value");
      auto trim = [](std::string_view s) {
        size_t b = s.find_first_not_of(" \t");
        size_t e = s.find_last_not_of(" \t");
        return b == std::string_view::npos ? std::string() : std::string(s.substr(b, e - b + 1));
      };
      cfg.set(trim(v.substr(0, eq)), trim(v.substr(eq + 1)));
    }
    cfg.validate();
    return cfg;
  }

  void save(std::ostream& out) const {
    out << "kernel=" << kernel_name(kernel) << '\n';
    out << "c=" << format_double(c) << '\n';
    out << "gamma=" << (gamma == 0.0 ? std::string("auto") : format_double(gamma)) << '\n';
    out << "rng_seed=" << rng_seed << '\n';
    out << "errors_per_row=" << errors_per_row << '\n';
    out << "mapping=" << mapping << '\n';
    out << "training_size=" << training_size << '\n';
    out << "reference_size=" << reference_size << '\n';
    out << "match_size=" << match_size << '\n';
    out << "repetitions=" << repetitions << '\n';
  }

  AttributeMapping resolve_mapping_for(const std::vector<std::string>& record_schema,
                                       const std::vector<std::string>& reference_schema) const {
    return mapping == "auto" ? AttributeMapping::infer(record_schema, reference_schema)
                             : AttributeMapping::parse(mapping);
  }
};

// ---------------------------------------------------------------------------
// Disjointness predicate: true iff no attribute value of the recordset occurs
// anywhere in the reference set (case-folded exact comparison).

inline bool validate_disjointness(const ReferenceSet& rs, const RecordSet& recs) {
  std::unordered_set<std::string> reference_values;
  for (const auto& row : rs.rows)
    for (const auto& v : row) reference_values.insert(normalize_value(v));
  for (const auto& r : recs.records)
    for (const auto& v : r.values)
      if (reference_values.count(normalize_value(v))) return false;
  return true;
}

// ---------------------------------------------------------------------------
// CSV loading. Files carry a header row; columns may be selected by name.
// Values are normalized (trimmed, upcased) on the way in. Record ids come
// from an explicit id column or are minted as "<party>-<row number>".

struct LoadOptions {
  std::vector<std::string> columns;  // empty: every column except the id column
  std::string id_column;             // empty: mint ids from the row number
};

namespace detail {

inline std::vector<size_t> select_columns(const std::vector<std::string>& header,
                                          const std::vector<std::string>& wanted,
                                          std::optional<size_t> skip_index,
                                          const std::string& path) {
  std::vector<size_t> indices;
  if (wanted.empty()) {
    for (size_t i = 0; i < header.size(); ++i)
      if (!skip_index || *skip_index != i) indices.push_back(i);
  } else {
    for (const auto& name : wanted) {
      auto it = std::find(header.begin(), header.end(), name);
      if (it == header.end()) throw DataError("column '" + name + "' not found in " + path);
      indices.push_back(static_cast<size_t>(it - header.begin()));
    }
  }
  if (indices.empty()) throw DataError("no data columns selected from " + path);
  return indices;
}

inline std::string mint_record_id(Party party, size_t row) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%c-%06zu", party_char(party), row);
  return buf;
}

}  // namespace detail

inline RecordSet load_recordset_csv(const std::string& path, Party party,
                                    const LoadOptions& options = {}) {
  auto rows = csv::read_file(path);
  if (rows.empty()) throw DataError("recordset csv has no header row: " + path);
  const auto& header = rows[0];
  std::optional<size_t> id_index;
  if (!options.id_column.empty()) {
    auto it = std::find(header.begin(), header.end(), options.id_column);
    if (it == header.end())
      throw DataError("id column '" + options.id_column + "' not found in " + path);
    id_index = static_cast<size_t>(it - header.begin());
  }
  auto indices = detail::select_columns(header, options.columns, id_index, path);

  RecordSet rs;
  rs.party = party;
  for (size_t i : indices) rs.schema.push_back(header[i]);
  rs.records.reserve(rows.size() - 1);
  for (size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    Record rec;
    rec.record_id = id_index ? (*id_index < row.size() ? row[*id_index] : std::string())
                             : detail::mint_record_id(party, r - 1);
    if (rec.record_id.empty()) throw DataError("empty record id at row " + std::to_string(r));
    rec.values.reserve(indices.size());
    for (size_t i : indices)
      rec.values.push_back(i < row.size() ? normalize_value(row[i]) : std::string());
    rs.records.push_back(std::move(rec));
  }
  std::unordered_set<std::string_view> seen;
  for (const auto& rec : rs.records)
    if (!seen.insert(rec.record_id).second)
      throw DataError("duplicate record id '" + rec.record_id + "' in " + path);
  return rs;
}

inline void save_recordset_csv(const RecordSet& rs, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write recordset: " + path);
  std::vector<std::string> header{"record_id"};
  header.insert(header.end(), rs.schema.begin(), rs.schema.end());
  csv::write_row(out, header);
  for (const auto& rec : rs.records) {
    std::vector<std::string> row{rec.record_id};
    row.insert(row.end(), rec.values.begin(), rec.values.end());
    csv::write_row(out, row);
  }
}

inline ReferenceSet load_referenceset_csv(const std::string& path,
                                          const std::vector<std::string>& columns = {}) {
  auto rows = csv::read_file(path);
  if (rows.empty()) throw DataError("reference csv has no header row: " + path);
  auto indices = detail::select_columns(rows[0], columns, std::nullopt, path);
  ReferenceSet rs;
  for (size_t i : indices) rs.schema.push_back(rows[0][i]);
  rs.rows.reserve(rows.size() - 1);
  for (size_t r = 1; r < rows.size(); ++r) {
    std::vector<std::string> row;
    row.reserve(indices.size());
    for (size_t i : indices)
      row.push_back(i < rows[r].size() ? normalize_value(rows[r][i]) : std::string());
    rs.rows.push_back(std::move(row));
  }
  if (rs.rows.empty()) throw DataError("reference set is empty: " + path);
  return rs;
}

inline void save_referenceset_csv(const ReferenceSet& rs, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write reference set: " + path);
  csv::write_row(out, rs.schema);
  for (const auto& row : rs.rows) csv::write_row(out, row);
}

}  // namespace splitlink
