#include "catch2/catch_amalgamated.hpp"
#include "splitlink/datagen.hpp"
#include "splitlink/smashing.hpp"

using namespace splitlink;

namespace {

RecordSet small_recordset() {
  RecordSet rs;
  rs.schema = {"first", "last"};
  rs.records.push_back({"A-000000", {"ADA", "KING"}});
  rs.records.push_back({"A-000001", {"BEA", "STONE"}});
  rs.records.push_back({"A-000002", {"GUS", "HART"}});
  rs.records.push_back({"A-000003", {"LEE", "MARSH"}});
  return rs;
}

}  // namespace

TEST_CASE("deduplicate keeps the first of each value tuple", "[datagen]") {
  RecordSet rs;
  rs.schema = {"first", "last"};
  rs.records.push_back({"A-000000", {"ADA", "KING"}});
  rs.records.push_back({"A-000001", {"ADA", "KING"}});
  rs.records.push_back({"A-000002", {"ADA", "KINGS"}});
  RecordSet unique = deduplicate(rs);
  REQUIRE(unique.records.size() == 2);
  CHECK(unique.records[0].record_id == "A-000000");
  CHECK(unique.records[1].record_id == "A-000002");
}

TEST_CASE("corruption changes the record but keeps it close", "[datagen]") {
  Record rec{"A-000000", {"ADELINE", "THOMPSON"}};
  for (int errors = 1; errors <= 3; ++errors) {
    CorruptionSpec spec;
    spec.errors_per_row = errors;
    for (uint64_t seed = 0; seed < 50; ++seed) {
      Rng rng(seed);
      Record got = corrupt_record(rec, spec, rng);
      CHECK(got.record_id == rec.record_id);
      CHECK(got.values != rec.values);
      uint32_t total = 0;
      for (size_t i = 0; i < rec.values.size(); ++i)
        total += edit_distance(rec.values[i], got.values[i]);
      CHECK(total >= 1);
      // one swap counts as two unit edits, so the bound is 2 per error
      CHECK(total <= static_cast<uint32_t>(2 * errors));
      for (const auto& v : got.values)
        for (char c : v) CHECK((c >= 'A' && c <= 'Z'));
    }
  }
}

TEST_CASE("corruption is deterministic per seed", "[datagen]") {
  RecordSet rs = small_recordset();
  CorruptionSpec spec;
  RecordSet a = corrupt_recordset(rs, spec, 99);
  RecordSet b = corrupt_recordset(rs, spec, 99);
  RecordSet c = corrupt_recordset(rs, spec, 100);
  CHECK(a.records == b.records);
  CHECK(a.records != c.records);
}

TEST_CASE("corruption of a prefix matches the full run record-for-record", "[datagen]") {
  RecordSet rs = small_recordset();
  RecordSet prefix = rs;
  prefix.records.resize(2);
  CorruptionSpec spec;
  RecordSet full = corrupt_recordset(rs, spec, 7);
  RecordSet part = corrupt_recordset(prefix, spec, 7);
  CHECK(full.records[0] == part.records[0]);
  CHECK(full.records[1] == part.records[1]);
}

TEST_CASE("training data emits 2n examples with alternating labels", "[datagen]") {
  RecordSet rs = small_recordset();
  ReferenceSet ref;
  ref.schema = {"first", "last"};
  ref.rows = {{"CHARLIE", "ADLER"}, {"JAY", "WINTER"}};
  AttributeMapping mapping = AttributeMapping::infer(rs.schema, ref.schema);

  RecordSet corrupted = corrupt_recordset(rs, CorruptionSpec{}, 11);
  auto orig_smashed = smash_recordset(rs, ref, mapping);
  auto corr_smashed = smash_recordset(corrupted, ref, mapping);

  auto data = build_training_data(orig_smashed, corr_smashed, 5);
  REQUIRE(data.size() == 2 * rs.records.size());
  for (size_t i = 0; i < rs.records.size(); ++i) {
    CHECK(data[2 * i].label == 1);
    CHECK(data[2 * i + 1].label == 0);
    CHECK(data[2 * i].features == group_distance(orig_smashed[i], corr_smashed[i]));
  }

  auto again = build_training_data(orig_smashed, corr_smashed, 5);
  CHECK(again == data);
  auto other = build_training_data(orig_smashed, corr_smashed, 6);
  CHECK(other != data);
}

TEST_CASE("training data needs at least two records", "[datagen]") {
  std::vector<SmashedVector> one(1), mismatch(3);
  CHECK_THROWS_AS(build_training_data(one, one, 1), DataError);
  CHECK_THROWS_AS(build_training_data(mismatch, one, 1), DataError);
}
