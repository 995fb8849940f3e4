#include <unordered_set>

#include "catch2/catch_amalgamated.hpp"
#include "splitlink/datagen.hpp"
#include "splitlink/distance.hpp"
#include "splitlink/namegen.hpp"

using namespace splitlink;

TEST_CASE("name pools are large, clean, and split across sides", "[namegen]") {
  const NamePools& pools = fixture_pools();
  CHECK(pools.record_first.size() >= 2000);
  CHECK(pools.record_last.size() >= 2000);
  CHECK(pools.reference_first.size() >= 80);
  CHECK(pools.reference_last.size() >= 80);

  auto well_formed = [](const std::vector<std::string>& pool) {
    std::unordered_set<std::string> seen;
    for (const auto& name : pool) {
      if (name.empty() || name.size() > 12) return false;
      for (char c : name)
        if (c < 'A' || c > 'Z') return false;
      if (!seen.insert(name).second) return false;
    }
    return true;
  };
  CHECK(well_formed(pools.record_first));
  CHECK(well_formed(pools.record_last));
  CHECK(well_formed(pools.reference_first));
  CHECK(well_formed(pools.reference_last));
}

TEST_CASE("record and reference names stay at least three edits apart", "[namegen]") {
  const NamePools& pools = fixture_pools();
  std::vector<std::string> reference = pools.reference_first;
  reference.insert(reference.end(), pools.reference_last.begin(), pools.reference_last.end());

  uint32_t min_seen = UINT32_MAX;
  auto check_side = [&](const std::vector<std::string>& side) {
    for (const auto& rec : side)
      for (const auto& ref : reference) min_seen = std::min(min_seen, edit_distance(rec, ref));
  };
  check_side(pools.record_first);
  check_side(pools.record_last);
  CHECK(min_seen >= 3);
}

TEST_CASE("fixtures honor counts, ids, and uniqueness", "[namegen]") {
  Fixture fx = generate_fixture({120, 90, 4});
  CHECK(fx.records.party == Party::A);
  CHECK(fx.records.schema == std::vector<std::string>{"first", "middle", "last"});
  REQUIRE(fx.records.records.size() == 120);
  CHECK(fx.records.records[0].record_id == "A-000000");
  CHECK(fx.records.records[119].record_id == "A-000119");

  std::unordered_set<std::string> triples;
  for (const auto& r : fx.records.records) {
    REQUIRE(r.values.size() == 3);
    triples.insert(r.values[0] + "\x1f" + r.values[1] + "\x1f" + r.values[2]);
  }
  CHECK(triples.size() == fx.records.records.size());

  CHECK(fx.reference.schema == std::vector<std::string>{"first", "last"});
  REQUIRE(fx.reference.rows.size() == 90);
  std::unordered_set<std::string> ref_rows;
  for (const auto& row : fx.reference.rows) ref_rows.insert(row[0] + "\x1f" + row[1]);
  CHECK(ref_rows.size() == fx.reference.rows.size());
}

TEST_CASE("fixtures are deterministic in the seed", "[namegen]") {
  Fixture a = generate_fixture({50, 40, 9});
  Fixture b = generate_fixture({50, 40, 9});
  Fixture c = generate_fixture({50, 40, 10});
  CHECK(a.records.records == b.records.records);
  CHECK(a.reference.rows == b.reference.rows);
  CHECK(a.records.records != c.records.records);
}

TEST_CASE("fixture records stay disjoint from the reference even corrupted", "[namegen]") {
  Fixture fx = generate_fixture({200, 150, 13});
  CHECK(validate_disjointness(fx.reference, fx.records));

  // one edit moves a value at most two units, the pools guarantee three
  CorruptionSpec spec;
  spec.errors_per_row = 1;
  RecordSet corrupted = corrupt_recordset(fx.records, spec, 14);
  CHECK(validate_disjointness(fx.reference, corrupted));
}

TEST_CASE("fixture construction rejects impossible sizes", "[namegen]") {
  CHECK_THROWS_AS(generate_fixture({0, 10, 1}), ConfigError);
  CHECK_THROWS_AS(generate_fixture({10, 0, 1}), ConfigError);
  CHECK_THROWS_AS(generate_fixture({10, 100000000, 1}), ConfigError);
}
