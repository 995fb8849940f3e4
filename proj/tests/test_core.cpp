#include <fstream>
#include <sstream>

#include "catch2/catch_amalgamated.hpp"
#include "splitlink/core.hpp"
#include "testutil.hpp"

using namespace splitlink;

TEST_CASE("party and kernel names round trip", "[core]") {
  CHECK(party_from_char(party_char(Party::A)) == Party::A);
  CHECK(party_from_char(party_char(Party::B)) == Party::B);
  CHECK_THROWS_AS(party_from_char('C'), ConfigError);
  CHECK(kernel_from_name("linear") == Kernel::Linear);
  CHECK(kernel_from_name("rbf") == Kernel::Rbf);
  CHECK_THROWS_AS(kernel_from_name("poly"), ConfigError);
}

TEST_CASE("numeric parsing rejects trailing garbage", "[core]") {
  CHECK(parse_double("1.5", "x") == 1.5);
  CHECK(parse_u64("42", "x") == 42);
  CHECK_THROWS_AS(parse_double("1.5abc", "x"), DataError);
  CHECK_THROWS_AS(parse_u64("", "x"), DataError);
  CHECK_THROWS_AS(parse_u64("-3", "x"), DataError);
}

TEST_CASE("format_double round trips through parse", "[core]") {
  for (double v : {0.0, 1.0, -2.5, 1e-17, 3.141592653589793, 1e300}) {
    CHECK(parse_double(format_double(v), "v") == v);
  }
}

TEST_CASE("mapping inference pairs same names then crosses the rest", "[core]") {
  AttributeMapping m = AttributeMapping::infer({"first", "middle", "last"}, {"first", "last"});
  std::vector<std::pair<std::string, std::string>> want = {
      {"first", "first"}, {"last", "last"}, {"middle", "first"}, {"middle", "last"}};
  CHECK(m.pairs == want);
}

TEST_CASE("mapping text round trips", "[core]") {
  AttributeMapping m = AttributeMapping::parse("first:first,middle:last");
  CHECK(m.to_string() == "first:first,middle:last");
  CHECK(AttributeMapping::parse(m.to_string()) == m);
  CHECK_THROWS_AS(AttributeMapping::parse("nocolon"), ConfigError);
}

TEST_CASE("resolve_mapping names the missing attribute", "[core]") {
  AttributeMapping m = AttributeMapping::parse("first:bogus");
  try {
    resolve_mapping(m, {"first"}, {"ref"});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("bogus") != std::string::npos);
  }
}

TEST_CASE("match array canonicalizes and rejects duplicates", "[core]") {
  MatchArray ma;
  ma.entries.push_back({"A-2", "B-1", 1.0, true});
  ma.entries.push_back({"A-1", "B-2", -0.5, false});
  ma.entries.push_back({"A-1", "B-1", 0.0, true});
  ma.canonicalize();
  REQUIRE(ma.entries.size() == 3);
  CHECK(ma.entries[0].record_id_a == "A-1");
  CHECK(ma.entries[0].record_id_b == "B-1");
  CHECK(ma.entries[2].record_id_a == "A-2");

  MatchArray dup;
  dup.entries.push_back({"A-1", "B-1", 1.0, true});
  dup.entries.push_back({"A-1", "B-1", 0.5, true});
  CHECK_THROWS_AS(dup.canonicalize(), DataError);

  MatchArray bad;
  bad.entries.push_back({"A-1", "B-1", 1.0, false});
  CHECK_THROWS_AS(bad.canonicalize(), DataError);
}

TEST_CASE("match array csv round trips", "[core]") {
  testutil::TempDir tmp;
  MatchArray ma;
  ma.entries.push_back({"A-000001", "B-000002", 0.125, true});
  ma.entries.push_back({"A-000002", "B-000001", -3.5, false});
  ma.canonicalize();
  ma.save_csv(tmp.file("ma.csv"));
  MatchArray loaded = MatchArray::load_csv(tmp.file("ma.csv"));
  REQUIRE(loaded.entries.size() == ma.entries.size());
  for (size_t i = 0; i < ma.entries.size(); ++i) {
    CHECK(loaded.entries[i].record_id_a == ma.entries[i].record_id_a);
    CHECK(loaded.entries[i].record_id_b == ma.entries[i].record_id_b);
    CHECK(loaded.entries[i].decision_value == ma.entries[i].decision_value);
    CHECK(loaded.entries[i].predicted_match == ma.entries[i].predicted_match);
  }
}

TEST_CASE("experiment config validates and round trips", "[core]") {
  ExperimentConfig cfg;
  cfg.kernel = Kernel::Rbf;
  cfg.c = 0.01;
  cfg.gamma = 0.25;
  cfg.rng_seed = 77;
  cfg.match_size = 123;
  cfg.validate();

  testutil::TempDir tmp;
  {
    std::ofstream out(tmp.file("cfg"));
    cfg.save(out);
  }
  CHECK(ExperimentConfig::load(tmp.file("cfg")) == cfg);

  ExperimentConfig bad;
  bad.c = -1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS(bad.set("nonsense", "1"), ConfigError);

  ExperimentConfig gamma_auto;
  gamma_auto.set("gamma", "auto");
  CHECK(gamma_auto.gamma == 0.0);
}

TEST_CASE("recordset csv loads mint ids and normalize values", "[core]") {
  testutil::TempDir tmp;
  {
    std::ofstream out(tmp.file("r.csv"));
    out << "first,middle,last\n ada ,ivy,king\nBea,Max,Stone\n";
  }
  RecordSet rs = load_recordset_csv(tmp.file("r.csv"), Party::A);
  REQUIRE(rs.records.size() == 2);
  CHECK(rs.schema == std::vector<std::string>{"first", "middle", "last"});
  CHECK(rs.records[0].record_id == "A-000000");
  CHECK(rs.records[0].values == std::vector<std::string>{"ADA", "IVY", "KING"});
  CHECK(rs.records[1].values == std::vector<std::string>{"BEA", "MAX", "STONE"});

  save_recordset_csv(rs, tmp.file("r2.csv"));
  RecordSet reloaded = load_recordset_csv(tmp.file("r2.csv"), Party::A, {{}, "record_id"});
  CHECK(reloaded.schema == rs.schema);
  CHECK(reloaded.records == rs.records);
}

TEST_CASE("recordset csv selects columns and rejects duplicate ids", "[core]") {
  testutil::TempDir tmp;
  {
    std::ofstream out(tmp.file("r.csv"));
    out << "id,first,junk,last\n1,ada,zz,king\n1,bea,yy,stone\n";
  }
  LoadOptions opts;
  opts.columns = {"first", "last"};
  RecordSet rs = load_recordset_csv(tmp.file("r.csv"), Party::A, opts);
  CHECK(rs.schema == std::vector<std::string>{"first", "last"});
  CHECK(rs.records[0].values == std::vector<std::string>{"ADA", "KING"});

  opts.id_column = "id";
  CHECK_THROWS_AS(load_recordset_csv(tmp.file("r.csv"), Party::A, opts), DataError);
}

TEST_CASE("reference csv round trips", "[core]") {
  testutil::TempDir tmp;
  ReferenceSet rs;
  rs.schema = {"first", "last"};
  rs.rows = {{"CHARLIE", "ADLER"}, {"JAY", "ADLER"}};
  save_referenceset_csv(rs, tmp.file("ref.csv"));
  ReferenceSet loaded = load_referenceset_csv(tmp.file("ref.csv"));
  CHECK(loaded.schema == rs.schema);
  CHECK(loaded.rows == rs.rows);
}

TEST_CASE("disjointness check notices shared values", "[core]") {
  ReferenceSet ref;
  ref.schema = {"first", "last"};
  ref.rows = {{"CHARLIE", "ADLER"}};
  RecordSet recs;
  recs.schema = {"first", "last"};
  recs.records.push_back({"A-0", {"ADA", "KING"}});
  CHECK(validate_disjointness(ref, recs));
  recs.records.push_back({"A-1", {"ADA", "ADLER"}});
  CHECK_FALSE(validate_disjointness(ref, recs));
}
