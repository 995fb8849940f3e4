#include <filesystem>
#include <fstream>
#include <sstream>

#include "catch2/catch_amalgamated.hpp"
#include "splitlink/eval.hpp"
#include "testutil.hpp"

using namespace splitlink;

namespace {

MatchArray predictions(const std::vector<std::tuple<std::string, std::string, bool>>& rows) {
  MatchArray ma;
  for (const auto& [a, b, match] : rows)
    ma.entries.push_back({a, b, match ? 1.0 : -1.0, match});
  ma.canonicalize();
  return ma;
}

}  // namespace

TEST_CASE("perfect prediction scores one on both axes", "[eval]") {
  TruthSet truth;
  truth.insert("A-0", "B-0");
  truth.insert("A-1", "B-1");
  MatchArray ma = predictions({{"A-0", "B-0", true}, {"A-1", "B-1", true}, {"A-0", "B-1", false}});
  MetricsReport r = score(ma, truth);
  CHECK(r.tp == 2.0);
  CHECK(r.fp == 0.0);
  CHECK(r.fn == 0.0);
  CHECK(r.precision == 1.0);
  CHECK(r.recall == 1.0);
  CHECK_FALSE(r.precision_zero_den);
  CHECK_FALSE(r.recall_zero_den);
}

TEST_CASE("no predictions flags the precision denominator", "[eval]") {
  TruthSet truth;
  truth.insert("A-0", "B-0");
  MatchArray ma = predictions({{"A-0", "B-0", false}});
  MetricsReport r = score(ma, truth);
  CHECK(r.tp == 0.0);
  CHECK(r.fn == 1.0);
  CHECK(r.recall == 0.0);
  CHECK(r.precision == 1.0);
  CHECK(r.precision_zero_den);
}

TEST_CASE("mixed prediction arithmetic", "[eval]") {
  TruthSet truth;
  MatchArray ma;
  for (int i = 0; i < 100; ++i) {
    std::string a = "A-" + std::to_string(i), b = "B-" + std::to_string(i);
    truth.insert(a, b);
    // 98 true positives, 2 misses
    bool hit = i < 98;
    ma.entries.push_back({a, b, hit ? 1.0 : -1.0, hit});
  }
  ma.entries.push_back({"A-0", "B-7", 1.0, true});
  ma.entries.push_back({"A-1", "B-8", 1.0, true});
  ma.canonicalize();
  MetricsReport r = score(ma, truth);
  CHECK(r.tp == 98.0);
  CHECK(r.fp == 2.0);
  CHECK(r.fn == 2.0);
  CHECK(r.precision == Catch::Approx(0.98));
  CHECK(r.recall == Catch::Approx(0.98));
}

TEST_CASE("tp plus fn always equals the truth size", "[eval]") {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    TruthSet truth;
    MatchArray ma;
    size_t n = 2 + rng.index(20);
    for (size_t i = 0; i < n; ++i) {
      std::string a = "A-" + std::to_string(i), b = "B-" + std::to_string(i);
      if (rng.index(2)) truth.insert(a, b);
      bool hit = rng.index(2) == 0;
      ma.entries.push_back({a, b, hit ? 1.0 : -1.0, hit});
    }
    ma.canonicalize();
    MetricsReport r = score(ma, truth);
    CHECK(r.tp + r.fn == static_cast<double>(truth.size()));
  }
}

TEST_CASE("truth sets round trip through csv", "[eval]") {
  testutil::TempDir tmp;
  TruthSet truth;
  truth.insert("A-000002", "B-000002");
  truth.insert("A-000000", "B-000000");
  truth.save_csv(tmp.file("truth.csv"));
  TruthSet loaded = TruthSet::load_csv(tmp.file("truth.csv"));
  CHECK(loaded.size() == truth.size());
  CHECK(loaded.contains("A-000000", "B-000000"));
  CHECK(loaded.contains("A-000002", "B-000002"));
  CHECK_FALSE(loaded.contains("A-000001", "B-000001"));
}

TEST_CASE("party b derivation pairs ids positionally", "[eval]") {
  RecordSet a;
  a.schema = {"first", "last"};
  a.records.push_back({"A-000000", {"ADELINE", "KINGSTON"}});
  a.records.push_back({"A-000001", {"BEATRICE", "STONEWALL"}});
  auto [b, truth] = make_party_b(a, CorruptionSpec{}, 5);
  CHECK(b.party == Party::B);
  REQUIRE(b.records.size() == 2);
  CHECK(b.records[0].record_id == "B-000000");
  CHECK(b.records[1].record_id == "B-000001");
  CHECK(truth.contains("A-000000", "B-000000"));
  CHECK(truth.contains("A-000001", "B-000001"));
  CHECK(b.records[0].values != a.records[0].values);
}

TEST_CASE("experiment rows cover each party per repetition plus averages", "[eval]") {
  ExperimentConfig cfg;
  cfg.match_size = 40;
  cfg.reference_size = 30;
  cfg.training_size = 40;
  cfg.repetitions = 2;
  cfg.rng_seed = 31;
  auto rows = run_experiment(cfg);
  REQUIRE(rows.size() == 3 * 3);  // 2 repetitions + 1 average, for 3 parties

  int averaged = 0;
  for (const auto& r : rows) {
    if (!r.averaged) {
      CHECK(r.seed == cfg.rng_seed + static_cast<uint64_t>(r.repetition));
      continue;
    }
    ++averaged;
    // the averaged row is the arithmetic mean of its repetitions
    double p = 0.0, rec = 0.0, secs = 0.0;
    int n = 0;
    for (const auto& other : rows) {
      if (other.averaged || other.party != r.party) continue;
      p += other.precision;
      rec += other.recall;
      secs += other.match_seconds;
      ++n;
    }
    REQUIRE(n == cfg.repetitions);
    CHECK(r.precision == p / n);
    CHECK(r.recall == rec / n);
    CHECK(r.match_seconds == secs / n);
  }
  CHECK(averaged == 3);
}

TEST_CASE("experiment rows are deterministic and round trip as csv", "[eval]") {
  testutil::TempDir tmp;
  ExperimentConfig cfg;
  cfg.match_size = 30;
  cfg.reference_size = 25;
  cfg.training_size = 30;
  cfg.repetitions = 2;
  auto rows = run_experiment(cfg);

  // match_seconds is a wall-clock measurement; everything else must be
  // byte-stable across runs
  auto scrub = [](std::vector<MetricsReport> rs) {
    for (auto& r : rs) r.match_seconds = 0.0;
    return rs;
  };
  std::ostringstream once, twice;
  save_reports(scrub(rows), once);
  save_reports(scrub(run_experiment(cfg)), twice);
  CHECK(once.str() == twice.str());

  save_reports(rows, tmp.file("reports.csv"));
  auto loaded = load_reports(tmp.file("reports.csv"));
  REQUIRE(loaded.size() == rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    CHECK(loaded[i].party == rows[i].party);
    CHECK(loaded[i].precision == rows[i].precision);
    CHECK(loaded[i].recall == rows[i].recall);
    CHECK(loaded[i].match_seconds == rows[i].match_seconds);
    CHECK(loaded[i].config == rows[i].config);
  }
}

TEST_CASE("figure emission writes long-format series", "[eval]") {
  testutil::TempDir tmp;
  ExperimentConfig cfg;
  cfg.match_size = 30;
  cfg.reference_size = 25;
  cfg.training_size = 30;
  cfg.repetitions = 1;
  auto rows = run_experiment(cfg);
  emit_figure_data(rows, tmp.file("figs"));

  for (const char* name : {"precision.csv", "recall.csv", "match_seconds.csv"}) {
    std::ifstream in(tmp.file("figs") + "/" + name);
    REQUIRE(in.good());
    std::string header;
    std::getline(in, header);
    CHECK(header == "x,series,y");
    std::string row;
    CHECK(std::getline(in, row).good());
  }

  CHECK_THROWS_AS(emit_figure_data({}, tmp.file("empty")), DataError);
}
