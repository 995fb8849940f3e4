#include <string>

#include "catch2/catch_amalgamated.hpp"
#include "oracles.hpp"
#include "splitlink/common.hpp"
#include "splitlink/distance.hpp"

using namespace splitlink;

namespace {

std::string random_word(Rng& rng, size_t max_len, std::string_view alphabet) {
  std::string s;
  size_t len = rng.index(max_len + 1);
  for (size_t i = 0; i < len; ++i) s.push_back(alphabet[rng.index(alphabet.size())]);
  return s;
}

}  // namespace

TEST_CASE("edit distance pinned values", "[distance]") {
  CHECK(edit_distance("", "") == 0);
  CHECK(edit_distance("", "ABC") == 3);
  CHECK(edit_distance("ABC", "") == 3);
  CHECK(edit_distance("KITTEN", "SITTING") == 3);
  CHECK(edit_distance("FLAW", "LAWN") == 2);
  CHECK(edit_distance("ADA", "CHARLIE") == 6);
  CHECK(edit_distance("ADA", "JAY") == 3);
  CHECK(edit_distance("IVY", "CHARLIE") == 7);
  CHECK(edit_distance("IVY", "JAY") == 2);
  CHECK(edit_distance("KING", "ADLER") == 5);
}

TEST_CASE("adjacent swap costs two unit edits", "[distance]") {
  CHECK(edit_distance("AB", "BA") == 2);
  CHECK(edit_distance("CONVERSE", "CONVRESE") == 2);
}

TEST_CASE("edit distance equals the recursive definition", "[distance]") {
  Rng rng(123);
  for (int trial = 0; trial < 2000; ++trial) {
    std::string a = random_word(rng, 5, "ABC");
    std::string b = random_word(rng, 5, "ABC");
    INFO(a << " vs " << b);
    CHECK(edit_distance(a, b) == oracles::edit_distance_naive(a, b));
  }
}

TEST_CASE("memoized oracle matches the naive recursion", "[distance]") {
  Rng rng(321);
  for (int trial = 0; trial < 500; ++trial) {
    std::string a = random_word(rng, 5, "ABCDE");
    std::string b = random_word(rng, 5, "ABCDE");
    CHECK(oracles::edit_distance_memo(a, b) == oracles::edit_distance_naive(a, b));
  }
}

TEST_CASE("edit distance is a metric", "[distance]") {
  Rng rng(77);
  for (int trial = 0; trial < 500; ++trial) {
    std::string a = random_word(rng, 8, "ABCD");
    std::string b = random_word(rng, 8, "ABCD");
    std::string c = random_word(rng, 8, "ABCD");
    uint32_t ab = edit_distance(a, b);
    uint32_t ba = edit_distance(b, a);
    uint32_t bc = edit_distance(b, c);
    uint32_t ac = edit_distance(a, c);
    CHECK(ab == ba);
    CHECK(edit_distance(a, a) == 0);
    CHECK(ac <= ab + bc);
    size_t lo = a.size() > b.size() ? a.size() - b.size() : b.size() - a.size();
    CHECK(ab >= lo);
    CHECK(ab <= std::max(a.size(), b.size()));
    if (ab == 0) CHECK(a == b);
  }
}

TEST_CASE("cosine distance conventions", "[distance]") {
  using V = std::vector<uint32_t>;
  CHECK(cosine_distance(V{0, 0}, V{0, 0}) == 0.0);
  CHECK(cosine_distance(V{0, 0}, V{1, 2}) == 1.0);
  CHECK(cosine_distance(V{1, 2}, V{0, 0}) == 1.0);
  CHECK(cosine_distance(V{3, 4}, V{3, 4}) == 0.0);
  CHECK(cosine_distance(V{1, 0}, V{0, 1}) == 1.0);
  CHECK(cosine_distance(V{2, 0}, V{5, 0}) == 0.0);
  CHECK(cosine_distance(V{1, 1}, V{2, 2}) == 0.0);
  CHECK(cosine_distance(V{1, 0}, V{1, 1}) == Catch::Approx(1.0 - 1.0 / std::sqrt(2.0)));
  CHECK_THROWS_AS(cosine_distance(V{1}, V{1, 2}), DataError);
}

TEST_CASE("cosine distance of nonnegative vectors lies in [0,1]", "[distance]") {
  Rng rng(55);
  for (int trial = 0; trial < 1000; ++trial) {
    size_t n = 1 + rng.index(6);
    std::vector<uint32_t> u(n), v(n);
    for (size_t i = 0; i < n; ++i) {
      u[i] = static_cast<uint32_t>(rng.index(20));
      v[i] = static_cast<uint32_t>(rng.index(20));
    }
    double d = cosine_distance(u, v);
    CHECK(d >= 0.0);
    CHECK(d <= 1.0);
    CHECK(cosine_distance(u, v) == cosine_distance(v, u));
    CHECK(cosine_distance(u, u) == 0.0);
  }
}

TEST_CASE("group distance yields one cosine per group", "[distance]") {
  SmashedVector a, b;
  a.groups = {{1, 2, 3}, {0, 0}};
  b.groups = {{1, 2, 3}, {4, 5}};
  FeatureVector f = group_distance(a, b);
  REQUIRE(f.size() == 2);
  CHECK(f[0] == 0.0);
  CHECK(f[1] == 1.0);

  b.groups = {{1, 2}, {4, 5}};
  CHECK_THROWS_AS(group_distance(a, b), DataError);
}
