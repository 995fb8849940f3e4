#pragma once
// Seeded synthetic fixtures: voter-roll-like name records plus a reference
// set guaranteed disjoint from them. The embedded name lists are split into
// a record-side pool and a reference-side pool with pairwise edit distance
// >= 3 across the split, so corrupting a record value with one or two edits
// can never collide with a reference value.

#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "splitlink/common.hpp"
#include "splitlink/core.hpp"
#include "splitlink/distance.hpp"

namespace splitlink {

namespace detail {

inline const std::vector<std::string>& builtin_first_names() {
  static const std::vector<std::string> names = {
      "ADAM",      "ALAN",      "ALBERT",    "ALEXANDER", "ALICE",     "AMANDA",
      "AMBER",     "AMELIA",    "ANDREW",    "ANGELA",    "ANNIE",     "ANTHONY",
      "ARTHUR",    "ASHLEY",    "AUSTIN",    "BARBARA",   "BEATRICE",  "BENJAMIN",
      "BERNARD",   "BETTY",     "BEVERLY",   "BONNIE",    "BRANDON",   "BRENDA",
      "BRIAN",     "BRUCE",     "CALVIN",    "CAMERON",   "CARL",      "CARMEN",
      "CAROLYN",   "CATHERINE", "CECIL",     "CHARLES",   "CHARLOTTE", "CHERYL",
      "CHESTER",   "CHRISTINE", "CLARA",     "CLARENCE",  "CLAUDE",    "CLIFFORD",
      "CONNIE",    "CRAIG",     "CRYSTAL",   "CURTIS",    "CYNTHIA",   "DAISY",
      "DANIEL",    "DARLENE",   "DAVID",     "DEBORAH",   "DENNIS",    "DEREK",
      "DIANA",     "DOLORES",   "DONALD",    "DORIS",     "DOUGLAS",   "DUANE",
      "DUSTIN",    "DWIGHT",    "EARL",      "EDITH",     "EDWARD",    "EILEEN",
      "ELAINE",    "ELEANOR",   "ELIZABETH", "ELLEN",     "ELMER",     "EMILY",
      "ERIC",      "ERNEST",    "ESTHER",    "EUGENE",    "EVELYN",    "FELIX",
      "FLORENCE",  "FRANCIS",   "FREDERICK", "GABRIEL",   "GARY",      "GEORGE",
      "GERALD",    "GILBERT",   "GLADYS",    "GLENN",     "GLORIA",    "GORDON",
      "GRACE",     "GREGORY",   "HANNAH",    "HAROLD",    "HEATHER",   "HECTOR",
      "HELEN",     "HENRY",     "HERBERT",   "HOWARD",    "HUBERT",    "IRENE",
      "ISAAC",     "JACOB",     "JACQUELINE","JAMES",     "JANET",     "JASON",
      "JEFFREY",   "JENNIFER",  "JEREMY",    "JEROME",    "JESSICA",   "JOANNE",
      "JONATHAN",  "JOSEPH",    "JOSHUA",    "JOYCE",     "JUDITH",    "JULIA",
      "JUSTIN",    "KAREN",     "KATHERINE", "KEITH",     "KENNETH",   "KEVIN",
      "KRISTEN",   "KYLE",      "LARRY",     "LAUREN",    "LAWRENCE",  "LEONARD",
      "LESLIE",    "LILLIAN",   "LINDA",     "LLOYD",     "LOUISE",    "LUCAS",
      "LUTHER",    "MABEL",     "MARCUS",    "MARGARET",  "MARILYN",   "MARJORIE",
      "MARTIN",    "MARVIN",    "MATTHEW",   "MAXINE",    "MELVIN",    "MICHAEL",
      "MILDRED",   "MIRIAM",    "MITCHELL",  "MONICA",    "MORRIS",    "MYRTLE",
      "NANCY",     "NAOMI",     "NATHAN",    "NICHOLAS",  "NORMAN",    "OLIVER",
      "OSCAR",     "PAMELA",    "PATRICIA",  "PAULINE",   "PEGGY",     "PHILIP",
      "PHYLLIS",   "RACHEL",    "RALPH",     "RAYMOND",   "REBECCA",   "REGINALD",
      "RICHARD",   "ROBERT",    "RODNEY",    "ROGER",     "RONALD",    "ROSEMARY",
      "RUSSELL",   "RUTH",      "RYAN",      "SAMUEL",    "SANDRA",    "SCOTT",
      "SEAN",      "SHARON",    "SHIRLEY",   "SIDNEY",    "SPENCER",   "STANLEY",
      "STEPHEN",   "STEVEN",    "STUART",    "SUSAN",     "SYLVIA",    "TERESA",
      "THEODORE",  "THOMAS",    "TIMOTHY",   "TRAVIS",    "TYLER",     "VALERIE",
      "VERNON",    "VICTOR",    "VINCENT",   "VIRGINIA",  "WALTER",    "WANDA",
      "WARREN",    "WAYNE",     "WESLEY",    "WILLIAM",   "WILLIS",    "ZACHARY",
  };
  return names;
}

inline const std::vector<std::string>& builtin_last_names() {
  static const std::vector<std::string> names = {
      "ADAMS",      "ALEXANDER",  "ALLEN",      "ANDERSON",   "ARMSTRONG",  "ARNOLD",
      "AUSTIN",     "BAILEY",     "BAKER",      "BALDWIN",    "BANKS",      "BARNES",
      "BARRETT",    "BATES",      "BECKER",     "BELL",       "BENNETT",    "BENSON",
      "BERRY",      "BISHOP",     "BLACK",      "BLAIR",      "BOWMAN",     "BOYD",
      "BRADLEY",    "BREWER",     "BROOKS",     "BROWN",      "BRYANT",     "BURGESS",
      "BURKE",      "BURNS",      "BUTLER",     "BYRD",       "CALDWELL",   "CAMPBELL",
      "CARLSON",    "CARPENTER",  "CARROLL",    "CARTER",     "CHAMBERS",   "CHANDLER",
      "CHAPMAN",    "CLARK",      "COLEMAN",    "COLLINS",    "CONNER",     "COOK",
      "COOPER",     "CRAWFORD",   "CROSS",      "CUNNINGHAM", "DANIELS",    "DAVIDSON",
      "DAVIS",      "DAWSON",     "DEAN",       "DICKERSON",  "DIXON",      "DOUGLAS",
      "DUNCAN",     "DUNN",       "EDWARDS",    "ELLIOTT",    "ELLIS",      "ERICKSON",
      "EVANS",      "FERGUSON",   "FIELDS",     "FISHER",     "FITZGERALD", "FLEMING",
      "FLETCHER",   "FOSTER",     "FOWLER",     "FRANKLIN",   "FREEMAN",    "FULLER",
      "GARDNER",    "GARRETT",    "GIBSON",     "GILBERT",    "GOODWIN",    "GORDON",
      "GRAHAM",     "GRANT",      "GRAVES",     "GRAY",       "GREENE",     "GREGORY",
      "GRIFFIN",    "HAMILTON",   "HAMMOND",    "HANSEN",     "HARDY",      "HARPER",
      "HARRINGTON", "HARRISON",   "HART",       "HARVEY",     "HAWKINS",    "HAYES",
      "HENDERSON",  "HENRY",      "HIGGINS",    "HOFFMAN",    "HOLLAND",    "HOLMES",
      "HOPKINS",    "HOWARD",     "HUDSON",     "HUGHES",     "HUNTER",     "INGRAM",
      "JACKSON",    "JACOBS",     "JENKINS",    "JENSEN",     "JOHNSON",    "JORDAN",
      "KELLEY",     "KENNEDY",    "KNIGHT",     "LAMBERT",    "LAWRENCE",   "LAWSON",
      "LINDSEY",    "LITTLE",     "LOGAN",      "LUCAS",      "MALONE",     "MARSHALL",
      "MASON",      "MATTHEWS",   "MAXWELL",    "MCCARTHY",   "MCCORMICK",  "MCDONALD",
      "MCGEE",      "MCKINNEY",   "MEYER",      "MILLER",     "MITCHELL",   "MONTGOMERY",
      "MOODY",      "MORAN",      "MORGAN",     "MORRISON",   "MULLINS",    "MURPHY",
      "MURRAY",     "NELSON",     "NEWMAN",     "NICHOLS",    "NORRIS",     "OBRIEN",
      "OLIVER",     "OLSON",      "OSBORNE",    "OWENS",      "PALMER",     "PARKER",
      "PARSONS",    "PATTERSON",  "PAYNE",      "PEARSON",    "PERKINS",    "PETERS",
      "PHILLIPS",   "PIERCE",     "PORTER",     "POWELL",     "PRATT",      "QUINN",
      "RAMSEY",     "REYNOLDS",   "RHODES",     "RICHARDSON", "RILEY",      "ROBERTSON",
      "ROBINSON",   "RODGERS",    "ROGERS",     "ROSS",       "ROWE",       "RUSSELL",
      "SANDERS",    "SAUNDERS",   "SCHMIDT",    "SCHNEIDER",  "SCHULTZ",    "SHELTON",
      "SHERMAN",    "SIMMONS",    "SIMPSON",    "SINGLETON",  "SNYDER",     "SPENCER",
      "STANLEY",    "STEELE",     "STEPHENS",   "STEVENSON",  "STEWART",    "STONE",
      "STRICKLAND", "SULLIVAN",   "SUMMERS",    "SUTTON",     "SWANSON",    "TAYLOR",
      "THOMPSON",   "THORNTON",   "TODD",       "TOWNSEND",   "TUCKER",     "TURNER",
      "UNDERWOOD",  "VAUGHN",     "WAGNER",     "WALKER",     "WALLACE",    "WALSH",
      "WALTERS",    "WARREN",     "WATKINS",    "WATSON",     "WEAVER",     "WEBB",
      "WEBSTER",    "WELLS",      "WEST",       "WHEELER",    "WHITE",      "WILKERSON",
      "WILLIAMSON", "WILLIS",     "WILSON",     "WOODS",      "WRIGHT",     "YOUNG",
      "ZIMMERMAN",
  };
  return names;
}

}  // namespace detail

// The four name pools backing fixture generation. Within a side names may be
// arbitrarily similar; across sides every pair is at edit distance >= 3.
struct NamePools {
  std::vector<std::string> record_first;
  std::vector<std::string> record_last;
  std::vector<std::string> reference_first;
  std::vector<std::string> reference_last;
};

namespace detail {

// Greedy bipartition of the union of both name lists, then blended
// expansion of the record side. A name joins a side only if it keeps the
// cross-side distance guarantee; names too close to both sides are dropped.
// Names appearing in both lists (GORDON, WARREN, ...) are placed once, so
// the guarantee holds across attribute roles too.
inline NamePools build_name_pools() {
  struct Entry {
    std::string name;
    bool is_first = false;
    bool is_last = false;
  };
  std::vector<Entry> entries;
  auto add = [&entries](const std::string& name, bool first) {
    for (auto& e : entries)
      if (e.name == name) {
        (first ? e.is_first : e.is_last) = true;
        return;
      }
    Entry e;
    e.name = name;
    (first ? e.is_first : e.is_last) = true;
    entries.push_back(std::move(e));
  };
  for (const auto& n : builtin_first_names()) add(n, true);
  for (const auto& n : builtin_last_names()) add(n, false);

  std::vector<std::string> record_side, reference_side;
  auto min_distance = [](const std::string& name, const std::vector<std::string>& side) {
    uint32_t best = UINT32_MAX;
    for (const auto& other : side) best = std::min(best, edit_distance(name, other));
    return best;
  };
  NamePools pools;
  for (const auto& e : entries) {
    bool fits_record = min_distance(e.name, reference_side) >= 3;
    bool fits_reference = min_distance(e.name, record_side) >= 3;
    bool to_record;
    if (fits_record && fits_reference)
      to_record = record_side.size() <= reference_side.size();
    else if (fits_record)
      to_record = true;
    else if (fits_reference)
      to_record = false;
    else
      continue;  // too close to both sides; drop
    auto& side = to_record ? record_side : reference_side;
    side.push_back(e.name);
    if (e.is_first) (to_record ? pools.record_first : pools.reference_first).push_back(e.name);
    if (e.is_last) (to_record ? pools.record_last : pools.reference_last).push_back(e.name);
  }

  // Expand the record side by blending the start of one root with the end
  // of another (CARTER + HOLMES -> CARMES, HOLTER). Matching across
  // 2000-row parties needs the diversity of a real voter roll; blends
  // supply it while varying name starts, ends, and lengths, so the pool
  // avoids the shared-tail clusters a fixed suffix list would create.
  // A stride walk over root pairs keeps head variety even when the target
  // cap cuts the walk short. Every admitted blend stays at least 3 edits
  // from every reference-side name, same as the roots themselves.
  std::unordered_set<std::string> taken(record_side.begin(), record_side.end());
  for (const auto& name : reference_side) taken.insert(name);
  auto far_from_reference = [&reference_side](const std::string& name) {
    for (const auto& other : reference_side)
      if (edit_distance(name, other) < 3) return false;
    return true;
  };
  auto blend = [&](const std::vector<std::string>& roots, size_t target,
                   std::vector<std::string>& pool) {
    size_t n = roots.size();
    for (size_t stride = 1; stride < n && pool.size() < target; ++stride) {
      for (size_t i = 0; i < n && pool.size() < target; ++i) {
        const std::string& head = roots[i];
        const std::string& tail = roots[(i + stride) % n];
        size_t head_len = 2 + (i + stride) % 3;
        size_t tail_len = 3 + (i * 7 + stride) % 3;
        if (head.size() < head_len || tail.size() < tail_len) continue;
        std::string candidate = head.substr(0, head_len) + tail.substr(tail.size() - tail_len);
        if (!taken.insert(candidate).second) continue;
        if (far_from_reference(candidate)) pool.push_back(std::move(candidate));
      }
    }
  };
  blend(std::vector<std::string>(pools.record_first), 2500, pools.record_first);
  blend(std::vector<std::string>(pools.record_last), 3000, pools.record_last);
  return pools;
}

}  // namespace detail

inline const NamePools& fixture_pools() {
  static const NamePools pools = detail::build_name_pools();
  return pools;
}

struct FixtureSpec {
  size_t record_count = 2000;
  size_t reference_count = 2000;
  uint64_t seed = 1;
};

struct Fixture {
  RecordSet records;       // party A originals, schema (first, middle, last)
  ReferenceSet reference;  // schema (first, last), value-disjoint from records
};

inline Fixture generate_fixture(const FixtureSpec& spec) {
  const NamePools& pools = fixture_pools();
  if (spec.record_count == 0 || spec.reference_count == 0)
    throw ConfigError("fixture sizes must be positive");
  size_t ref_product = pools.reference_first.size() * pools.reference_last.size();
  if (spec.reference_count > ref_product)
    throw ConfigError("reference size exceeds distinct name combinations (" +
                      std::to_string(ref_product) + ")");
  size_t rec_product = pools.record_first.size() *
                       (pools.record_first.size() + pools.record_last.size()) *
                       pools.record_last.size();
  if (spec.record_count > rec_product / 2)
    throw ConfigError("record count exceeds half the distinct name combinations (" +
                      std::to_string(rec_product) + ")");

  Fixture out;
  Rng rng(derive_seed(spec.seed, "fixture"));

  out.records.party = Party::A;
  out.records.schema = {"first", "middle", "last"};
  out.records.records.reserve(spec.record_count);
  std::unordered_set<std::string> seen;
  size_t middle_pool = pools.record_first.size() + pools.record_last.size();
  while (out.records.records.size() < spec.record_count) {
    const std::string& f = pools.record_first[rng.index(pools.record_first.size())];
    size_t mi = rng.index(middle_pool);
    const std::string& m = mi < pools.record_first.size()
                               ? pools.record_first[mi]
                               : pools.record_last[mi - pools.record_first.size()];
    const std::string& l = pools.record_last[rng.index(pools.record_last.size())];
    std::string key = f + '\x1f' + m + '\x1f' + l;
    if (!seen.insert(std::move(key)).second) continue;
    Record rec;
    rec.record_id = detail::mint_record_id(Party::A, out.records.records.size());
    rec.values = {f, m, l};
    out.records.records.push_back(std::move(rec));
  }

  // Distinct reference rows via a partial shuffle of the index product, so
  // any fill ratio up to 100% terminates.
  out.reference.schema = {"first", "last"};
  std::vector<uint32_t> indices(ref_product);
  for (size_t i = 0; i < ref_product; ++i) indices[i] = static_cast<uint32_t>(i);
  for (size_t i = 0; i < spec.reference_count; ++i) {
    size_t j = i + static_cast<size_t>(rng.below(ref_product - i));
    std::swap(indices[i], indices[j]);
  }
  out.reference.rows.reserve(spec.reference_count);
  for (size_t i = 0; i < spec.reference_count; ++i) {
    size_t fi = indices[i] % pools.reference_first.size();
    size_t li = indices[i] / pools.reference_first.size();
    out.reference.rows.push_back({pools.reference_first[fi], pools.reference_last[li]});
  }
  return out;
}

}  // namespace splitlink
