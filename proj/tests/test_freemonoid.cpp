#include "doctest.h"

#include <set>
#include <string>
#include <vector>

#include "holiv/freemonoid.hpp"
#include "holiv/rng.hpp"

using namespace holiv;
using freemonoid::FreeWord;
using freemonoid::GeneratingSet;

// ===========================================================================
// Set oracle: enumerate G0 by raw letter strings (no FreeWord machinery) and
// count distinct normalized strings. Normalization here is string run-length
// encoding, an independent route to the same canonical form.
// ===========================================================================
namespace oracle {

std::string rle(const std::vector<int>& letters) {
  std::string out;
  size_t i = 0;
  while (i < letters.size()) {
    size_t j = i;
    while (j < letters.size() && letters[j] == letters[i]) ++j;
    out += "g" + std::to_string(letters[i]) + "^" + std::to_string(j - i) + ".";
    i = j;
  }
  return out;
}

size_t g0_count(const std::vector<int>& gen_ids) {
  std::set<std::string> seen;
  for (int i : gen_ids) seen.insert(rle({i}));
  for (int i : gen_ids)
    for (int j : gen_ids) seen.insert(rle({i, j}));
  for (int i : gen_ids)
    for (int j : gen_ids)
      for (int k : gen_ids) seen.insert(rle({i, j, k}));
  return seen.size();
}

}  // namespace oracle

static GeneratingSet letter_gens(const std::vector<int>& ids) {
  GeneratingSet g;
  for (int id : ids) g.words.push_back(FreeWord::single(id));
  return g;
}

// ===========================================================================
// concat
// ===========================================================================

TEST_CASE("concat: identity is two-sided neutral") {
  FreeWord w = freemonoid::concat(FreeWord::single(1, 2), FreeWord::single(3));
  CHECK(freemonoid::concat(FreeWord(), w) == w);
  CHECK(freemonoid::concat(w, FreeWord()) == w);
}

TEST_CASE("concat: exponent merge g^1 . g^2 = g^3") {
  FreeWord a = FreeWord::single(5, 1);
  FreeWord b = FreeWord::single(5, 2);
  FreeWord c = freemonoid::concat(a, b);
  REQUIRE(c.factors().size() == 1);
  CHECK(c.factors()[0].gen == 5);
  CHECK(c.factors()[0].exp == 3);
}

TEST_CASE("concat: normalization (g1 g2, g2 g1) -> g1 g2^2 g1") {
  FreeWord ab = freemonoid::concat(FreeWord::single(1), FreeWord::single(2));
  FreeWord ba = freemonoid::concat(FreeWord::single(2), FreeWord::single(1));
  FreeWord w = freemonoid::concat(ab, ba);
  REQUIRE(w.factors().size() == 3);
  CHECK(w.factors()[0] == freemonoid::Factor{1, 1});
  CHECK(w.factors()[1] == freemonoid::Factor{2, 2});
  CHECK(w.factors()[2] == freemonoid::Factor{1, 1});
}

TEST_CASE("property: concat associative over random word triples") {
  rng::Stream rs(61, "freemonoid-assoc");
  for (int trial = 0; trial < 200; ++trial) {
    auto rand_word = [&rs]() {
      FreeWord w;
      const int n = rs.uniform_int(0, 4);
      for (int i = 0; i < n; ++i)
        w = freemonoid::concat(
            w, FreeWord::single(rs.uniform_int(1, 3), rs.uniform_int(1, 3)));
      return w;
    };
    FreeWord a = rand_word(), b = rand_word(), c = rand_word();
    CHECK(freemonoid::concat(freemonoid::concat(a, b), c) ==
          freemonoid::concat(a, freemonoid::concat(b, c)));
  }
}

// ===========================================================================
// build_g0 / build_g0_prime
// ===========================================================================

TEST_CASE("build_g0: one generator -> {g, g^2, g^3}") {
  auto g0 = freemonoid::build_g0(letter_gens({1}));
  std::set<FreeWord> expected = {FreeWord::single(1, 1), FreeWord::single(1, 2),
                                 FreeWord::single(1, 3)};
  CHECK(g0 == expected);
}

TEST_CASE("build_g0: two generators contains g1 g2 g1") {
  auto g0 = freemonoid::build_g0(letter_gens({1, 2}));
  FreeWord w = freemonoid::concat(
      freemonoid::concat(FreeWord::single(1), FreeWord::single(2)),
      FreeWord::single(1));
  CHECK(g0.count(w) == 1);
}

TEST_CASE("build_g0: cardinality matches the set oracle") {
  for (const auto& ids : std::vector<std::vector<int>>{
           {1}, {1, 2}, {1, 2, 3}, {2, 5, 9, 11}}) {
    auto g0 = freemonoid::build_g0(letter_gens(ids));
    CHECK(g0.size() == oracle::g0_count(ids));
    // single-letter generators: all words distinct, N0 + N0^2 + N0^3
    const size_t n = ids.size();
    CHECK(g0.size() == n + n * n + n * n * n);
  }
}

TEST_CASE("build_g0_prime: single generator keeps {g, g^2}") {
  auto gens = letter_gens({1});
  auto g0 = freemonoid::build_g0(gens);
  auto gp = freemonoid::build_g0_prime(g0, gens);
  std::set<FreeWord> expected = {FreeWord::single(1, 1),
                                 FreeWord::single(1, 2)};
  CHECK(gp == expected);
}

TEST_CASE("build_g0_prime: contains every g_i and g_i g_j") {
  auto gens = letter_gens({1, 2});
  auto g0 = freemonoid::build_g0(gens);
  auto gp = freemonoid::build_g0_prime(g0, gens);
  for (const auto& gi : gens.words) {
    CHECK(gp.count(gi) == 1);
    for (const auto& gj : gens.words)
      CHECK(gp.count(freemonoid::concat(gi, gj)) == 1);
  }
}

TEST_CASE("property: g0_prime is a subset closed under the defining test") {
  rng::Stream rs(67, "freemonoid-gprime");
  for (int trial = 0; trial < 10; ++trial) {
    std::set<int> idset;
    const int n = rs.uniform_int(1, 3);
    while (static_cast<int>(idset.size()) < n)
      idset.insert(rs.uniform_int(1, 9));
    GeneratingSet gens;
    for (int id : idset) {
      // generators may themselves be short words, not just letters
      FreeWord w = FreeWord::single(id, rs.uniform_int(1, 2));
      if (rs.uniform() < 0.3)
        w = freemonoid::concat(w, FreeWord::single(rs.uniform_int(1, 9)));
      gens.words.push_back(w);
    }
    auto g0 = freemonoid::build_g0(gens);
    auto gp = freemonoid::build_g0_prime(g0, gens);
    for (const auto& g : gp) {
      CHECK(g0.count(g) == 1);
      for (const auto& gi : gens.words)
        CHECK(g0.count(freemonoid::concat(gi, g)) == 1);
    }
  }
}

// ===========================================================================
// serialization
// ===========================================================================

TEST_CASE("serialization: g3^2.g1.g7^4 round-trips") {
  const std::string s = "g3^2.g1.g7^4";
  FreeWord w = FreeWord::parse(s);
  REQUIRE(w.factors().size() == 3);
  CHECK(w.factors()[0] == freemonoid::Factor{3, 2});
  CHECK(w.factors()[1] == freemonoid::Factor{1, 1});
  CHECK(w.factors()[2] == freemonoid::Factor{7, 4});
  CHECK(w.str() == s);
  CHECK(FreeWord::parse(w.str()) == w);
}

TEST_CASE("serialization: identity and parse errors") {
  CHECK(FreeWord().str() == "1");
  CHECK(FreeWord::parse("1") == FreeWord());
  CHECK_THROWS_AS(FreeWord::parse("h2"), Error);
  CHECK_THROWS_AS(FreeWord::parse("g2^0"), Error);
  CHECK_THROWS_AS(FreeWord::parse("g2^"), Error);
  CHECK_THROWS_AS(FreeWord::parse(""), Error);
}

TEST_CASE("serialization: non-normal input normalizes on parse") {
  FreeWord w = FreeWord::parse("g2.g2^3");
  CHECK(w.str() == "g2^4");
}

// ===========================================================================
// CharTable
// ===========================================================================

TEST_CASE("CharTable: lookup, errors, missing word") {
  freemonoid::CharTable t;
  FreeWord w = FreeWord::single(1);
  t.set(w, {0.5, -0.25}, 1e-6);
  CHECK(t.contains(w));
  CHECK(t.at(w) == std::complex<double>(0.5, -0.25));
  CHECK(t.error_at(w) == 1e-6);
  try {
    t.at(FreeWord::single(2));
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Err::MissingWord);
  }
}

TEST_CASE("CharTable: empty-word entry must be a dimension") {
  freemonoid::CharTable t;
  t.set(FreeWord(), {2.0, 0.0});  // fine: dimension 2
  CHECK_THROWS_AS(t.set(FreeWord(), {1.5, 0.0}), Error);
  CHECK_THROWS_AS(t.set(FreeWord(), {2.0, 0.5}), Error);
}

TEST_CASE("ordering: length-then-lex on expanded letters") {
  FreeWord g1 = FreeWord::single(1);
  FreeWord g2 = FreeWord::single(2);
  FreeWord g1g1 = FreeWord::single(1, 2);
  FreeWord g1g2 = freemonoid::concat(g1, g2);
  CHECK(g1 < g2);
  CHECK(g2 < g1g1);  // shorter first
  CHECK(g1g1 < g1g2);
}
