#include <algorithm>
#include <numeric>
#include <set>

#include "doctest.h"
#include "lcmt/common.hpp"

using namespace lcmt;

TEST_CASE("split_ws collapses runs of whitespace") {
  CHECK(split_ws("a b  c") == std::vector<std::string>{"a", "b", "c"});
  CHECK(split_ws("  leading\ttab\n") == std::vector<std::string>{"leading", "tab"});
  CHECK(split_ws("").empty());
  CHECK(split_ws("   ").empty());
}

TEST_CASE("split_on keeps empty fields") {
  CHECK(split_on("a\tb\t\tc", '\t') == std::vector<std::string>{"a", "b", "", "c"});
  CHECK(split_on("", '\t') == std::vector<std::string>{""});
  CHECK(split_on("x|", '|') == std::vector<std::string>{"x", ""});
}

TEST_CASE("join is the inverse of split_on for separator-free tokens") {
  std::vector<std::string> tokens{"the", "cat", "sat"};
  CHECK(join(tokens) == "the cat sat");
  CHECK(join(tokens, "|") == "the|cat|sat");
  CHECK(split_on(join(tokens, "|"), '|') == tokens);
  CHECK(join({}) == "");
}

TEST_CASE("lowercase_ascii touches only A-Z") {
  CHECK(lowercase_ascii("MiXeD 123 [NOUN]") == "mixed 123 [noun]");
  CHECK(lowercase_ascii("össze") == "össze");
}

TEST_CASE("utf8_chars splits codepoints, not bytes") {
  auto cs = utf8_chars("naïve");
  REQUIRE(cs.size() == 5);
  CHECK(cs[2] == "\xc3\xaf");
  auto jp = utf8_chars("走った");
  REQUIRE(jp.size() == 3);
  CHECK(jp[0] == "走");
  CHECK(jp[2] == "た");
  CHECK(utf8_chars("").empty());
}

TEST_CASE("utf8_chars passes invalid bytes through one at a time") {
  std::string bad = "a\xffz";
  auto cs = utf8_chars(bad);
  REQUIRE(cs.size() == 3);
  CHECK(cs[1] == "\xff");
}

TEST_CASE("fnv1a chains digests") {
  std::string all = "hello world";
  auto whole = fnv1a(all.data(), all.size());
  auto first = fnv1a(all.data(), 5);
  auto chained = fnv1a(all.data() + 5, all.size() - 5, first);
  CHECK(whole == chained);
  CHECK(fnv1a("a", 1) != fnv1a("b", 1));
  CHECK(fnv1a(nullptr, 0) == kFnvBasis);
}

TEST_CASE("rng streams are reproducible and seed-sensitive") {
  Rng a(7), b(7), c(8);
  for (int i = 0; i < 16; ++i) CHECK(a.next_u64() == b.next_u64());
  bool differs = false;
  Rng a2(7);
  for (int i = 0; i < 16; ++i) differs |= a2.next_u64() != c.next_u64();
  CHECK(differs);
}

TEST_CASE("rng draws respect their ranges") {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    auto k = rng.next_below(7);
    CHECK(k < 7);
    double r = rng.next_real();
    CHECK(r >= 0.0);
    CHECK(r < 1.0);
    float s = rng.next_symmetric(0.25f);
    CHECK(s >= -0.25f);
    CHECK(s < 0.25f);
  }
  CHECK(rng.next_below(1) == 0);
  CHECK_THROWS_AS(rng.next_below(0), Error);
}

TEST_CASE("shuffled_indices is a permutation and varies with the seed") {
  auto p = shuffled_indices(100, 11);
  CHECK(p == shuffled_indices(100, 11));
  CHECK(p != shuffled_indices(100, 12));
  std::set<std::size_t> seen(p.begin(), p.end());
  CHECK(seen.size() == 100);
  CHECK(*seen.begin() == 0);
  CHECK(*seen.rbegin() == 99);
  CHECK(shuffled_indices(0, 1).empty());
}

TEST_CASE("sample_indices returns a sorted k-subset") {
  auto s = sample_indices(50, 10, 21);
  REQUIRE(s.size() == 10);
  CHECK(std::is_sorted(s.begin(), s.end()));
  CHECK(std::set<std::size_t>(s.begin(), s.end()).size() == 10);
  CHECK(s == sample_indices(50, 10, 21));
  auto all = sample_indices(5, 5, 3);
  CHECK(all == std::vector<std::size_t>{0, 1, 2, 3, 4});
  CHECK_THROWS_AS(sample_indices(3, 4, 1), Error);
}
