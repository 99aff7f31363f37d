#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "mcel/text.h"

using namespace mcel;

TEST(Text, CasefoldIsAsciiOnly) {
  EXPECT_EQ(casefold("HaemoGLOBIN C"), "haemoglobin c");
  EXPECT_EQ(casefold("\xc3\x89tat"), "\xc3\x89tat");
}

TEST(Text, TrimAndSplit) {
  EXPECT_EQ(trim("  a b \t\n"), "a b");
  EXPECT_EQ(trim("   "), "");
  auto parts = split("a|b||c", '|');
  ASSERT_EQ(parts.size(), 4u);
  EXPECT_EQ(parts[2], "");
  EXPECT_EQ(parts[3], "c");
}

TEST(Text, FnvKnownVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(Text, TrigramsAreDistinctAndCasefolded) {
  auto t = char_trigrams("AAAA");
  EXPECT_EQ(t, (std::set<std::string>{"aaa"}));
  EXPECT_TRUE(char_trigrams("ab").empty());
}

TEST(Text, TrigramJaccardFrozenValues) {
  // hemoglobin: 8 trigrams; haemoglobin c: 11; shared: 7 -> 7 / 12.
  EXPECT_DOUBLE_EQ(trigram_jaccard("hemoglobin", "haemoglobin c"), 7.0 / 12.0);
  EXPECT_DOUBLE_EQ(trigram_jaccard("hemoglobin", "HEMOGLOBIN"), 1.0);
  EXPECT_DOUBLE_EQ(trigram_jaccard("ab", "ab"), 1.0);
  EXPECT_DOUBLE_EQ(trigram_jaccard("ab", "abc"), 0.0);
  EXPECT_DOUBLE_EQ(trigram_jaccard("xyz", "abc"), 0.0);
}

TEST(Text, UniformBelowStaysInRangeAndIsSeeded) {
  Rng a(7), b(7);
  for (int i = 0; i < 1000; ++i) {
    auto x = uniform_below(a, 13);
    EXPECT_LT(x, 13u);
    EXPECT_EQ(x, uniform_below(b, 13));
  }
  EXPECT_EQ(uniform_below(a, 1), 0u);
}

TEST(Text, UniformBelowCoversEveryValue) {
  Rng rng(3);
  std::vector<int> hits(6, 0);
  for (int i = 0; i < 6000; ++i) ++hits[uniform_below(rng, 6)];
  for (int h : hits) EXPECT_GT(h, 850);
}

TEST(Text, ShuffleIsAPermutation) {
  Rng rng(11);
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  auto w = v;
  shuffle(w, rng);
  EXPECT_NE(v, w);
  std::sort(w.begin(), w.end());
  EXPECT_EQ(v, w);
}

TEST(Text, MixSeedSeparatesStreams) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 100; ++s) seen.insert(mix_seed(42, s));
  EXPECT_EQ(seen.size(), 100u);
  EXPECT_EQ(mix_seed(42, 5), mix_seed(42, 5));
  EXPECT_NE(mix_seed(42, 5), mix_seed(43, 5));
}
