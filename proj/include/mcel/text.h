#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mcel {

// ASCII case folding. Non-ASCII bytes pass through unchanged.
std::string casefold(std::string_view s);

std::string_view trim(std::string_view s);

std::vector<std::string_view> split(std::string_view s, char sep);

// 64-bit FNV-1a. Stable across platforms, unlike std::hash.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 14695981039346656037ULL);
std::uint64_t fnv1a64(std::span<const std::byte> bytes, std::uint64_t seed = 14695981039346656037ULL);

// Distinct character trigrams of the case-folded string.
std::set<std::string> char_trigrams(std::string_view s);

// |A ∩ B| / |A ∪ B| over char_trigrams; 1 when both strings are equal, 0 when
// either has no trigram and they differ.
double trigram_jaccard(std::string_view a, std::string_view b);

using Rng = std::mt19937_64;

// Unbiased draw from [0, bound). Implemented here rather than through
// std::uniform_int_distribution so that seeded runs agree across standard
// libraries.
std::uint64_t uniform_below(Rng& rng, std::uint64_t bound);

double uniform_unit(Rng& rng);

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

// Derives an independent seed for a sub-stream (e.g. one per mention ordinal).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace mcel
