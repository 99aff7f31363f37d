#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mcel/ontology.h"

namespace mcel {

struct SyntheticConfig {
  std::size_t entities = 500;
  std::size_t train_mentions = 2000;
  std::size_t dev_mentions = 400;
  std::size_t test_mentions = 400;
  // Share of entities that get a near-duplicate sibling ("x" / "x c").
  double confusable_fraction = 0.15;
  // Share of canonical names ending in a generic head word ("... disease").
  double generic_head_fraction = 0.35;
  // Share of entities that carry a lay alias never listed in the ontology.
  double alias_fraction = 0.2;
  // Probability that a mention of an alias-bearing entity uses the alias.
  double alias_mention_rate = 0.4;
  double zipf_exponent = 1.0;
  std::uint64_t seed = 20240501;
};

struct SyntheticBenchmark {
  Ontology ontology;
  std::vector<Mention> train;
  std::vector<Mention> dev;
  std::vector<Mention> test;
};

// Pseudo-biomedical ontology with spelling variants ("ae" -> "e"), suffix
// tokens, word drops, typos, lexically unrelated synonyms and lay aliases,
// plus confusable sibling entities. Mentions follow a Zipf distribution over
// entities. Alias mentions in dev/test only use aliases that also occur in
// train. Fully determined by cfg.seed.
SyntheticBenchmark make_synthetic_benchmark(const SyntheticConfig& cfg = {});

}  // namespace mcel
