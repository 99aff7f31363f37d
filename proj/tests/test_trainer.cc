#include <gtest/gtest.h>

#include <set>

#include "mcel/error.h"
#include "mcel/eval.h"
#include "mcel/synthetic.h"
#include "mcel/trainer.h"

using namespace mcel;

namespace {

SyntheticBenchmark small_bench() {
  return make_synthetic_benchmark({.entities = 40, .train_mentions = 120, .dev_mentions = 40, .test_mentions = 40});
}

NGramEncoder fresh_encoder(const SyntheticBenchmark& b) {
  NGramConfig cfg;
  cfg.dim = 32;
  cfg.hash_buckets = 64;
  return NGramEncoder::build(cfg, encoder_corpus(b.ontology, b.train));
}

ContrastiveConfig quick_config() {
  ContrastiveConfig c;
  c.epochs = 3;
  c.temperature = 0.05;
  c.learning_rate = 0.02;
  c.batch_size = 8;
  return c;
}

}  // namespace

TEST(TrainingPairs, MentionsWithGoldThenSynonyms) {
  auto o = Ontology::from_entities({{"A", "alpha", {"alfa", "ALPHA"}}, {"B", "beta", {}}});
  std::vector<Mention> ms(3);
  ms[0].text = "alph";
  ms[0].gold_id = "A";
  ms[1].text = "unknown";
  ms[1].gold_id = "Z";
  ms[1].dangling_gold = true;
  ms[2].text = "no gold";
  auto pairs = make_training_pairs(o, ms, true);
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_EQ(pairs[0].mention, "alph");
  EXPECT_EQ(pairs[1].mention, "alfa");
  EXPECT_EQ(pairs[1].entity_id, "A");
  EXPECT_EQ(make_training_pairs(o, ms, false).size(), 1u);
}

TEST(AssembleNegatives, InBatchFirstDistinctWithoutGold) {
  std::vector<std::string> batch{"A", "B", "G", "B", "C"};
  std::vector<std::string> mined{"C", "D", "G", "A", "E"};
  auto neg = assemble_negatives("G", batch, mined);
  EXPECT_EQ(neg, (std::vector<std::string>{"A", "B", "C", "D", "E"}));
  EXPECT_TRUE(assemble_negatives("G", std::vector<std::string>{"G"}, {}).empty());
}

TEST(ContrastiveConfig, Validation) {
  ContrastiveConfig c;
  EXPECT_NO_THROW(c.validate());
  c.temperature = 0.0;
  EXPECT_THROW(c.validate(), NonPositiveTemperature);
  c = {};
  c.batch_size = 1;
  EXPECT_THROW(c.validate(), Error);
  c.in_batch_negatives = false;
  EXPECT_NO_THROW(c.validate());
  c = {};
  c.epochs = 0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.learning_rate = -1.0;
  EXPECT_THROW(c.validate(), Error);
}

TEST(Train, EmptyPairsThrow) {
  auto b = small_bench();
  auto enc = fresh_encoder(b);
  EXPECT_THROW(train(enc, {}, b.ontology, quick_config(), nullptr), EmptyTrainingSet);
}

TEST(Train, LossFallsAndRecallImproves) {
  auto b = small_bench();
  auto enc = fresh_encoder(b);
  const double before = recall_at(enc, b.ontology, b.dev, 1);
  auto pairs = make_training_pairs(b.ontology, b.train);
  auto miner = make_index_miner(b.ontology);
  auto cfg = quick_config();
  cfg.epochs = 6;
  auto r = train(enc, pairs, b.ontology, cfg, miner.get());
  ASSERT_EQ(r.epoch_loss.size(), 6u);
  EXPECT_LT(r.epoch_loss.back(), r.epoch_loss.front());
  EXPECT_GE(recall_at(enc, b.ontology, b.dev, 1), before);
  EXPECT_EQ(r.skipped_pairs, 0u);
  EXPECT_GE(r.min_negatives, 1u);
  EXPECT_LE(r.max_negatives, cfg.batch_size - 1 + cfg.hard_negatives_per_pair);
}

TEST(Train, IsDeterministic) {
  auto b = small_bench();
  auto pairs = make_training_pairs(b.ontology, b.train);
  auto run = [&] {
    auto enc = fresh_encoder(b);
    auto miner = make_index_miner(b.ontology);
    train(enc, pairs, b.ontology, quick_config(), miner.get());
    return enc.fingerprint();
  };
  EXPECT_EQ(run(), run());
}

TEST(Train, HardNegativesOnlyWithoutInBatch) {
  auto b = small_bench();
  auto enc = fresh_encoder(b);
  auto pairs = make_training_pairs(b.ontology, b.train);
  auto cfg = quick_config();
  cfg.in_batch_negatives = false;
  cfg.epochs = 1;
  auto miner = make_index_miner(b.ontology);
  auto r = train(enc, pairs, b.ontology, cfg, miner.get());
  EXPECT_EQ(r.max_negatives, cfg.hard_negatives_per_pair);
  // Neither source of negatives: every pair is skipped.
  cfg.hard_negatives_per_pair = 0;
  r = train(enc, pairs, b.ontology, cfg, miner.get());
  EXPECT_EQ(r.skipped_pairs, pairs.size());
}

TEST(RecallAt, IsMonotoneInN) {
  auto b = small_bench();
  auto enc = fresh_encoder(b);
  double prev = 0.0;
  for (std::size_t n = 1; n <= 10; ++n) {
    double r = recall_at(enc, b.ontology, b.test, n);
    EXPECT_GE(r, prev);
    prev = r;
  }
  EXPECT_DOUBLE_EQ(recall_at(enc, b.ontology, b.test, b.ontology.size()), 1.0);
}

TEST(LearningRateSearch, PicksBestAndPrefersSmallerOnTies) {
  auto b = small_bench();
  auto pairs = make_training_pairs(b.ontology, b.train);
  auto cfg = quick_config();
  cfg.epochs = 1;
  auto enc = fresh_encoder(b);
  // A huge n makes every rate tie at recall 1, so the smallest wins.
  const double grid[] = {0.02, 0.001, 0.005};
  auto s = search_learning_rate(enc, pairs, b.dev, b.ontology, cfg, grid, b.ontology.size());
  EXPECT_EQ(s.best_learning_rate, 0.001);
  ASSERT_EQ(s.recall_by_rate.size(), 3u);

  auto enc2 = fresh_encoder(b);
  auto s2 = search_learning_rate(enc2, pairs, b.dev, b.ontology, cfg, grid, 1);
  double best = 0.0;
  for (const auto& [rate, r] : s2.recall_by_rate) best = std::max(best, r);
  EXPECT_DOUBLE_EQ(recall_at(enc2, b.ontology, b.dev, 1), best);
  EXPECT_THROW(search_learning_rate(enc2, pairs, b.dev, b.ontology, cfg, {}, 1), Error);
}
