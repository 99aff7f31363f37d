#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mcel/encoder.h"
#include "mcel/ontology.h"

namespace mcel {

struct ContrastiveConfig {
  double temperature = 0.01;
  std::size_t batch_size = 16;
  std::size_t hard_negatives_per_pair = 4;
  std::size_t epochs = 20;
  double learning_rate = 4e-4;
  bool in_batch_negatives = true;
  std::uint64_t seed = 0x5eed;

  // Throws Error when an invariant is violated.
  void validate() const;
};

// Learning rates tried by search_learning_rate.
inline constexpr double kLearningRateGrid[] = {4e-5, 8e-5, 1e-4, 2e-4, 4e-4};

struct TrainingPair {
  std::string mention;
  std::string entity_id;
};

// (mention text, gold) for every mention with a resolvable gold id, followed by
// (synonym, id) for every synonym in the ontology when include_synonyms is set.
std::vector<TrainingPair> make_training_pairs(const Ontology& ontology, std::span<const Mention> mentions,
                                              bool include_synonyms = true);

// Source of "highest-scoring incorrect entities". refresh() is called at the
// start of each epoch with the current weights.
class NegativeMiner {
 public:
  virtual ~NegativeMiner() = default;
  virtual void refresh(const NGramEncoder& encoder) = 0;
  virtual std::vector<std::string> mine(const NGramEncoder& encoder, const std::string& mention,
                                        const std::string& gold_id, std::size_t count) = 0;
};

// Re-embeds the ontology with the current encoder each epoch and mines from
// an exact index.
std::unique_ptr<NegativeMiner> make_index_miner(const Ontology& ontology);

// H(e): in-batch golds first, then mined ids; distinct, never containing gold.
std::vector<std::string> assemble_negatives(const std::string& gold_id, std::span<const std::string> batch_golds,
                                            std::span<const std::string> mined);

struct TrainResult {
  std::vector<double> epoch_loss;  // mean loss per epoch, measured before each step
  std::size_t skipped_pairs = 0;   // pair-visits with no negative at all
  std::size_t min_negatives = 0;
  std::size_t max_negatives = 0;
};

// Mini-batch SGD on the mean contrastive loss. Entity side text is the
// canonical name.
TrainResult train(NGramEncoder& encoder, std::span<const TrainingPair> pairs, const Ontology& ontology,
                  const ContrastiveConfig& cfg, NegativeMiner* miner);

// Fraction of mentions (with valid gold) whose gold is among the top n.
double recall_at(const NGramEncoder& encoder, const Ontology& ontology, std::span<const Mention> mentions,
                 std::size_t n);

struct LearningRateSearch {
  double best_learning_rate = 0.0;
  std::vector<std::pair<double, double>> recall_by_rate;  // (rate, held-out recall@n)
};

// Trains a copy of `initial` per grid rate and keeps the one with the best
// held-out recall@n (ties go to the smaller rate). `initial` is replaced by
// the winner.
LearningRateSearch search_learning_rate(NGramEncoder& initial, std::span<const TrainingPair> pairs,
                                        std::span<const Mention> held_out, const Ontology& ontology,
                                        ContrastiveConfig cfg, std::span<const double> grid, std::size_t n,
                                        const std::function<void(double, const TrainResult&)>& on_rate = {});

}  // namespace mcel
