#include "mcel/trainer.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <set>

#include "mcel/embedder.h"
#include "mcel/error.h"
#include "mcel/text.h"
#include "mcel/vecindex.h"

namespace mcel {
namespace {

class IndexMiner final : public NegativeMiner {
 public:
  explicit IndexMiner(const Ontology& ontology) : ontology_(ontology) {}

  void refresh(const NGramEncoder& encoder) override {
    // Non-owning view; the encoder outlives the epoch.
    auto view = std::shared_ptr<const NGramEncoder>(&encoder, [](const NGramEncoder*) {});
    index_.emplace(build_index(ontology_, NGramEmbedder(view)));
  }

  std::vector<std::string> mine(const NGramEncoder& encoder, const std::string& mention,
                                const std::string& gold_id, std::size_t count) override {
    if (count == 0) return {};
    if (!index_) refresh(encoder);
    return index_->mine_hard_negatives(encoder.encode(mention), gold_id, count);
  }

 private:
  const Ontology& ontology_;
  std::optional<VectorIndex> index_;
};

}  // namespace

void ContrastiveConfig::validate() const {
  if (!(temperature > 0.0)) throw NonPositiveTemperature(temperature);
  if (batch_size == 0) throw Error("batch_size must be positive");
  if (in_batch_negatives && batch_size < 2) throw Error("in-batch negatives need batch_size >= 2");
  if (epochs == 0) throw Error("epochs must be positive");
  if (!(learning_rate > 0.0)) throw Error("learning_rate must be positive");
}

std::vector<TrainingPair> make_training_pairs(const Ontology& ontology, std::span<const Mention> mentions,
                                              bool include_synonyms) {
  std::vector<TrainingPair> pairs;
  for (const auto& m : mentions) {
    if (m.has_valid_gold()) pairs.push_back({m.text, *m.gold_id});
  }
  if (include_synonyms) {
    for (const auto& e : ontology.entities()) {
      for (const auto& syn : e.synonyms) pairs.push_back({syn, e.id});
    }
  }
  return pairs;
}

std::unique_ptr<NegativeMiner> make_index_miner(const Ontology& ontology) {
  return std::make_unique<IndexMiner>(ontology);
}

std::vector<std::string> assemble_negatives(const std::string& gold_id, std::span<const std::string> batch_golds,
                                            std::span<const std::string> mined) {
  std::vector<std::string> out;
  std::set<std::string> seen{gold_id};
  for (const auto& id : batch_golds) {
    if (seen.insert(id).second) out.push_back(id);
  }
  for (const auto& id : mined) {
    if (seen.insert(id).second) out.push_back(id);
  }
  return out;
}

TrainResult train(NGramEncoder& encoder, std::span<const TrainingPair> pairs, const Ontology& ontology,
                  const ContrastiveConfig& cfg, NegativeMiner* miner) {
  cfg.validate();
  if (pairs.empty()) throw EmptyTrainingSet();
  for (const auto& p : pairs) {
    if (!ontology.contains(p.entity_id)) throw Error("training pair refers to unknown entity " + p.entity_id);
    if (p.mention.empty()) throw EmptyText();
  }

  TrainResult result;
  result.min_negatives = static_cast<std::size_t>(-1);
  std::vector<std::size_t> order(pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(cfg.seed);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (miner != nullptr && cfg.hard_negatives_per_pair > 0) miner->refresh(encoder);
    shuffle(order, rng);
    double loss_sum = 0.0;
    std::size_t loss_count = 0;

    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::vector<std::string> batch_golds;
      if (cfg.in_batch_negatives) {
        for (std::size_t i = start; i < end; ++i) batch_golds.push_back(pairs[order[i]].entity_id);
      }
      // Examples are assembled against the pre-step weights.
      std::vector<ContrastiveExample> examples;
      for (std::size_t i = start; i < end; ++i) {
        const auto& pair = pairs[order[i]];
        std::vector<std::string> mined;
        if (miner != nullptr && cfg.hard_negatives_per_pair > 0) {
          mined = miner->mine(encoder, pair.mention, pair.entity_id, cfg.hard_negatives_per_pair);
        }
        auto negatives = assemble_negatives(pair.entity_id, batch_golds, mined);
        result.min_negatives = std::min(result.min_negatives, negatives.size());
        result.max_negatives = std::max(result.max_negatives, negatives.size());
        if (negatives.empty()) {
          ++result.skipped_pairs;
          continue;
        }
        ContrastiveExample ex;
        ex.mention = encoder.features(pair.mention);
        ex.positive = encoder.features(ontology.at(pair.entity_id).canonical_name);
        for (const auto& id : negatives) ex.negatives.push_back(encoder.features(ontology.at(id).canonical_name));
        examples.push_back(std::move(ex));
      }
      if (examples.empty()) continue;

      SparseGradient grad;
      const double scale = 1.0 / static_cast<double>(examples.size());
      for (const auto& ex : examples) {
        loss_sum += contrastive_loss_and_gradient(encoder, ex, cfg.temperature, &grad, scale);
        ++loss_count;
      }
      for (const auto& [f, g] : grad) {
        auto row = encoder.row(f);
        for (std::size_t k = 0; k < row.size(); ++k) row[k] -= cfg.learning_rate * g[k];
      }
    }
    result.epoch_loss.push_back(loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0);
  }
  if (result.min_negatives == static_cast<std::size_t>(-1)) result.min_negatives = 0;
  return result;
}

double recall_at(const NGramEncoder& encoder, const Ontology& ontology, std::span<const Mention> mentions,
                 std::size_t n) {
  auto view = std::shared_ptr<const NGramEncoder>(&encoder, [](const NGramEncoder*) {});
  NGramEmbedder embedder(view);
  auto index = build_index(ontology, embedder);
  std::size_t hits = 0;
  std::size_t total = 0;
  for (const auto& m : mentions) {
    if (!m.has_valid_gold()) continue;
    ++total;
    for (const auto& c : index.top_n(encoder.encode(m.text), n)) {
      if (c.entity_id == *m.gold_id) {
        ++hits;
        break;
      }
    }
  }
  return total ? static_cast<double>(hits) / static_cast<double>(total) : 0.0;
}

LearningRateSearch search_learning_rate(NGramEncoder& initial, std::span<const TrainingPair> pairs,
                                        std::span<const Mention> held_out, const Ontology& ontology,
                                        ContrastiveConfig cfg, std::span<const double> grid, std::size_t n,
                                        const std::function<void(double, const TrainResult&)>& on_rate) {
  if (grid.empty()) throw Error("learning-rate grid is empty");
  LearningRateSearch search;
  std::optional<NGramEncoder> best;
  double best_recall = -1.0;
  for (double rate : grid) {
    NGramEncoder candidate = initial;
    cfg.learning_rate = rate;
    auto miner = make_index_miner(ontology);
    auto result = train(candidate, pairs, ontology, cfg, miner.get());
    if (on_rate) on_rate(rate, result);
    double r = recall_at(candidate, ontology, held_out, n);
    search.recall_by_rate.emplace_back(rate, r);
    if (r > best_recall || (r == best_recall && rate < search.best_learning_rate)) {
      best_recall = r;
      search.best_learning_rate = rate;
      best = std::move(candidate);
    }
  }
  initial = std::move(*best);
  return search;
}

}  // namespace mcel
