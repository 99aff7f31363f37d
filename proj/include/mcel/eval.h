#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mcel/embedder.h"
#include "mcel/generator.h"
#include "mcel/knnstore.h"
#include "mcel/mcp.h"
#include "mcel/ontology.h"
#include "mcel/trainer.h"
#include "mcel/vecindex.h"

namespace mcel {

enum class NeighborMode { kSimilar, kRandom, kNone };
enum class AnswerMode { kSymbol, kGenerateNames };

std::string_view neighbor_mode_name(NeighborMode m);
NeighborMode parse_neighbor_mode(std::string_view s);
std::string_view answer_mode_name(AnswerMode m);
AnswerMode parse_answer_mode(std::string_view s);

struct EvalConfig {
  std::size_t n_options = 5;
  std::size_t k_neighbors = 3;
  bool augmentation = true;
  std::size_t swaps = 1;
  NeighborMode neighbor_mode = NeighborMode::kSimilar;
  AnswerMode answer_mode = AnswerMode::kSymbol;
  DisplayName display = DisplayName::kMatched;
  EnhancedPromptOptions prompt;
  std::uint64_t seed = 0x5eed;
  std::size_t threads = 1;
  // Name of the generator backend; echoed only.
  std::string backend = "lexical-heuristic";

  void validate() const;
  // 0 when neighbor_mode is kNone.
  std::size_t effective_k() const;
  nlohmann::json to_json() const;
};

// Borrowed components of a ready engine. datastore may be null when the
// effective K is 0.
struct Engine {
  const Ontology* ontology = nullptr;
  const Embedder* embedder = nullptr;
  const VectorIndex* index = nullptr;
  const Datastore* datastore = nullptr;
  const Generator* generator = nullptr;
};

struct InstanceRecord {
  std::size_t ordinal = 0;
  std::string mention;
  std::optional<std::string> gold_id;
  std::optional<std::string> predicted_id;
  std::vector<std::string> candidate_ids;
  std::vector<std::size_t> neighbor_ordinals;
  std::string output;  // answer symbol or emitted name
  bool gold_in_candidates = false;
  bool correct = false;
  bool invalid_output = false;
  bool no_match = false;
  std::optional<std::string> failure;
};

struct EvalReport {
  std::string label;
  EvalConfig config;
  std::size_t total = 0;
  std::size_t correct = 0;
  std::size_t incorrect = 0;
  std::size_t failed = 0;
  std::size_t gold_in_candidates = 0;
  std::size_t invalid_outputs = 0;
  std::size_t no_match = 0;
  double accuracy = 0.0;
  double gold_in_candidates_rate = 0.0;
  double invalid_output_rate = 0.0;
  std::vector<InstanceRecord> records;
  // Logged, never serialized, so report files stay byte-identical.
  double wall_clock_seconds = 0.0;

  nlohmann::json to_json(bool with_records = true) const;
};

// Links every mention and scores it against its gold id. Mentions without a
// resolvable gold and instances whose components throw count as failed.
EvalReport evaluate(std::span<const Mention> split, const Engine& engine, const EvalConfig& cfg);

struct AblationRow {
  std::string name;
  EvalReport report;
};

// Rows: full, no-aug, no-knn, random-neighbors, generate-names, with shared
// seeds. `no_aug_generator`, when given, answers the no-aug row (a backend
// fine-tuned without order swaps); otherwise the base generator does.
std::vector<AblationRow> run_ablations(std::span<const Mention> split, const Engine& engine, const EvalConfig& base,
                                       const Generator* no_aug_generator = nullptr);

enum class SweepParam { kN, kK };
SweepParam parse_sweep_param(std::string_view s);

struct SweepPoint {
  std::size_t value = 0;
  double accuracy = 0.0;
  double gold_in_candidates_rate = 0.0;
};

std::vector<SweepPoint> sweep(SweepParam param, std::span<const std::size_t> values, std::span<const Mention> split,
                              const Engine& engine, const EvalConfig& cfg);

void write_sweep_csv(std::ostream& out, SweepParam param, std::span<const SweepPoint> points);
// Aligned text table of one or more reports.
std::string format_table(std::span<const AblationRow> rows);

// Labels training mentions for the datastore: top-N candidates with the gold
// injected when the retriever misses it. Mentions without a resolvable gold
// are skipped.
std::vector<LabeledInstance> label_training_split(std::span<const Mention> train, const Ontology& ontology,
                                                  const Embedder& embedder, const VectorIndex& index,
                                                  std::size_t n_options, DisplayName display);

// Generator training export: per instance the (retrieval-enhanced when a
// datastore is given and K > 0) prompt plus cfg.swaps order-swapped copies
// when cfg.augmentation is on. Neighbors never include the instance itself.
std::vector<PromptInstance> export_training_prompts(std::span<const LabeledInstance> training,
                                                    const Embedder& embedder, const Datastore* datastore,
                                                    const EvalConfig& cfg);

// Encoder vocabulary source: every ontology name, then the training texts.
std::vector<std::string> encoder_corpus(const Ontology& ontology, std::span<const Mention> train);

// Everything needed to run the engine end to end with the built-in encoder.
struct PipelineConfig {
  NGramConfig encoder;
  ContrastiveConfig training;
  bool train_retriever = true;
  std::size_t n_options = 5;
  DisplayName display = DisplayName::kMatched;
};

struct Pipeline {
  std::shared_ptr<NGramEncoder> encoder;
  std::unique_ptr<NGramEmbedder> embedder;
  std::unique_ptr<VectorIndex> index;
  std::unique_ptr<Datastore> datastore;
  TrainResult training;
};

// Builds the encoder vocabulary from ontology names and training mentions,
// trains it (in-batch + mined hard negatives), indexes the ontology, labels
// the training split and builds the datastore.
Pipeline build_pipeline(const Ontology& ontology, std::span<const Mention> train, const PipelineConfig& cfg);

}  // namespace mcel
