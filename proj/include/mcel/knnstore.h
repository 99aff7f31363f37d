#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mcel/embedder.h"
#include "mcel/embedding.h"
#include "mcel/mcp.h"
#include "mcel/ontology.h"

namespace mcel {

struct LabeledInstance {
  Mention mention;
  ChoiceSet choice_set;  // must carry a gold symbol
};

struct DatastoreEntry {
  Embedding key;
  std::string mention_text;
  ChoiceSet choice_set;
  std::size_t ordinal = 0;
};

struct Neighbor {
  std::size_t ordinal = 0;
  std::string mention_text;
  ChoiceSet choice_set;
  double similarity = 0.0;
};

struct NeighborSet {
  std::vector<Neighbor> neighbors;  // non-increasing similarity
};

// Training instances keyed by mention embedding, sorted by ordinal.
class Datastore {
 public:
  Datastore(std::vector<DatastoreEntry> entries, std::uint64_t embedder_fingerprint);

  std::size_t size() const { return entries_.size(); }
  const std::vector<DatastoreEntry>& entries() const { return entries_; }
  std::uint64_t embedder_fingerprint() const { return fingerprint_; }

  // Exact top-k by cosine; the entry with ordinal `exclude_ordinal` never
  // appears. Ties go to the smaller ordinal.
  NeighborSet query(const Embedding& x, std::size_t k, std::optional<std::size_t> exclude_ordinal = {}) const;

  // k entries drawn uniformly without replacement (seeded), excluding
  // `exclude_ordinal`, then ordered like query() results.
  NeighborSet sample_random(const Embedding& x, std::size_t k, std::uint64_t seed,
                            std::optional<std::size_t> exclude_ordinal = {}) const;

  void save(const std::filesystem::path& path) const;
  static Datastore load(const std::filesystem::path& path);

 private:
  Neighbor neighbor(std::size_t entry, double similarity) const;

  std::vector<DatastoreEntry> entries_;
  std::uint64_t fingerprint_;
};

// Throws UnlabeledInstance when a choice set lacks its gold symbol.
Datastore build_datastore(std::span<const LabeledInstance> training, const Embedder& embedder);

struct EnhancedPromptOptions {
  // Written after each solved block's answer symbol.
  std::string separator = " ";
  bool most_similar_first = true;
  // 0 disables the limit; otherwise least similar neighbors are dropped
  // until the prompt fits.
  std::size_t max_length = 0;
};

// T(m_1,O_1) a_1 ... T(m_K,O_K) a_K T(x,O): one solved block per neighbor,
// then the unsolved input block.
PromptInstance assemble_enhanced_prompt(const NeighborSet& neighbors, const ChoiceSet& input,
                                        const EnhancedPromptOptions& opts = {}, std::size_t mention_ordinal = 0);

}  // namespace mcel
