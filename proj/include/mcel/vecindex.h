#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mcel/embedder.h"
#include "mcel/embedding.h"
#include "mcel/ontology.h"

namespace mcel {

struct IndexKey {
  std::string entity_id;
  std::string name;
  bool operator==(const IndexKey&) const = default;
};

struct Candidate {
  std::string entity_id;
  std::string matched_name;
  double similarity = 0.0;
  std::size_t rank = 0;  // 1-based
};

// Exact cosine search over one row per (entity, name). Rows are sorted by
// entity id, then name, and every row is unit norm.
class VectorIndex {
 public:
  VectorIndex(std::size_t dim, std::vector<IndexKey> keys, std::vector<double> matrix,
              std::uint64_t embedder_fingerprint = 0);

  std::size_t dim() const { return dim_; }
  std::size_t rows() const { return keys_.size(); }
  const std::vector<IndexKey>& keys() const { return keys_; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(matrix_).subspan(i * dim_, dim_);
  }
  std::uint64_t embedder_fingerprint() const { return fingerprint_; }

  // Best-scoring distinct entities, at most n of them. Each entity appears
  // once under its best-matching name; ties go to the smaller entity id.
  std::vector<Candidate> top_n(const Embedding& query, std::size_t n) const;

  // The `count` best distinct entities other than `gold_id`.
  std::vector<std::string> mine_hard_negatives(const Embedding& query, std::string_view gold_id,
                                               std::size_t count) const;

  void save(const std::filesystem::path& path) const;
  static VectorIndex load(const std::filesystem::path& path);

 private:
  std::vector<Candidate> ranked(const Embedding& query, std::size_t n,
                                std::optional<std::string_view> exclude) const;

  std::size_t dim_;
  std::vector<IndexKey> keys_;
  std::vector<double> matrix_;
  std::uint64_t fingerprint_;
};

// One row per canonical name and synonym of every entity.
VectorIndex build_index(const Ontology& ontology, const Embedder& embedder);

inline std::vector<Candidate> top_n(const VectorIndex& index, const Embedding& query, std::size_t n) {
  return index.top_n(query, n);
}

inline std::vector<std::string> mine_hard_negatives(const VectorIndex& index, const Embedding& query,
                                                    std::string_view gold_id, std::size_t count) {
  return index.mine_hard_negatives(query, gold_id, count);
}

}  // namespace mcel
