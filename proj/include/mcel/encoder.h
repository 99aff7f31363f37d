#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mcel/embedding.h"

namespace mcel {

struct NGramConfig {
  std::vector<int> orders{2, 3, 4};
  std::size_t dim = 256;
  // Out-of-vocabulary n-grams hash into this many extra feature rows.
  std::size_t hash_buckets = 4096;
  std::uint64_t seed = 0x5eed;
};

// Sparse bag of features: (feature index, count), sorted by index, no repeats.
using SparseFeatures = std::vector<std::pair<std::uint32_t, double>>;

// Character n-gram bag -> linear projection -> L2 normalization.
//
// Feature rows [0, vocab_size) belong to n-grams seen when the encoder was
// built; rows [vocab_size, vocab_size + hash_buckets) are shared by hashed
// out-of-vocabulary n-grams. Weights are a row-major (feature_count x dim)
// matrix.
class NGramEncoder {
 public:
  // Builds the vocabulary from `corpus` and draws Gaussian initial weights
  // (std dev 1/sqrt(dim)) from cfg.seed.
  static NGramEncoder build(const NGramConfig& cfg, std::span<const std::string> corpus);

  // Direct construction, mainly for tests. weights.size() must equal
  // (vocab.size() + cfg.hash_buckets) * cfg.dim.
  NGramEncoder(NGramConfig cfg, std::map<std::string, std::uint32_t> vocab, std::vector<double> weights);

  std::size_t dim() const { return cfg_.dim; }
  std::size_t vocab_size() const { return vocab_.size(); }
  std::size_t feature_count() const { return vocab_.size() + cfg_.hash_buckets; }
  const NGramConfig& config() const { return cfg_; }
  const std::map<std::string, std::uint32_t>& vocab() const { return vocab_; }

  std::vector<double>& weights() { return weights_; }
  const std::vector<double>& weights() const { return weights_; }
  std::span<const double> row(std::size_t feature) const {
    return std::span<const double>(weights_).subspan(feature * cfg_.dim, cfg_.dim);
  }
  std::span<double> row(std::size_t feature) {
    return std::span<double>(weights_).subspan(feature * cfg_.dim, cfg_.dim);
  }

  // Case-folded text padded with one space on each side; every n-gram of each
  // configured order counts once per occurrence.
  SparseFeatures features(std::string_view text) const;

  // Un-normalized projection W^T x.
  std::vector<double> project(const SparseFeatures& x) const;

  // Throws EmptyText, or Error when the text yields no features.
  Embedding encode(std::string_view text) const;

  // Hash of configuration, vocabulary and weights. Ties index and datastore
  // files to the checkpoint they were built with.
  std::uint64_t fingerprint() const;

  void save(const std::filesystem::path& path) const;
  static NGramEncoder load(const std::filesystem::path& path);

 private:
  NGramConfig cfg_;
  std::map<std::string, std::uint32_t> vocab_;
  std::vector<double> weights_;
};

// Sparse row gradient: feature index -> dL/dW[feature, :].
using SparseGradient = std::map<std::uint32_t, std::vector<double>>;

struct ContrastiveExample {
  SparseFeatures mention;
  SparseFeatures positive;
  std::vector<SparseFeatures> negatives;
};

// Contrastive loss of one (mention, positive, negatives) example under the
// encoder's current weights. When `grad` is non-null the analytic gradient
// with respect to the weights is accumulated into it, scaled by `grad_scale`.
double contrastive_loss_and_gradient(const NGramEncoder& encoder, const ContrastiveExample& example,
                                     double temperature, SparseGradient* grad, double grad_scale = 1.0);

}  // namespace mcel
