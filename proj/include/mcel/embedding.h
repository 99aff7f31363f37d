#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mcel {

// Fixed-dimension real vector. Vectors produced by an embedder are unit norm.
class Embedding {
 public:
  Embedding() = default;
  explicit Embedding(std::vector<double> values) : values_(std::move(values)) {}

  // Scales to unit L2 norm. Throws Error on a zero or non-finite vector.
  static Embedding normalized(std::vector<double> values);

  std::size_t dim() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double norm() const;

  Embedding operator-() const;
  bool operator==(const Embedding&) const = default;

 private:
  std::vector<double> values_;
};

double dot(std::span<const double> a, std::span<const double> b);

// Cosine similarity in [-1, 1]. Throws DimensionMismatch.
double score(const Embedding& a, const Embedding& b);

// -log( exp(s(m,pos)/tau) / (exp(s(m,pos)/tau) + sum_i exp(s(m,neg_i)/tau)) ),
// evaluated with log-sum-exp. Throws DimensionMismatch, NonPositiveTemperature,
// or Error when negatives is empty.
double contrastive_loss(const Embedding& mention, const Embedding& positive,
                        std::span<const Embedding> negatives, double temperature);

}  // namespace mcel
