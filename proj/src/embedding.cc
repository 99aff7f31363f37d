#include "mcel/embedding.h"

#include <algorithm>
#include <cmath>

#include "mcel/error.h"

namespace mcel {

Embedding Embedding::normalized(std::vector<double> values) {
  double sq = 0.0;
  for (double v : values) sq += v * v;
  double n = std::sqrt(sq);
  if (!(n > 0.0) || !std::isfinite(n)) throw Error("cannot normalize a zero or non-finite vector");
  for (double& v : values) v /= n;
  return Embedding(std::move(values));
}

double Embedding::norm() const { return std::sqrt(dot(values_, values_)); }

Embedding Embedding::operator-() const {
  std::vector<double> out(values_);
  for (double& v : out) v = -v;
  return Embedding(std::move(out));
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double score(const Embedding& a, const Embedding& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch(a.dim(), b.dim());
  double na = a.norm();
  double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw Error("cosine similarity of a zero vector");
  return std::clamp(dot(a.values(), b.values()) / (na * nb), -1.0, 1.0);
}

double contrastive_loss(const Embedding& mention, const Embedding& positive,
                        std::span<const Embedding> negatives, double temperature) {
  if (!(temperature > 0.0)) throw NonPositiveTemperature(temperature);
  if (negatives.empty()) throw Error("contrastive loss needs at least one negative");
  std::vector<double> logits;
  logits.reserve(negatives.size() + 1);
  logits.push_back(score(mention, positive) / temperature);
  for (const auto& neg : negatives) logits.push_back(score(mention, neg) / temperature);
  double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - top);
  return top + std::log(sum) - logits.front();
}

}  // namespace mcel
