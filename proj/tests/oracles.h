#pragma once

// Brute-force references for the unit and acceptance suites. Ranking is done
// the slow way (score everything, group with a map, full sort); only the
// per-row similarity arithmetic mirrors the engine so that exact ties stay
// exact on both sides.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mcel/encoder.h"
#include "mcel/knnstore.h"
#include "mcel/vecindex.h"

namespace oracle {

struct Hit {
  std::string id;
  std::string name;
  double similarity = 0.0;
};

inline double sum_products(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline std::vector<Hit> top_n(const mcel::VectorIndex& index, const mcel::Embedding& q, std::size_t n,
                              std::optional<std::string> exclude = {}) {
  const double qn = std::sqrt(sum_products(q.values(), q.values()));
  std::map<std::string, Hit> best;
  for (std::size_t i = 0; i < index.rows(); ++i) {
    const auto& key = index.keys()[i];
    if (exclude && key.entity_id == *exclude) continue;
    const double sim = std::clamp(sum_products(q.values(), index.row(i)) / qn, -1.0, 1.0);
    auto it = best.find(key.entity_id);
    // Rows come in (id, name) order, so strict > keeps the first name on ties.
    if (it == best.end() || sim > it->second.similarity) best[key.entity_id] = Hit{key.entity_id, key.name, sim};
  }
  std::vector<Hit> all;
  for (auto& [id, h] : best) all.push_back(h);
  std::sort(all.begin(), all.end(), [](const Hit& a, const Hit& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.id < b.id;
  });
  if (all.size() > n) all.resize(n);
  return all;
}

inline std::vector<std::string> hard_negatives(const mcel::VectorIndex& index, const mcel::Embedding& q,
                                               const std::string& gold, std::size_t count) {
  std::vector<std::string> out;
  for (const auto& h : top_n(index, q, count, gold)) out.push_back(h.id);
  return out;
}

struct Near {
  std::size_t ordinal = 0;
  double similarity = 0.0;
};

inline std::vector<Near> knn(const mcel::Datastore& ds, const mcel::Embedding& x, std::size_t k,
                             std::optional<std::size_t> exclude = {}) {
  std::vector<Near> all;
  const double xn = std::sqrt(sum_products(x.values(), x.values()));
  for (const auto& e : ds.entries()) {
    if (exclude && e.ordinal == *exclude) continue;
    const double en = std::sqrt(sum_products(e.key.values(), e.key.values()));
    const double sim = std::clamp(sum_products(x.values(), e.key.values()) / (xn * en), -1.0, 1.0);
    all.push_back({e.ordinal, sim});
  }
  std::sort(all.begin(), all.end(), [](const Near& a, const Near& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.ordinal < b.ordinal;
  });
  if (all.size() > k) all.resize(k);
  return all;
}

// Central finite differences of the contrastive loss over every weight.
inline std::vector<double> numeric_gradient(mcel::NGramEncoder& encoder, const mcel::ContrastiveExample& ex,
                                            double temperature, double h) {
  auto& w = encoder.weights();
  std::vector<double> g(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double keep = w[i];
    w[i] = keep + h;
    const double up = mcel::contrastive_loss_and_gradient(encoder, ex, temperature, nullptr);
    w[i] = keep - h;
    const double down = mcel::contrastive_loss_and_gradient(encoder, ex, temperature, nullptr);
    w[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

inline std::vector<double> dense(const mcel::SparseGradient& grad, std::size_t features, std::size_t dim) {
  std::vector<double> out(features * dim, 0.0);
  for (const auto& [f, row] : grad) {
    for (std::size_t j = 0; j < dim; ++j) out[f * dim + j] += row[j];
  }
  return out;
}

// ||a - b|| / max(||a||, ||b||); 0 when both vanish.
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double scale = std::sqrt(std::max(na, nb));
  return scale == 0.0 ? 0.0 : std::sqrt(diff) / scale;
}

}  // namespace oracle
