#pragma once

// Random instance generators shared by the unit and acceptance suites.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mcel/encoder.h"
#include "mcel/knnstore.h"
#include "mcel/mcp.h"
#include "mcel/vecindex.h"

namespace gen {

using Rng = std::mt19937_64;

inline std::size_t below(Rng& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

inline std::string word(Rng& rng) {
  static const char* syl[] = {"ka", "lo", "mi", "ne", "ru", "sa", "te", "vo", "zy", "ph", "ae", "qu", "ox"};
  std::string w;
  for (std::size_t i = 0, n = 1 + below(rng, 3); i < n; ++i) w += syl[below(rng, std::size(syl))];
  return w;
}

inline std::string phrase(Rng& rng) {
  std::string p = word(rng);
  for (std::size_t i = 0, n = below(rng, 3); i < n; ++i) p += " " + word(rng);
  return p;
}

// Small integer prototypes; rows drawn from the same prototype normalize to
// identical bits, which produces exact similarity ties.
inline std::vector<std::vector<double>> prototypes(Rng& rng, std::size_t dim, std::size_t count) {
  std::vector<std::vector<double>> out;
  while (out.size() < count) {
    std::vector<double> v(dim);
    bool nonzero = false;
    for (auto& x : v) {
      x = static_cast<double>(static_cast<int>(below(rng, 5)) - 2);
      nonzero = nonzero || x != 0.0;
    }
    if (nonzero) out.push_back(std::move(v));
  }
  return out;
}

inline std::vector<double> gaussian(Rng& rng, std::size_t dim) {
  std::normal_distribution<double> nd;
  std::vector<double> v(dim);
  for (auto& x : v) x = nd(rng);
  return v;
}

struct IndexCase {
  mcel::VectorIndex index;
  std::vector<mcel::Embedding> queries;
};

inline IndexCase random_index(Rng& rng, std::size_t max_rows, std::size_t queries = 6) {
  const std::size_t dim = 2 + below(rng, 11);
  const std::size_t rows = 1 + below(rng, max_rows);
  const std::size_t entities = std::max<std::size_t>(1, rows / (1 + below(rng, 3)));
  const auto protos = prototypes(rng, dim, 1 + below(rng, 40));

  std::set<std::pair<std::string, std::string>> keys;
  for (std::size_t r = 0; r < rows; ++r) {
    char id[16];
    std::snprintf(id, sizeof id, "E%05zu", below(rng, entities));
    keys.emplace(id, "name" + std::to_string(r));
  }
  std::vector<mcel::IndexKey> ks;
  std::vector<double> matrix;
  for (const auto& [id, name] : keys) {
    ks.push_back({id, name});
    auto e = mcel::Embedding::normalized(protos[below(rng, protos.size())]);
    matrix.insert(matrix.end(), e.values().begin(), e.values().end());
  }
  IndexCase c{mcel::VectorIndex(dim, std::move(ks), std::move(matrix)), {}};
  for (std::size_t q = 0; q < queries; ++q) {
    c.queries.push_back(mcel::Embedding::normalized(q % 2 == 0 ? protos[below(rng, protos.size())] : gaussian(rng, dim)));
  }
  return c;
}

inline mcel::ChoiceSet single_option_set(const std::string& mention, const std::string& id) {
  mcel::ChoiceSet cs;
  cs.mention_text = mention;
  cs.options.push_back({'A', id, "entity " + id});
  cs.gold_symbol = 'A';
  return cs;
}

struct DatastoreCase {
  mcel::Datastore datastore;
  std::vector<mcel::Embedding> queries;
};

inline DatastoreCase random_datastore(Rng& rng, std::size_t max_rows, std::size_t queries = 6) {
  const std::size_t dim = 2 + below(rng, 11);
  const std::size_t rows = 1 + below(rng, max_rows);
  const auto protos = prototypes(rng, dim, 1 + below(rng, 40));
  std::vector<std::size_t> ordinals(rows * 2);
  for (std::size_t i = 0; i < ordinals.size(); ++i) ordinals[i] = i;
  std::shuffle(ordinals.begin(), ordinals.end(), rng);
  std::vector<mcel::DatastoreEntry> entries;
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string text = "m" + std::to_string(ordinals[r]);
    entries.push_back({mcel::Embedding::normalized(protos[below(rng, protos.size())]), text,
                       single_option_set(text, "E" + std::to_string(r)), ordinals[r]});
  }
  DatastoreCase c{mcel::Datastore(std::move(entries), 0), {}};
  for (std::size_t q = 0; q < queries; ++q) {
    c.queries.push_back(mcel::Embedding::normalized(q % 2 == 0 ? protos[below(rng, protos.size())] : gaussian(rng, dim)));
  }
  return c;
}

// Choice set with 1..max_options distinct options; gold present with
// probability 3/4.
inline mcel::ChoiceSet random_choice_set(Rng& rng, std::size_t max_options = mcel::kMaxOptions) {
  mcel::ChoiceSet cs;
  cs.mention_text = phrase(rng);
  const std::size_t n = 1 + below(rng, max_options);
  std::set<std::string> ids;
  while (ids.size() < n) ids.insert("C" + std::to_string(below(rng, 100000)));
  std::vector<std::string> order(ids.begin(), ids.end());
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t i = 0; i < n; ++i) cs.options.push_back({mcel::symbol_at(i), order[i], phrase(rng)});
  if (below(rng, 4) != 0) cs.gold_symbol = mcel::symbol_at(below(rng, n));
  return cs;
}

struct GradientCase {
  mcel::NGramEncoder encoder;
  mcel::ContrastiveExample example;
};

inline mcel::SparseFeatures random_features(Rng& rng, std::size_t features) {
  std::set<std::uint32_t> picked;
  const std::size_t want = 1 + below(rng, std::min<std::size_t>(4, features));
  while (picked.size() < want) picked.insert(static_cast<std::uint32_t>(below(rng, features)));
  mcel::SparseFeatures x;
  for (auto f : picked) x.emplace_back(f, static_cast<double>(1 + below(rng, 3)));
  return x;
}

// True when every feature vector is a positive multiple of the first one,
// so their embeddings coincide.
inline bool all_parallel(const std::vector<const mcel::SparseFeatures*>& xs, std::size_t features) {
  auto dense = [&](const mcel::SparseFeatures& x) {
    std::vector<double> d(features, 0.0);
    for (const auto& [f, v] : x) d[f] += v;
    return d;
  };
  const auto a = dense(*xs.front());
  for (const auto* x : xs) {
    const auto b = dense(*x);
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t i = 0; i < features; ++i) {
      ab += a[i] * b[i];
      aa += a[i] * a[i];
      bb += b[i] * b[i];
    }
    if (ab * ab < aa * bb * (1.0 - 1e-12)) return false;
  }
  return true;
}

// Encoder with dim <= 8 and 2..20 feature rows, plus one example with 1..5
// negatives. Examples whose negatives all coincide with the positive have a
// constant loss, ln(k+1), and are redrawn.
inline GradientCase random_gradient_case(Rng& rng) {
  mcel::NGramConfig cfg;
  cfg.orders = {2};
  cfg.dim = 2 + below(rng, 7);
  const std::size_t vocab_size = 1 + below(rng, 12);
  cfg.hash_buckets = below(rng, 21 - vocab_size);
  if (vocab_size + cfg.hash_buckets < 2) cfg.hash_buckets = 1;
  std::map<std::string, std::uint32_t> vocab;
  for (std::size_t i = 0; i < vocab_size; ++i) vocab.emplace("g" + std::to_string(i), static_cast<std::uint32_t>(i));
  const std::size_t features = vocab_size + cfg.hash_buckets;
  auto weights = gaussian(rng, features * cfg.dim);
  mcel::ContrastiveExample ex;
  for (;;) {
    ex.mention = random_features(rng, features);
    ex.positive = random_features(rng, features);
    ex.negatives.clear();
    for (std::size_t i = 0, n = 1 + below(rng, 5); i < n; ++i) ex.negatives.push_back(random_features(rng, features));
    std::vector<const mcel::SparseFeatures*> candidates{&ex.positive};
    for (const auto& n : ex.negatives) candidates.push_back(&n);
    if (!all_parallel(candidates, features)) break;
  }
  return GradientCase{mcel::NGramEncoder(cfg, std::move(vocab), std::move(weights)), std::move(ex)};
}

}  // namespace gen
