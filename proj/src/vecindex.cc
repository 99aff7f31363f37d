#include "mcel/vecindex.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "mcel/binary_io.h"
#include "mcel/error.h"

namespace mcel {
namespace {

constexpr std::string_view kMagic = "MCELIDX1";
constexpr std::uint32_t kVersion = 1;

bool better(const Candidate& a, const Candidate& b) {
  if (a.similarity != b.similarity) return a.similarity > b.similarity;
  return a.entity_id < b.entity_id;
}

}  // namespace

VectorIndex::VectorIndex(std::size_t dim, std::vector<IndexKey> keys, std::vector<double> matrix,
                         std::uint64_t embedder_fingerprint)
    : dim_(dim), keys_(std::move(keys)), matrix_(std::move(matrix)), fingerprint_(embedder_fingerprint) {
  if (dim_ == 0) throw Error("index dimension must be positive");
  if (matrix_.size() != keys_.size() * dim_) throw Error("index matrix does not match key count");
  for (std::size_t i = 1; i < keys_.size(); ++i) {
    const auto& a = keys_[i - 1];
    const auto& b = keys_[i];
    if (std::tie(a.entity_id, a.name) >= std::tie(b.entity_id, b.name)) {
      throw Error("index keys must be unique and sorted by (entity id, name)");
    }
  }
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    auto r = row(i);
    if (std::abs(std::sqrt(dot(r, r)) - 1.0) > 1e-6) throw Error("index row " + std::to_string(i) + " is not unit norm");
  }
}

std::vector<Candidate> VectorIndex::ranked(const Embedding& query, std::size_t n,
                                           std::optional<std::string_view> exclude) const {
  if (query.dim() != dim_) throw DimensionMismatch(dim_, query.dim());
  if (n == 0 || keys_.empty()) return {};
  const double qn = query.norm();
  if (!(qn > 0.0)) throw Error("zero query vector");

  // Rows of one entity are contiguous; keep the first best-scoring name.
  std::vector<Candidate> best;
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    const auto& key = keys_[i];
    if (exclude && key.entity_id == *exclude) continue;
    double sim = std::clamp(dot(query.values(), row(i)) / qn, -1.0, 1.0);
    if (best.empty() || best.back().entity_id != key.entity_id) {
      best.push_back(Candidate{key.entity_id, key.name, sim, 0});
    } else if (sim > best.back().similarity) {
      best.back().matched_name = key.name;
      best.back().similarity = sim;
    }
  }
  const std::size_t take = std::min(n, best.size());
  std::partial_sort(best.begin(), best.begin() + static_cast<std::ptrdiff_t>(take), best.end(), better);
  best.resize(take);
  for (std::size_t r = 0; r < best.size(); ++r) best[r].rank = r + 1;
  return best;
}

std::vector<Candidate> VectorIndex::top_n(const Embedding& query, std::size_t n) const {
  return ranked(query, n, std::nullopt);
}

std::vector<std::string> VectorIndex::mine_hard_negatives(const Embedding& query, std::string_view gold_id,
                                                          std::size_t count) const {
  std::vector<std::string> out;
  if (count == 0) return out;
  for (auto& c : ranked(query, count, gold_id)) out.push_back(std::move(c.entity_id));
  return out;
}

VectorIndex build_index(const Ontology& ontology, const Embedder& embedder) {
  std::vector<IndexKey> keys;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& e : ontology.entities()) {
    for (const auto& name : e.names()) {
      if (seen.emplace(e.id, name).second) keys.push_back({e.id, name});
    }
  }
  std::sort(keys.begin(), keys.end(), [](const IndexKey& a, const IndexKey& b) {
    return std::tie(a.entity_id, a.name) < std::tie(b.entity_id, b.name);
  });
  std::vector<std::string> names;
  names.reserve(keys.size());
  for (const auto& k : keys) names.push_back(k.name);
  auto vecs = embedder.embed(names);
  if (vecs.empty()) throw Error("ontology produced no index rows");
  const std::size_t dim = vecs.front().dim();
  std::vector<double> matrix;
  matrix.reserve(vecs.size() * dim);
  for (const auto& v : vecs) {
    if (v.dim() != dim) throw DimensionMismatch(dim, v.dim());
    matrix.insert(matrix.end(), v.values().begin(), v.values().end());
  }
  return VectorIndex(dim, std::move(keys), std::move(matrix), embedder.fingerprint());
}

void VectorIndex::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  BinaryWriter w(out);
  w.magic(kMagic, kVersion);
  w.u64(dim_);
  w.u64(keys_.size());
  w.u64(fingerprint_);
  for (const auto& k : keys_) {
    w.str(k.entity_id);
    w.str(k.name);
  }
  w.f64s(matrix_);
  if (!out) throw Error("failed writing " + path.string());
}

VectorIndex VectorIndex::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  BinaryReader r(in, path.string());
  if (auto v = r.magic(kMagic); v != kVersion) {
    throw FormatError(path.string() + ": unsupported index version " + std::to_string(v));
  }
  std::size_t dim = r.u64();
  std::size_t rows = r.u64();
  std::uint64_t fp = r.u64();
  std::vector<IndexKey> keys(rows);
  for (auto& k : keys) {
    k.entity_id = r.str();
    k.name = r.str();
  }
  auto matrix = r.f64s();
  return VectorIndex(dim, std::move(keys), std::move(matrix), fp);
}

}  // namespace mcel
