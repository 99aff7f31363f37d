#include "mcel/knnstore.h"

#include <algorithm>
#include <fstream>
#include <set>

#include "mcel/binary_io.h"
#include "mcel/error.h"
#include "mcel/text.h"

namespace mcel {
namespace {

constexpr std::string_view kMagic = "MCELKNN1";
constexpr std::uint32_t kVersion = 1;

struct Scored {
  double similarity;
  std::size_t entry;
  std::size_t ordinal;
};

bool better(const Scored& a, const Scored& b) {
  if (a.similarity != b.similarity) return a.similarity > b.similarity;
  return a.ordinal < b.ordinal;
}

std::string solved_block(const Neighbor& n) {
  return render_text(n.choice_set) + " " + std::string(1, *n.choice_set.gold_symbol);
}

}  // namespace

Datastore::Datastore(std::vector<DatastoreEntry> entries, std::uint64_t embedder_fingerprint)
    : entries_(std::move(entries)), fingerprint_(embedder_fingerprint) {
  std::sort(entries_.begin(), entries_.end(),
            [](const DatastoreEntry& a, const DatastoreEntry& b) { return a.ordinal < b.ordinal; });
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (i > 0 && entries_[i - 1].ordinal == e.ordinal) {
      throw Error("datastore ordinal " + std::to_string(e.ordinal) + " appears twice");
    }
    if (!e.choice_set.gold_symbol) throw UnlabeledInstance(e.ordinal);
    if (e.key.dim() != entries_.front().key.dim()) throw DimensionMismatch(entries_.front().key.dim(), e.key.dim());
  }
}

Neighbor Datastore::neighbor(std::size_t entry, double similarity) const {
  const auto& e = entries_[entry];
  return Neighbor{e.ordinal, e.mention_text, e.choice_set, similarity};
}

NeighborSet Datastore::query(const Embedding& x, std::size_t k, std::optional<std::size_t> exclude_ordinal) const {
  NeighborSet out;
  if (k == 0 || entries_.empty()) return out;
  std::vector<Scored> scored;
  scored.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (exclude_ordinal && entries_[i].ordinal == *exclude_ordinal) continue;
    scored.push_back({score(x, entries_[i].key), i, entries_[i].ordinal});
  }
  const std::size_t take = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(), better);
  for (std::size_t i = 0; i < take; ++i) out.neighbors.push_back(neighbor(scored[i].entry, scored[i].similarity));
  return out;
}

NeighborSet Datastore::sample_random(const Embedding& x, std::size_t k, std::uint64_t seed,
                                     std::optional<std::size_t> exclude_ordinal) const {
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!(exclude_ordinal && entries_[i].ordinal == *exclude_ordinal)) pool.push_back(i);
  }
  const std::size_t take = std::min(k, pool.size());
  Rng rng(seed);
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < take; ++i) {
    std::size_t j = i + static_cast<std::size_t>(uniform_below(rng, pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  std::vector<Scored> picked;
  for (std::size_t i = 0; i < take; ++i) picked.push_back({score(x, entries_[pool[i]].key), pool[i], entries_[pool[i]].ordinal});
  std::sort(picked.begin(), picked.end(), better);
  NeighborSet out;
  for (const auto& s : picked) out.neighbors.push_back(neighbor(s.entry, s.similarity));
  return out;
}

Datastore build_datastore(std::span<const LabeledInstance> training, const Embedder& embedder) {
  std::vector<std::string> texts;
  texts.reserve(training.size());
  for (const auto& inst : training) {
    if (!inst.choice_set.gold_symbol) throw UnlabeledInstance(inst.mention.ordinal);
    inst.choice_set.validate();
    texts.push_back(inst.mention.text);
  }
  auto keys = texts.empty() ? std::vector<Embedding>{} : embedder.embed(texts);
  std::vector<DatastoreEntry> entries;
  entries.reserve(training.size());
  for (std::size_t i = 0; i < training.size(); ++i) {
    entries.push_back({std::move(keys[i]), training[i].mention.text, training[i].choice_set, training[i].mention.ordinal});
  }
  return Datastore(std::move(entries), embedder.fingerprint());
}

PromptInstance assemble_enhanced_prompt(const NeighborSet& neighbors, const ChoiceSet& input,
                                        const EnhancedPromptOptions& opts, std::size_t mention_ordinal) {
  for (const auto& n : neighbors.neighbors) {
    if (!n.choice_set.gold_symbol) throw UnlabeledInstance(n.ordinal);
  }
  const std::string tail = render_text(input);
  // neighbors arrive most similar first; keep a prefix of them.
  std::size_t keep = neighbors.neighbors.size();
  auto length_with = [&](std::size_t count) {
    std::size_t len = tail.size();
    for (std::size_t i = 0; i < count; ++i) len += solved_block(neighbors.neighbors[i]).size() + opts.separator.size();
    return len;
  };
  if (opts.max_length > 0) {
    while (keep > 0 && length_with(keep) > opts.max_length) --keep;
  }

  std::vector<std::size_t> order(keep);
  for (std::size_t i = 0; i < keep; ++i) order[i] = opts.most_similar_first ? i : keep - 1 - i;
  std::string text;
  for (std::size_t i : order) {
    text += solved_block(neighbors.neighbors[i]);
    text += opts.separator;
  }
  text += tail;
  return PromptInstance{std::move(text), input.gold_symbol, Provenance::kRetrievalEnhanced, mention_ordinal};
}

void Datastore::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  BinaryWriter w(out);
  w.magic(kMagic, kVersion);
  w.u64(fingerprint_);
  w.u64(entries_.size());
  for (const auto& e : entries_) {
    w.u64(e.ordinal);
    w.str(e.mention_text);
    w.str(e.choice_set.mention_text);
    w.u32(static_cast<std::uint32_t>(*e.choice_set.gold_symbol));
    w.u64(e.choice_set.options.size());
    for (const auto& o : e.choice_set.options) {
      w.u32(static_cast<std::uint32_t>(o.symbol));
      w.str(o.entity_id);
      w.str(o.display_name);
    }
    w.f64s(std::vector<double>(e.key.values().begin(), e.key.values().end()));
  }
  if (!out) throw Error("failed writing " + path.string());
}

Datastore Datastore::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  BinaryReader r(in, path.string());
  if (auto v = r.magic(kMagic); v != kVersion) {
    throw FormatError(path.string() + ": unsupported datastore version " + std::to_string(v));
  }
  std::uint64_t fp = r.u64();
  std::vector<DatastoreEntry> entries(r.u64());
  for (auto& e : entries) {
    e.ordinal = r.u64();
    e.mention_text = r.str();
    e.choice_set.mention_text = r.str();
    e.choice_set.gold_symbol = static_cast<char>(r.u32());
    e.choice_set.options.resize(r.u64());
    for (auto& o : e.choice_set.options) {
      o.symbol = static_cast<char>(r.u32());
      o.entity_id = r.str();
      o.display_name = r.str();
    }
    e.choice_set.validate();
    e.key = Embedding(r.f64s());
  }
  return Datastore(std::move(entries), fp);
}

}  // namespace mcel
