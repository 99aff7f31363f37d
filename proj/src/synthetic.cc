#include "mcel/synthetic.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <string>

#include "mcel/error.h"
#include "mcel/text.h"

namespace mcel {
namespace {

constexpr const char* kOnsets[] = {"b", "c", "d", "f", "g", "h", "k", "l", "m", "n", "p", "r",
                                   "s", "t", "v", "z", "ch", "ph", "th", "gl", "pr", "st", "tr", "cr"};
constexpr const char* kVowels[] = {"a", "e", "i", "o", "u", "ae", "oe", "y", "ia", "ou"};
constexpr const char* kCodas[] = {"", "", "", "n", "r", "l", "s", "x", "m"};
constexpr const char* kSuffixes[] = {"itis", "osis", "emia", "oma", "algia", "pathy", "in", "ine", "ase", "ol"};
constexpr const char* kPrefixes[] = {"hyper", "hypo", "poly", "dys", "peri", "endo", "brady", "tachy", "micro", "macro"};
constexpr const char* kRoots[] = {"cardi", "neur",  "hepat", "nephr",  "gastr",  "oste",   "derm",  "my",
                                  "haem",  "pulmon", "arthr", "encephal", "lip",   "gluc",  "angi",  "aden",
                                  "col",   "cyst",  "hyster", "laryng", "mening", "myel",  "ophthalm", "ot",
                                  "pancreat", "rhin", "thyr", "vas",     "splen",  "chondr"};
constexpr const char* kMedicalSuffixes[] = {"itis",   "osis",   "emia",    "oma",  "pathy", "algia",
                                            "ectomy", "plasia", "trophy", "megaly", "uria", "penia"};
constexpr const char* kSiblingTokens[] = {"c",     "b",       "type 1", "type 2",   "ii",
                                         "acute", "chronic", "insipidus", "gestational", "deficiency"};
// Generic head words shared by many entity names; mentions also pick them up
// as noise, which makes them weak evidence for any single entity.
constexpr const char* kGenericHeads[] = {"disease", "syndrome", "disorder", "deficiency", "infection", "injury"};
constexpr const char* kMentionTokens[] = {"disease", "syndrome", "disorder", "deficiency", "infection",
                                          "injury",  "levels",   "finding",  "problem"};

template <typename T, std::size_t N>
const T& pick(const T (&arr)[N], Rng& rng) {
  return arr[uniform_below(rng, N)];
}

std::string pseudo_word(Rng& rng, bool medical_suffix) {
  std::string w;
  std::size_t syllables = 2 + uniform_below(rng, 2);
  for (std::size_t i = 0; i < syllables; ++i) {
    w += pick(kOnsets, rng);
    w += pick(kVowels, rng);
    w += pick(kCodas, rng);
  }
  if (medical_suffix) w += pick(kSuffixes, rng);
  return w;
}

// Root-and-affix word in the style of medical terminology ("hypercardiopathy").
std::string morpheme_word(Rng& rng) {
  std::string w;
  if (uniform_unit(rng) < 0.3) w += pick(kPrefixes, rng);
  w += pick(kRoots, rng);
  if (uniform_unit(rng) < 0.25) {
    w += 'o';
    w += pick(kRoots, rng);
  }
  w += pick(kMedicalSuffixes, rng);
  return w;
}

std::string pseudo_phrase(Rng& rng, std::size_t words) {
  std::string out;
  for (std::size_t i = 0; i < words; ++i) {
    if (i) out += ' ';
    out += uniform_unit(rng) < 0.5 ? morpheme_word(rng) : pseudo_word(rng, i + 1 == words && uniform_unit(rng) < 0.6);
  }
  return out;
}

std::vector<std::string> words_of(const std::string& s) {
  std::vector<std::string> out;
  for (auto w : split(s, ' ')) {
    if (!w.empty()) out.emplace_back(w);
  }
  return out;
}

std::string join(const std::vector<std::string>& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

std::string replace_first(std::string s, const std::string& from, const std::string& to) {
  auto pos = s.find(from);
  if (pos != std::string::npos) s.replace(pos, from.size(), to);
  return s;
}

// British/American style spelling variant.
std::string spelling_variant(const std::string& s) {
  if (s.find("ae") != std::string::npos) return replace_first(s, "ae", "e");
  if (s.find("oe") != std::string::npos) return replace_first(s, "oe", "e");
  return s;
}

std::string apply_noise(std::string s, Rng& rng) {
  const std::size_t transforms = 1 + uniform_below(rng, 2);
  for (std::size_t t = 0; t < transforms; ++t) {
    switch (uniform_below(rng, 6)) {
      case 0:
        s = spelling_variant(s);
        break;
      case 1:
        s += " ";
        s += pick(kMentionTokens, rng);
        break;
      case 2: {
        auto w = words_of(s);
        if (w.size() > 1) {
          w.erase(w.begin() + static_cast<std::ptrdiff_t>(uniform_below(rng, w.size())));
          s = join(w);
        }
        break;
      }
      case 3: {
        if (s.size() > 5) {
          auto pos = 1 + uniform_below(rng, s.size() - 2);
          if (s[pos] != ' ') s.erase(pos, 1);
        }
        break;
      }
      case 4:
        s += "s";
        break;
      default:
        if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
        break;
    }
  }
  return s;
}

struct Blueprint {
  Entity entity;
  std::string alias;  // empty when none
};

// Zipf sampler over a fixed popularity order.
class ZipfSampler {
 public:
  ZipfSampler(std::size_t n, double s) : cdf_(n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) cdf_[i] = acc += 1.0 / std::pow(static_cast<double>(i + 1), s);
    for (double& c : cdf_) c /= acc;
  }
  std::size_t draw(Rng& rng) const {
    double u = uniform_unit(rng);
    auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
  }

 private:
  std::vector<double> cdf_;
};

}  // namespace

SyntheticBenchmark make_synthetic_benchmark(const SyntheticConfig& cfg) {
  if (cfg.entities < 2) throw Error("synthetic benchmark needs at least two entities");
  Rng rng(cfg.seed);
  std::set<std::string> used;  // case-folded surface forms across the ontology and aliases
  auto fresh = [&](std::size_t words) {
    for (;;) {
      auto p = pseudo_phrase(rng, words);
      if (used.insert(casefold(p)).second) return p;
    }
  };

  std::vector<Blueprint> blueprints;
  while (blueprints.size() < cfg.entities) {
    Blueprint b;
    b.entity.canonical_name = fresh(1 + uniform_below(rng, 3));
    if (uniform_unit(rng) < cfg.generic_head_fraction) {
      auto with_head = b.entity.canonical_name + " " + pick(kGenericHeads, rng);
      if (used.insert(casefold(with_head)).second) b.entity.canonical_name = with_head;
    }
    double r = uniform_unit(rng);
    if (r < 0.35) {
      auto v = spelling_variant(b.entity.canonical_name);
      if (used.insert(casefold(v)).second) b.entity.synonyms.push_back(v);
    } else if (r < 0.6) {
      b.entity.synonyms.push_back(fresh(1));  // brand-name style synonym
    }
    if (uniform_unit(rng) < cfg.alias_fraction) b.alias = fresh(2);
    blueprints.push_back(b);

    if (uniform_unit(rng) < cfg.confusable_fraction) {
      // A family of 1-4 near-duplicates sharing the head name.
      const std::size_t family = 1 + uniform_below(rng, 4);
      for (std::size_t f = 0; f < family && blueprints.size() < cfg.entities; ++f) {
        Blueprint sib;
        sib.entity.canonical_name = b.entity.canonical_name + " " + pick(kSiblingTokens, rng);
        if (used.insert(casefold(sib.entity.canonical_name)).second) blueprints.push_back(sib);
      }
    }
  }

  std::vector<Entity> entities;
  for (std::size_t i = 0; i < blueprints.size(); ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "S%05zu", i + 1);
    blueprints[i].entity.id = id;
    entities.push_back(blueprints[i].entity);
  }

  // Popularity order is a seeded permutation of the entities.
  std::vector<std::size_t> popularity(blueprints.size());
  for (std::size_t i = 0; i < popularity.size(); ++i) popularity[i] = i;
  shuffle(popularity, rng);
  ZipfSampler zipf(popularity.size(), cfg.zipf_exponent);

  std::set<std::size_t> aliases_in_train;
  auto make_split = [&](std::size_t count, Split split) {
    std::vector<Mention> out;
    while (out.size() < count) {
      std::size_t e = popularity[zipf.draw(rng)];
      const auto& b = blueprints[e];
      std::string surface;
      bool alias = !b.alias.empty() && uniform_unit(rng) < cfg.alias_mention_rate;
      if (alias && split != Split::kTrain && !aliases_in_train.contains(e)) alias = false;
      if (alias) {
        surface = b.alias;
        if (split == Split::kTrain) aliases_in_train.insert(e);
      } else {
        auto names = b.entity.names();
        surface = names[uniform_below(rng, names.size())];
      }
      Mention m;
      m.text = apply_noise(surface, rng);
      m.gold_id = b.entity.id;
      m.split = split;
      m.ordinal = out.size();
      out.push_back(std::move(m));
    }
    return out;
  };

  SyntheticBenchmark bench{Ontology::from_entities(std::move(entities)), {}, {}, {}};
  bench.train = make_split(cfg.train_mentions, Split::kTrain);
  bench.dev = make_split(cfg.dev_mentions, Split::kDev);
  bench.test = make_split(cfg.test_mentions, Split::kTest);
  return bench;
}

}  // namespace mcel
