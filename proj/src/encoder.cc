#include "mcel/encoder.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include "mcel/binary_io.h"
#include "mcel/error.h"
#include "mcel/text.h"

namespace mcel {
namespace {

constexpr std::string_view kMagic = "MCELENC1";
constexpr std::uint32_t kVersion = 1;

std::string padded(std::string_view text) { return " " + casefold(text) + " "; }

template <typename F>
void for_each_ngram(const std::string& s, const std::vector<int>& orders, F&& f) {
  for (int n : orders) {
    auto len = static_cast<std::size_t>(n);
    for (std::size_t i = 0; i + len <= s.size(); ++i) f(std::string_view(s).substr(i, len));
  }
}

double gaussian(Rng& rng) {
  // Box-Muller; one draw per call keeps the stream layout simple.
  double u1 = uniform_unit(rng);
  double u2 = uniform_unit(rng);
  if (u1 < 1e-300) u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

NGramEncoder::NGramEncoder(NGramConfig cfg, std::map<std::string, std::uint32_t> vocab,
                           std::vector<double> weights)
    : cfg_(std::move(cfg)), vocab_(std::move(vocab)), weights_(std::move(weights)) {
  if (cfg_.dim == 0) throw Error("encoder dimension must be positive");
  if (cfg_.orders.empty()) throw Error("encoder needs at least one n-gram order");
  for (int n : cfg_.orders) {
    if (n < 1) throw Error("n-gram order must be positive");
  }
  if (weights_.size() != feature_count() * cfg_.dim) {
    throw Error("weight matrix has " + std::to_string(weights_.size()) + " entries, expected " +
                std::to_string(feature_count() * cfg_.dim));
  }
  for (const auto& [gram, idx] : vocab_) {
    if (idx >= vocab_.size()) throw Error("vocabulary index out of range for '" + gram + "'");
  }
}

NGramEncoder NGramEncoder::build(const NGramConfig& cfg, std::span<const std::string> corpus) {
  std::set<std::string> grams;
  for (const auto& text : corpus) {
    for_each_ngram(padded(text), cfg.orders, [&](std::string_view g) { grams.emplace(g); });
  }
  std::map<std::string, std::uint32_t> vocab;
  std::uint32_t next = 0;
  for (const auto& g : grams) vocab.emplace(g, next++);

  Rng rng(cfg.seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.dim));
  std::vector<double> weights((vocab.size() + cfg.hash_buckets) * cfg.dim);
  for (double& w : weights) w = gaussian(rng) * scale;
  return NGramEncoder(cfg, std::move(vocab), std::move(weights));
}

SparseFeatures NGramEncoder::features(std::string_view text) const {
  std::map<std::uint32_t, double> counts;
  const auto base = static_cast<std::uint32_t>(vocab_.size());
  for_each_ngram(padded(text), cfg_.orders, [&](std::string_view g) {
    auto it = vocab_.find(std::string(g));
    if (it != vocab_.end()) {
      counts[it->second] += 1.0;
    } else if (cfg_.hash_buckets > 0) {
      counts[base + static_cast<std::uint32_t>(fnv1a64(g) % cfg_.hash_buckets)] += 1.0;
    }
  });
  return {counts.begin(), counts.end()};
}

std::vector<double> NGramEncoder::project(const SparseFeatures& x) const {
  std::vector<double> h(cfg_.dim, 0.0);
  for (const auto& [f, c] : x) {
    auto r = row(f);
    for (std::size_t k = 0; k < cfg_.dim; ++k) h[k] += c * r[k];
  }
  return h;
}

Embedding NGramEncoder::encode(std::string_view text) const {
  if (text.empty()) throw EmptyText();
  auto x = features(text);
  if (x.empty()) throw Error("text '" + std::string(text) + "' has no encodable n-grams");
  return Embedding::normalized(project(x));
}

std::uint64_t NGramEncoder::fingerprint() const {
  std::uint64_t h = fnv1a64(std::string_view("ngram"));
  auto mix_u64 = [&](std::uint64_t v) {
    h = fnv1a64(std::as_bytes(std::span<const std::uint64_t>(&v, 1)), h);
  };
  mix_u64(cfg_.dim);
  mix_u64(cfg_.hash_buckets);
  for (int n : cfg_.orders) mix_u64(static_cast<std::uint64_t>(n));
  for (const auto& [g, idx] : vocab_) {
    h = fnv1a64(g, h);
    mix_u64(idx);
  }
  return fnv1a64(std::as_bytes(std::span<const double>(weights_)), h);
}

void NGramEncoder::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  BinaryWriter w(out);
  w.magic(kMagic, kVersion);
  w.u64(cfg_.dim);
  w.u64(cfg_.hash_buckets);
  w.u64(cfg_.seed);
  w.u64(cfg_.orders.size());
  for (int n : cfg_.orders) w.u32(static_cast<std::uint32_t>(n));
  w.u64(vocab_.size());
  for (const auto& [g, idx] : vocab_) {
    w.str(g);
    w.u32(idx);
  }
  w.f64s(weights_);
  if (!out) throw Error("failed writing " + path.string());
}

NGramEncoder NGramEncoder::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  BinaryReader r(in, path.string());
  if (auto v = r.magic(kMagic); v != kVersion) {
    throw FormatError(path.string() + ": unsupported checkpoint version " + std::to_string(v));
  }
  NGramConfig cfg;
  cfg.dim = r.u64();
  cfg.hash_buckets = r.u64();
  cfg.seed = r.u64();
  cfg.orders.resize(r.u64());
  for (int& n : cfg.orders) n = static_cast<int>(r.u32());
  std::map<std::string, std::uint32_t> vocab;
  auto n = r.u64();
  for (std::uint64_t i = 0; i < n; ++i) {
    auto g = r.str();
    vocab.emplace(std::move(g), r.u32());
  }
  auto weights = r.f64s();
  return NGramEncoder(std::move(cfg), std::move(vocab), std::move(weights));
}

double contrastive_loss_and_gradient(const NGramEncoder& encoder, const ContrastiveExample& example,
                                     double temperature, SparseGradient* grad, double grad_scale) {
  if (!(temperature > 0.0)) throw NonPositiveTemperature(temperature);
  if (example.negatives.empty()) throw Error("contrastive loss needs at least one negative");
  const std::size_t d = encoder.dim();

  struct Encoded {
    const SparseFeatures* x;
    std::vector<double> y;
    double norm;
  };
  auto run = [&](const SparseFeatures& x) {
    auto h = encoder.project(x);
    double n = std::sqrt(dot(h, h));
    if (!(n > 0.0)) throw Error("zero projection in contrastive example");
    for (double& v : h) v /= n;
    return Encoded{&x, std::move(h), n};
  };

  Encoded m = run(example.mention);
  // Candidate 0 is the positive, the rest are negatives.
  std::vector<Encoded> cands;
  cands.reserve(example.negatives.size() + 1);
  cands.push_back(run(example.positive));
  for (const auto& neg : example.negatives) cands.push_back(run(neg));

  std::vector<double> logits(cands.size());
  for (std::size_t j = 0; j < cands.size(); ++j) logits[j] = dot(m.y, cands[j].y) / temperature;
  double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  std::vector<double> p(cands.size());
  for (std::size_t j = 0; j < cands.size(); ++j) sum += p[j] = std::exp(logits[j] - top);
  for (double& v : p) v /= sum;
  const double loss = top + std::log(sum) - logits[0];
  if (grad == nullptr) return loss;

  // dL/dz_j = p_j - [j == 0]; z_j = (y_m . y_j) / tau.
  std::vector<double> g_m(d, 0.0);
  auto backprop = [&](const Encoded& e, const std::vector<double>& g_y) {
    // Through y = h / |h|: dL/dh = (g - y (y . g)) / |h|.
    double proj = dot(e.y, g_y);
    std::vector<double> g_h(d);
    for (std::size_t k = 0; k < d; ++k) g_h[k] = (g_y[k] - e.y[k] * proj) / e.norm;
    for (const auto& [f, c] : *e.x) {
      auto& row = (*grad)[f];
      if (row.empty()) row.assign(d, 0.0);
      for (std::size_t k = 0; k < d; ++k) row[k] += grad_scale * c * g_h[k];
    }
  };
  for (std::size_t j = 0; j < cands.size(); ++j) {
    double dz = (p[j] - (j == 0 ? 1.0 : 0.0)) / temperature;
    std::vector<double> g_c(d);
    for (std::size_t k = 0; k < d; ++k) {
      g_m[k] += dz * cands[j].y[k];
      g_c[k] = dz * m.y[k];
    }
    backprop(cands[j], g_c);
  }
  backprop(m, g_m);
  return loss;
}

}  // namespace mcel
