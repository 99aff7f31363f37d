#include "mcel/embedder.h"

#include <cmath>

#include "mcel/error.h"
#include "mcel/text.h"

namespace mcel {

Embedding Embedder::embed_one(std::string_view text) const {
  std::string t(text);
  return std::move(embed(std::span<const std::string>(&t, 1)).front());
}

std::vector<Embedding> NGramEmbedder::embed(std::span<const std::string> texts) const {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(encoder_->encode(t));
  return out;
}

std::vector<Embedding> RemoteEmbedder::embed(std::span<const std::string> texts) const {
  if (texts.empty()) return {};
  for (const auto& t : texts) {
    if (t.empty()) throw EmptyText();
  }
  nlohmann::json body = {{"texts", std::vector<std::string>(texts.begin(), texts.end())}};
  auto reply = post_json(opts_, "/embed", body);
  auto it = reply.find("vectors");
  if (it == reply.end() || !it->is_array() || it->size() != texts.size()) {
    throw MalformedRemoteResponse("/embed reply must carry one vector per text");
  }
  std::vector<Embedding> out;
  out.reserve(texts.size());
  std::lock_guard lock(mu_);
  for (const auto& vec : *it) {
    if (!vec.is_array() || vec.empty()) throw MalformedRemoteResponse("/embed vector must be a non-empty array");
    std::vector<double> values;
    values.reserve(vec.size());
    for (const auto& x : vec) {
      if (!x.is_number()) throw MalformedRemoteResponse("/embed vector entries must be numbers");
      double v = x.get<double>();
      if (!std::isfinite(v)) throw MalformedRemoteResponse("/embed vector entry is not finite");
      values.push_back(v);
    }
    if (dim_ == 0) dim_ = values.size();
    if (values.size() != dim_) throw MalformedRemoteResponse("/embed returned vectors of differing dimension");
    try {
      out.push_back(Embedding::normalized(std::move(values)));
    } catch (const Error&) {
      throw MalformedRemoteResponse("/embed returned a zero vector");
    }
  }
  return out;
}

std::uint64_t RemoteEmbedder::fingerprint() const { return fnv1a64("remote:" + opts_.base_url); }

}  // namespace mcel
