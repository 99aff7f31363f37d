#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mcel/embedding.h"
#include "mcel/encoder.h"
#include "mcel/remote.h"

namespace mcel {

// Shared embed(texts) -> unit vectors contract of every embedder backend.
class Embedder {
 public:
  virtual ~Embedder() = default;

  // One unit-norm vector per text, order preserving. Throws EmptyText on an
  // empty string and RemoteUnavailable when a remote backend fails.
  virtual std::vector<Embedding> embed(std::span<const std::string> texts) const = 0;
  Embedding embed_one(std::string_view text) const;

  virtual std::string kind() const = 0;
  // Identifies the model; artifacts built with one embedder record it.
  virtual std::uint64_t fingerprint() const = 0;
};

class NGramEmbedder final : public Embedder {
 public:
  explicit NGramEmbedder(std::shared_ptr<const NGramEncoder> encoder) : encoder_(std::move(encoder)) {}

  std::vector<Embedding> embed(std::span<const std::string> texts) const override;
  std::string kind() const override { return "builtin-ngram"; }
  std::uint64_t fingerprint() const override { return encoder_->fingerprint(); }
  const NGramEncoder& encoder() const { return *encoder_; }

 private:
  std::shared_ptr<const NGramEncoder> encoder_;
};

// Client of the model shim's POST /embed {texts} -> {vectors}. Vectors are
// re-normalized on receipt and must keep one dimension for the lifetime of
// the embedder.
class RemoteEmbedder final : public Embedder {
 public:
  explicit RemoteEmbedder(RemoteOptions opts) : opts_(std::move(opts)) {}

  std::vector<Embedding> embed(std::span<const std::string> texts) const override;
  std::string kind() const override { return "remote"; }
  std::uint64_t fingerprint() const override;

 private:
  RemoteOptions opts_;
  mutable std::mutex mu_;
  mutable std::size_t dim_ = 0;
};

}  // namespace mcel
