#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "mcel/mcp.h"
#include "mcel/ontology.h"
#include "mcel/remote.h"

namespace mcel {

struct Answer {
  char symbol = 'A';
  std::map<char, double> scores;  // keys are exactly the allowed symbols
  std::string raw;
};

std::vector<char> allowed_symbols(const ChoiceSet& choice_set);

// Argmax of `scores`, ties broken alphabetically.
char argmax_symbol(const std::map<char, double>& scores);

// Throws MalformedRemoteResponse unless the answer honours the contract:
// symbol allowed, score keys == allowed, finite non-negative scores summing to
// 1 within 1e-6, argmax == symbol.
void validate_answer(const Answer& answer, std::span<const char> allowed);

// Answer-selection backend.
class Generator {
 public:
  virtual ~Generator() = default;
  virtual std::string kind() const = 0;
  virtual Answer answer(const PromptInstance& prompt, const ChoiceSet& choice_set) const = 0;
  // Free-text entity name for the generate-names ablation.
  virtual std::string generate_name(const PromptInstance& prompt, const ChoiceSet& choice_set) const = 0;
};

// Test fixture: answers with the choice set's gold symbol (side channel),
// or 'A' when gold is not among the options.
class ScriptedOracle final : public Generator {
 public:
  std::string kind() const override { return "scripted-oracle"; }
  Answer answer(const PromptInstance& prompt, const ChoiceSet& choice_set) const override;
  std::string generate_name(const PromptInstance& prompt, const ChoiceSet& choice_set) const override;
};

// Offline baseline. Each option scores the trigram Jaccard overlap between
// the input mention and its display name; a solved neighbor block whose
// answer carries the same name lends its own mention-to-mention overlap when
// larger. Scores are a softmax (temperature 1) over those overlaps.
class LexicalHeuristic final : public Generator {
 public:
  // Minimum mention overlap for generate_name to copy a neighbor's answer.
  explicit LexicalHeuristic(double copy_threshold = 0.5) : copy_threshold_(copy_threshold) {}

  std::string kind() const override { return "lexical-heuristic"; }
  Answer answer(const PromptInstance& prompt, const ChoiceSet& choice_set) const override;
  // Copies the answer name of the most similar solved neighbor when its
  // mention overlap reaches the threshold, else echoes the mention.
  std::string generate_name(const PromptInstance& prompt, const ChoiceSet& choice_set) const override;

 private:
  double copy_threshold_;
};

// Client of the model shim's POST /generate.
class RemoteSeq2Seq final : public Generator {
 public:
  explicit RemoteSeq2Seq(RemoteOptions opts, std::size_t name_max_tokens = 32)
      : opts_(std::move(opts)), name_max_tokens_(name_max_tokens) {}

  std::string kind() const override { return "remote-seq2seq"; }
  Answer answer(const PromptInstance& prompt, const ChoiceSet& choice_set) const override;
  std::string generate_name(const PromptInstance& prompt, const ChoiceSet& choice_set) const override;

 private:
  RemoteOptions opts_;
  std::size_t name_max_tokens_;
};

struct NameResolution {
  std::string emitted;
  std::optional<std::string> entity_id;  // empty means NoMatch
};

// Generate-names ablation: ask for a name, resolve it with lookup_by_name.
// When a name resolves to several entities, one among the options wins,
// else the smallest id.
NameResolution answer_generate_names(const Generator& generator, const PromptInstance& prompt,
                                     const ChoiceSet& choice_set, const Ontology& ontology);

}  // namespace mcel
