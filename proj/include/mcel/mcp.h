#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mcel/ontology.h"
#include "mcel/vecindex.h"

namespace mcel {

inline constexpr std::size_t kMaxOptions = 26;

inline char symbol_at(std::size_t position) { return static_cast<char>('A' + position); }

struct Option {
  char symbol = 'A';
  std::string entity_id;
  std::string display_name;
  bool operator==(const Option&) const = default;
};

struct ChoiceSet {
  std::string mention_text;
  std::vector<Option> options;
  std::optional<char> gold_symbol;

  const Option* option(char symbol) const;
  std::optional<char> symbol_of(std::string_view entity_id) const;
  // Throws Error if symbols are not A, B, ... in order, ids repeat, or the
  // gold symbol is unassigned.
  void validate() const;

  bool operator==(const ChoiceSet&) const = default;
};

enum class ChoiceMode { kEval, kTrain };
enum class DisplayName { kMatched, kCanonical };

struct ChoiceOptions {
  ChoiceMode mode = ChoiceMode::kEval;
  DisplayName display = DisplayName::kMatched;
  // Needed for kCanonical and for gold injection in kTrain mode.
  const Ontology* ontology = nullptr;
};

// Options in candidate rank order labelled A, B, ... In kTrain mode a gold
// entity missing from the candidates replaces the last one.
ChoiceSet make_choice_set(const Mention& mention, std::span<const Candidate> candidates,
                          const std::optional<std::string>& gold_id, const ChoiceOptions& opts = {});

enum class Provenance { kOriginal, kAugmentedSwap, kRetrievalEnhanced };

std::string_view provenance_name(Provenance p);

struct PromptInstance {
  std::string text;
  std::optional<char> expected_symbol;
  Provenance provenance = Provenance::kOriginal;
  std::size_t mention_ordinal = 0;
};

// "mention: <m> options: A. <o1> B. <o2> ... answer:"
std::string render_text(const ChoiceSet& choice_set);
PromptInstance render(const ChoiceSet& choice_set, std::size_t mention_ordinal = 0);

// Uniformly random non-identity reordering of the options; symbols are
// reassigned positionally and the gold symbol follows the gold entity.
// Throws SingleOption for fewer than two options or no gold symbol.
ChoiceSet augment_swap(const ChoiceSet& choice_set, std::uint64_t seed);

// Original prompt followed by `swaps` augmented copies (seeded per copy).
std::vector<PromptInstance> training_prompts(const ChoiceSet& choice_set, std::size_t mention_ordinal,
                                             std::size_t swaps, std::uint64_t seed);

struct InvalidOutputCounter {
  std::atomic<std::size_t> count{0};
};

struct ParsedAnswer {
  std::optional<char> symbol;
  // Rank-1 option's entity when the output names no assigned symbol.
  std::optional<std::string> fallback_id;
};

ParsedAnswer parse_answer(std::string_view generator_output, const ChoiceSet& choice_set,
                          InvalidOutputCounter* invalid = nullptr);

nlohmann::json to_json(const PromptInstance& prompt);
void write_prompts_jsonl(std::ostream& out, std::span<const PromptInstance> prompts);

}  // namespace mcel

namespace mcel {

// One "mention: ... options: ... answer:" block recovered from a prompt.
struct PromptBlock {
  std::string mention_text;
  std::vector<std::string> option_names;  // option_names[i] is symbol 'A' + i
  std::optional<char> answer;             // set for solved neighbor blocks
};

// Splits a plain or retrieval-enhanced prompt back into blocks. Throws
// FormatError on text that was not produced by render_text /
// assemble_enhanced_prompt.
std::vector<PromptBlock> parse_prompt(std::string_view text);

}  // namespace mcel
