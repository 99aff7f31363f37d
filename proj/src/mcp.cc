#include "mcel/mcp.h"

#include <algorithm>
#include <cctype>
#include <ostream>
#include <set>

#include "mcel/error.h"
#include "mcel/text.h"

namespace mcel {

const Option* ChoiceSet::option(char symbol) const {
  for (const auto& o : options) {
    if (o.symbol == symbol) return &o;
  }
  return nullptr;
}

std::optional<char> ChoiceSet::symbol_of(std::string_view entity_id) const {
  for (const auto& o : options) {
    if (o.entity_id == entity_id) return o.symbol;
  }
  return std::nullopt;
}

void ChoiceSet::validate() const {
  if (options.empty()) throw Error("choice set has no options");
  if (options.size() > kMaxOptions) throw TooManyOptions(options.size());
  std::set<std::string_view> ids;
  for (std::size_t i = 0; i < options.size(); ++i) {
    if (options[i].symbol != symbol_at(i)) throw Error("option symbols must be A, B, C, ... in order");
    if (!ids.insert(options[i].entity_id).second) throw DuplicateEntity(options[i].entity_id);
  }
  if (gold_symbol && option(*gold_symbol) == nullptr) throw Error("gold symbol is not an assigned symbol");
}

ChoiceSet make_choice_set(const Mention& mention, std::span<const Candidate> candidates,
                          const std::optional<std::string>& gold_id, const ChoiceOptions& opts) {
  if (candidates.empty()) throw Error("make_choice_set needs at least one candidate");
  if (candidates.size() > kMaxOptions) throw TooManyOptions(candidates.size());
  const bool canonical = opts.display == DisplayName::kCanonical;
  if (canonical && opts.ontology == nullptr) throw Error("canonical display names need an ontology");

  ChoiceSet cs;
  cs.mention_text = mention.text;
  std::set<std::string_view> ids;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    if (!ids.insert(c.entity_id).second) throw DuplicateEntity(c.entity_id);
    std::string name = canonical ? opts.ontology->at(c.entity_id).canonical_name : c.matched_name;
    cs.options.push_back(Option{symbol_at(i), c.entity_id, std::move(name)});
  }
  if (gold_id) {
    cs.gold_symbol = cs.symbol_of(*gold_id);
    if (!cs.gold_symbol && opts.mode == ChoiceMode::kTrain) {
      if (opts.ontology == nullptr) throw Error("gold injection needs an ontology");
      Option& last = cs.options.back();
      last.entity_id = *gold_id;
      last.display_name = opts.ontology->at(*gold_id).canonical_name;
      cs.gold_symbol = last.symbol;
    }
  }
  return cs;
}

std::string_view provenance_name(Provenance p) {
  switch (p) {
    case Provenance::kOriginal: return "original";
    case Provenance::kAugmentedSwap: return "augmented-swap";
    case Provenance::kRetrievalEnhanced: return "retrieval-enhanced";
  }
  return "original";
}

std::string render_text(const ChoiceSet& choice_set) {
  std::string out = "mention: ";
  out += choice_set.mention_text;
  out += " options: ";
  for (const auto& o : choice_set.options) {
    out += o.symbol;
    out += ". ";
    out += o.display_name;
    out += ' ';
  }
  out += "answer:";
  return out;
}

PromptInstance render(const ChoiceSet& choice_set, std::size_t mention_ordinal) {
  return PromptInstance{render_text(choice_set), choice_set.gold_symbol, Provenance::kOriginal, mention_ordinal};
}

ChoiceSet augment_swap(const ChoiceSet& choice_set, std::uint64_t seed) {
  if (choice_set.options.size() < 2 || !choice_set.gold_symbol) throw SingleOption();
  const std::size_t n = choice_set.options.size();
  Rng rng(seed);
  std::vector<std::size_t> perm(n);
  bool identity = true;
  // Rejection keeps the draw uniform over the n! - 1 non-identity orders.
  while (identity) {
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    shuffle(perm, rng);
    identity = std::is_sorted(perm.begin(), perm.end());
  }
  const std::string gold_id = choice_set.option(*choice_set.gold_symbol)->entity_id;
  ChoiceSet out;
  out.mention_text = choice_set.mention_text;
  for (std::size_t i = 0; i < n; ++i) {
    Option o = choice_set.options[perm[i]];
    o.symbol = symbol_at(i);
    if (o.entity_id == gold_id) out.gold_symbol = o.symbol;
    out.options.push_back(std::move(o));
  }
  return out;
}

std::vector<PromptInstance> training_prompts(const ChoiceSet& choice_set, std::size_t mention_ordinal,
                                             std::size_t swaps, std::uint64_t seed) {
  std::vector<PromptInstance> out{render(choice_set, mention_ordinal)};
  if (choice_set.options.size() < 2 || !choice_set.gold_symbol) return out;
  for (std::size_t s = 0; s < swaps; ++s) {
    auto swapped = augment_swap(choice_set, mix_seed(seed, s));
    auto p = render(swapped, mention_ordinal);
    p.provenance = Provenance::kAugmentedSwap;
    out.push_back(std::move(p));
  }
  return out;
}

ParsedAnswer parse_answer(std::string_view generator_output, const ChoiceSet& choice_set,
                          InvalidOutputCounter* invalid) {
  auto t = trim(generator_output);
  if (!t.empty()) {
    char c = static_cast<char>(std::toupper(static_cast<unsigned char>(t.front())));
    if (choice_set.option(c) != nullptr) return ParsedAnswer{c, std::nullopt};
  }
  if (invalid != nullptr) ++invalid->count;
  ParsedAnswer out;
  if (!choice_set.options.empty()) out.fallback_id = choice_set.options.front().entity_id;
  return out;
}

nlohmann::json to_json(const PromptInstance& prompt) {
  nlohmann::json j = {{"prompt", prompt.text},
                      {"symbol", nullptr},
                      {"mention_ordinal", prompt.mention_ordinal},
                      {"provenance", provenance_name(prompt.provenance)}};
  if (prompt.expected_symbol) j["symbol"] = std::string(1, *prompt.expected_symbol);
  return j;
}

void write_prompts_jsonl(std::ostream& out, std::span<const PromptInstance> prompts) {
  for (const auto& p : prompts) out << to_json(p).dump() << '\n';
}

}  // namespace mcel

namespace mcel {

std::vector<PromptBlock> parse_prompt(std::string_view text) {
  constexpr std::string_view kMention = "mention: ";
  constexpr std::string_view kOptions = " options: ";
  constexpr std::string_view kAnswer = " answer:";
  std::vector<PromptBlock> blocks;
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (text.substr(pos, kMention.size()) != kMention) throw FormatError("prompt block must start with 'mention: '");
    pos += kMention.size();
    auto opt = text.find(kOptions, pos);
    if (opt == std::string_view::npos) throw FormatError("prompt block without options");
    PromptBlock block;
    block.mention_text = std::string(text.substr(pos, opt - pos));
    pos = opt + kOptions.size();
    const auto end = text.find(kAnswer.substr(1), pos);  // "answer:" directly after the last "name "
    if (end == std::string_view::npos) throw FormatError("prompt block without 'answer:'");
    std::string_view body = text.substr(pos, end - pos);
    for (std::size_t i = 0; !body.empty(); ++i) {
      std::string head = std::string(1, symbol_at(i)) + ". ";
      if (body.substr(0, head.size()) != head) throw FormatError("option symbols out of order");
      body.remove_prefix(head.size());
      std::string next = " " + std::string(1, symbol_at(i + 1)) + ". ";
      auto cut = body.find(next);
      if (cut == std::string_view::npos) {
        if (body.empty() || body.back() != ' ') throw FormatError("option list must end with a space");
        block.option_names.emplace_back(body.substr(0, body.size() - 1));
        body = {};
      } else {
        block.option_names.emplace_back(body.substr(0, cut));
        body.remove_prefix(cut + 1);
      }
    }
    pos = end + kAnswer.size() - 1;
    if (pos < text.size()) {
      // Solved block: " X" then a separator, then the next block.
      if (pos + 2 > text.size() || text[pos] != ' ') throw FormatError("solved block must carry its answer symbol");
      block.answer = text[pos + 1];
      pos += 2;
      while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\n')) ++pos;
      if (pos >= text.size()) throw FormatError("prompt must end with an unsolved block");
    }
    blocks.push_back(std::move(block));
  }
  if (blocks.empty()) throw FormatError("empty prompt");
  return blocks;
}

}  // namespace mcel
