#include "mcel/generator.h"

#include <algorithm>
#include <cmath>

#include "mcel/error.h"
#include "mcel/text.h"

namespace mcel {
namespace {

std::map<char, double> softmax(const std::map<char, double>& logits) {
  double top = -INFINITY;
  for (const auto& [s, z] : logits) top = std::max(top, z);
  double sum = 0.0;
  std::map<char, double> out;
  for (const auto& [s, z] : logits) sum += out[s] = std::exp(z - top);
  for (auto& [s, p] : out) p /= sum;
  return out;
}

}  // namespace

std::vector<char> allowed_symbols(const ChoiceSet& choice_set) {
  std::vector<char> out;
  for (const auto& o : choice_set.options) out.push_back(o.symbol);
  return out;
}

char argmax_symbol(const std::map<char, double>& scores) {
  if (scores.empty()) throw Error("argmax of an empty score map");
  char best = scores.begin()->first;
  double best_score = scores.begin()->second;
  for (const auto& [s, p] : scores) {
    if (p > best_score) {
      best = s;
      best_score = p;
    }
  }
  return best;
}

void validate_answer(const Answer& answer, std::span<const char> allowed) {
  std::set<char> want(allowed.begin(), allowed.end());
  std::set<char> got;
  double sum = 0.0;
  for (const auto& [s, p] : answer.scores) {
    got.insert(s);
    if (!std::isfinite(p) || p < 0.0) throw MalformedRemoteResponse("answer score is negative or not finite");
    sum += p;
  }
  if (got != want) throw MalformedRemoteResponse("answer scores must cover exactly the allowed symbols");
  if (std::abs(sum - 1.0) > 1e-6) {
    throw MalformedRemoteResponse("answer scores sum to " + std::to_string(sum) + ", expected 1");
  }
  if (!want.contains(answer.symbol)) throw MalformedRemoteResponse("answer symbol is not allowed");
  if (argmax_symbol(answer.scores) != answer.symbol) {
    throw MalformedRemoteResponse("answer symbol is not the argmax of its scores");
  }
}

Answer ScriptedOracle::answer(const PromptInstance&, const ChoiceSet& choice_set) const {
  char pick = choice_set.gold_symbol.value_or('A');
  Answer a;
  for (char s : allowed_symbols(choice_set)) a.scores[s] = s == pick ? 1.0 : 0.0;
  a.symbol = pick;
  a.raw = std::string(1, pick);
  return a;
}

std::string ScriptedOracle::generate_name(const PromptInstance& prompt, const ChoiceSet& choice_set) const {
  return choice_set.option(answer(prompt, choice_set).symbol)->display_name;
}

Answer LexicalHeuristic::answer(const PromptInstance& prompt, const ChoiceSet& choice_set) const {
  auto blocks = parse_prompt(prompt.text);
  std::map<char, double> overlap;
  for (const auto& o : choice_set.options) {
    double best = trigram_jaccard(choice_set.mention_text, o.display_name);
    for (std::size_t b = 0; b + 1 < blocks.size(); ++b) {
      const auto& block = blocks[b];
      if (!block.answer) continue;
      auto idx = static_cast<std::size_t>(*block.answer - 'A');
      if (idx >= block.option_names.size()) continue;
      if (casefold(block.option_names[idx]) == casefold(o.display_name)) {
        best = std::max(best, trigram_jaccard(choice_set.mention_text, block.mention_text));
      }
    }
    overlap[o.symbol] = best;
  }
  Answer a;
  a.scores = softmax(overlap);
  a.symbol = argmax_symbol(a.scores);
  a.raw = std::string(1, a.symbol);
  return a;
}

std::string LexicalHeuristic::generate_name(const PromptInstance& prompt, const ChoiceSet& choice_set) const {
  auto blocks = parse_prompt(prompt.text);
  double best = -1.0;
  std::string copied;
  for (std::size_t b = 0; b + 1 < blocks.size(); ++b) {
    const auto& block = blocks[b];
    if (!block.answer) continue;
    auto idx = static_cast<std::size_t>(*block.answer - 'A');
    if (idx >= block.option_names.size()) continue;
    double sim = trigram_jaccard(choice_set.mention_text, block.mention_text);
    if (sim > best) {
      best = sim;
      copied = block.option_names[idx];
    }
  }
  if (best >= copy_threshold_) return copied;
  return choice_set.mention_text;
}

Answer RemoteSeq2Seq::answer(const PromptInstance& prompt, const ChoiceSet& choice_set) const {
  auto allowed = allowed_symbols(choice_set);
  std::vector<std::string> allowed_str;
  for (char s : allowed) allowed_str.emplace_back(1, s);
  nlohmann::json body = {{"prompt", prompt.text}, {"allowed_symbols", allowed_str}, {"max_new_tokens", 1}};
  auto reply = post_json(opts_, "/generate", body);
  if (!reply.is_object() || !reply.contains("symbol") || !reply.contains("scores") ||
      !reply["symbol"].is_string() || !reply["scores"].is_object()) {
    throw MalformedRemoteResponse("/generate reply must carry 'symbol' and 'scores'");
  }
  Answer a;
  auto sym = reply["symbol"].get<std::string>();
  if (sym.size() != 1) throw MalformedRemoteResponse("/generate symbol must be a single letter");
  a.symbol = sym.front();
  for (const auto& [k, v] : reply["scores"].items()) {
    if (k.size() != 1 || !v.is_number()) throw MalformedRemoteResponse("/generate scores must map letters to numbers");
    a.scores[k.front()] = v.get<double>();
  }
  if (auto it = reply.find("raw"); it != reply.end() && it->is_string()) a.raw = it->get<std::string>();
  validate_answer(a, allowed);
  return a;
}

std::string RemoteSeq2Seq::generate_name(const PromptInstance& prompt, const ChoiceSet&) const {
  nlohmann::json body = {{"prompt", prompt.text},
                         {"allowed_symbols", nlohmann::json::array()},
                         {"max_new_tokens", name_max_tokens_}};
  auto reply = post_json(opts_, "/generate", body);
  if (!reply.is_object() || !reply.contains("raw") || !reply["raw"].is_string()) {
    throw MalformedRemoteResponse("/generate name reply must carry 'raw'");
  }
  return std::string(trim(reply["raw"].get<std::string>()));
}

NameResolution answer_generate_names(const Generator& generator, const PromptInstance& prompt,
                                     const ChoiceSet& choice_set, const Ontology& ontology) {
  NameResolution out;
  out.emitted = generator.generate_name(prompt, choice_set);
  auto ids = ontology.lookup(trim(out.emitted));
  if (ids.empty()) return out;
  for (const auto& o : choice_set.options) {
    if (ids.contains(o.entity_id)) {
      out.entity_id = o.entity_id;
      return out;
    }
  }
  out.entity_id = *ids.begin();
  return out;
}

}  // namespace mcel
