#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "generators.h"
#include "mcel/error.h"
#include "mcel/mcp.h"

using namespace mcel;

namespace {

std::vector<Candidate> cands(std::initializer_list<std::pair<const char*, const char*>> items) {
  std::vector<Candidate> out;
  std::size_t rank = 1;
  for (const auto& [id, name] : items) out.push_back({id, name, 1.0 / static_cast<double>(rank), rank++});
  return out;
}

Mention mention(const char* text) {
  Mention m;
  m.text = text;
  return m;
}

const Ontology& toy_ontology() {
  static const Ontology o = Ontology::from_entities({{"D1", "haemoglobin", {"hemoglobin"}},
                                                     {"D2", "haemoglobin c", {}},
                                                     {"D3", "uneasy", {"feel uncomfortable"}}});
  return o;
}

}  // namespace

TEST(ChoiceSet, RendersTheTemplateByteForByte) {
  auto cs = make_choice_set(mention("hemoglobin"), cands({{"D1", "haemoglobin"}, {"D2", "haemoglobin c"}}), "D1");
  EXPECT_EQ(render_text(cs), "mention: hemoglobin options: A. haemoglobin B. haemoglobin c answer:");
  EXPECT_EQ(cs.gold_symbol, 'A');
  auto p = render(cs, 7);
  EXPECT_EQ(p.expected_symbol, 'A');
  EXPECT_EQ(p.mention_ordinal, 7u);
  EXPECT_EQ(p.provenance, Provenance::kOriginal);
}

TEST(ChoiceSet, GoldAbsentInEvalMode) {
  auto cs = make_choice_set(mention("x"), cands({{"D1", "haemoglobin"}, {"D2", "haemoglobin c"}}), "D3");
  EXPECT_FALSE(cs.gold_symbol.has_value());
  EXPECT_FALSE(render(cs).expected_symbol.has_value());
}

TEST(ChoiceSet, TrainModeInjectsGoldIntoLastSlot) {
  ChoiceOptions opts{ChoiceMode::kTrain, DisplayName::kMatched, &toy_ontology()};
  auto cs = make_choice_set(mention("feel uneasy"), cands({{"D1", "hemoglobin"}, {"D2", "haemoglobin c"}}), "D3",
                            opts);
  EXPECT_EQ(cs.gold_symbol, 'B');
  EXPECT_EQ(cs.options[1].entity_id, "D3");
  EXPECT_EQ(cs.options[1].display_name, "uneasy");
  EXPECT_EQ(cs.options[0].display_name, "hemoglobin");
  EXPECT_THROW(make_choice_set(mention("x"), cands({{"D1", "a"}}), "D3", {ChoiceMode::kTrain}), Error);
}

TEST(ChoiceSet, CanonicalDisplay) {
  ChoiceOptions opts{ChoiceMode::kEval, DisplayName::kCanonical, &toy_ontology()};
  auto cs = make_choice_set(mention("hb"), cands({{"D1", "hemoglobin"}}), "D1", opts);
  EXPECT_EQ(cs.options[0].display_name, "haemoglobin");
  EXPECT_THROW(make_choice_set(mention("hb"), cands({{"D1", "hemoglobin"}}), "D1", {ChoiceMode::kEval,
                                                                                      DisplayName::kCanonical}),
               Error);
}

TEST(ChoiceSet, Errors) {
  EXPECT_THROW(make_choice_set(mention("x"), {}, std::nullopt), Error);
  EXPECT_THROW(make_choice_set(mention("x"), cands({{"D1", "a"}, {"D1", "b"}}), std::nullopt), DuplicateEntity);
  std::vector<Candidate> many;
  for (int i = 0; i < 27; ++i) many.push_back({"E" + std::to_string(i), "n", 0.0, 0});
  EXPECT_THROW(make_choice_set(mention("x"), many, std::nullopt), TooManyOptions);
  many.pop_back();
  auto cs = make_choice_set(mention("x"), many, "E25");
  EXPECT_EQ(cs.gold_symbol, 'Z');
  cs.options[3].symbol = 'Q';
  EXPECT_THROW(cs.validate(), Error);
}

TEST(AugmentSwap, FiveOptionsReachAll120Orders) {
  auto cs = make_choice_set(mention("m"), cands({{"a", "1"}, {"b", "2"}, {"c", "3"}, {"d", "4"}, {"e", "5"}}), "c");
  std::set<std::vector<std::string>> orders;
  auto order_of = [](const ChoiceSet& s) {
    std::vector<std::string> ids;
    for (const auto& o : s.options) ids.push_back(o.entity_id);
    return ids;
  };
  orders.insert(order_of(cs));
  for (std::uint64_t seed = 0; seed < 5000; ++seed) {
    auto sw = augment_swap(cs, seed);
    EXPECT_NE(order_of(sw), order_of(cs));
    EXPECT_EQ(sw.option(*sw.gold_symbol)->entity_id, "c");
    orders.insert(order_of(sw));
  }
  EXPECT_EQ(orders.size(), 120u);
}

TEST(AugmentSwap, TwoOptionsAlwaysSwapAndSeedIsDeterministic) {
  auto cs = make_choice_set(mention("m"), cands({{"a", "x"}, {"b", "y"}}), "a");
  auto sw = augment_swap(cs, 3);
  EXPECT_EQ(sw.options[0].entity_id, "b");
  EXPECT_EQ(sw.gold_symbol, 'B');
  EXPECT_EQ(render_text(sw), "mention: m options: A. y B. x answer:");
  auto big = make_choice_set(mention("m"), cands({{"a", "1"}, {"b", "2"}, {"c", "3"}, {"d", "4"}}), "d");
  EXPECT_EQ(augment_swap(big, 42), augment_swap(big, 42));
}

TEST(AugmentSwap, NeedsTwoOptionsAndGold) {
  auto one = make_choice_set(mention("m"), cands({{"a", "x"}}), "a");
  EXPECT_THROW(augment_swap(one, 1), SingleOption);
  auto nogold = make_choice_set(mention("m"), cands({{"a", "x"}, {"b", "y"}}), std::nullopt);
  EXPECT_THROW(augment_swap(nogold, 1), SingleOption);
}

TEST(TrainingPrompts, OriginalThenSwaps) {
  auto cs = make_choice_set(mention("m"), cands({{"a", "x"}, {"b", "y"}, {"c", "z"}}), "b");
  auto ps = training_prompts(cs, 4, 3, 99);
  ASSERT_EQ(ps.size(), 4u);
  EXPECT_EQ(ps[0].provenance, Provenance::kOriginal);
  for (std::size_t i = 1; i < ps.size(); ++i) {
    EXPECT_EQ(ps[i].provenance, Provenance::kAugmentedSwap);
    EXPECT_EQ(ps[i].mention_ordinal, 4u);
    auto blocks = parse_prompt(ps[i].text);
    ASSERT_EQ(blocks.size(), 1u);
    EXPECT_EQ(blocks[0].option_names[static_cast<std::size_t>(*ps[i].expected_symbol - 'A')], "y");
  }
  auto one = make_choice_set(mention("m"), cands({{"a", "x"}}), "a");
  EXPECT_EQ(training_prompts(one, 0, 3, 1).size(), 1u);
}

TEST(ParseAnswer, AcceptsAssignedSymbolsOnly) {
  auto cs = make_choice_set(mention("m"), cands({{"a", "x"}, {"b", "y"}, {"c", "z"}}), "b");
  InvalidOutputCounter counter;
  EXPECT_EQ(parse_answer("B", cs, &counter).symbol, 'B');
  EXPECT_EQ(parse_answer("  c\n", cs, &counter).symbol, 'C');
  EXPECT_EQ(counter.count.load(), 0u);
  auto bad = parse_answer("D", cs, &counter);
  EXPECT_FALSE(bad.symbol.has_value());
  EXPECT_EQ(bad.fallback_id, "a");
  EXPECT_FALSE(parse_answer("", cs, &counter).symbol.has_value());
  EXPECT_FALSE(parse_answer("?", cs, &counter).symbol.has_value());
  EXPECT_EQ(counter.count.load(), 3u);
}

TEST(PromptJson, FieldsAndLines) {
  auto cs = make_choice_set(mention("m"), cands({{"a", "x"}, {"b", "y"}}), "b");
  auto p = render(cs, 12);
  auto j = to_json(p);
  EXPECT_EQ(j["prompt"], "mention: m options: A. x B. y answer:");
  EXPECT_EQ(j["symbol"], "B");
  EXPECT_EQ(j["mention_ordinal"], 12);
  EXPECT_EQ(j["provenance"], "original");
  std::vector<PromptInstance> ps{p, render(make_choice_set(mention("n"), cands({{"a", "x"}}), std::nullopt))};
  std::ostringstream out;
  write_prompts_jsonl(out, ps);
  std::istringstream in(out.str());
  std::string line;
  std::vector<nlohmann::json> rows;
  while (std::getline(in, line)) rows.push_back(nlohmann::json::parse(line));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_TRUE(rows[1]["symbol"].is_null());
  EXPECT_EQ(provenance_name(Provenance::kRetrievalEnhanced), "retrieval-enhanced");
}

TEST(ParsePrompt, RoundTripsRandomChoiceSets) {
  gen::Rng rng(17);
  for (int i = 0; i < 300; ++i) {
    auto cs = gen::random_choice_set(rng);
    auto blocks = parse_prompt(render_text(cs));
    ASSERT_EQ(blocks.size(), 1u);
    EXPECT_EQ(blocks[0].mention_text, cs.mention_text);
    ASSERT_EQ(blocks[0].option_names.size(), cs.options.size());
    for (std::size_t k = 0; k < cs.options.size(); ++k) EXPECT_EQ(blocks[0].option_names[k], cs.options[k].display_name);
    EXPECT_FALSE(blocks[0].answer.has_value());
  }
}

TEST(ParsePrompt, RejectsForeignText) {
  EXPECT_THROW(parse_prompt(""), FormatError);
  EXPECT_THROW(parse_prompt("hello"), FormatError);
  EXPECT_THROW(parse_prompt("mention: m options: B. x answer:"), FormatError);
  EXPECT_THROW(parse_prompt("mention: m options: A. x answer: A "), FormatError);
}
