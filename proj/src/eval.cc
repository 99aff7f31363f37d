#include "mcel/eval.h"

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "mcel/error.h"
#include "mcel/text.h"

namespace mcel {

std::string_view neighbor_mode_name(NeighborMode m) {
  switch (m) {
    case NeighborMode::kSimilar: return "similar";
    case NeighborMode::kRandom: return "random";
    case NeighborMode::kNone: return "none";
  }
  return "similar";
}

NeighborMode parse_neighbor_mode(std::string_view s) {
  if (s == "similar") return NeighborMode::kSimilar;
  if (s == "random") return NeighborMode::kRandom;
  if (s == "none") return NeighborMode::kNone;
  throw Error("unknown neighbor mode '" + std::string(s) + "'");
}

std::string_view answer_mode_name(AnswerMode m) {
  return m == AnswerMode::kSymbol ? "symbol" : "generate-names";
}

AnswerMode parse_answer_mode(std::string_view s) {
  if (s == "symbol") return AnswerMode::kSymbol;
  if (s == "generate-names") return AnswerMode::kGenerateNames;
  throw Error("unknown answer mode '" + std::string(s) + "'");
}

SweepParam parse_sweep_param(std::string_view s) {
  if (s == "N" || s == "n") return SweepParam::kN;
  if (s == "K" || s == "k") return SweepParam::kK;
  throw Error("sweep parameter must be N or K, got '" + std::string(s) + "'");
}

void EvalConfig::validate() const {
  if (n_options == 0) throw Error("n_options must be at least 1");
  if (n_options > kMaxOptions) throw TooManyOptions(n_options);
  if (threads == 0) throw Error("threads must be at least 1");
}

std::size_t EvalConfig::effective_k() const { return neighbor_mode == NeighborMode::kNone ? 0 : k_neighbors; }

nlohmann::json EvalConfig::to_json() const {
  return {{"n_options", n_options},
          {"k_neighbors", effective_k()},
          {"augmentation", augmentation},
          {"swaps", swaps},
          {"neighbor_mode", effective_k() == 0 ? "none" : neighbor_mode_name(neighbor_mode)},
          {"answer_mode", answer_mode_name(answer_mode)},
          {"display", display == DisplayName::kMatched ? "matched" : "canonical"},
          {"separator", prompt.separator},
          {"most_similar_first", prompt.most_similar_first},
          {"max_prompt_length", prompt.max_length},
          {"seed", seed},
          {"backend", backend}};
}

nlohmann::json EvalReport::to_json(bool with_records) const {
  nlohmann::json j = {{"label", label},
                      {"config", config.to_json()},
                      {"total", total},
                      {"correct", correct},
                      {"incorrect", incorrect},
                      {"failed", failed},
                      {"gold_in_candidates", gold_in_candidates},
                      {"invalid_outputs", invalid_outputs},
                      {"no_match", no_match},
                      {"accuracy", accuracy},
                      {"gold_in_candidates_rate", gold_in_candidates_rate},
                      {"invalid_output_rate", invalid_output_rate}};
  if (with_records) {
    auto& recs = j["records"] = nlohmann::json::array();
    for (const auto& r : records) {
      nlohmann::json rec = {{"ordinal", r.ordinal},
                            {"mention", r.mention},
                            {"gold_id", r.gold_id ? nlohmann::json(*r.gold_id) : nlohmann::json()},
                            {"predicted_id", r.predicted_id ? nlohmann::json(*r.predicted_id) : nlohmann::json()},
                            {"candidates", r.candidate_ids},
                            {"neighbors", r.neighbor_ordinals},
                            {"output", r.output},
                            {"gold_in_candidates", r.gold_in_candidates},
                            {"correct", r.correct},
                            {"invalid_output", r.invalid_output},
                            {"no_match", r.no_match}};
      if (r.failure) rec["failure"] = *r.failure;
      recs.push_back(std::move(rec));
    }
  }
  return j;
}

namespace {

InstanceRecord evaluate_one(const Mention& m, const Engine& engine, const EvalConfig& cfg,
                            InvalidOutputCounter& invalid) {
  InstanceRecord r;
  r.ordinal = m.ordinal;
  r.mention = m.text;
  r.gold_id = m.gold_id;
  if (!m.has_valid_gold()) {
    r.failure = m.gold_id ? "gold id not in ontology" : "mention has no gold id";
    return r;
  }
  try {
    const Embedding q = engine.embedder->embed_one(m.text);
    const auto cands = engine.index->top_n(q, cfg.n_options);
    for (const auto& c : cands) r.candidate_ids.push_back(c.entity_id);
    const auto cs = make_choice_set(m, cands, m.gold_id, {ChoiceMode::kEval, cfg.display, engine.ontology});
    r.gold_in_candidates = cs.gold_symbol.has_value();

    NeighborSet neighbors;
    const std::size_t k = cfg.effective_k();
    if (k > 0) {
      if (engine.datastore == nullptr) throw Error("K > 0 needs a datastore");
      // A training mention must not see itself.
      std::optional<std::size_t> self;
      if (m.split == Split::kTrain) self = m.ordinal;
      neighbors = cfg.neighbor_mode == NeighborMode::kRandom
                      ? engine.datastore->sample_random(q, k, mix_seed(cfg.seed, m.ordinal), self)
                      : engine.datastore->query(q, k, self);
    }
    for (const auto& n : neighbors.neighbors) r.neighbor_ordinals.push_back(n.ordinal);
    const PromptInstance prompt =
        k > 0 ? assemble_enhanced_prompt(neighbors, cs, cfg.prompt, m.ordinal) : render(cs, m.ordinal);

    if (cfg.answer_mode == AnswerMode::kSymbol) {
      const Answer ans = engine.generator->answer(prompt, cs);
      r.output = std::string(1, ans.symbol);
      const std::size_t before = invalid.count.load();
      const ParsedAnswer parsed = parse_answer(r.output, cs, &invalid);
      r.invalid_output = invalid.count.load() != before;
      r.predicted_id = parsed.symbol ? cs.option(*parsed.symbol)->entity_id : parsed.fallback_id;
    } else {
      const NameResolution res = answer_generate_names(*engine.generator, prompt, cs, *engine.ontology);
      r.output = res.emitted;
      r.predicted_id = res.entity_id;
      r.no_match = !res.entity_id.has_value();
    }
    r.correct = r.predicted_id == m.gold_id;
  } catch (const Error& e) {
    r.failure = e.what();
    r.correct = false;
  }
  return r;
}

}  // namespace

EvalReport evaluate(std::span<const Mention> split, const Engine& engine, const EvalConfig& cfg) {
  cfg.validate();
  if (engine.ontology == nullptr || engine.embedder == nullptr || engine.index == nullptr ||
      engine.generator == nullptr) {
    throw Error("evaluate needs an ontology, embedder, index and generator");
  }
  const auto started = std::chrono::steady_clock::now();
  EvalReport report;
  report.config = cfg;
  report.config.backend = engine.generator->kind();
  report.records.resize(split.size());
  InvalidOutputCounter invalid;

  const std::size_t workers = std::min(cfg.threads, std::max<std::size_t>(1, split.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < split.size(); ++i) report.records[i] = evaluate_one(split[i], engine, cfg, invalid);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < workers; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < split.size(); i += workers) {
          report.records[i] = evaluate_one(split[i], engine, cfg, invalid);
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  std::stable_sort(report.records.begin(), report.records.end(),
                   [](const InstanceRecord& a, const InstanceRecord& b) { return a.ordinal < b.ordinal; });

  report.total = split.size();
  for (const auto& r : report.records) {
    if (r.failure) {
      ++report.failed;
    } else if (r.correct) {
      ++report.correct;
    } else {
      ++report.incorrect;
    }
    report.gold_in_candidates += r.gold_in_candidates ? 1 : 0;
    report.invalid_outputs += r.invalid_output ? 1 : 0;
    report.no_match += r.no_match ? 1 : 0;
  }
  if (report.total > 0) {
    const auto total = static_cast<double>(report.total);
    report.accuracy = static_cast<double>(report.correct) / total;
    report.gold_in_candidates_rate = static_cast<double>(report.gold_in_candidates) / total;
    report.invalid_output_rate = static_cast<double>(report.invalid_outputs) / total;
  }
  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

std::vector<AblationRow> run_ablations(std::span<const Mention> split, const Engine& engine, const EvalConfig& base,
                                       const Generator* no_aug_generator) {
  EvalConfig full = base;
  full.neighbor_mode = NeighborMode::kSimilar;
  full.answer_mode = AnswerMode::kSymbol;
  full.augmentation = true;

  std::vector<AblationRow> rows;
  auto run = [&](std::string name, const EvalConfig& cfg, const Engine& eng) {
    auto report = evaluate(split, eng, cfg);
    report.label = name;
    rows.push_back({std::move(name), std::move(report)});
  };
  run("full", full, engine);

  EvalConfig no_aug = full;
  no_aug.augmentation = false;
  Engine no_aug_engine = engine;
  if (no_aug_generator != nullptr) no_aug_engine.generator = no_aug_generator;
  run("no-aug", no_aug, no_aug_engine);

  EvalConfig no_knn = full;
  no_knn.neighbor_mode = NeighborMode::kNone;
  run("no-knn", no_knn, engine);

  EvalConfig random = full;
  random.neighbor_mode = NeighborMode::kRandom;
  run("random-neighbors", random, engine);

  EvalConfig names = full;
  names.answer_mode = AnswerMode::kGenerateNames;
  run("generate-names", names, engine);
  return rows;
}

std::vector<SweepPoint> sweep(SweepParam param, std::span<const std::size_t> values, std::span<const Mention> split,
                              const Engine& engine, const EvalConfig& cfg) {
  if (values.empty()) throw Error("sweep needs at least one value");
  std::vector<SweepPoint> out;
  for (std::size_t v : values) {
    EvalConfig c = cfg;
    if (param == SweepParam::kN) {
      c.n_options = v;
    } else {
      c.k_neighbors = v;
    }
    auto report = evaluate(split, engine, c);
    out.push_back({v, report.accuracy, report.gold_in_candidates_rate});
  }
  return out;
}

void write_sweep_csv(std::ostream& out, SweepParam param, std::span<const SweepPoint> points) {
  out << (param == SweepParam::kN ? "N" : "K") << ",accuracy,gold_in_candidates_rate\n";
  out << std::setprecision(6) << std::fixed;
  for (const auto& p : points) out << p.value << ',' << p.accuracy << ',' << p.gold_in_candidates_rate << '\n';
}

std::string format_table(std::span<const AblationRow> rows) {
  std::ostringstream out;
  out << std::left << std::setw(18) << "row" << std::right << std::setw(10) << "accuracy" << std::setw(10)
      << "recall@N" << std::setw(10) << "invalid" << std::setw(10) << "no-match" << std::setw(8) << "failed"
      << std::setw(8) << "total" << '\n';
  out << std::fixed << std::setprecision(4);
  for (const auto& row : rows) {
    const auto& r = row.report;
    out << std::left << std::setw(18) << row.name << std::right << std::setw(10) << r.accuracy << std::setw(10)
        << r.gold_in_candidates_rate << std::setw(10) << r.invalid_output_rate << std::setw(10) << r.no_match
        << std::setw(8) << r.failed << std::setw(8) << r.total << '\n';
  }
  return out.str();
}

std::vector<LabeledInstance> label_training_split(std::span<const Mention> train, const Ontology& ontology,
                                                  const Embedder& embedder, const VectorIndex& index,
                                                  std::size_t n_options, DisplayName display) {
  std::vector<LabeledInstance> out;
  const ChoiceOptions opts{ChoiceMode::kTrain, display, &ontology};
  for (const auto& m : train) {
    if (!m.has_valid_gold()) continue;
    auto cands = index.top_n(embedder.embed_one(m.text), n_options);
    out.push_back({m, make_choice_set(m, cands, m.gold_id, opts)});
  }
  return out;
}

std::vector<PromptInstance> export_training_prompts(std::span<const LabeledInstance> training,
                                                    const Embedder& embedder, const Datastore* datastore,
                                                    const EvalConfig& cfg) {
  std::vector<PromptInstance> out;
  const std::size_t k = datastore != nullptr ? cfg.effective_k() : 0;
  for (const auto& inst : training) {
    const std::size_t ordinal = inst.mention.ordinal;
    NeighborSet neighbors;
    if (k > 0) {
      auto q = embedder.embed_one(inst.mention.text);
      neighbors = cfg.neighbor_mode == NeighborMode::kRandom
                      ? datastore->sample_random(q, k, mix_seed(cfg.seed, ordinal), ordinal)
                      : datastore->query(q, k, ordinal);
    }
    auto build = [&](const ChoiceSet& cs) {
      return k > 0 ? assemble_enhanced_prompt(neighbors, cs, cfg.prompt, ordinal) : render(cs, ordinal);
    };
    out.push_back(build(inst.choice_set));
    if (cfg.augmentation && inst.choice_set.options.size() >= 2) {
      for (std::size_t s = 0; s < cfg.swaps; ++s) {
        auto p = build(augment_swap(inst.choice_set, mix_seed(mix_seed(cfg.seed, ordinal), s)));
        p.provenance = Provenance::kAugmentedSwap;
        out.push_back(std::move(p));
      }
    }
  }
  return out;
}

std::vector<std::string> encoder_corpus(const Ontology& ontology, std::span<const Mention> train) {
  std::vector<std::string> corpus;
  for (const auto& e : ontology.entities()) {
    for (const auto& n : e.names()) corpus.push_back(n);
  }
  for (const auto& m : train) corpus.push_back(m.text);
  return corpus;
}

Pipeline build_pipeline(const Ontology& ontology, std::span<const Mention> train, const PipelineConfig& cfg) {
  const auto corpus = encoder_corpus(ontology, train);
  Pipeline p;
  p.encoder = std::make_shared<NGramEncoder>(NGramEncoder::build(cfg.encoder, corpus));
  if (cfg.train_retriever) {
    auto pairs = make_training_pairs(ontology, train, true);
    auto miner = make_index_miner(ontology);
    p.training = mcel::train(*p.encoder, pairs, ontology, cfg.training, miner.get());
  }
  p.embedder = std::make_unique<NGramEmbedder>(p.encoder);
  p.index = std::make_unique<VectorIndex>(build_index(ontology, *p.embedder));
  auto labeled = label_training_split(train, ontology, *p.embedder, *p.index, cfg.n_options, cfg.display);
  p.datastore = std::make_unique<Datastore>(build_datastore(labeled, *p.embedder));
  return p;
}

}  // namespace mcel
