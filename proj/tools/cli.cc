#include "cli.h"

#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "mcel/error.h"
#include "mcel/eval.h"
#include "mcel/synthetic.h"
#include "mcel/text.h"

namespace mcel::cli {
namespace {

namespace fs = std::filesystem;

// Missing or inconsistent flags; exit code 2 like CLI11's own parse errors.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string ontology, train, dev, test, split = "test";
  std::string checkpoint, index, datastore;
  std::string out, report, table, csv;
  std::string mention;

  std::size_t dim = 256;
  std::size_t hash_buckets = 4096;
  ContrastiveConfig training;
  bool lr_search = false;
  std::size_t lr_search_n = 5;

  std::size_t n_options = 5;
  std::size_t k_neighbors = 3;
  std::string neighbor_mode = "similar";
  std::string answer_mode = "symbol";
  std::string display = "matched";
  bool no_augmentation = false;
  std::size_t swaps = 1;
  std::string separator = " ";
  bool least_similar_first = false;
  std::size_t max_prompt_length = 0;
  std::size_t threads = 1;
  std::string backend = "lexical-heuristic";

  std::uint64_t seed = 0x5eed;
  std::uint64_t synth_seed = SyntheticConfig{}.seed;

  std::string embed_url, generate_url;
  int timeout_ms = 30000;
  int retries = 2;

  std::string param = "N";
  std::vector<std::size_t> values;

  std::string log_level = "info";
};

void add_options(CLI::App& app, Options& o) {
  const char* paths = "Paths";
  app.add_option("--ontology", o.ontology, "Ontology file (.tsv or .jsonl)")->group(paths);
  app.add_option("--train", o.train, "Training mentions file")->group(paths);
  app.add_option("--dev", o.dev, "Development mentions file")->group(paths);
  app.add_option("--test", o.test, "Test mentions file")->group(paths);
  app.add_option("--split", o.split, "Split scored by evaluate/ablate/sweep")
      ->check(CLI::IsMember({"train", "dev", "test"}))
      ->group(paths);
  app.add_option("--checkpoint", o.checkpoint, "Retriever checkpoint")->group(paths);
  app.add_option("--index", o.index, "Entity index file")->group(paths);
  app.add_option("--datastore", o.datastore, "kNN datastore file")->group(paths);
  app.add_option("--out", o.out, "Output file (directory for ingest and synth)")->group(paths);
  app.add_option("--report", o.report, "JSON report path")->group(paths);
  app.add_option("--table", o.table, "Text table path")->group(paths);
  app.add_option("--csv", o.csv, "Sweep CSV path (stdout when empty)")->group(paths);

  const char* enc = "Retriever";
  app.add_option("--dim", o.dim, "Embedding dimension")->capture_default_str()->group(enc);
  app.add_option("--hash-buckets", o.hash_buckets, "Hashed out-of-vocabulary n-gram rows")
      ->capture_default_str()
      ->group(enc);
  app.add_option("--epochs", o.training.epochs, "Training epochs")->capture_default_str()->group(enc);
  app.add_option("--batch-size", o.training.batch_size, "Mini-batch size")->capture_default_str()->group(enc);
  app.add_option("--learning-rate", o.training.learning_rate, "SGD learning rate")
      ->capture_default_str()
      ->group(enc);
  app.add_option("--temperature", o.training.temperature, "Contrastive temperature")
      ->capture_default_str()
      ->group(enc);
  app.add_option("--hard-negatives", o.training.hard_negatives_per_pair, "Mined negatives per pair")
      ->capture_default_str()
      ->group(enc);
  app.add_flag("!--no-in-batch", o.training.in_batch_negatives, "Disable in-batch negatives")->group(enc);
  app.add_flag("--lr-search", o.lr_search, "Pick the learning rate by dev recall over the grid")->group(enc);
  app.add_option("--lr-search-n", o.lr_search_n, "Recall cutoff used by --lr-search")
      ->capture_default_str()
      ->group(enc);

  const char* ev = "Linking";
  app.add_option("--n-options", o.n_options, "Candidates per prompt (N)")->capture_default_str()->group(ev);
  app.add_option("--k-neighbors", o.k_neighbors, "Solved neighbor blocks per prompt (K)")
      ->capture_default_str()
      ->group(ev);
  app.add_option("--neighbor-mode", o.neighbor_mode, "similar, random or none")
      ->check(CLI::IsMember({"similar", "random", "none"}))
      ->capture_default_str()
      ->group(ev);
  app.add_option("--answer-mode", o.answer_mode, "symbol or generate-names")
      ->check(CLI::IsMember({"symbol", "generate-names"}))
      ->capture_default_str()
      ->group(ev);
  app.add_option("--display", o.display, "Option text: matched name or canonical name")
      ->check(CLI::IsMember({"matched", "canonical"}))
      ->capture_default_str()
      ->group(ev);
  app.add_flag("--no-augmentation", o.no_augmentation, "No order-swapped copies in exported prompts")->group(ev);
  app.add_option("--swaps", o.swaps, "Order-swapped copies per training prompt")->capture_default_str()->group(ev);
  app.add_option("--separator", o.separator, "Text after each solved block's answer")
      ->capture_default_str()
      ->group(ev);
  app.add_flag("--least-similar-first", o.least_similar_first, "Put the most similar neighbor last")->group(ev);
  app.add_option("--max-prompt-length", o.max_prompt_length, "Drop least similar neighbors beyond this (0: off)")
      ->capture_default_str()
      ->group(ev);
  app.add_option("--threads", o.threads, "Evaluation threads")->capture_default_str()->group(ev);
  app.add_option("--backend", o.backend, "scripted-oracle, lexical-heuristic or remote-seq2seq")
      ->check(CLI::IsMember({"scripted-oracle", "lexical-heuristic", "remote-seq2seq"}))
      ->capture_default_str()
      ->group(ev);
  app.add_option("--mention", o.mention, "Mention text for link")->group(ev);
  app.add_option("--param", o.param, "Swept parameter, N or K")
      ->check(CLI::IsMember({"N", "K", "n", "k"}))
      ->capture_default_str()
      ->group(ev);
  app.add_option("--values", o.values, "Swept values, comma separated")->delimiter(',')->group(ev);

  const char* misc = "Other";
  app.add_option("--seed", o.seed, "Seed for initialization, batching, sampling and swaps")
      ->capture_default_str()
      ->group(misc);
  app.add_option("--synth-seed", o.synth_seed, "Seed of the synthetic benchmark")->capture_default_str()->group(misc);
  app.add_option("--embed-url", o.embed_url, "Remote /embed base URL (replaces the checkpoint)")
      ->envname("MCEL_EMBED_URL")
      ->group(misc);
  app.add_option("--generate-url", o.generate_url, "Remote /generate base URL")
      ->envname("MCEL_GENERATE_URL")
      ->group(misc);
  app.add_option("--timeout-ms", o.timeout_ms, "Remote request timeout")->capture_default_str()->group(misc);
  app.add_option("--retries", o.retries, "Remote retries on failure")->capture_default_str()->group(misc);
  app.add_option("--log-level", o.log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}))
      ->capture_default_str()
      ->group(misc);
}

const std::string& need(const std::string& value, const char* flag, const std::string& cmd) {
  if (value.empty()) throw UsageError(cmd + " needs " + flag);
  return value;
}

class Context {
 public:
  Context(const Options& o, std::string cmd, std::shared_ptr<spdlog::logger> log)
      : o_(o), cmd_(std::move(cmd)), log_(std::move(log)) {}

  const Options& opts() const { return o_; }
  spdlog::logger& log() { return *log_; }
  const std::string& cmd() const { return cmd_; }

  const Ontology& ontology() {
    if (!ontology_) {
      ontology_ = ingest_ontology(need(o_.ontology, "--ontology", cmd_));
      log_->info("ontology: {} entities", ontology_->size());
    }
    return *ontology_;
  }

  MentionSet mentions(Split split) {
    const std::string* path = &o_.test;
    const char* flag = "--test";
    if (split == Split::kTrain) {
      path = &o_.train;
      flag = "--train";
    } else if (split == Split::kDev) {
      path = &o_.dev;
      flag = "--dev";
    }
    auto set = ingest_mentions(need(*path, flag, cmd_), split, ontology());
    log_->info("{}: {} mentions, {} with unknown gold", split_name(split), set.mentions.size(), set.dangling);
    return set;
  }

  const Embedder& embedder() {
    if (!embedder_) {
      if (!o_.embed_url.empty()) {
        embedder_ = std::make_unique<RemoteEmbedder>(remote(o_.embed_url));
      } else {
        auto enc = std::make_shared<NGramEncoder>(NGramEncoder::load(need(o_.checkpoint, "--checkpoint", cmd_)));
        embedder_ = std::make_unique<NGramEmbedder>(std::move(enc));
      }
      log_->info("embedder: {} {:016x}", embedder_->kind(), embedder_->fingerprint());
    }
    return *embedder_;
  }

  const VectorIndex& index() {
    if (!index_) {
      index_ = std::make_unique<VectorIndex>(VectorIndex::load(need(o_.index, "--index", cmd_)));
      check_fingerprint("index", index_->embedder_fingerprint());
    }
    return *index_;
  }

  // Null when no datastore was given and none is needed.
  const Datastore* datastore(bool required) {
    if (!datastore_ && (required || !o_.datastore.empty())) {
      datastore_ = std::make_unique<Datastore>(Datastore::load(need(o_.datastore, "--datastore", cmd_)));
      check_fingerprint("datastore", datastore_->embedder_fingerprint());
      log_->info("datastore: {} entries", datastore_->size());
    }
    return datastore_.get();
  }

  const Generator& generator() {
    if (!generator_) {
      if (o_.backend == "scripted-oracle") {
        generator_ = std::make_unique<ScriptedOracle>();
      } else if (o_.backend == "remote-seq2seq") {
        generator_ = std::make_unique<RemoteSeq2Seq>(remote(need(o_.generate_url, "--generate-url", cmd_)));
      } else {
        generator_ = std::make_unique<LexicalHeuristic>();
      }
    }
    return *generator_;
  }

  EvalConfig eval_config() const {
    EvalConfig c;
    c.n_options = o_.n_options;
    c.k_neighbors = o_.k_neighbors;
    c.augmentation = !o_.no_augmentation;
    c.swaps = o_.swaps;
    c.neighbor_mode = parse_neighbor_mode(o_.neighbor_mode);
    c.answer_mode = parse_answer_mode(o_.answer_mode);
    c.display = o_.display == "canonical" ? DisplayName::kCanonical : DisplayName::kMatched;
    c.prompt.separator = o_.separator;
    c.prompt.most_similar_first = !o_.least_similar_first;
    c.prompt.max_length = o_.max_prompt_length;
    c.seed = o_.seed;
    c.threads = o_.threads;
    c.backend = o_.backend;
    c.validate();
    return c;
  }

  Engine engine(const EvalConfig& cfg) {
    return Engine{&ontology(), &embedder(), &index(), datastore(cfg.effective_k() > 0), &generator()};
  }

  Split split() const { return parse_split(o_.split); }

 private:
  RemoteOptions remote(const std::string& url) const {
    return RemoteOptions{url, std::chrono::milliseconds(o_.timeout_ms), o_.retries};
  }

  void check_fingerprint(const char* what, std::uint64_t recorded) {
    const std::uint64_t current = embedder().fingerprint();
    if (recorded != current) {
      std::ostringstream msg;
      msg << what << " was built with embedder " << std::hex << recorded << ", not the loaded " << current;
      throw Error(msg.str());
    }
  }

  const Options& o_;
  std::string cmd_;
  std::shared_ptr<spdlog::logger> log_;
  std::optional<Ontology> ontology_;
  std::unique_ptr<Embedder> embedder_;
  std::unique_ptr<VectorIndex> index_;
  std::unique_ptr<Datastore> datastore_;
  std::unique_ptr<Generator> generator_;
};

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  return f;
}

void write_text(const std::string& path, const std::string& text) {
  auto f = open_out(path);
  f << text;
}

std::string json_text(const nlohmann::json& j) { return j.dump(2) + "\n"; }

int cmd_ingest(Context& ctx, std::ostream& out) {
  const auto& o = ctx.opts();
  const auto& ont = ctx.ontology();
  std::size_t synonyms = 0;
  for (const auto& e : ont.entities()) synonyms += e.synonyms.size();
  out << "ontology " << ont.size() << " entities, " << synonyms << " synonyms\n";
  if (!o.out.empty()) {
    fs::create_directories(o.out);
    auto f = open_out((fs::path(o.out) / "ontology.tsv").string());
    write_ontology(f, ont, FileFormat::kTsv);
  }
  for (Split s : {Split::kTrain, Split::kDev, Split::kTest}) {
    const std::string& path = s == Split::kTrain ? o.train : s == Split::kDev ? o.dev : o.test;
    if (path.empty()) continue;
    auto set = ctx.mentions(s);
    out << split_name(s) << ' ' << set.mentions.size() << " mentions, " << set.dangling << " with unknown gold\n";
    if (!o.out.empty()) {
      auto f = open_out((fs::path(o.out) / (std::string(split_name(s)) + ".tsv")).string());
      write_mentions(f, set.mentions, FileFormat::kTsv);
    }
  }
  return 0;
}

int cmd_synth(Context& ctx, std::ostream& out) {
  const auto& o = ctx.opts();
  SyntheticConfig sc;
  sc.seed = o.synth_seed;
  const auto bench = make_synthetic_benchmark(sc);
  const fs::path dir = need(o.out, "--out", ctx.cmd());
  fs::create_directories(dir);
  {
    auto f = open_out((dir / "ontology.tsv").string());
    write_ontology(f, bench.ontology, FileFormat::kTsv);
  }
  const std::pair<const char*, const std::vector<Mention>*> splits[] = {
      {"train.tsv", &bench.train}, {"dev.tsv", &bench.dev}, {"test.tsv", &bench.test}};
  for (const auto& [name, mentions] : splits) {
    auto f = open_out((dir / name).string());
    write_mentions(f, *mentions, FileFormat::kTsv);
  }
  out << "wrote " << bench.ontology.size() << " entities, " << bench.train.size() << '/' << bench.dev.size() << '/'
      << bench.test.size() << " train/dev/test mentions to " << dir.string() << '\n';
  return 0;
}

int cmd_train(Context& ctx, std::ostream& out) {
  const auto& o = ctx.opts();
  const std::string& dest = need(o.out, "--out", ctx.cmd());
  const auto& ont = ctx.ontology();
  const auto train_set = ctx.mentions(Split::kTrain);
  std::optional<MentionSet> dev;
  if (!o.dev.empty()) dev = ctx.mentions(Split::kDev);

  NGramConfig ncfg;
  ncfg.dim = o.dim;
  ncfg.hash_buckets = o.hash_buckets;
  ncfg.seed = o.seed;
  ContrastiveConfig tcfg = o.training;
  tcfg.seed = o.seed;
  tcfg.validate();

  auto encoder = NGramEncoder::build(ncfg, encoder_corpus(ont, train_set.mentions));
  const auto pairs = make_training_pairs(ont, train_set.mentions, true);
  ctx.log().info("training on {} pairs, vocabulary {}", pairs.size(), encoder.vocab_size());

  if (o.lr_search) {
    if (!dev) throw UsageError("--lr-search needs --dev");
    auto result = search_learning_rate(encoder, pairs, dev->mentions, ont, tcfg, kLearningRateGrid, o.lr_search_n,
                                       [&](double rate, const TrainResult& r) {
                                         ctx.log().info("lr {:g}: final loss {:.4f}", rate, r.epoch_loss.back());
                                       });
    for (const auto& [rate, recall] : result.recall_by_rate) {
      out << "lr " << rate << " dev recall@" << o.lr_search_n << ' ' << recall << '\n';
    }
    out << "chosen lr " << result.best_learning_rate << '\n';
  } else {
    auto miner = make_index_miner(ont);
    const auto result = train(encoder, pairs, ont, tcfg, miner.get());
    for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
      out << "epoch " << e + 1 << " loss " << std::fixed << std::setprecision(6) << result.epoch_loss[e] << '\n';
    }
    out.unsetf(std::ios::floatfield);
  }
  if (dev) {
    for (std::size_t n : {1, 5}) {
      out << "dev recall@" << n << ' ' << recall_at(encoder, ont, dev->mentions, n) << '\n';
    }
  }
  encoder.save(dest);
  out << "checkpoint " << dest << " fingerprint " << std::hex << encoder.fingerprint() << std::dec << '\n';
  return 0;
}

int cmd_index(Context& ctx, std::ostream& out) {
  const std::string& dest = need(ctx.opts().out, "--out", ctx.cmd());
  const auto index = build_index(ctx.ontology(), ctx.embedder());
  index.save(dest);
  out << "index " << dest << ": " << index.rows() << " rows, dim " << index.dim() << '\n';
  return 0;
}

int cmd_datastore(Context& ctx, std::ostream& out) {
  const std::string& dest = need(ctx.opts().out, "--out", ctx.cmd());
  const auto cfg = ctx.eval_config();
  const auto train_set = ctx.mentions(Split::kTrain);
  const auto labeled =
      label_training_split(train_set.mentions, ctx.ontology(), ctx.embedder(), ctx.index(), cfg.n_options, cfg.display);
  const auto ds = build_datastore(labeled, ctx.embedder());
  ds.save(dest);
  out << "datastore " << dest << ": " << ds.size() << " entries\n";
  return 0;
}

int cmd_link(Context& ctx, std::ostream& out) {
  const auto& o = ctx.opts();
  const auto cfg = ctx.eval_config();
  Mention m;
  m.text = need(o.mention, "--mention", ctx.cmd());
  const Embedding q = ctx.embedder().embed_one(m.text);
  const auto cands = ctx.index().top_n(q, cfg.n_options);
  const auto cs = make_choice_set(m, cands, std::nullopt, {ChoiceMode::kEval, cfg.display, &ctx.ontology()});

  out << "mention: " << m.text << "\ncandidates:\n";
  out << std::fixed << std::setprecision(4);
  for (std::size_t i = 0; i < cands.size(); ++i) {
    out << "  " << cs.options[i].symbol << ". " << cands[i].entity_id << "  " << cs.options[i].display_name << "  ("
        << cands[i].similarity << ")\n";
  }
  NeighborSet neighbors;
  if (const std::size_t k = cfg.effective_k(); k > 0) {
    const Datastore* ds = ctx.datastore(true);
    neighbors = cfg.neighbor_mode == NeighborMode::kRandom ? ds->sample_random(q, k, cfg.seed) : ds->query(q, k);
  }
  out << "neighbors:\n";
  for (const auto& n : neighbors.neighbors) {
    const char gold = n.choice_set.gold_symbol.value_or('?');
    const Option* opt = n.choice_set.option(gold);
    out << "  #" << n.ordinal << "  " << n.similarity << "  " << n.mention_text << " -> " << gold << ". "
        << (opt ? opt->display_name : std::string("?")) << '\n';
  }
  const PromptInstance prompt =
      cfg.effective_k() > 0 ? assemble_enhanced_prompt(neighbors, cs, cfg.prompt) : render(cs);
  out << "prompt:\n  " << prompt.text << '\n';

  const auto& gen = ctx.generator();
  if (cfg.answer_mode == AnswerMode::kSymbol) {
    const Answer ans = gen.answer(prompt, cs);
    out << "scores:";
    for (const auto& [sym, p] : ans.scores) out << ' ' << sym << '=' << p;
    out << '\n';
    const ParsedAnswer parsed = parse_answer(std::string(1, ans.symbol), cs);
    const std::string id = parsed.symbol ? cs.option(*parsed.symbol)->entity_id : parsed.fallback_id.value_or("");
    if (id.empty()) {
      out << "entity: none\n";
    } else {
      out << "entity: " << id << "  " << ctx.ontology().at(id).canonical_name << '\n';
    }
  } else {
    const NameResolution res = answer_generate_names(gen, prompt, cs, ctx.ontology());
    out << "generated: " << res.emitted << '\n';
    if (res.entity_id) {
      out << "entity: " << *res.entity_id << "  " << ctx.ontology().at(*res.entity_id).canonical_name << '\n';
    } else {
      out << "entity: none (no match)\n";
    }
  }
  return 0;
}

void emit_tables(Context& ctx, std::ostream& out, std::span<const AblationRow> rows, const nlohmann::json& report) {
  const std::string table = format_table(rows);
  out << table;
  if (!ctx.opts().report.empty()) write_text(ctx.opts().report, json_text(report));
  if (!ctx.opts().table.empty()) write_text(ctx.opts().table, table);
}

int cmd_evaluate(Context& ctx, std::ostream& out) {
  const auto cfg = ctx.eval_config();
  const auto split = ctx.mentions(ctx.split());
  const auto engine = ctx.engine(cfg);
  auto report = evaluate(split.mentions, engine, cfg);
  report.label = std::string(split_name(ctx.split()));
  ctx.log().info("evaluated {} mentions in {:.2f}s", report.total, report.wall_clock_seconds);
  const AblationRow row{report.label, report};
  emit_tables(ctx, out, std::span<const AblationRow>(&row, 1), report.to_json());
  return 0;
}

int cmd_ablate(Context& ctx, std::ostream& out) {
  const auto cfg = ctx.eval_config();
  const auto split = ctx.mentions(ctx.split());
  EvalConfig full = cfg;
  full.neighbor_mode = NeighborMode::kSimilar;
  const auto engine = ctx.engine(full);
  const auto rows = run_ablations(split.mentions, engine, cfg);
  nlohmann::json j = {{"split", split_name(ctx.split())}, {"rows", nlohmann::json::array()}};
  for (const auto& r : rows) {
    ctx.log().info("{}: {:.2f}s", r.name, r.report.wall_clock_seconds);
    j["rows"].push_back(r.report.to_json());
  }
  emit_tables(ctx, out, rows, j);
  return 0;
}

int cmd_sweep(Context& ctx, std::ostream& out) {
  const auto& o = ctx.opts();
  if (o.values.empty()) throw UsageError("sweep needs --values");
  const auto param = parse_sweep_param(o.param);
  auto cfg = ctx.eval_config();
  for (std::size_t v : o.values) {
    EvalConfig c = cfg;
    (param == SweepParam::kN ? c.n_options : c.k_neighbors) = v;
    c.validate();
  }
  const auto split = ctx.mentions(ctx.split());
  EvalConfig probe = cfg;
  if (param == SweepParam::kK) probe.k_neighbors = *std::max_element(o.values.begin(), o.values.end());
  const auto engine = ctx.engine(probe);
  const auto points = sweep(param, o.values, split.mentions, engine, cfg);
  std::ostringstream csv;
  write_sweep_csv(csv, param, points);
  if (o.csv.empty()) {
    out << csv.str();
  } else {
    write_text(o.csv, csv.str());
    out << "wrote " << points.size() << " points to " << o.csv << '\n';
  }
  if (!o.report.empty()) {
    nlohmann::json j = {{"param", param == SweepParam::kN ? "N" : "K"},
                        {"config", cfg.to_json()},
                        {"points", nlohmann::json::array()}};
    for (const auto& p : points) {
      j["points"].push_back(
          {{"value", p.value}, {"accuracy", p.accuracy}, {"gold_in_candidates_rate", p.gold_in_candidates_rate}});
    }
    write_text(o.report, json_text(j));
  }
  return 0;
}

int cmd_export(Context& ctx, std::ostream& out) {
  const std::string& dest = need(ctx.opts().out, "--out", ctx.cmd());
  const auto cfg = ctx.eval_config();
  const auto train_set = ctx.mentions(Split::kTrain);
  const auto labeled =
      label_training_split(train_set.mentions, ctx.ontology(), ctx.embedder(), ctx.index(), cfg.n_options, cfg.display);
  const Datastore* ds = cfg.effective_k() > 0 ? ctx.datastore(true) : nullptr;
  const auto prompts = export_training_prompts(labeled, ctx.embedder(), ds, cfg);
  auto f = open_out(dest);
  write_prompts_jsonl(f, prompts);
  out << "wrote " << prompts.size() << " prompts to " << dest << '\n';
  return 0;
}

std::shared_ptr<spdlog::logger> make_logger(std::ostream& err, const std::string& level) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err, true);
  auto log = std::make_shared<spdlog::logger>("mcel", std::move(sink));
  log->set_pattern("[%Y-%m-%d %H:%M:%S] [%l] %v");
  log->set_level(spdlog::level::from_str(level));
  return log;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Entity linking with retrieval and multiple-choice prompts", "mcel"};
  app.set_version_flag("--version", std::string("mcel ") + kVersion);
  app.set_config("--config", "", "Flat key=value file using flag names; flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();
  add_options(app, o);

  using Handler = int (*)(Context&, std::ostream&);
  const std::pair<const char*, std::pair<const char*, Handler>> verbs[] = {
      {"ingest", {"Validate an ontology and mention files (--ontology, --train/--dev/--test, optional --out dir)",
                  cmd_ingest}},
      {"synth", {"Write the seeded synthetic benchmark as TSV files (--out dir, --synth-seed)", cmd_synth}},
      {"train-retriever", {"Train the n-gram retriever (--ontology --train --out, optional --dev, --lr-search)",
                           cmd_train}},
      {"index", {"Embed every ontology name (--ontology --checkpoint|--embed-url --out)", cmd_index}},
      {"build-datastore", {"Label the training split and store it (--ontology --train --index --out)",
                           cmd_datastore}},
      {"link", {"Link one mention and print candidates, neighbors, prompt and scores (--mention)", cmd_link}},
      {"evaluate", {"Score a split (--split, --report, --table)", cmd_evaluate}},
      {"ablate", {"Run the full, no-aug, no-knn, random-neighbors and generate-names rows", cmd_ablate}},
      {"sweep", {"Accuracy over --values of --param N or K (--csv)", cmd_sweep}},
      {"export-prompts", {"Write generator training prompts as JSONL (--ontology --train --index --out)",
                          cmd_export}},
  };
  for (const auto& [name, spec] : verbs) app.add_subcommand(name, spec.first);

  // Every flag lives on the root app, so help always shows the root page.
  auto usage = [&app] { return app.get_formatter()->make_help(&app, "mcel", CLI::AppFormatMode::Normal); };
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << usage();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << usage();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << app.version() << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << usage();
    return 2;
  }

  const CLI::App* sub = app.get_subcommands().front();
  const std::string cmd = sub->get_name();
  auto log = make_logger(err, o.log_level);
  log->info("mcel {} ({}), CLI11 {}, spdlog {}.{}.{}", kVersion, cmd, CLI11_VERSION, SPDLOG_VER_MAJOR,
            SPDLOG_VER_MINOR, SPDLOG_VER_PATCH);
  log->info("effective config:\n{}", app.config_to_str(true, false));

  Handler handler = nullptr;
  for (const auto& [name, spec] : verbs) {
    if (cmd == name) handler = spec.second;
  }
  try {
    Context ctx(o, cmd, log);
    return handler(ctx, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << usage();
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace mcel::cli
