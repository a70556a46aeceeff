/*
 * Copyright 2026 The msense authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// msense: train and evaluate multi-sense skip-gram word embeddings.
//
// Subcommands: train, eval, nn, analogy, stats, export. Machine-readable
// output (TSV) goes to stdout; progress and diagnostics go to stderr.
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "msense/corpus.hpp"
#include "msense/eval.hpp"
#include "msense/io.hpp"
#include "msense/model.hpp"
#include "msense/trainer.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

uint32_t default_workers() {
  if (const char* env = std::getenv("MSENSE_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return uint32_t(v);
  }
  return 1;
}

msense::LoadedModel load_or_usage(const std::string& path) {
  std::ifstream probe(path);
  if (!probe) throw UsageError("model file not readable: " + path);
  probe.close();
  return msense::load_model(path);
}

// --- train -----------------------------------------------------------------

struct TrainArgs {
  std::vector<std::string> corpus;
  std::string out;
  std::string mode = "mssg";
  msense::HyperParams hp;
  uint32_t workers = default_workers();
  uint64_t seed = 1;
  bool no_lowercase = false;
  bool text_format = false;
  bool with_optimizer = false;
  bool quiet = false;
  std::string resume, save_vocab, stats_out;
};

int run_train(const TrainArgs& args) {
  msense::TokenizerOptions tok{!args.no_lowercase};
  msense::HyperParams hp = args.hp;
  hp.mode = msense::mode_from_name(args.mode);

  // Corpus text; "-" reads stdin into memory (two passes are needed).
  std::string stdin_buffer;
  std::vector<std::string> paths;
  for (const auto& p : args.corpus) {
    if (p == "-") {
      std::ostringstream ss;
      ss << std::cin.rdbuf();
      stdin_buffer = ss.str();
    } else {
      std::ifstream probe(p);
      if (!probe) throw UsageError("corpus file not readable: " + p);
      paths.push_back(p);
    }
  }

  uint32_t start_epoch = 0;
  std::optional<msense::LoadedModel> resumed;
  if (!args.resume.empty()) {
    resumed = load_or_usage(args.resume);
    if (!resumed->has_optimizer)
      throw UsageError(
          "resume requires a checkpoint saved with --with-optimizer");
    hp = resumed->hp;
    if (args.hp.epochs > hp.epochs) hp.epochs = args.hp.epochs;
    start_epoch = resumed->meta.epochs_completed;
    if (start_epoch >= hp.epochs)
      throw UsageError("checkpoint already has " +
                       std::to_string(start_epoch) +
                       " epochs; raise --epochs to continue");
    tok.lowercase = resumed->meta.lowercase;
  }
  hp.validate();

  msense::Vocabulary vocab;
  if (resumed) {
    vocab = std::move(resumed->vocab);
  } else {
    msense::VocabBuilder builder;
    std::vector<std::string> sentence;
    for (const auto& p : paths) {
      std::ifstream in(p);
      msense::SentenceReader reader(in, tok);
      while (reader.next(sentence))
        for (const auto& t : sentence) builder.add(t);
    }
    if (!stdin_buffer.empty()) {
      std::istringstream in(stdin_buffer);
      msense::SentenceReader reader(in, tok);
      while (reader.next(sentence))
        for (const auto& t : sentence) builder.add(t);
    }
    vocab = builder.finish(hp.min_count);
  }
  std::cerr << "vocabulary: " << vocab.size() << " words, "
            << vocab.total_tokens << " retained tokens\n";

  msense::EncodedCorpus corpus;
  {
    // Re-read for encoding; both passes must see the same token stream.
    std::vector<std::string> sentence;
    const msense::Vocabulary& v = vocab;
    msense::EncodedCorpus enc;
    enc.sentence_offsets.push_back(0);
    auto feed = [&](std::istream& in) {
      msense::SentenceReader reader(in, tok);
      while (reader.next(sentence)) {
        const size_t before = enc.tokens.size();
        for (const auto& t : sentence)
          if (auto id = v.lookup(t)) enc.tokens.push_back(*id);
        if (enc.tokens.size() > before)
          enc.sentence_offsets.push_back(enc.tokens.size());
      }
    };
    for (const auto& p : paths) {
      std::ifstream in(p);
      feed(in);
    }
    if (!stdin_buffer.empty()) {
      std::istringstream in(stdin_buffer);
      feed(in);
    }
    corpus = std::move(enc);
  }
  if (corpus.size() == 0) {
    std::cerr << "warning: encoded corpus is empty\n";
    throw UsageError("no in-vocabulary tokens in corpus");
  }

  const auto table = msense::build_noise_table(vocab);
  msense::Rng init_rng(args.seed);
  msense::ModelParams params =
      resumed ? std::move(resumed->params)
              : msense::ModelParams::init(vocab.size(), hp, init_rng);
  if (resumed) params.set_epochs(hp.epochs);

  msense::TrainOptions opts;
  opts.workers = args.workers;
  opts.seed = resumed ? resumed->meta.seed : args.seed;
  opts.start_epoch = start_epoch;
  opts.quiet = args.quiet;
  const auto stats = msense::train(params, corpus, table, opts);

  msense::SaveMeta meta{stats.epochs_completed, opts.seed, tok.lowercase};
  msense::save_model(params, vocab, args.out,
                     args.text_format ? msense::ModelFormat::text
                                      : msense::ModelFormat::binary,
                     args.with_optimizer, meta);
  if (!args.save_vocab.empty()) msense::save_vocab_tsv(vocab, args.save_vocab);
  if (!args.stats_out.empty()) {
    json j{{"tokens_processed", stats.tokens_processed},
           {"tokens_skipped", stats.tokens_skipped},
           {"pairs", stats.pairs},
           {"senses_created", stats.senses_created},
           {"senses_total", params.total_senses()},
           {"loss", stats.loss},
           {"tokens_per_sec", stats.tokens_per_sec},
           {"wall_seconds", stats.wall_seconds},
           {"epochs_completed", stats.epochs_completed},
           {"workers", args.workers},
           {"mode", msense::mode_name(hp.mode)},
           {"dim", hp.dim},
           {"vocab_size", vocab.size()}};
    if (hp.mode == msense::Mode::npmssg) {
      json hist = json::object();
      for (const auto& [k, n] : params.sense_count_histogram())
        hist[std::to_string(k)] = n;
      j["sense_histogram"] = hist;
    }
    std::ofstream out(args.stats_out);
    if (!out)
      throw std::runtime_error(args.stats_out + ": cannot open for writing");
    out << j.dump(2) << '\n';
  }
  std::cerr << "model written to " << args.out << '\n';
  return kExitOk;
}

// --- eval ------------------------------------------------------------------

int run_eval(const std::string& model_path, const std::string& dataset,
             const std::string& format, std::vector<std::string> metrics) {
  auto model = load_or_usage(model_path);
  msense::TokenizerOptions tok{model.meta.lowercase};

  std::ifstream probe(dataset);
  if (!probe) throw UsageError("dataset file not readable: " + dataset);
  probe.close();

  std::vector<msense::JudgmentRecord> records;
  bool contextual = false;
  if (format == "scws") {
    records = msense::load_scws_tsv(dataset, tok);
    contextual = true;
  } else if (format == "wordsim") {
    records = msense::load_wordsim_csv(dataset, tok);
  } else {
    throw UsageError("unknown dataset format: " + format);
  }

  if (metrics.empty()) {
    metrics = contextual
                  ? std::vector<std::string>{"globalSim", "avgSim", "avgSimC",
                                             "localSim"}
                  : std::vector<std::string>{"globalSim", "avgSim"};
  }
  for (const auto& name : metrics) {
    const auto metric = msense::metric_from_name(name);
    if (msense::metric_needs_context(metric) && !contextual)
      throw UsageError(name + " requires a contextual (scws) dataset");
    const auto res =
        msense::evaluate_similarity(records, metric, model.params, model.vocab);
    std::printf("%s\t%.2f\t%zu\t%zu\n", name.c_str(), res.rho_x100,
                res.pairs_used, res.pairs_skipped);
  }
  return kExitOk;
}

// --- nn --------------------------------------------------------------------

int run_nn(const std::string& model_path, const std::string& word,
           size_t top_n, int sense_flag, bool global_only) {
  auto model = load_or_usage(model_path);
  std::string query = word;
  if (model.meta.lowercase)
    for (char& c : query)
      if (c >= 'A' && c <= 'Z') c = char(c - 'A' + 'a');

  const auto id = model.vocab.lookup(query);
  if (!id) {
    std::cerr << "word not in vocabulary: " << query << "\nclosest matches:";
    for (const auto& s : msense::nearest_spellings(model.vocab, query, 5))
      std::cerr << ' ' << s;
    std::cerr << '\n';
    return kExitRuntime;
  }

  auto print_block = [&](const char* label, int sense) {
    const auto neighbors =
        msense::nearest_neighbors(model.params, *id, sense, top_n);
    for (const auto& nb : neighbors)
      std::printf("%s\t%s\t%.6f\n", label, model.vocab.words[nb.id].c_str(),
                  nb.similarity);
  };

  if (global_only) {
    print_block("global", msense::kGlobalSense);
    return kExitOk;
  }
  const uint32_t k = model.params.num_senses(*id);
  if (k == 0) {
    std::cerr << "word has no senses (untrained npmssg entry)\n";
    return kExitRuntime;
  }
  if (sense_flag > 0) {
    if (uint32_t(sense_flag) > k)
      throw UsageError("sense out of range: word has " + std::to_string(k) +
                       " senses");
    print_block(std::to_string(sense_flag).c_str(), sense_flag - 1);
    return kExitOk;
  }
  for (uint32_t s = 0; s < k; ++s) {
    const std::string label = std::to_string(s + 1);
    print_block(label.c_str(), int(s));
  }
  return kExitOk;
}

// --- analogy / stats / export -------------------------------------------------

int run_analogy(const std::string& model_path, const std::string& questions) {
  auto model = load_or_usage(model_path);
  std::ifstream probe(questions);
  if (!probe) throw UsageError("questions file not readable: " + questions);
  probe.close();
  const auto qs =
      msense::load_analogy(questions, {model.meta.lowercase});
  const auto res = msense::analogy_accuracy(qs, model.params, model.vocab);
  std::printf("%.4f\t%zu\t%zu\n", res.accuracy, res.used, res.skipped);
  return kExitOk;
}

int run_stats(const std::string& model_path) {
  auto model = load_or_usage(model_path);
  for (const auto& [k, n] : model.params.sense_count_histogram())
    std::printf("%u\t%llu\n", k, (unsigned long long)n);
  return kExitOk;
}

int run_export(const std::string& model_path, const std::string& what,
               const std::string& out) {
  auto model = load_or_usage(model_path);
  if (what == "global")
    msense::export_word2vec_text(model.params, model.vocab,
                                 msense::ExportKind::global, out);
  else if (what == "senses")
    msense::export_word2vec_text(model.params, model.vocab,
                                 msense::ExportKind::senses, out);
  else if (what == "vocab")
    msense::save_vocab_tsv(model.vocab, out);
  else
    throw UsageError("unknown export kind: " + what);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "msense: multi-sense skip-gram word embeddings "
      "(fixed-K and non-parametric sense discovery)"};
  app.require_subcommand(1);

  // train
  TrainArgs targs;
  auto* train = app.add_subcommand("train", "Train a model from a text corpus");
  train->add_option("--corpus", targs.corpus,
                    "Corpus file(s); '-' reads standard input")
      ->required();
  train->add_option("--out", targs.out, "Output model path")->required();
  train->add_option("--mode", targs.mode, "skipgram | mssg | npmssg")
      ->check(CLI::IsMember({"skipgram", "mssg", "npmssg"}));
  train->add_option("--dim,-d", targs.hp.dim,
                    "Embedding dimensionality d (50 and 300 are the "
                    "documented presets)");
  train->add_option("--senses,-K", targs.hp.senses,
                    "Senses per word K (mssg mode)");
  train->add_option("--lambda", targs.hp.lambda,
                    "Sense-creation similarity threshold (lambda, npmssg "
                    "mode): a new sense spawns when max cosine < lambda");
  train->add_option("--max-senses", targs.hp.max_senses,
                    "Cap on senses per word in npmssg mode (0 = unbounded)");
  train->add_option("--window,-N", targs.hp.window, "Max context window N");
  train->add_option("--negatives,-S", targs.hp.negatives,
                    "Noise samples S per context word");
  train->add_option("--lr", targs.hp.lr0, "AdaGrad initial learning rate");
  train->add_option("--epochs", targs.hp.epochs, "Training passes");
  train->add_option("--min-count", targs.hp.min_count,
                    "Discard words with fewer occurrences");
  train->add_option("--multi-sense-top-m", targs.hp.multi_sense_top_m,
                    "Learn multiple senses only for the top-m frequent words "
                    "(0 = all words)");
  train->add_option("--subsample", targs.hp.subsample,
                    "Frequent-word subsampling threshold t (0 = off)");
  train->add_option("--workers", targs.workers,
                    "Concurrent training threads (MSENSE_THREADS fallback)");
  train->add_option("--seed", targs.seed, "Seed for all randomness");
  train->add_flag("--no-lowercase", targs.no_lowercase,
                  "Keep the corpus case-sensitive");
  train->add_flag("--text", targs.text_format,
                  "Write the text model format instead of binary");
  train->add_flag("--with-optimizer", targs.with_optimizer,
                  "Store AdaGrad state (required for --resume)");
  train->add_flag("--quiet", targs.quiet, "Suppress progress lines");
  train->add_option("--resume", targs.resume,
                    "Continue training from a checkpoint");
  train->add_option("--save-vocab", targs.save_vocab,
                    "Also write the vocabulary as TSV");
  train->add_option("--stats-out", targs.stats_out,
                    "Write final training stats as JSON");

  // eval
  std::string e_model, e_dataset, e_format = "wordsim";
  std::vector<std::string> e_metrics;
  auto* eval = app.add_subcommand(
      "eval", "Word-similarity evaluation (Spearman rho x100 as TSV)");
  eval->add_option("--model", e_model)->required();
  eval->add_option("--dataset", e_dataset)->required();
  eval->add_option("--format", e_format, "wordsim | scws")
      ->check(CLI::IsMember({"wordsim", "scws"}));
  eval->add_option("--metric", e_metrics,
                   "globalSim avgSim avgSimC localSim (default: all "
                   "applicable)");

  // nn
  std::string n_model, n_word;
  size_t n_top = 10;
  int n_sense = 0;
  bool n_global = false;
  auto* nn = app.add_subcommand("nn", "Nearest neighbors per sense");
  nn->add_option("--model", n_model)->required();
  nn->add_option("--word", n_word)->required();
  nn->add_option("--top", n_top, "Neighbors per block");
  nn->add_option("--sense", n_sense, "Only this sense (1-based)");
  nn->add_flag("--global", n_global, "Use the global vector instead");

  // analogy
  std::string a_model, a_questions;
  auto* analogy = app.add_subcommand(
      "analogy", "Analogy accuracy on Google-format questions");
  analogy->add_option("--model", a_model)->required();
  analogy->add_option("--questions", a_questions)->required();

  // stats
  std::string s_model;
  auto* stats =
      app.add_subcommand("stats", "Sense-count histogram (k TAB word types)");
  stats->add_option("--model", s_model)->required();

  // export
  std::string x_model, x_what = "global", x_out;
  auto* exp = app.add_subcommand("export", "word2vec-format vector export");
  exp->add_option("--model", x_model)->required();
  exp->add_option("--what", x_what, "global | senses | vocab")
      ->check(CLI::IsMember({"global", "senses", "vocab"}));
  exp->add_option("--out", x_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train) return run_train(targs);
    if (*eval) return run_eval(e_model, e_dataset, e_format, e_metrics);
    if (*nn) return run_nn(n_model, n_word, n_top, n_sense, n_global);
    if (*analogy) return run_analogy(a_model, a_questions);
    if (*stats) return run_stats(s_model);
    if (*exp) return run_export(x_model, x_what, x_out);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
