#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "run_manifest.hpp"

namespace tse::cli {

/// Bad or inconsistent flags; exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BuildVocabOptions {
  std::string corpus, out;
  std::size_t min_count = 5;
};

struct TrainHdpOptions {
  std::string corpus, vocab, vocab_out, out, labels_out, trace_out;
  std::size_t min_count = 5;
  std::size_t iterations = 1000;
  double gamma = 1.0, alpha0 = 1.0, eta = 0.01;
  std::size_t max_topics = 500;
  double prune = 1e-4;
  bool resample_hyper = false;
  double hyper_shape = 1.0, hyper_rate = 1.0;
  std::uint64_t seed = 1;
};

struct LabelOptions {
  std::string model, corpus, vocab, labels_out, doc_topics_out;
  std::size_t sweeps = 20, burn_in = 5;
  std::uint64_t seed = 1;
};

struct TrainEmbOptions {
  std::string corpus, vocab, labeling, doc_topics, hdp_model, out, export_text;
  std::string variant = "sge";
  std::size_t min_count = 5;
  std::size_t dim = 100, window = 10, negatives = 5, epochs = 5, stle_top_m = 10, threads = 1;
  double lr = 0.025, subsample = 1e-4, neg_power = 0.75;
  std::uint64_t seed = 1;
};

struct NnOptions {
  std::string model, word, out;
  std::optional<int> topic;
  std::size_t k = 10;
};

struct EvalScwsOptions {
  std::string model, data, hdp_model, out;
  std::size_t window = 10, sweeps = 20, burn_in = 5;
  std::uint64_t seed = 1;
};

struct EvalLexsubOptions {
  std::vector<std::string> runs;  ///< NAME=MODEL:SCORER
  std::string data, xml, gold, hdp_model, out;
  std::size_t window = 10, sweeps = 20, burn_in = 5;
  bool reuse_target_topic = false;
  std::uint64_t seed = 1;
};

struct MakeSyntheticOptions {
  std::string kind = "pseudo";
  std::string out_dir;
  std::uint64_t seed = 7;
  // lda
  std::size_t topics = 3, words_per_topic = 10, documents = 200, tokens_per_doc = 100;
  double doc_alpha = 0.3;
  // pseudo
  std::size_t docs_per_domain = 2500, concepts = 60, synonyms = 3, shared_words = 40, walk_step = 2,
              pseudowords = 4, lexsub_per_sense = 50, scws_pairs = 200;
  double shared_rate = 0.25;
};

struct ConvertLexsubOptions {
  std::string xml, gold, out;
};

void run_build_vocab(const BuildVocabOptions& o, RunManifest& m);
void run_train_hdp(const TrainHdpOptions& o, RunManifest& m);
void run_label(const LabelOptions& o, RunManifest& m);
void run_train_emb(const TrainEmbOptions& o, RunManifest& m);
void run_nn(const NnOptions& o, RunManifest& m);
void run_eval_scws(const EvalScwsOptions& o, RunManifest& m);
void run_eval_lexsub(const EvalLexsubOptions& o, RunManifest& m);
void run_make_synthetic(const MakeSyntheticOptions& o, RunManifest& m);
void run_convert_lexsub(const ConvertLexsubOptions& o, RunManifest& m);

}  // namespace tse::cli
