// tse: topic-sensitive embedding pipeline.
//
// Exit codes: 0 success, 1 data or runtime error, 2 usage error.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "run_manifest.hpp"
#include "tse/error.hpp"

namespace fs = std::filesystem;
using namespace tse::cli;

namespace {

constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

// Resolved value of every long option of a subcommand, defaults included.
Json resolved_flags(const CLI::App& sub) {
  Json flags = Json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || opt->get_lnames().empty()) continue;
    if (opt->get_expected_max() == 0) {
      flags[name] = opt->count() > 0;
    } else if (opt->count() > 0) {
      const auto& res = opt->results();
      if (opt->get_items_expected_max() > 1) {
        flags[name] = res;
      } else {
        flags[name] = res.back();
      }
    } else if (!opt->get_default_str().empty()) {
      flags[name] = opt->get_default_str();
    } else {
      flags[name] = nullptr;
    }
  }
  return flags;
}

int dispatch(std::vector<std::string> args, bool allow_replay);

int replay(const std::string& manifest_path, bool check) {
  const Json j = read_manifest(manifest_path);
  if (!j.contains("argv") || !j["argv"].is_array()) throw tse::FormatError(manifest_path + ": no argv");
  std::vector<std::string> argv = j["argv"].get<std::vector<std::string>>();
  if (j.value("version", "") != TSE_VERSION) {
    std::cerr << "warning: manifest written by tse " << j.value("version", "?") << ", this is " << TSE_VERSION << '\n';
  }
  const int rc = dispatch(argv, false);
  if (rc != 0 || !check) return rc;
  int mismatches = 0;
  for (const auto& f : j["outputs"]) {
    const std::string path = f["path"].get<std::string>();
    const std::string now = fs::exists(path) ? sha256_file(path) : "missing";
    if (now != f["sha256"].get<std::string>()) {
      std::cerr << "digest mismatch: " << path << '\n';
      ++mismatches;
    }
  }
  std::cerr << (mismatches ? "replay differs" : "replay reproduced all outputs") << '\n';
  return mismatches ? kExitData : 0;
}

int dispatch(std::vector<std::string> args, bool allow_replay) {
  CLI::App app{"Topic-sensitive word embeddings: HDP topics, embedding training and evaluation", "tse"};
  app.set_version_flag("--version", TSE_VERSION);
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  std::string manifest_flag;
  const auto add_manifest = [&](CLI::App* sub) {
    sub->add_option("--manifest", manifest_flag, "Where to write the run manifest (default: <out>.manifest.json)");
  };

  BuildVocabOptions bv;
  auto* s_bv = app.add_subcommand("build-vocab", "Count tokens and write a vocabulary");
  s_bv->add_option("--corpus", bv.corpus, "One document per line")->required()->check(CLI::ExistingFile);
  s_bv->add_option("--out", bv.out, "Vocabulary TSV")->required();
  s_bv->add_option("--min-count", bv.min_count, "Drop rarer tokens");
  add_manifest(s_bv);

  TrainHdpOptions th;
  auto* s_th = app.add_subcommand("train-hdp", "Train an HDP topic model");
  s_th->add_option("--corpus", th.corpus, "One document per line")->required()->check(CLI::ExistingFile);
  s_th->add_option("--vocab", th.vocab, "Vocabulary TSV (built from the corpus if omitted)")->check(CLI::ExistingFile);
  s_th->add_option("--min-count", th.min_count, "Minimum count when building the vocabulary");
  s_th->add_option("--vocab-out", th.vocab_out, "Where to write a built vocabulary (default: <out>.vocab)");
  s_th->add_option("--out", th.out, "HDP1 model file")->required();
  s_th->add_option("--iters", th.iterations, "Gibbs sweeps");
  s_th->add_option("--gamma", th.gamma, "Top-level concentration");
  s_th->add_option("--alpha0", th.alpha0, "Document-level concentration");
  s_th->add_option("--eta", th.eta, "Topic-word Dirichlet prior");
  s_th->add_option("--max-topics", th.max_topics, "Upper bound on live topics");
  s_th->add_option("--prune", th.prune, "Drop topics holding less than this share of tokens");
  s_th->add_flag("--resample-hyper", th.resample_hyper, "Resample gamma and alpha0 each sweep");
  s_th->add_option("--hyper-shape", th.hyper_shape, "Gamma prior shape for resampled concentrations");
  s_th->add_option("--hyper-rate", th.hyper_rate, "Gamma prior rate for resampled concentrations");
  s_th->add_option("--seed", th.seed, "Random seed");
  s_th->add_option("--labels-out", th.labels_out, "Also write the final training assignments");
  s_th->add_option("--trace-out", th.trace_out, "Per-sweep log-likelihood");
  add_manifest(s_th);

  LabelOptions lb;
  auto* s_lb = app.add_subcommand("label", "Label corpus tokens and documents with a trained topic model");
  s_lb->add_option("--model", lb.model, "HDP1 model")->required()->check(CLI::ExistingFile);
  s_lb->add_option("--corpus", lb.corpus, "One document per line")->required()->check(CLI::ExistingFile);
  s_lb->add_option("--vocab", lb.vocab, "Vocabulary TSV (default: <model>.vocab)")->check(CLI::ExistingFile);
  s_lb->add_option("--labels-out", lb.labels_out, "word|topic labeling")->required();
  s_lb->add_option("--doc-topics-out", lb.doc_topics_out, "Per-document topic distributions")->required();
  s_lb->add_option("--sweeps", lb.sweeps, "Fold-in sweeps");
  s_lb->add_option("--burn-in", lb.burn_in, "Fold-in sweeps discarded before averaging");
  s_lb->add_option("--seed", lb.seed, "Random seed");
  add_manifest(s_lb);

  TrainEmbOptions te;
  auto* s_te = app.add_subcommand("train-emb", "Train skip-gram or topic-sensitive embeddings");
  s_te->add_option("--corpus", te.corpus, "One document per line")->required()->check(CLI::ExistingFile);
  s_te->add_option("--vocab", te.vocab, "Vocabulary TSV (built from the corpus if omitted)")->check(CLI::ExistingFile);
  s_te->add_option("--min-count", te.min_count, "Minimum count when building the vocabulary");
  s_te->add_option("--variant", te.variant, "sge, htle, htleadd or stle");
  s_te->add_option("--labeling", te.labeling, "word|topic labeling (htle, htleadd)")->check(CLI::ExistingFile);
  s_te->add_option("--doc-topics", te.doc_topics, "Document topic distributions (stle)")->check(CLI::ExistingFile);
  s_te->add_option("--hdp-model", te.hdp_model, "Topic model fixing the topic count")->check(CLI::ExistingFile);
  s_te->add_option("--out", te.out, "TSE1 model file")->required();
  s_te->add_option("--export-text", te.export_text, "Also write vectors as text");
  s_te->add_option("--dim", te.dim, "Embedding size");
  s_te->add_option("--window", te.window, "Maximum context window");
  s_te->add_option("--negatives", te.negatives, "Negative samples per context word");
  s_te->add_option("--epochs", te.epochs, "Passes over the corpus");
  s_te->add_option("--lr", te.lr, "Initial learning rate");
  s_te->add_option("--subsample", te.subsample, "Frequent-word subsampling threshold (0 disables)");
  s_te->add_option("--neg-power", te.neg_power, "Exponent of the negative-sampling distribution");
  s_te->add_option("--stle-top-m", te.stle_top_m, "Topics per token for stle (0 = all)");
  s_te->add_option("--seed", te.seed, "Random seed");
  s_te->add_option("--threads", te.threads, "Lock-free worker threads (1 = deterministic)");
  add_manifest(s_te);

  NnOptions nn;
  auto* s_nn = app.add_subcommand("nn", "Nearest neighbors of a word or word#topic");
  s_nn->add_option("--model", nn.model, "TSE1 model")->required()->check(CLI::ExistingFile);
  s_nn->add_option("--word", nn.word, "Query word")->required();
  s_nn->add_option("--topic", nn.topic, "Query topic (default: every topic of the word)");
  s_nn->add_option("--k", nn.k, "Neighbors to list");
  s_nn->add_option("--out", nn.out, "Write here instead of stdout");
  add_manifest(s_nn);

  EvalScwsOptions es;
  auto* s_es = app.add_subcommand("eval-scws", "Spearman correlation on contextual word similarity");
  s_es->add_option("--model", es.model, "TSE1 model")->required()->check(CLI::ExistingFile);
  s_es->add_option("--data", es.data, "SCWS ratings file")->required()->check(CLI::ExistingFile);
  s_es->add_option("--hdp-model", es.hdp_model, "Topic model (topic variants)")->check(CLI::ExistingFile);
  s_es->add_option("--out", es.out, "Output prefix for .txt and .jsonl")->required();
  s_es->add_option("--window,--eval-window", es.window, "Context window for scoring");
  s_es->add_option("--sweeps", es.sweeps, "Fold-in sweeps");
  s_es->add_option("--burn-in", es.burn_in, "Fold-in burn-in");
  s_es->add_option("--seed", es.seed, "Random seed");
  add_manifest(s_es);

  EvalLexsubOptions el;
  auto* s_el = app.add_subcommand("eval-lexsub", "GAP on lexical substitution candidate ranking");
  s_el->add_option("--run", el.runs, "NAME=MODEL[:smp|exp|sge+c]; the first run is the significance baseline")
      ->required();
  s_el->add_option("--data", el.data, "Lexsub TSV")->check(CLI::ExistingFile);
  s_el->add_option("--xml", el.xml, "SemEval-style XML (with --gold)")->check(CLI::ExistingFile);
  s_el->add_option("--gold", el.gold, "SemEval-style gold file")->check(CLI::ExistingFile);
  s_el->add_option("--hdp-model", el.hdp_model, "Topic model (topic variants)")->check(CLI::ExistingFile);
  s_el->add_option("--out", el.out, "Output prefix for .txt and .jsonl")->required();
  s_el->add_option("--window,--eval-window", el.window, "Context window for scoring");
  s_el->add_option("--sweeps", el.sweeps, "Fold-in sweeps");
  s_el->add_option("--burn-in", el.burn_in, "Fold-in burn-in");
  s_el->add_flag("--reuse-target-topic", el.reuse_target_topic,
                 "Sampled scorer: give the substitute the target's topic instead of sampling it");
  s_el->add_option("--seed", el.seed, "Random seed");
  add_manifest(s_el);

  MakeSyntheticOptions ms;
  auto* s_ms = app.add_subcommand("make-synthetic", "Generate a synthetic corpus with known structure");
  s_ms->add_option("--kind", ms.kind, "lda or pseudo");
  s_ms->add_option("--out-dir", ms.out_dir, "Output directory")->required();
  s_ms->add_option("--seed", ms.seed, "Random seed");
  s_ms->add_option("--topics", ms.topics, "lda: topics");
  s_ms->add_option("--words-per-topic", ms.words_per_topic, "lda: words per topic");
  s_ms->add_option("--documents", ms.documents, "lda: documents");
  s_ms->add_option("--tokens-per-doc", ms.tokens_per_doc, "Tokens per document");
  s_ms->add_option("--doc-alpha", ms.doc_alpha, "lda: document Dirichlet concentration");
  s_ms->add_option("--docs-per-domain", ms.docs_per_domain, "pseudo: documents per domain");
  s_ms->add_option("--concepts", ms.concepts, "pseudo: concepts per domain");
  s_ms->add_option("--synonyms", ms.synonyms, "pseudo: surface forms per concept");
  s_ms->add_option("--shared-words", ms.shared_words, "pseudo: domain-neutral words");
  s_ms->add_option("--shared-rate", ms.shared_rate, "pseudo: share of domain-neutral tokens");
  s_ms->add_option("--walk-step", ms.walk_step, "pseudo: maximum concept step between tokens");
  s_ms->add_option("--pseudowords", ms.pseudowords, "pseudo: fused word pairs");
  s_ms->add_option("--lexsub-per-sense", ms.lexsub_per_sense, "pseudo: lexsub instances per pseudoword sense");
  s_ms->add_option("--scws-pairs", ms.scws_pairs, "pseudo: similarity pairs");
  add_manifest(s_ms);

  ConvertLexsubOptions cl;
  auto* s_cl = app.add_subcommand("convert-lexsub", "Convert SemEval-style XML and gold files to lexsub TSV");
  s_cl->add_option("--xml", cl.xml, "Instances XML")->required()->check(CLI::ExistingFile);
  s_cl->add_option("--gold", cl.gold, "Gold substitutes")->required()->check(CLI::ExistingFile);
  s_cl->add_option("--out", cl.out, "Lexsub TSV")->required();
  add_manifest(s_cl);

  std::string replay_path;
  bool replay_check = false;
  auto* s_rp = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  s_rp->add_option("manifest", replay_path, "Manifest JSON")->required()->check(CLI::ExistingFile);
  s_rp->add_flag("--check", replay_check, "Compare output digests with the recorded ones");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  if (command == "replay") {
    if (!allow_replay) throw UsageError("a manifest cannot replay another replay");
    return replay(replay_path, replay_check);
  }

  RunManifest manifest(command, args);
  manifest.set_flags(resolved_flags(*sub));

  std::string out_hint;
  if (command == "build-vocab") {
    run_build_vocab(bv, manifest);
    out_hint = bv.out;
  } else if (command == "train-hdp") {
    run_train_hdp(th, manifest);
    out_hint = th.out;
  } else if (command == "label") {
    run_label(lb, manifest);
    out_hint = lb.labels_out;
  } else if (command == "train-emb") {
    run_train_emb(te, manifest);
    out_hint = te.out;
  } else if (command == "nn") {
    run_nn(nn, manifest);
    out_hint = nn.out.empty() ? "tse-nn" : nn.out;
  } else if (command == "eval-scws") {
    run_eval_scws(es, manifest);
    out_hint = es.out;
  } else if (command == "eval-lexsub") {
    run_eval_lexsub(el, manifest);
    out_hint = el.out;
  } else if (command == "make-synthetic") {
    run_make_synthetic(ms, manifest);
    out_hint = (fs::path(ms.out_dir) / "make-synthetic").string();
  } else if (command == "convert-lexsub") {
    run_convert_lexsub(cl, manifest);
    out_hint = cl.out;
  }
  manifest.write(manifest_flag.empty() ? out_hint + ".manifest.json" : manifest_flag);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return dispatch(std::move(args), true);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
}
