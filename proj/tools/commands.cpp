#include "commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "tse/corpus.hpp"
#include "tse/datasets.hpp"
#include "tse/embeddings.hpp"
#include "tse/error.hpp"
#include "tse/eval.hpp"
#include "tse/hdp.hpp"
#include "tse/inference.hpp"
#include "tse/synthetic.hpp"

namespace fs = std::filesystem;

namespace tse::cli {
namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
  auto out = open_out(path);
  for (const auto& l : lines) out << l << '\n';
}

// ConfigError raised while interpreting flags is a usage problem.
template <typename F>
auto as_usage(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
}

Vocabulary vocab_for(const std::string& corpus, const std::string& vocab, std::size_t min_count, RunManifest& m) {
  if (!vocab.empty()) {
    m.add_input(vocab);
    return Vocabulary::load(fs::path(vocab));
  }
  return build_vocab(fs::path(corpus), min_count);
}

FoldInOptions fold_options(std::size_t sweeps, std::size_t burn_in) {
  FoldInOptions f{sweeps, burn_in};
  as_usage([&] { f.validate(); });
  return f;
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

}  // namespace

void run_build_vocab(const BuildVocabOptions& o, RunManifest& m) {
  m.add_input(o.corpus);
  const auto vocab = build_vocab(fs::path(o.corpus), o.min_count);
  vocab.save(fs::path(o.out));
  m.add_output(o.out);
  std::cerr << "vocabulary: " << vocab.size() << " types, " << vocab.total_tokens() << " tokens\n";
}

void run_train_hdp(const TrainHdpOptions& o, RunManifest& m) {
  HdpHyper hyper{o.gamma, o.alpha0, o.eta, o.max_topics};
  as_usage([&] { hyper.validate(); });
  if (o.iterations < 1) throw UsageError("--iters must be at least 1");
  if (o.prune < 0.0 || o.prune >= 1.0) throw UsageError("--prune must lie in [0, 1)");

  m.add_input(o.corpus);
  const auto vocab = vocab_for(o.corpus, o.vocab, o.min_count, m);
  if (o.vocab.empty()) {
    const std::string vocab_out = o.vocab_out.empty() ? o.out + ".vocab" : o.vocab_out;
    vocab.save(fs::path(vocab_out));
    m.add_output(vocab_out);
  }
  const auto corpus = load_corpus(fs::path(o.corpus), vocab);

  HdpTrainOptions opts;
  opts.iterations = o.iterations;
  opts.seed = o.seed;
  opts.prune_threshold = o.prune;
  opts.resample_hyper = o.resample_hyper;
  opts.hyper_prior_shape = o.hyper_shape;
  opts.hyper_prior_rate = o.hyper_rate;
  m.add_seed("hdp", o.seed);

  const auto result = train_hdp(corpus, hyper, opts, [&](std::size_t it, const HdpSampler& s) {
    if ((it + 1) % 50 == 0 || it + 1 == o.iterations) {
      std::cerr << "iter " << it + 1 << ": " << s.active_topics() << " topics, log-lik "
                << fmt("%.3f", s.log_likelihood()) << '\n';
    }
  });
  result.model.save(fs::path(o.out));
  m.add_output(o.out);
  if (!o.labels_out.empty()) {
    auto out = open_out(o.labels_out);
    write_labeling(out, corpus, result.training_labels);
    out.close();
    m.add_output(o.labels_out);
  }
  if (!o.trace_out.empty()) {
    auto out = open_out(o.trace_out);
    for (std::size_t i = 0; i < result.log_likelihood_trace.size(); ++i) {
      out << i + 1 << '\t' << fmt("%.17g", result.log_likelihood_trace[i]) << '\n';
    }
    out.close();
    m.add_output(o.trace_out);
  }
  std::cerr << "kept " << result.model.num_topics() << " topics\n";
}

void run_label(const LabelOptions& o, RunManifest& m) {
  const auto fold = fold_options(o.sweeps, o.burn_in);
  std::string vocab_path = o.vocab.empty() ? o.model + ".vocab" : o.vocab;
  if (!fs::exists(vocab_path)) throw UsageError("--vocab is required (no " + vocab_path + " next to the model)");
  m.add_input(o.model);
  m.add_input(o.corpus);
  m.add_input(vocab_path);
  m.add_seed("fold_in", o.seed);

  const auto model = TopicModel::load(fs::path(o.model));
  const auto vocab = Vocabulary::load(fs::path(vocab_path));
  const auto corpus = load_corpus(fs::path(o.corpus), vocab);

  const auto labels = label_corpus(model, corpus, o.seed, fold);
  {
    auto out = open_out(o.labels_out);
    write_labeling(out, corpus, labels);
  }
  m.add_output(o.labels_out);
  const auto topics = infer_corpus_topics(model, corpus, o.seed, fold);
  {
    auto out = open_out(o.doc_topics_out);
    write_doc_topics(out, topics);
  }
  m.add_output(o.doc_topics_out);
}

void run_train_emb(const TrainEmbOptions& o, RunManifest& m) {
  TrainConfig cfg;
  cfg.variant = as_usage([&] { return parse_variant(o.variant); });
  cfg.dim = o.dim;
  cfg.window = o.window;
  cfg.negatives = o.negatives;
  cfg.epochs = o.epochs;
  cfg.learning_rate = o.lr;
  cfg.subsample = o.subsample;
  cfg.negative_power = o.neg_power;
  cfg.seed = o.seed;
  cfg.stle_top_m = o.stle_top_m;
  cfg.threads = o.threads;
  as_usage([&] { cfg.validate(); });
  const bool hard = cfg.variant == Variant::kHtle || cfg.variant == Variant::kHtleAdd;
  if (hard && o.labeling.empty()) throw UsageError("--labeling is required for --variant " + o.variant);
  if (cfg.variant == Variant::kStle && o.doc_topics.empty()) {
    throw UsageError("--doc-topics is required for --variant stle");
  }
  m.add_seed("embeddings", o.seed);

  m.add_input(o.corpus);
  const auto vocab = vocab_for(o.corpus, o.vocab, o.min_count, m);
  const auto corpus = load_corpus(fs::path(o.corpus), vocab);

  std::size_t num_topics = 0;
  if (!o.hdp_model.empty()) {
    m.add_input(o.hdp_model);
    num_topics = TopicModel::load(fs::path(o.hdp_model)).num_topics();
  }
  std::optional<TopicLabeling> labeling;
  std::optional<DocTopics> doc_topics;
  if (hard) {
    m.add_input(o.labeling);
    auto in = open_in(o.labeling);
    labeling = read_labeling(in, corpus);
  }
  if (cfg.variant == Variant::kStle) {
    m.add_input(o.doc_topics);
    auto in = open_in(o.doc_topics);
    doc_topics = read_doc_topics(in, num_topics);
  }

  TrainStats stats;
  const auto model = train_embeddings(corpus, labeling ? &*labeling : nullptr, doc_topics ? &*doc_topics : nullptr,
                                      cfg, num_topics, &stats);
  for (std::size_t e = 0; e < stats.epoch_mean_loss.size(); ++e) {
    std::cerr << "epoch " << e + 1 << ": mean loss " << fmt("%.5f", stats.epoch_mean_loss[e]) << '\n';
  }
  model.save(fs::path(o.out));
  m.add_output(o.out);
  if (!o.export_text.empty()) {
    auto out = open_out(o.export_text);
    model.export_text(out);
    out.close();
    m.add_output(o.export_text);
  }
}

void run_nn(const NnOptions& o, RunManifest& m) {
  if (o.k < 1) throw UsageError("--k must be at least 1");
  m.add_input(o.model);
  const auto model = EmbeddingModel::load(fs::path(o.model));
  const WordId w = model.vocab().id_of(o.word);

  std::ostringstream text;
  const auto block = [&](const std::string& heading, const TopicInfo& info) {
    text << "# " << heading << '\n';
    const auto rows = nearest_neighbors(model, w, info, o.k);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      text << i + 1 << '\t' << rows[i].name << '\t' << fmt("%.6f", rows[i].cosine) << '\n';
    }
  };
  if (model.variant() == Variant::kSge) {
    if (o.topic) throw UsageError("--topic does not apply to an sge model");
    block(o.word, std::monostate{});
  } else if (o.topic) {
    if (*o.topic < 0 || static_cast<std::size_t>(*o.topic) >= model.num_topics()) {
      throw UsageError("--topic must lie in [0, " + std::to_string(model.num_topics()) + ")");
    }
    block(o.word + "#" + std::to_string(*o.topic), TopicId{*o.topic});
  } else {
    const auto entries = model.topic_entries_of(w);
    if (entries.empty()) throw Error("no topic-labeled entries for '" + o.word + "'");
    for (std::size_t e : entries) block(model.entry_name(e), model.topic_entry_key(e).second);
  }
  if (o.out.empty()) {
    std::cout << text.str();
  } else {
    auto out = open_out(o.out);
    out << text.str();
    out.close();
    m.add_output(o.out);
  }
}

namespace {

struct LoadedTopics {
  std::unique_ptr<TopicModel> model;
  std::unique_ptr<HdpTopicAssigner> assigner;
};

LoadedTopics topics_for(const EmbeddingModel& emb, const std::string& hdp_model, const FoldInOptions& fold) {
  LoadedTopics t;
  if (emb.variant() == Variant::kSge) return t;
  if (hdp_model.empty()) {
    throw UsageError("--hdp-model is required for " + std::string(variant_name(emb.variant())) + " models");
  }
  t.model = std::make_unique<TopicModel>(TopicModel::load(fs::path(hdp_model)));
  if (t.model->vocab_size() != emb.vocab_size()) {
    throw FormatError("topic model vocabulary (" + std::to_string(t.model->vocab_size()) +
                      ") does not match the embedding model (" + std::to_string(emb.vocab_size()) + ")");
  }
  if (t.model->num_topics() != emb.num_topics()) {
    throw FormatError("topic model has " + std::to_string(t.model->num_topics()) +
                      " topics but the embedding model was trained with " + std::to_string(emb.num_topics()));
  }
  t.assigner = std::make_unique<HdpTopicAssigner>(*t.model, fold);
  return t;
}

}  // namespace

void run_eval_scws(const EvalScwsOptions& o, RunManifest& m) {
  const auto fold = fold_options(o.sweeps, o.burn_in);
  m.add_input(o.model);
  m.add_input(o.data);
  if (!o.hdp_model.empty()) m.add_input(o.hdp_model);
  m.add_seed("scorer", o.seed);
  const auto model = EmbeddingModel::load(fs::path(o.model));
  const auto topics = topics_for(model, o.hdp_model, fold);
  const auto data = read_scws(fs::path(o.data));

  ScorerOptions opts;
  opts.window = o.window;
  opts.seed = o.seed;
  const auto report = eval_scws(model, topics.assigner.get(), data, opts);

  std::ostringstream text;
  text << "model\t" << variant_name(model.variant()) << '\n'
       << "pairs\t" << report.pairs << '\n'
       << "oov_pairs\t" << report.oov_pairs << '\n'
       << "rho\t" << fmt("%.4f", report.rho) << '\n';
  std::cout << text.str();
  const std::string txt = o.out + ".txt", jsonl = o.out + ".jsonl";
  {
    auto out = open_out(txt);
    out << text.str();
  }
  {
    auto out = open_out(jsonl);
    for (std::size_t i = 0; i < data.size(); ++i) {
      Json j{{"id", data[i].id}, {"word1", data[i].word1}, {"word2", data[i].word2},
             {"human", data[i].human_score}, {"score", report.scores[i]}};
      out << j.dump() << '\n';
    }
    out << Json{{"summary", true}, {"rho", report.rho}, {"pairs", report.pairs}, {"oov_pairs", report.oov_pairs}}.dump()
        << '\n';
  }
  m.add_output(txt);
  m.add_output(jsonl);
}

void run_eval_lexsub(const EvalLexsubOptions& o, RunManifest& m) {
  const auto fold = fold_options(o.sweeps, o.burn_in);
  if (o.data.empty() == (o.xml.empty() || o.gold.empty())) {
    throw UsageError("give either --data or both --xml and --gold");
  }
  std::vector<LexsubInstance> data;
  std::size_t dropped_multiword = 0, dropped_instances = 0;
  if (!o.data.empty()) {
    m.add_input(o.data);
    data = read_lexsub(fs::path(o.data));
  } else {
    m.add_input(o.xml);
    m.add_input(o.gold);
    auto xml = open_in(o.xml);
    auto gold = open_in(o.gold);
    auto conv = convert_semeval_lexsub(xml, gold);
    data = std::move(conv.instances);
    dropped_multiword = conv.dropped_multiword;
    dropped_instances = conv.dropped_instances;
  }
  if (!o.hdp_model.empty()) m.add_input(o.hdp_model);
  m.add_seed("scorer", o.seed);

  struct Run {
    std::string name, path;
    LexsubScorer scorer;
    bool explicit_scorer;
  };
  std::vector<Run> runs;
  for (const auto& spec : o.runs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--run expects NAME=MODEL[:SCORER], got '" + spec + "'");
    Run r{spec.substr(0, eq), spec.substr(eq + 1), LexsubScorer::kExpected, false};
    const auto colon = r.path.rfind(':');
    if (colon != std::string::npos) {
      const std::string tail = r.path.substr(colon + 1);
      if (tail == "smp" || tail == "exp" || tail == "sge+c") {
        r.scorer = parse_scorer(tail);
        r.explicit_scorer = true;
        r.path.resize(colon);
      }
    }
    runs.push_back(std::move(r));
  }

  ScorerOptions opts;
  opts.window = o.window;
  opts.seed = o.seed;
  opts.reuse_target_topic = o.reuse_target_topic;

  std::vector<std::pair<std::string, LexsubReport>> reports;
  for (auto& r : runs) {
    m.add_input(r.path);
    const auto model = EmbeddingModel::load(fs::path(r.path));
    if (!r.explicit_scorer && model.variant() == Variant::kSge) r.scorer = LexsubScorer::kSgeC;
    if ((r.scorer == LexsubScorer::kSgeC) != (model.variant() == Variant::kSge)) {
      throw UsageError("run '" + r.name + "': scorer " + std::string(scorer_name(r.scorer)) + " does not fit a " +
                       std::string(variant_name(model.variant())) + " model");
    }
    const auto topics = topics_for(model, o.hdp_model, fold);
    auto report = eval_lexsub(model, topics.assigner.get(), data, r.scorer, opts);
    report.dropped_multiword += dropped_multiword;
    report.dropped_instances += dropped_instances;
    reports.emplace_back(r.name, std::move(report));
  }

  std::ostringstream text;
  text << format_lexsub_table(reports) << '\n';
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& [name, r] = reports[i];
    text << name << ": scorer=" << scorer_name(runs[i].scorer) << " overall=" << fmt("%.10f", r.overall)
         << " instances=" << r.instances.size() << " fallback=" << r.fallback_instances
         << " dropped_instances=" << r.dropped_instances << " dropped_multiword=" << r.dropped_multiword << '\n';
  }
  for (std::size_t i = 1; i < reports.size(); ++i) {
    const auto a = reports[i].second.instance_gaps();
    const auto b = reports[0].second.instance_gaps();
    const auto mw = mann_whitney(a, b);
    text << "mann-whitney " << reports[i].first << " vs " << reports[0].first << ": U=" << fmt("%.1f", mw.u)
         << " p=" << fmt("%.4g", mw.p) << (mw.exact ? " (exact)" : " (normal)") << '\n';
  }
  std::cout << text.str();

  const std::string txt = o.out + ".txt", jsonl = o.out + ".jsonl";
  {
    auto out = open_out(txt);
    out << text.str();
  }
  {
    auto out = open_out(jsonl);
    for (const auto& [name, r] : reports) {
      for (const auto& inst : r.instances) {
        out << Json{{"run", name}, {"id", inst.id},       {"pos", inst.pos},
                    {"gap", inst.gap}, {"fallback", inst.fallback}, {"ranking", inst.ranking}}
                   .dump()
            << '\n';
      }
    }
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const auto& [name, r] = reports[i];
      Json by_pos = Json::object();
      for (const auto& [pos, v] : r.by_pos) by_pos[pos] = {{"gap", v.first}, {"instances", v.second}};
      out << Json{{"run", name},
                  {"summary", true},
                  {"scorer", scorer_name(runs[i].scorer)},
                  {"overall", r.overall},
                  {"instances", r.instances.size()},
                  {"by_pos", by_pos}}
                 .dump()
          << '\n';
    }
  }
  m.add_output(txt);
  m.add_output(jsonl);
}

void run_make_synthetic(const MakeSyntheticOptions& o, RunManifest& m) {
  fs::create_directories(o.out_dir);
  const fs::path dir(o.out_dir);
  m.add_seed("generator", o.seed);
  if (o.kind == "lda") {
    LdaCorpusConfig cfg;
    cfg.topics = o.topics;
    cfg.words_per_topic = o.words_per_topic;
    cfg.documents = o.documents;
    cfg.tokens_per_doc = o.tokens_per_doc;
    cfg.doc_alpha = o.doc_alpha;
    cfg.seed = o.seed;
    const auto c = as_usage([&] { return make_lda_corpus(cfg); });
    write_lines(dir / "corpus.txt", c.lines);
    {
      auto out = open_out(dir / "truth.json");
      out << Json{{"words", c.words}, {"topic_word", c.topic_word}, {"doc_topic", c.doc_topic}}.dump() << '\n';
    }
    m.add_output(dir / "corpus.txt");
    m.add_output(dir / "truth.json");
    return;
  }
  if (o.kind != "pseudo") throw UsageError("--kind must be lda or pseudo");
  PseudoSenseConfig cfg;
  cfg.docs_per_domain = o.docs_per_domain;
  cfg.tokens_per_doc = o.tokens_per_doc;
  cfg.concepts_per_domain = o.concepts;
  cfg.synonyms_per_concept = o.synonyms;
  cfg.shared_words = o.shared_words;
  cfg.shared_rate = o.shared_rate;
  cfg.walk_step = o.walk_step;
  cfg.pseudowords = o.pseudowords;
  cfg.seed = o.seed;
  const auto c = as_usage([&] { return make_pseudo_sense_corpus(cfg); });
  write_lines(dir / "corpus.txt", c.lines);
  {
    auto out = open_out(dir / "lexsub.tsv");
    write_lexsub(out, make_synthetic_lexsub(c, o.lexsub_per_sense, derive_seed(o.seed, 1)));
  }
  {
    auto out = open_out(dir / "scws.tsv");
    write_scws(out, make_synthetic_scws(c, o.scws_pairs, derive_seed(o.seed, 2)));
  }
  {
    Json pw = Json::array();
    for (const auto& p : c.pseudowords) {
      pw.push_back({{"name", p.name},
                    {"word_a", p.word_a},
                    {"word_b", p.word_b},
                    {"synonyms_a", p.synonyms_a},
                    {"synonyms_b", p.synonyms_b}});
    }
    auto out = open_out(dir / "domains.json");
    out << Json{{"domain_a", c.domain_a_words},
                {"domain_b", c.domain_b_words},
                {"shared", c.shared_words},
                {"pseudowords", pw},
                {"line_domain", c.domain}}
               .dump()
        << '\n';
  }
  for (const char* f : {"corpus.txt", "lexsub.tsv", "scws.tsv", "domains.json"}) m.add_output(dir / f);
}

void run_convert_lexsub(const ConvertLexsubOptions& o, RunManifest& m) {
  m.add_input(o.xml);
  m.add_input(o.gold);
  auto xml = open_in(o.xml);
  auto gold = open_in(o.gold);
  const auto conv = convert_semeval_lexsub(xml, gold);
  {
    auto out = open_out(o.out);
    write_lexsub(out, conv.instances);
  }
  m.add_output(o.out);
  std::cerr << "converted " << conv.instances.size() << " instances; dropped " << conv.dropped_instances
            << " without gold, " << conv.dropped_multiword << " multiword substitutes\n";
}

}  // namespace tse::cli
