#pragma once

// Hierarchical Dirichlet Process topic model, trained with the
// direct-assignment collapsed Gibbs sampler (stick-breaking global weights,
// table counts drawn with the Antoniak scheme). Trained topics are frozen and
// applied to new text by fold-in sampling of document-local assignments.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "tse/corpus.hpp"
#include "tse/random.hpp"

namespace tse {

using TopicId = std::int32_t;
using TopicDist = std::vector<double>;

struct HdpHyper {
  double gamma = 1.0;   ///< top-level concentration
  double alpha0 = 1.0;  ///< document-level concentration
  double eta = 0.01;    ///< symmetric Dirichlet prior on topic-word distributions
  std::size_t max_topics = 500;

  void validate() const;
  friend bool operator==(const HdpHyper&, const HdpHyper&) = default;
};

struct HdpTrainOptions {
  std::size_t iterations = 1000;
  std::uint64_t seed = 1;
  /// Topics holding less than this share of tokens are dropped at the end.
  double prune_threshold = 1e-4;
  /// Auxiliary-variable resampling of gamma and alpha0 (Gamma(a, b) priors).
  bool resample_hyper = false;
  double hyper_prior_shape = 1.0;
  double hyper_prior_rate = 1.0;
};

struct FoldInOptions {
  std::size_t sweeps = 20;
  std::size_t burn_in = 5;

  void validate() const;
};

/// Frozen topics: K topics over a vocabulary of vocab_size words.
class TopicModel {
 public:
  TopicModel() = default;
  TopicModel(HdpHyper hyper, std::size_t vocab_size, std::size_t num_topics,
             std::vector<std::uint32_t> topic_word_count, std::vector<double> beta);

  [[nodiscard]] std::size_t num_topics() const { return num_topics_; }
  [[nodiscard]] std::size_t vocab_size() const { return vocab_size_; }
  [[nodiscard]] const HdpHyper& hyper() const { return hyper_; }

  [[nodiscard]] std::uint32_t topic_word_count(TopicId k, WordId w) const {
    return topic_word_[static_cast<std::size_t>(k) * vocab_size_ + static_cast<std::size_t>(w)];
  }
  [[nodiscard]] std::uint64_t topic_count(TopicId k) const { return topic_count_[static_cast<std::size_t>(k)]; }
  [[nodiscard]] std::uint64_t total_count() const;
  /// Global topic weights, normalized over the K active topics.
  [[nodiscard]] const std::vector<double>& beta() const { return beta_; }
  [[nodiscard]] TopicId most_probable_topic() const;

  /// Smoothed topic-word probability (n_kw + eta) / (n_k + eta * V).
  [[nodiscard]] double phi(TopicId k, WordId w) const {
    return (topic_word_count(k, w) + hyper_.eta) * inv_denominator_[static_cast<std::size_t>(k)];
  }
  [[nodiscard]] std::vector<double> topic_word_distribution(TopicId k) const;

  /// Binary "HDP1": magic, K, |V|, hyper, row-major K x |V| counts, beta.
  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static TopicModel load(std::istream& in);
  static TopicModel load(const std::filesystem::path& path);

  friend bool operator==(const TopicModel& a, const TopicModel& b) {
    return a.hyper_ == b.hyper_ && a.vocab_size_ == b.vocab_size_ && a.num_topics_ == b.num_topics_ &&
           a.topic_word_ == b.topic_word_ && a.beta_ == b.beta_;
  }

 private:
  HdpHyper hyper_;
  std::size_t vocab_size_ = 0;
  std::size_t num_topics_ = 0;
  std::vector<std::uint32_t> topic_word_;
  std::vector<std::uint64_t> topic_count_;
  std::vector<double> beta_;
  std::vector<double> inv_denominator_;
};

/// Hard topic labels, congruent with the labeled corpus.
struct TopicLabeling {
  std::vector<std::vector<TopicId>> labels;

  friend bool operator==(const TopicLabeling&, const TopicLabeling&) = default;
};

using DocTopics = std::vector<TopicDist>;

/// Collapsed Gibbs state. Exposed so that callers can observe the chain
/// between sweeps; train_hdp() is the usual entry point.
class HdpSampler {
 public:
  HdpSampler(const Corpus& corpus, HdpHyper hyper, std::uint64_t seed);

  /// One pass over every token followed by table and beta resampling.
  void sweep();
  void resample_hyperparameters(double prior_shape, double prior_rate);

  [[nodiscard]] std::size_t active_topics() const;
  [[nodiscard]] std::uint64_t assigned_tokens() const;
  [[nodiscard]] std::uint64_t corpus_tokens() const { return corpus_tokens_; }
  /// Verifies every count table against a recount from the assignments.
  [[nodiscard]] bool counts_consistent() const;
  /// Collapsed log p(words | assignments).
  [[nodiscard]] double log_likelihood() const;
  [[nodiscard]] const HdpHyper& hyper() const { return hyper_; }

  struct Result {
    TopicModel model;
    /// Training-time topic slot -> final topic index, -1 for pruned slots.
    std::vector<TopicId> remap;
    TopicLabeling labels;
  };
  /// Drops topics below the token-share threshold (their tokens move to the
  /// most probable surviving topic) and compacts indices in slot order.
  [[nodiscard]] Result finalize(double prune_threshold) const;

 private:
  void add_token(std::size_t d, WordId w, TopicId k);
  void remove_token(std::size_t d, WordId w, TopicId k);
  TopicId sample_topic(std::size_t d, WordId w);
  TopicId new_slot();
  void sample_beta();

  HdpHyper hyper_;
  Rng rng_;
  std::size_t vocab_size_;
  std::uint64_t corpus_tokens_ = 0;
  std::vector<std::vector<WordId>> docs_;
  std::vector<std::vector<TopicId>> z_;
  std::vector<std::vector<std::int32_t>> doc_topic_;
  std::vector<std::vector<std::int32_t>> topic_word_;
  std::vector<std::int64_t> topic_count_;
  std::vector<bool> active_;
  std::vector<double> beta_;
  double beta_new_ = 1.0;
  double total_tables_ = 0.0;
  std::vector<double> scratch_;
};

struct HdpTrainResult {
  TopicModel model;
  std::vector<TopicId> remap;
  TopicLabeling training_labels;
  std::vector<double> log_likelihood_trace;
};

/// Called after every sweep with the 1-based iteration number.
using HdpObserver = std::function<void(std::size_t iteration, const HdpSampler&)>;

HdpTrainResult train_hdp(const Corpus& corpus, const HdpHyper& hyper, const HdpTrainOptions& options,
                         const HdpObserver& observer = {});

struct FoldInResult {
  std::vector<TopicId> labels;  ///< assignments after the last sweep
  TopicDist distribution;       ///< theta averaged over post-burn-in sweeps
};

/// Fold-in sampling for one token sequence with the topics frozen.
/// Tokens equal to kNoWord get the globally most probable topic and do not
/// contribute to the document counts.
FoldInResult fold_in(const TopicModel& model, std::span<const WordId> tokens, std::uint64_t seed,
                     const FoldInOptions& options = {});

/// Samples one topic per token; documents use independent seeded streams so
/// the result does not depend on the thread count.
TopicLabeling label_corpus(const TopicModel& model, const Corpus& corpus, std::uint64_t seed,
                           const FoldInOptions& options = {}, std::size_t threads = 1);

TopicDist infer_doc_topics(const TopicModel& model, const Document& doc, std::uint64_t seed,
                           const FoldInOptions& options = {});

DocTopics infer_corpus_topics(const TopicModel& model, const Corpus& corpus, std::uint64_t seed,
                              const FoldInOptions& options = {}, std::size_t threads = 1);

/// Sum over tokens of log phi_{z}(w).
double corpus_log_likelihood(const TopicModel& model, const TopicLabeling& labeling, const Corpus& corpus);

/// Text labeling: corpus line structure with tokens written "word|k".
void write_labeling(std::ostream& out, const Corpus& corpus, const TopicLabeling& labeling);
/// Reads a labeling and checks it against the corpus word by word.
TopicLabeling read_labeling(std::istream& in, const Corpus& corpus);

/// One line per document: "doc_id k1:p1 k2:p2 ..." for entries >= min_prob.
void write_doc_topics(std::ostream& out, const DocTopics& topics, double min_prob = 1e-4);
/// Parses the doc-topic format into dense length-K vectors, renormalized.
DocTopics read_doc_topics(std::istream& in, std::size_t num_topics);

}  // namespace tse
