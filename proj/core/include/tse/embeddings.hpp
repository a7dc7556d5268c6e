#pragma once

// Skipgram with negative sampling over topic-sensitive target
// representations. Target (input) rows are indexed by (word, topic) pairs for
// the topic variants, context (output) rows by plain words for every variant.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "tse/corpus.hpp"
#include "tse/hdp.hpp"

namespace tse {

enum class Variant : std::uint8_t {
  kSge = 0,      ///< plain Skipgram: h = r0(w)
  kHtle = 1,     ///< h = r(w, tau)
  kHtleAdd = 2,  ///< h = r'(w, tau) + r0(w)
  kStle = 3,     ///< h = sum_k p(k | d) r''(w, k)
};

std::string_view variant_name(Variant v);
Variant parse_variant(std::string_view name);

using Vector = std::vector<double>;

struct TrainConfig {
  std::size_t dim = 100;
  std::size_t window = 10;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double learning_rate = 0.025;
  double subsample = kDefaultSubsample;
  double negative_power = kDefaultNegativePower;
  std::uint64_t seed = 1;
  Variant variant = Variant::kSge;
  /// STLE: only the top-m document topics receive gradient (renormalized).
  /// 0 updates every topic with non-zero probability.
  std::size_t stle_top_m = 10;
  /// >1 enables lock-free parallel updates (non-deterministic).
  std::size_t threads = 1;

  void validate() const;
};

class EmbeddingModel {
 public:
  EmbeddingModel() = default;
  /// Allocates zeroed tables. topic_entries must be sorted and unique; they
  /// are ignored for SGE.
  EmbeddingModel(Variant variant, std::size_t dim, std::size_t num_topics, Vocabulary vocab,
                 std::vector<std::pair<WordId, TopicId>> topic_entries);

  [[nodiscard]] Variant variant() const { return variant_; }
  [[nodiscard]] std::size_t dim() const { return dim_; }
  [[nodiscard]] std::size_t num_topics() const { return num_topics_; }
  [[nodiscard]] const Vocabulary& vocab() const { return vocab_; }
  [[nodiscard]] std::size_t vocab_size() const { return vocab_.size(); }

  [[nodiscard]] bool has_topic_table() const { return variant_ != Variant::kSge; }
  [[nodiscard]] bool has_generic_table() const {
    return variant_ == Variant::kSge || variant_ == Variant::kHtleAdd;
  }

  [[nodiscard]] std::size_t topic_entry_count() const { return entry_keys_.size(); }
  [[nodiscard]] std::optional<std::size_t> find_topic_entry(WordId w, TopicId k) const;
  [[nodiscard]] std::pair<WordId, TopicId> topic_entry_key(std::size_t entry) const { return entry_keys_[entry]; }
  /// Topic entries of one word, in topic order.
  [[nodiscard]] std::span<const std::size_t> topic_entries_of(WordId w) const;

  std::span<double> topic_row(std::size_t entry) { return row(topic_table_, entry); }
  [[nodiscard]] std::span<const double> topic_row(std::size_t entry) const { return row(topic_table_, entry); }
  std::span<double> generic_row(WordId w) { return row(generic_table_, static_cast<std::size_t>(w)); }
  [[nodiscard]] std::span<const double> generic_row(WordId w) const {
    return row(generic_table_, static_cast<std::size_t>(w));
  }
  std::span<double> output_row(WordId w) { return row(output_table_, static_cast<std::size_t>(w)); }
  [[nodiscard]] std::span<const double> output_row(WordId w) const {
    return row(output_table_, static_cast<std::size_t>(w));
  }

  std::vector<double>& topic_table() { return topic_table_; }
  std::vector<double>& generic_table() { return generic_table_; }
  std::vector<double>& output_table() { return output_table_; }
  [[nodiscard]] const std::vector<double>& topic_table() const { return topic_table_; }
  [[nodiscard]] const std::vector<double>& generic_table() const { return generic_table_; }
  [[nodiscard]] const std::vector<double>& output_table() const { return output_table_; }

  [[nodiscard]] std::string entry_name(std::size_t topic_entry) const;

  /// Binary "TSE1": magic with format version, variant byte, dim, K,
  /// vocabulary, then the topic, generic and output tables.
  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static EmbeddingModel load(std::istream& in);
  static EmbeddingModel load(const std::filesystem::path& path);

  /// word2vec-style text: "N D" header, the input section (topic entries
  /// "word#k", then generic rows "word"), then the output section
  /// ("word@ctx"), 6-decimal fixed values.
  void export_text(std::ostream& out) const;

  friend bool operator==(const EmbeddingModel& a, const EmbeddingModel& b) {
    return a.variant_ == b.variant_ && a.dim_ == b.dim_ && a.num_topics_ == b.num_topics_ &&
           a.vocab_ == b.vocab_ && a.entry_keys_ == b.entry_keys_ && a.topic_table_ == b.topic_table_ &&
           a.generic_table_ == b.generic_table_ && a.output_table_ == b.output_table_;
  }

 private:
  std::span<double> row(std::vector<double>& t, std::size_t i) { return {t.data() + i * dim_, dim_}; }
  [[nodiscard]] std::span<const double> row(const std::vector<double>& t, std::size_t i) const {
    return {t.data() + i * dim_, dim_};
  }
  void index_entries();

  Variant variant_ = Variant::kSge;
  std::size_t dim_ = 0;
  std::size_t num_topics_ = 0;
  Vocabulary vocab_;
  std::vector<std::pair<WordId, TopicId>> entry_keys_;
  std::unordered_map<std::uint64_t, std::size_t> entry_index_;
  std::vector<std::size_t> word_entry_offsets_;
  std::vector<std::size_t> word_entries_;
  std::vector<double> topic_table_;
  std::vector<double> generic_table_;
  std::vector<double> output_table_;
};

/// Topic information attached to a target occurrence.
using TopicInfo = std::variant<std::monostate, TopicId, std::span<const double>>;

/// h(w) for the model's variant: HTLE r(w,t); HTLEadd r'(w,t) + r0(w);
/// STLE sum_k p_k r''(w,k); SGE r0(w). Distributions must have K entries and
/// sum to 1 within 1e-6.
Vector embed_target(const EmbeddingModel& model, WordId word, const TopicInfo& topic);

/// Unnormalized STLE mixture sum_k weights_k r''(w,k); linear in weights.
Vector embed_mixture(const EmbeddingModel& model, WordId word, std::span<const double> weights);

/// Representation of the word under one fixed topic, for every variant.
/// A (word, topic) pair never seen in training falls back to the mean of the
/// word's topic rows (HTLE, STLE) or to r0 alone (HTLEadd).
Vector topic_embedding(const EmbeddingModel& model, WordId word, TopicId topic);

/// h = sum of weighted input rows.
struct TargetTerm {
  enum class Table : std::uint8_t { kTopic, kGeneric };
  Table table;
  std::size_t index;
  double weight;
};

struct TargetSpec {
  std::vector<TargetTerm> terms;
};

/// Builds the input-row combination used for a training update. STLE keeps
/// the top_m most probable topics (0 = all non-zero) and renormalizes.
TargetSpec make_target(const EmbeddingModel& model, WordId word, const TopicInfo& topic,
                       std::size_t stle_top_m = 0);

struct SgnsWorkspace {
  Vector hidden;
  Vector hidden_grad;
  std::vector<double> coefficients;
};

/// One negative-sampling update. Ascends log s(h.o_ctx) + sum log s(-h.o_neg)
/// with step lr: every term row gets weight * dL/dh, output rows get g * h.
/// All gradients are taken at the pre-update point. Negatives equal to the
/// context word are skipped. Returns the loss before the update.
double sgns_step(EmbeddingModel& model, const TargetSpec& target, WordId context,
                 std::span<const WordId> negatives, double lr, SgnsWorkspace& ws);

struct TrainStats {
  std::vector<double> epoch_mean_loss;
  std::uint64_t updates = 0;
};

/// HTLE/HTLEadd need `labeling`, STLE needs `doc_topics`. num_topics = 0
/// infers K from the topic inputs.
EmbeddingModel train_embeddings(const Corpus& corpus, const TopicLabeling* labeling, const DocTopics* doc_topics,
                                const TrainConfig& config, std::size_t num_topics = 0,
                                TrainStats* stats = nullptr);

struct Neighbor {
  std::string name;
  WordId word;
  TopicId topic;  ///< -1 for generic (SGE) entries
  double cosine;
};

/// Top-k entries of the input space by cosine to the query representation.
/// The query entry itself is excluded; ties go to the lower entry index.
std::vector<Neighbor> nearest_neighbors(const EmbeddingModel& model, WordId word, const TopicInfo& topic,
                                        std::size_t k);

}  // namespace tse
