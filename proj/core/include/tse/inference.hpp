#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tse/embeddings.hpp"
#include "tse/hdp.hpp"

namespace tse {

inline constexpr std::size_t kDefaultEvalWindow = 10;

/// u.v / (|u| |v|), 0 when either norm is 0. Throws on dimension mismatch.
double cosine(std::span<const double> u, std::span<const double> v);

/// Source of topic information for an evaluation context.
class TopicAssigner {
 public:
  virtual ~TopicAssigner() = default;
  [[nodiscard]] virtual std::size_t num_topics() const = 0;
  /// Hard topic for tokens[position], sampled with the rest of the sequence.
  [[nodiscard]] virtual TopicId sample_topic(std::span<const WordId> tokens, std::size_t position,
                                             std::uint64_t seed) const = 0;
  /// Topic distribution of the whole sequence treated as one document.
  [[nodiscard]] virtual TopicDist distribution(std::span<const WordId> tokens, std::uint64_t seed) const = 0;
};

/// Fold-in against a trained HDP model.
class HdpTopicAssigner final : public TopicAssigner {
 public:
  explicit HdpTopicAssigner(const TopicModel& model, FoldInOptions options = {});

  [[nodiscard]] std::size_t num_topics() const override { return model_->num_topics(); }
  [[nodiscard]] TopicId sample_topic(std::span<const WordId> tokens, std::size_t position,
                                     std::uint64_t seed) const override;
  [[nodiscard]] TopicDist distribution(std::span<const WordId> tokens, std::uint64_t seed) const override;

 private:
  const TopicModel* model_;
  FoldInOptions options_;
};

/// A target occurrence with its sentence. Tokens may hold kNoWord for words
/// outside the vocabulary; those are skipped as context words.
struct ScoredContext {
  std::vector<WordId> tokens;
  std::size_t target_index = 0;
  std::optional<std::vector<TopicId>> hard_topics;
  std::optional<TopicDist> topic_dist;

  [[nodiscard]] WordId target() const { return tokens.at(target_index); }
  void validate() const;
};

struct ScorerOptions {
  std::size_t window = kDefaultEvalWindow;
  std::uint64_t seed = 1;
  /// Sampled scorer: reuse the target's topic for the substitute instead of
  /// sampling it with the substitute spliced into the sentence.
  bool reuse_target_topic = false;
};

/// Context words within +-window of the target, OOV positions excluded.
std::vector<WordId> context_window(const ScoredContext& ctx, std::size_t window);

struct PairScore {
  double score = 0.0;
  bool oov = false;
};

/// cos(h(w1), h(w2)) with each word's context used as its own document.
/// Hard variants take the sampled topic at the target position, STLE the
/// context distribution, SGE no topic. OOV targets score 0 and are flagged.
PairScore sim_pair(const EmbeddingModel& model, const TopicAssigner* topics, const ScoredContext& first,
                   const ScoredContext& second, const ScorerOptions& options = {});

/// cos(h(s^tau), h(t^tau')) + sum_c cos(h(s^tau), o(c)) / C for fixed topics.
double sim_tse_fixed(const EmbeddingModel& model, WordId substitute, TopicId substitute_topic,
                     const ScoredContext& ctx, TopicId target_topic, std::size_t window);

/// Sampled scorer. nullopt when the substitute or target is unscorable.
std::optional<double> sim_tse_sampled(const EmbeddingModel& model, const TopicAssigner& topics, WordId substitute,
                                      const ScoredContext& ctx, const ScorerOptions& options = {});

/// Expected scorer with explicit topic distributions for the substitute and
/// the target.
double sim_tse_expected(const EmbeddingModel& model, WordId substitute, std::span<const double> substitute_dist,
                        const ScoredContext& ctx, std::span<const double> target_dist, std::size_t window);

/// Expected scorer using the context's document distribution for both sides.
std::optional<double> sim_tse_expected(const EmbeddingModel& model, const TopicAssigner& topics, WordId substitute,
                                       const ScoredContext& ctx, const ScorerOptions& options = {});

/// Skipgram baseline: cos(h(s), h(t)) + sum_c cos(h(s), o(c)) / C.
std::optional<double> sim_sge_c(const EmbeddingModel& model, WordId substitute, const ScoredContext& ctx,
                                std::size_t window = kDefaultEvalWindow);

}  // namespace tse
