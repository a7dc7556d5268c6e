#include "tse/inference.hpp"

#include <cmath>
#include <numeric>

#include "tse/error.hpp"

namespace tse {
namespace {

bool in_vocab(const EmbeddingModel& model, WordId w) {
  return w >= 0 && static_cast<std::size_t>(w) < model.vocab_size();
}

double context_term(const EmbeddingModel& model, std::span<const double> h, std::span<const WordId> context) {
  if (context.empty()) return 0.0;
  double sum = 0.0;
  for (WordId c : context) sum += cosine(h, model.output_row(c));
  return sum / static_cast<double>(context.size());
}

// Seeds for the individual fold-in runs of one scoring call.
constexpr std::uint64_t kTargetStream = 1;
constexpr std::uint64_t kSubstituteStream = 2;
constexpr std::uint64_t kDistributionStream = 3;

}  // namespace

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw ConfigError("cosine of vectors with dimensions " + std::to_string(u.size()) + " and " +
                      std::to_string(v.size()));
  }
  double uv = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    uv += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (uu == 0.0 || vv == 0.0) return 0.0;
  return uv / (std::sqrt(uu) * std::sqrt(vv));
}

HdpTopicAssigner::HdpTopicAssigner(const TopicModel& model, FoldInOptions options)
    : model_(&model), options_(options) {
  options_.validate();
}

TopicId HdpTopicAssigner::sample_topic(std::span<const WordId> tokens, std::size_t position,
                                       std::uint64_t seed) const {
  return fold_in(*model_, tokens, seed, options_).labels.at(position);
}

TopicDist HdpTopicAssigner::distribution(std::span<const WordId> tokens, std::uint64_t seed) const {
  return fold_in(*model_, tokens, seed, options_).distribution;
}

void ScoredContext::validate() const {
  if (target_index >= tokens.size()) throw ConfigError("target index outside the context");
  if (hard_topics && hard_topics->size() != tokens.size()) throw ConfigError("hard topics do not match the context length");
  if (topic_dist) {
    const double total = std::accumulate(topic_dist->begin(), topic_dist->end(), 0.0);
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError("context topic distribution does not sum to 1");
  }
}

std::vector<WordId> context_window(const ScoredContext& ctx, std::size_t window) {
  std::vector<WordId> out;
  const std::size_t t = ctx.target_index;
  const std::size_t lo = t >= window ? t - window : 0;
  const std::size_t hi = std::min(ctx.tokens.size(), t + window + 1);
  for (std::size_t i = lo; i < hi; ++i) {
    if (i != t && ctx.tokens[i] != kNoWord) out.push_back(ctx.tokens[i]);
  }
  return out;
}

PairScore sim_pair(const EmbeddingModel& model, const TopicAssigner* topics, const ScoredContext& first,
                   const ScoredContext& second, const ScorerOptions& options) {
  first.validate();
  second.validate();
  const auto represent = [&](const ScoredContext& ctx) -> std::optional<Vector> {
    const WordId w = ctx.target();
    if (!in_vocab(model, w)) return std::nullopt;
    // Both sides use the same stream so identical inputs get identical topics.
    const std::uint64_t seed = derive_seed(options.seed, kTargetStream);
    try {
      switch (model.variant()) {
        case Variant::kSge:
          return embed_target(model, w, std::monostate{});
        case Variant::kHtle:
        case Variant::kHtleAdd: {
          TopicId k = 0;
          if (ctx.hard_topics) {
            k = (*ctx.hard_topics)[ctx.target_index];
          } else {
            if (!topics) throw ConfigError("hard-topic scoring needs a topic model");
            k = topics->sample_topic(ctx.tokens, ctx.target_index, seed);
          }
          return embed_target(model, w, k);
        }
        case Variant::kStle: {
          TopicDist p;
          if (ctx.topic_dist) {
            p = *ctx.topic_dist;
          } else {
            if (!topics) throw ConfigError("soft-topic scoring needs a topic model");
            p = topics->distribution(ctx.tokens, seed);
          }
          return embed_target(model, w, std::span<const double>(p));
        }
      }
    } catch (const OovError&) {
      return std::nullopt;
    }
    return std::nullopt;
  };
  const auto a = represent(first);
  const auto b = represent(second);
  if (!a || !b) return {0.0, true};
  return {cosine(*a, *b), false};
}

double sim_tse_fixed(const EmbeddingModel& model, WordId substitute, TopicId substitute_topic,
                     const ScoredContext& ctx, TopicId target_topic, std::size_t window) {
  ctx.validate();
  const Vector hs = topic_embedding(model, substitute, substitute_topic);
  const Vector ht = topic_embedding(model, ctx.target(), target_topic);
  const auto context = context_window(ctx, window);
  return cosine(hs, ht) + context_term(model, hs, context);
}

std::optional<double> sim_tse_sampled(const EmbeddingModel& model, const TopicAssigner& topics, WordId substitute,
                                      const ScoredContext& ctx, const ScorerOptions& options) {
  ctx.validate();
  if (!in_vocab(model, substitute) || !in_vocab(model, ctx.target())) return std::nullopt;
  const TopicId target_topic = ctx.hard_topics
                                   ? (*ctx.hard_topics)[ctx.target_index]
                                   : topics.sample_topic(ctx.tokens, ctx.target_index,
                                                         derive_seed(options.seed, kTargetStream));
  TopicId substitute_topic = target_topic;
  if (!options.reuse_target_topic) {
    std::vector<WordId> spliced = ctx.tokens;
    spliced[ctx.target_index] = substitute;
    substitute_topic = topics.sample_topic(spliced, ctx.target_index, derive_seed(options.seed, kSubstituteStream));
  }
  try {
    return sim_tse_fixed(model, substitute, substitute_topic, ctx, target_topic, options.window);
  } catch (const OovError&) {
    return std::nullopt;
  }
}

double sim_tse_expected(const EmbeddingModel& model, WordId substitute, std::span<const double> substitute_dist,
                        const ScoredContext& ctx, std::span<const double> target_dist, std::size_t window) {
  ctx.validate();
  const std::size_t k_count = model.num_topics();
  if (substitute_dist.size() != k_count || target_dist.size() != k_count) {
    throw ConfigError("topic distributions must have one entry per model topic");
  }
  std::vector<std::pair<double, Vector>> hs, ht;
  for (std::size_t k = 0; k < k_count; ++k) {
    if (substitute_dist[k] > 0) hs.emplace_back(substitute_dist[k], topic_embedding(model, substitute, static_cast<TopicId>(k)));
    if (target_dist[k] > 0) ht.emplace_back(target_dist[k], topic_embedding(model, ctx.target(), static_cast<TopicId>(k)));
  }
  const auto context = context_window(ctx, window);
  double pair_term = 0.0;
  double ctx_term = 0.0;
  for (const auto& [ps, vs] : hs) {
    for (const auto& [pt, vt] : ht) pair_term += ps * pt * cosine(vs, vt);
    ctx_term += ps * context_term(model, vs, context);
  }
  return pair_term + ctx_term;
}

std::optional<double> sim_tse_expected(const EmbeddingModel& model, const TopicAssigner& topics, WordId substitute,
                                       const ScoredContext& ctx, const ScorerOptions& options) {
  ctx.validate();
  if (!in_vocab(model, substitute) || !in_vocab(model, ctx.target())) return std::nullopt;
  const TopicDist p = ctx.topic_dist ? *ctx.topic_dist
                                     : topics.distribution(ctx.tokens, derive_seed(options.seed, kDistributionStream));
  try {
    return sim_tse_expected(model, substitute, p, ctx, p, options.window);
  } catch (const OovError&) {
    return std::nullopt;
  }
}

std::optional<double> sim_sge_c(const EmbeddingModel& model, WordId substitute, const ScoredContext& ctx,
                                std::size_t window) {
  ctx.validate();
  if (model.variant() != Variant::kSge) throw ConfigError("the SGE+C scorer needs an sge model");
  if (!in_vocab(model, substitute) || !in_vocab(model, ctx.target())) return std::nullopt;
  const auto hs = model.generic_row(substitute);
  const auto ht = model.generic_row(ctx.target());
  return cosine(hs, ht) + context_term(model, hs, context_window(ctx, window));
}

}  // namespace tse
