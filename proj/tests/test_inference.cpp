#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "tse/embeddings.hpp"
#include "tse/error.hpp"
#include "tse/hdp.hpp"
#include "tse/inference.hpp"
#include "tse/random.hpp"

namespace {

using tse::EmbeddingModel;
using tse::ScoredContext;
using tse::TopicId;
using tse::Variant;
using tse::WordId;

// Assigns preset topics: `target` at the queried position of an unmodified
// context, `spliced` when the position holds a different word.
class FixedAssigner final : public tse::TopicAssigner {
 public:
  FixedAssigner(std::size_t k, WordId target_word, TopicId target, TopicId spliced, tse::TopicDist dist)
      : k_(k), target_word_(target_word), target_(target), spliced_(spliced), dist_(std::move(dist)) {}
  std::size_t num_topics() const override { return k_; }
  TopicId sample_topic(std::span<const WordId> tokens, std::size_t pos, std::uint64_t) const override {
    return tokens[pos] == target_word_ ? target_ : spliced_;
  }
  tse::TopicDist distribution(std::span<const WordId>, std::uint64_t) const override { return dist_; }

 private:
  std::size_t k_;
  WordId target_word_;
  TopicId target_, spliced_;
  tse::TopicDist dist_;
};

tse::Vocabulary vocab(std::size_t n) {
  std::vector<std::pair<std::string, std::uint64_t>> e;
  for (std::size_t i = 0; i < n; ++i) e.emplace_back("w" + std::to_string(i), 100 - i);
  return tse::Vocabulary::from_entries(e);
}

std::vector<std::pair<WordId, TopicId>> all_pairs(std::size_t V, std::size_t K) {
  std::vector<std::pair<WordId, TopicId>> keys;
  for (std::size_t w = 0; w < V; ++w) {
    for (std::size_t k = 0; k < K; ++k) keys.emplace_back(static_cast<WordId>(w), static_cast<TopicId>(k));
  }
  return keys;
}

void set_row(std::span<double> r, std::initializer_list<double> v) { std::copy(v.begin(), v.end(), r.begin()); }

EmbeddingModel random_model(Variant v, std::size_t V, std::size_t K, std::size_t dim, std::uint64_t seed) {
  EmbeddingModel m(v, dim, K, vocab(V), v == Variant::kSge ? std::vector<std::pair<WordId, TopicId>>{} : all_pairs(V, K));
  tse::Rng rng(seed);
  for (auto* t : {&m.topic_table(), &m.generic_table(), &m.output_table()}) {
    for (auto& x : *t) x = 2 * tse::uniform01(rng) - 1;
  }
  return m;
}

// SGE model and a single-topic HTLE model with identical rows.
std::pair<EmbeddingModel, EmbeddingModel> mirrored_pair(std::size_t V, std::size_t dim, std::uint64_t seed) {
  auto sge = random_model(Variant::kSge, V, 1, dim, seed);
  EmbeddingModel htle(Variant::kHtle, dim, 1, vocab(V), all_pairs(V, 1));
  htle.topic_table() = sge.generic_table();
  htle.output_table() = sge.output_table();
  return {std::move(sge), std::move(htle)};
}

ScoredContext context(std::vector<WordId> tokens, std::size_t target) {
  ScoredContext c;
  c.tokens = std::move(tokens);
  c.target_index = target;
  return c;
}

double manual_cos(double a0, double a1, double b0, double b1) {
  return (a0 * b0 + a1 * b1) / (std::sqrt(a0 * a0 + a1 * a1) * std::sqrt(b0 * b0 + b1 * b1));
}

// ---- cosine -------------------------------------------------------------------

TEST(Cosine, Examples) {
  const std::vector<double> v{0.3, -1.2, 4.0}, e1{1, 0}, e2{0, 1};
  EXPECT_NEAR(tse::cosine(v, v), 1.0, 1e-15);
  EXPECT_EQ(tse::cosine(e1, e2), 0.0);
  const std::vector<double> a{1, 2, 3}, b{4, 5, 6};
  EXPECT_NEAR(tse::cosine(a, b), 32.0 / (std::sqrt(14.0) * std::sqrt(77.0)), 1e-15);
  EXPECT_NEAR(tse::cosine(a, b), 0.974632, 1e-6);
}

TEST(Cosine, ZeroNormAndMismatch) {
  const std::vector<double> z{0, 0}, v{1, 2}, w{1, 2, 3};
  EXPECT_EQ(tse::cosine(z, v), 0.0);
  EXPECT_THROW(tse::cosine(v, w), tse::ConfigError);
}

// ---- context handling -----------------------------------------------------------

TEST(ContextWindow, SkipsTargetAndOovAndRespectsWidth) {
  const auto c = context({0, 1, tse::kNoWord, 3, 4, 5, 6}, 3);
  EXPECT_EQ(tse::context_window(c, 10), (std::vector<WordId>{0, 1, 4, 5, 6}));
  EXPECT_EQ(tse::context_window(c, 1), (std::vector<WordId>{4}));
  EXPECT_TRUE(tse::context_window(context({2}, 0), 10).empty());
}

TEST(ScoredContext, Validation) {
  EXPECT_THROW(context({1, 2}, 2).validate(), tse::ConfigError);
  auto c = context({1, 2}, 0);
  c.hard_topics = std::vector<TopicId>{0};
  EXPECT_THROW(c.validate(), tse::ConfigError);
  c.hard_topics.reset();
  c.topic_dist = tse::TopicDist{0.5, 0.4};
  EXPECT_THROW(c.validate(), tse::ConfigError);
}

// ---- sim_pair -------------------------------------------------------------------

TEST(SimPair, IdenticalInputsScoreOne) {
  const auto m = random_model(Variant::kHtle, 5, 3, 6, 1);
  const tse::TopicModel hdp(tse::HdpHyper{}, 5, 3, std::vector<std::uint32_t>(15, 2), {0.2, 0.3, 0.5});
  const tse::HdpTopicAssigner topics(hdp);
  const auto c = context({1, 2, 3, 4}, 2);
  const auto s = tse::sim_pair(m, &topics, c, c);
  EXPECT_FALSE(s.oov);
  EXPECT_NEAR(s.score, 1.0, 1e-12);
}

TEST(SimPair, SingleTopicEqualsSgeCosine) {
  const auto [sge, htle] = mirrored_pair(6, 5, 2);
  const tse::TopicModel hdp(tse::HdpHyper{}, 6, 1, std::vector<std::uint32_t>(6, 1), {1.0});
  const tse::HdpTopicAssigner topics(hdp);
  const auto a = context({0, 1, 2}, 1), b = context({3, 4, 5, 0}, 2);
  const double expected = tse::cosine(sge.generic_row(1), sge.generic_row(5));
  EXPECT_DOUBLE_EQ(tse::sim_pair(sge, nullptr, a, b).score, expected);
  EXPECT_DOUBLE_EQ(tse::sim_pair(htle, &topics, a, b).score, expected);
}

TEST(SimPair, StleUsesContextDistribution) {
  const auto m = random_model(Variant::kStle, 4, 2, 3, 3);
  auto a = context({0, 1}, 0), b = context({0, 2}, 0);
  a.topic_dist = tse::TopicDist{1.0, 0.0};
  b.topic_dist = tse::TopicDist{0.0, 1.0};
  const double expected = tse::cosine(m.topic_row(*m.find_topic_entry(0, 0)), m.topic_row(*m.find_topic_entry(0, 1)));
  EXPECT_NEAR(tse::sim_pair(m, nullptr, a, b).score, expected, 1e-15);
}

TEST(SimPair, OovScoresZeroWithFlag) {
  const auto m = random_model(Variant::kSge, 3, 1, 3, 4);
  const auto s = tse::sim_pair(m, nullptr, context({0, tse::kNoWord}, 1), context({1}, 0));
  EXPECT_TRUE(s.oov);
  EXPECT_EQ(s.score, 0.0);
}

// ---- sampled ----------------------------------------------------------------------

// dim 2, K 2: target w0, substitute w1, context w2 and w3.
EmbeddingModel hand_model(Variant v) {
  EmbeddingModel m(v, 2, 2, vocab(4), all_pairs(4, 2));
  set_row(m.topic_row(*m.find_topic_entry(0, 0)), {1.0, 0.0});
  set_row(m.topic_row(*m.find_topic_entry(0, 1)), {0.6, 0.8});
  set_row(m.topic_row(*m.find_topic_entry(1, 0)), {0.0, 2.0});
  set_row(m.topic_row(*m.find_topic_entry(1, 1)), {3.0, -4.0});
  set_row(m.output_row(2), {1.0, 1.0});
  set_row(m.output_row(3), {-2.0, 1.0});
  if (v == Variant::kHtleAdd) {
    set_row(m.generic_row(0), {0.5, 0.5});
    set_row(m.generic_row(1), {-1.0, 0.0});
  }
  return m;
}

TEST(SimSampled, HandComputedInstance) {
  const auto m = hand_model(Variant::kHtle);
  const FixedAssigner topics(2, 0, /*target*/ 1, /*substitute*/ 0, {0.5, 0.5});
  const auto c = context({2, 0, 3}, 1);
  // h(s) = r(w1,0) = (0, 2); h(t) = r(w0,1) = (0.6, 0.8)
  const double pair = (0 * 0.6 + 2 * 0.8) / (2.0 * 1.0);
  const double ctx = ((0 * 1 + 2 * 1) / (2.0 * std::sqrt(2.0)) + (0 * -2.0 + 2 * 1) / (2.0 * std::sqrt(5.0))) / 2.0;
  const auto got = tse::sim_tse_sampled(m, topics, 1, c);
  ASSERT_TRUE(got.has_value());
  EXPECT_NEAR(*got, pair + ctx, 1e-12);
}

TEST(SimSampled, ReuseTargetTopic) {
  const auto m = hand_model(Variant::kHtle);
  const FixedAssigner topics(2, 0, 1, 0, {0.5, 0.5});
  const auto c = context({2, 0, 3}, 1);
  tse::ScorerOptions o;
  o.reuse_target_topic = true;
  EXPECT_DOUBLE_EQ(*tse::sim_tse_sampled(m, topics, 1, c, o), tse::sim_tse_fixed(m, 1, 1, c, 1, o.window));
}

TEST(SimSampled, EmptyContextTermIsZero) {
  const auto m = hand_model(Variant::kHtle);
  const FixedAssigner topics(2, 0, 1, 1, {0.5, 0.5});
  const auto c = context({0, tse::kNoWord}, 0);
  const double pair = manual_cos(3.0, -4.0, 0.6, 0.8);
  EXPECT_NEAR(*tse::sim_tse_sampled(m, topics, 1, c), pair, 1e-15);
}

TEST(SimSampled, SingleTopicEqualsSgeC) {
  const auto [sge, htle] = mirrored_pair(8, 6, 5);
  const tse::TopicModel hdp(tse::HdpHyper{}, 8, 1, std::vector<std::uint32_t>(8, 3), {1.0});
  const tse::HdpTopicAssigner topics(hdp);
  const auto c = context({0, 1, 2, 3, 4, 5}, 2);
  for (WordId s = 0; s < 8; ++s) {
    EXPECT_DOUBLE_EQ(*tse::sim_tse_sampled(htle, topics, s, c), *tse::sim_sge_c(sge, s, c));
    EXPECT_DOUBLE_EQ(*tse::sim_tse_expected(htle, topics, s, c), *tse::sim_sge_c(sge, s, c));
  }
}

TEST(SimSampled, OovSubstituteIsUnscorable) {
  const auto m = hand_model(Variant::kHtle);
  const FixedAssigner topics(2, 0, 1, 0, {0.5, 0.5});
  EXPECT_FALSE(tse::sim_tse_sampled(m, topics, tse::kNoWord, context({2, 0}, 1)).has_value());
  EXPECT_FALSE(tse::sim_tse_expected(m, topics, 17, context({2, 0}, 1)).has_value());
}

// ---- expected ---------------------------------------------------------------------

TEST(SimExpected, PointMassesMatchFixedTopics) {
  const auto m = hand_model(Variant::kHtle);
  const auto c = context({2, 0, 3}, 1);
  for (TopicId ks = 0; ks < 2; ++ks) {
    for (TopicId kt = 0; kt < 2; ++kt) {
      std::vector<double> ps(2, 0.0), pt(2, 0.0);
      ps[static_cast<std::size_t>(ks)] = 1.0;
      pt[static_cast<std::size_t>(kt)] = 1.0;
      const double fixed = tse::sim_tse_fixed(m, 1, ks, c, kt, 10);
      EXPECT_NEAR(tse::sim_tse_expected(m, 1, ps, c, pt, 10), fixed, 1e-15);
      const FixedAssigner topics(2, 0, kt, ks, {0.5, 0.5});
      EXPECT_NEAR(*tse::sim_tse_sampled(m, topics, 1, c), fixed, 1e-15);
    }
  }
}

TEST(SimExpected, UniformDistributionByHand) {
  const auto m = hand_model(Variant::kHtle);
  const auto c = context({2, 0, 3}, 1);
  const std::vector<double> p{0.5, 0.5};
  // Substitute rows s0 = (0, 2), s1 = (3, -4); target rows t0 = (1, 0), t1 = (0.6, 0.8).
  const double pair = 0.25 * (manual_cos(0, 2, 1, 0) + manual_cos(0, 2, 0.6, 0.8) + manual_cos(3, -4, 1, 0) +
                              manual_cos(3, -4, 0.6, 0.8));
  const double ctx0 = (manual_cos(0, 2, 1, 1) + manual_cos(0, 2, -2, 1)) / 2;
  const double ctx1 = (manual_cos(3, -4, 1, 1) + manual_cos(3, -4, -2, 1)) / 2;
  const double expected = pair + 0.5 * ctx0 + 0.5 * ctx1;
  EXPECT_NEAR(tse::sim_tse_expected(m, 1, p, c, p, 10), expected, 1e-12);
  const FixedAssigner topics(2, 0, 0, 0, p);
  EXPECT_NEAR(*tse::sim_tse_expected(m, topics, 1, c), expected, 1e-12);
}

TEST(SimExpected, HtleAddUsesSummedRows) {
  const auto m = hand_model(Variant::kHtleAdd);
  const auto c = context({0}, 0);
  const std::vector<double> p{1.0, 0.0}, q{0.0, 1.0};
  // h(s) = r'(w1,0) + r0(w1) = (-1, 2); h(t) = r'(w0,1) + r0(w0) = (1.1, 1.3)
  EXPECT_NEAR(tse::sim_tse_expected(m, 1, p, c, q, 10), manual_cos(-1, 2, 1.1, 1.3), 1e-15);
}

TEST(SimExpected, InvariantToTopicPermutation) {
  const std::size_t V = 5, K = 4, dim = 3;
  const auto m = random_model(Variant::kHtle, V, K, dim, 6);
  const std::vector<TopicId> perm{2, 0, 3, 1};
  EmbeddingModel permuted(Variant::kHtle, dim, K, vocab(V), all_pairs(V, K));
  permuted.output_table() = m.output_table();
  for (std::size_t w = 0; w < V; ++w) {
    for (std::size_t k = 0; k < K; ++k) {
      const auto src = m.topic_row(*m.find_topic_entry(static_cast<WordId>(w), static_cast<TopicId>(k)));
      auto dst = permuted.topic_row(*permuted.find_topic_entry(static_cast<WordId>(w), perm[k]));
      std::copy(src.begin(), src.end(), dst.begin());
    }
  }
  const std::vector<double> p{0.1, 0.2, 0.3, 0.4};
  std::vector<double> pp(K);
  for (std::size_t k = 0; k < K; ++k) pp[static_cast<std::size_t>(perm[k])] = p[k];
  const auto c = context({0, 1, 2, 3, 4}, 2);
  for (WordId s = 0; s < 5; ++s) {
    EXPECT_NEAR(tse::sim_tse_expected(m, s, p, c, p, 10), tse::sim_tse_expected(permuted, s, pp, c, pp, 10), 1e-12);
  }
}

TEST(SimExpected, MissingPairFallsBack) {
  EmbeddingModel m(Variant::kHtle, 2, 2, vocab(3), {{0, 0}, {0, 1}, {1, 0}});
  set_row(m.topic_row(0), {1, 0});
  set_row(m.topic_row(1), {0, 1});
  set_row(m.topic_row(2), {1, 1});
  const auto c = context({0}, 0);
  const std::vector<double> ps{0.0, 1.0}, pt{1.0, 0.0};
  // w1 has no topic-1 row: its mean topic row (1, 1) stands in.
  EXPECT_NEAR(tse::sim_tse_expected(m, 1, ps, c, pt, 10), manual_cos(1, 1, 1, 0), 1e-15);
  // w2 has no rows at all.
  EXPECT_THROW(tse::sim_tse_expected(m, 2, ps, c, pt, 10), tse::OovError);
  const FixedAssigner topics(2, 0, 0, 1, pt);
  EXPECT_FALSE(tse::sim_tse_expected(m, topics, 2, c).has_value());
}

// ---- SGE+C --------------------------------------------------------------------------

TEST(SimSgeC, SubstituteEqualsTarget) {
  const auto m = random_model(Variant::kSge, 5, 1, 4, 7);
  const auto c = context({1, 2, 3, 4}, 1);
  const double ctx = (tse::cosine(m.generic_row(2), m.output_row(1)) + tse::cosine(m.generic_row(2), m.output_row(3)) +
                      tse::cosine(m.generic_row(2), m.output_row(4))) /
                     3.0;
  EXPECT_NEAR(*tse::sim_sge_c(m, 2, c), 1.0 + ctx, 1e-12);
}

TEST(SimSgeC, EmptyWindow) {
  const auto m = random_model(Variant::kSge, 5, 1, 4, 8);
  const auto c = context({3}, 0);
  EXPECT_DOUBLE_EQ(*tse::sim_sge_c(m, 1, c), tse::cosine(m.generic_row(1), m.generic_row(3)));
}

TEST(SimSgeC, HandComputed) {
  EmbeddingModel m(Variant::kSge, 2, 1, vocab(4), {});
  set_row(m.generic_row(0), {1, 0});
  set_row(m.generic_row(1), {1, 1});
  set_row(m.output_row(2), {0, 3});
  set_row(m.output_row(3), {-1, -1});
  const auto c = context({2, 0, 3}, 1);
  const double expected = 1 / std::sqrt(2.0) + (1 / std::sqrt(2.0) + -1.0) / 2.0;
  EXPECT_NEAR(*tse::sim_sge_c(m, 1, c), expected, 1e-12);
}

TEST(SimSgeC, RequiresSgeModel) {
  const auto m = hand_model(Variant::kHtle);
  EXPECT_THROW(tse::sim_sge_c(m, 1, context({0}, 0)), tse::ConfigError);
}

TEST(Scorers, BoundedAndDeterministic) {
  const auto m = random_model(Variant::kHtle, 10, 3, 5, 9);
  const tse::TopicModel hdp(tse::HdpHyper{}, 10, 3, std::vector<std::uint32_t>(30, 1), {0.3, 0.3, 0.4});
  const tse::HdpTopicAssigner topics(hdp);
  const auto sge = random_model(Variant::kSge, 10, 1, 5, 9);
  tse::Rng rng(10);
  for (int t = 0; t < 50; ++t) {
    std::vector<WordId> toks;
    for (int i = 0; i < 8; ++i) toks.push_back(static_cast<WordId>(tse::uniform_below(rng, 10)));
    const auto c = context(toks, 3);
    const auto s = static_cast<WordId>(tse::uniform_below(rng, 10));
    tse::ScorerOptions o;
    o.seed = static_cast<std::uint64_t>(t);
    for (double v : {*tse::sim_tse_sampled(m, topics, s, c, o), *tse::sim_tse_expected(m, topics, s, c, o),
                     *tse::sim_sge_c(sge, s, c)}) {
      EXPECT_GE(v, -2.0);
      EXPECT_LE(v, 2.0);
    }
    EXPECT_EQ(*tse::sim_tse_sampled(m, topics, s, c, o), *tse::sim_tse_sampled(m, topics, s, c, o));
  }
}

}  // namespace
