#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "test_util.hpp"
#include "tse/error.hpp"
#include "tse/hdp.hpp"
#include "tse/synthetic.hpp"

namespace {

using tse::HdpHyper;
using tse::HdpTrainOptions;
using tse::TopicModel;
using tse::testing::make_corpus;

HdpTrainOptions iters(std::size_t n, std::uint64_t seed = 1) {
  HdpTrainOptions o;
  o.iterations = n;
  o.seed = seed;
  return o;
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

// Three topics over four words; topic 2 owns words 0 and 3.
TopicModel three_topic_model() {
  const std::size_t V = 4, K = 3;
  std::vector<std::uint32_t> counts(K * V, 0);
  counts[0 * V + 1] = 1000;
  counts[1 * V + 2] = 1000;
  counts[2 * V + 0] = 1000;
  counts[2 * V + 3] = 1000;
  return TopicModel(HdpHyper{}, V, K, counts, {0.3, 0.3, 0.4});
}

TEST(HdpHyper, Validation) {
  EXPECT_NO_THROW(HdpHyper{}.validate());
  EXPECT_THROW((HdpHyper{0.0, 1.0, 0.01, 10}.validate()), tse::ConfigError);
  EXPECT_THROW((HdpHyper{1.0, -1.0, 0.01, 10}.validate()), tse::ConfigError);
  EXPECT_THROW((HdpHyper{1.0, 1.0, 0.0, 10}.validate()), tse::ConfigError);
  EXPECT_THROW((HdpHyper{1.0, 1.0, 0.01, 0}.validate()), tse::ConfigError);
}

TEST(TrainHdp, SingleWordCorpusHasOneTopic) {
  const auto corpus = make_corpus({"x"});
  const auto r = tse::train_hdp(corpus, HdpHyper{}, iters(50));
  ASSERT_EQ(r.model.num_topics(), 1u);
  EXPECT_EQ(r.model.topic_word_count(0, 0), 1u);
  EXPECT_EQ(r.model.topic_count(0), 1u);
}

TEST(TrainHdp, ZeroRetainedTokensIsAnError) {
  const auto vocab = tse::Vocabulary::from_entries({{"a", 5}});
  const auto corpus = tse::testing::make_corpus_with({"zzz", ""}, vocab);
  EXPECT_THROW(tse::train_hdp(corpus, HdpHyper{}, iters(1)), tse::Error);
}

TEST(TrainHdp, ZeroIterationsIsAnError) {
  const auto corpus = make_corpus({"a b"});
  EXPECT_THROW(tse::train_hdp(corpus, HdpHyper{}, iters(0)), tse::ConfigError);
}

TEST(TrainHdp, CountConservationAtEveryIteration) {
  tse::LdaCorpusConfig cfg;
  cfg.documents = 40;
  cfg.tokens_per_doc = 30;
  const auto lda = tse::make_lda_corpus(cfg);
  const auto corpus = make_corpus(lda.lines);
  std::size_t checks = 0;
  tse::train_hdp(corpus, HdpHyper{}, iters(30), [&](std::size_t, const tse::HdpSampler& s) {
    ++checks;
    EXPECT_TRUE(s.counts_consistent());
    EXPECT_EQ(s.assigned_tokens(), s.corpus_tokens());
    EXPECT_EQ(s.corpus_tokens(), corpus.token_count());
  });
  EXPECT_EQ(checks, 30u);
}

TEST(TrainHdp, ModelInvariants) {
  const auto lda = tse::make_lda_corpus({});
  const auto corpus = make_corpus(lda.lines);
  const auto r = tse::train_hdp(corpus, HdpHyper{}, iters(30));
  const auto& m = r.model;
  std::uint64_t total = 0;
  for (std::size_t k = 0; k < m.num_topics(); ++k) {
    std::uint64_t row = 0;
    for (std::size_t w = 0; w < m.vocab_size(); ++w) row += m.topic_word_count(static_cast<tse::TopicId>(k), static_cast<tse::WordId>(w));
    EXPECT_EQ(row, m.topic_count(static_cast<tse::TopicId>(k)));
    total += row;
  }
  EXPECT_EQ(total, corpus.token_count());
  EXPECT_LE(m.num_topics(), HdpHyper{}.max_topics);
  EXPECT_NEAR(std::accumulate(m.beta().begin(), m.beta().end(), 0.0), 1.0, 1e-12);
  // Training labels agree with the model counts.
  std::vector<std::uint64_t> recount(m.num_topics(), 0);
  for (const auto& doc : r.training_labels.labels) {
    for (auto k : doc) {
      ASSERT_GE(k, 0);
      ASSERT_LT(static_cast<std::size_t>(k), m.num_topics());
      ++recount[static_cast<std::size_t>(k)];
    }
  }
  for (std::size_t k = 0; k < m.num_topics(); ++k) EXPECT_EQ(recount[k], m.topic_count(static_cast<tse::TopicId>(k)));
  EXPECT_EQ(r.log_likelihood_trace.size(), 30u);
}

TEST(TrainHdp, DeterministicForSeed) {
  const auto lda = tse::make_lda_corpus({});
  const auto corpus = make_corpus(lda.lines);
  const auto a = tse::train_hdp(corpus, HdpHyper{}, iters(20, 9));
  const auto b = tse::train_hdp(corpus, HdpHyper{}, iters(20, 9));
  EXPECT_TRUE(a.model == b.model);
  EXPECT_TRUE(a.training_labels == b.training_labels);
  EXPECT_EQ(a.log_likelihood_trace, b.log_likelihood_trace);
}

TEST(TrainHdp, RecoversGeneratorTopics) {
  const auto lda = tse::make_lda_corpus({});
  const auto corpus = make_corpus(lda.lines);
  const auto r = tse::train_hdp(corpus, HdpHyper{}, iters(1000, 1));
  const auto& m = r.model;
  EXPECT_GE(m.num_topics(), 3u);
  EXPECT_LE(m.num_topics(), 5u);

  // Generator phi re-indexed into vocabulary ids.
  std::vector<std::vector<double>> truth;
  for (const auto& row : lda.topic_word) {
    std::vector<double> p(corpus.vocab.size(), 0.0);
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (auto id = corpus.vocab.find(lda.words[i])) p[static_cast<std::size_t>(*id)] = row[i];
    }
    truth.push_back(p);
  }
  std::vector<bool> used_truth(truth.size(), false), used_learned(m.num_topics(), false);
  double sum = 0.0;
  for (std::size_t step = 0; step < truth.size(); ++step) {
    double best = 2.0;
    std::size_t bt = 0, bl = 0;
    for (std::size_t t = 0; t < truth.size(); ++t) {
      if (used_truth[t]) continue;
      for (std::size_t k = 0; k < m.num_topics(); ++k) {
        if (used_learned[k]) continue;
        const double tv = total_variation(truth[t], m.topic_word_distribution(static_cast<tse::TopicId>(k)));
        if (tv < best) best = tv, bt = t, bl = k;
      }
    }
    used_truth[bt] = used_learned[bl] = true;
    sum += best;
  }
  EXPECT_LE(sum / static_cast<double>(truth.size()), 0.3);
}

TEST(Finalize, PruningKeepsEveryTopicAboveThreshold) {
  const auto lda = tse::make_lda_corpus({});
  const auto corpus = make_corpus(lda.lines);
  tse::HdpSampler sampler(corpus, HdpHyper{}, 4);
  for (int i = 0; i < 15; ++i) sampler.sweep();
  const auto all = sampler.finalize(0.0);
  const double threshold = 0.05;
  const auto pruned = sampler.finalize(threshold);
  const double total = static_cast<double>(all.model.total_count());
  std::size_t above = 0;
  for (std::size_t k = 0; k < all.model.num_topics(); ++k) {
    if (all.model.topic_count(static_cast<tse::TopicId>(k)) / total >= threshold) ++above;
  }
  EXPECT_EQ(pruned.model.num_topics(), std::max<std::size_t>(above, 1));
  EXPECT_EQ(pruned.model.total_count(), all.model.total_count());
  for (const auto& doc : pruned.labels.labels) {
    for (auto k : doc) EXPECT_LT(static_cast<std::size_t>(k), pruned.model.num_topics());
  }
  // Surviving slots keep their relative order.
  tse::TopicId last = -1;
  for (auto r : pruned.remap) {
    if (r < 0) continue;
    EXPECT_EQ(r, last + 1);
    last = r;
  }
}

TEST(TopicModel, PhiMatchesFormula) {
  const auto m = three_topic_model();
  const double eta = m.hyper().eta;
  EXPECT_DOUBLE_EQ(m.phi(2, 0), (1000 + eta) / (2000 + 4 * eta));
  EXPECT_DOUBLE_EQ(m.phi(0, 0), eta / (1000 + 4 * eta));
  const auto row = m.topic_word_distribution(1);
  EXPECT_NEAR(std::accumulate(row.begin(), row.end(), 0.0), 1.0, 1e-12);
  EXPECT_EQ(m.most_probable_topic(), 2);
}

TEST(TopicModel, SaveLoadRoundTrip) {
  const auto m = three_topic_model();
  std::stringstream ss;
  m.save(ss);
  EXPECT_EQ(ss.str().substr(0, 4), "HDP1");
  const auto back = TopicModel::load(ss);
  EXPECT_TRUE(back == m);
}

TEST(TopicModel, BadMagic) {
  std::stringstream ss("XXXX0000000000000000000");
  EXPECT_THROW(TopicModel::load(ss), tse::FormatError);
}

TEST(TopicModel, TruncatedFile) {
  std::stringstream ss;
  three_topic_model().save(ss);
  const std::string s = ss.str();
  std::stringstream cut(s.substr(0, s.size() - 3));
  EXPECT_THROW(TopicModel::load(cut), tse::FormatError);
}

TEST(FoldIn, SingleTopicModel) {
  TopicModel m(HdpHyper{}, 3, 1, {1, 2, 3}, {1.0});
  const std::vector<tse::WordId> doc{0, 1, 2, 2};
  const auto r = tse::fold_in(m, doc, 1);
  EXPECT_EQ(r.distribution, (std::vector<double>{1.0}));
  EXPECT_EQ(r.labels, (std::vector<tse::TopicId>{0, 0, 0, 0}));
}

TEST(FoldIn, EmptyDocumentReturnsBeta) {
  const auto m = three_topic_model();
  const auto r = tse::fold_in(m, std::vector<tse::WordId>{}, 1);
  EXPECT_EQ(r.distribution, m.beta());
  const auto oov = tse::fold_in(m, std::vector<tse::WordId>{tse::kNoWord, tse::kNoWord}, 1);
  EXPECT_EQ(oov.distribution, m.beta());
  EXPECT_EQ(oov.labels, (std::vector<tse::TopicId>{2, 2}));
}

TEST(FoldIn, OptionsValidated) {
  const auto m = three_topic_model();
  EXPECT_THROW(tse::fold_in(m, std::vector<tse::WordId>{0}, 1, {5, 5}), tse::ConfigError);
}

TEST(FoldIn, DistributionSumsToOne) {
  const auto m = three_topic_model();
  tse::Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    std::vector<tse::WordId> doc;
    for (int i = 0; i < 12; ++i) doc.push_back(static_cast<tse::WordId>(tse::uniform_below(rng, 4)));
    const auto r = tse::fold_in(m, doc, static_cast<std::uint64_t>(t));
    EXPECT_NEAR(std::accumulate(r.distribution.begin(), r.distribution.end(), 0.0), 1.0, 1e-9);
    for (double p : r.distribution) EXPECT_GE(p, 0.0);
  }
}

TEST(LabelCorpus, DominantTopicFrequencyMatchesExactConditional) {
  const auto m = three_topic_model();
  // Token 0 is word 0; the rest of the document is word 3, owned by topic 2.
  const std::vector<tse::WordId> doc{0, 3, 3, 3, 3};
  // Exact conditional with the other four tokens in topic 2.
  std::vector<double> p(3);
  for (int k = 0; k < 3; ++k) {
    const double n_dk = k == 2 ? 4.0 : 0.0;
    p[static_cast<std::size_t>(k)] = (n_dk + m.hyper().alpha0 * m.beta()[static_cast<std::size_t>(k)]) * m.phi(k, 0);
  }
  const double exact = p[2] / (p[0] + p[1] + p[2]);
  ASSERT_GT(exact, 0.99);

  int hits = 0;
  const int runs = 1000;
  for (int s = 0; s < runs; ++s) hits += tse::fold_in(m, doc, static_cast<std::uint64_t>(s)).labels[0] == 2;
  const double freq = hits / static_cast<double>(runs);
  EXPECT_GE(freq, 0.99);
  EXPECT_LE(std::abs(freq - exact), 4 * std::sqrt(exact * (1 - exact) / runs) + 1e-3);
}

TEST(LabelCorpus, ShapeMatchesCorpus) {
  tse::LdaCorpusConfig cfg;
  cfg.documents = 10;
  cfg.tokens_per_doc = 17;
  const auto lda = tse::make_lda_corpus(cfg);
  auto corpus = make_corpus(lda.lines);
  const auto r = tse::train_hdp(corpus, HdpHyper{}, iters(10));
  const auto labels = tse::label_corpus(r.model, corpus, 3);
  ASSERT_EQ(labels.labels.size(), corpus.documents.size());
  for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
    ASSERT_EQ(labels.labels[d].size(), corpus.documents[d].tokens.size());
    for (auto k : labels.labels[d]) {
      EXPECT_GE(k, 0);
      EXPECT_LT(static_cast<std::size_t>(k), r.model.num_topics());
    }
  }
  // Thread count does not change the result.
  EXPECT_TRUE(tse::label_corpus(r.model, corpus, 3, {}, 3) == labels);
}

TEST(LabelCorpus, SingleTopicLabelsZero) {
  const auto corpus = make_corpus({"a b c", "c b", "a"});
  TopicModel m(HdpHyper{}, corpus.vocab.size(), 1, std::vector<std::uint32_t>(corpus.vocab.size(), 1), {1.0});
  const auto labels = tse::label_corpus(m, corpus, 1);
  for (const auto& doc : labels.labels) {
    for (auto k : doc) EXPECT_EQ(k, 0);
  }
}

TEST(LabelCorpus, VocabularyMismatch) {
  const auto corpus = make_corpus({"a b c"});
  const auto m = three_topic_model();  // |V| = 4
  EXPECT_THROW(tse::label_corpus(m, corpus, 1), tse::FormatError);
  EXPECT_THROW(tse::infer_corpus_topics(m, corpus, 1), tse::FormatError);
}

TEST(InferDocTopics, ExclusiveWordsConcentrateOnAlignedTopic) {
  const auto lda = tse::make_lda_corpus({});
  const auto corpus = make_corpus(lda.lines);
  const auto r = tse::train_hdp(corpus, HdpHyper{}, iters(1000, 1));
  // A document of generator topic 0's words only.
  std::string line;
  for (int rep = 0; rep < 5; ++rep) {
    for (std::size_t i = 0; i < 10; ++i) line += lda.words[i] + " ";
  }
  const auto doc = tse::testing::make_corpus_with({line}, corpus.vocab).documents[0];
  const auto dist = tse::infer_doc_topics(r.model, doc, 5);
  // Aligned topic: the learned topic with the most mass on those words.
  std::size_t aligned = 0;
  double best = -1.0;
  for (std::size_t k = 0; k < r.model.num_topics(); ++k) {
    double mass = 0.0;
    for (std::size_t i = 0; i < 10; ++i) mass += r.model.phi(static_cast<tse::TopicId>(k), corpus.vocab.id_of(lda.words[i]));
    if (mass > best) best = mass, aligned = k;
  }
  EXPECT_GE(dist[aligned], 0.8);
}

TEST(CorpusLogLikelihood, SingleToken) {
  const auto corpus = make_corpus({"a"});
  TopicModel m(HdpHyper{}, 1, 1, {3}, {1.0});
  tse::TopicLabeling lab{{{0}}};
  EXPECT_DOUBLE_EQ(tse::corpus_log_likelihood(m, lab, corpus), std::log(m.phi(0, 0)));
}

TEST(CorpusLogLikelihood, MatchesRecomputationFromCounts) {
  const auto lda = tse::make_lda_corpus({});
  const auto corpus = make_corpus(lda.lines);
  const auto r = tse::train_hdp(corpus, HdpHyper{}, iters(20));
  const auto& m = r.model;
  // Recompute phi from raw counts.
  const double eta = m.hyper().eta, V = static_cast<double>(m.vocab_size());
  double expected = 0.0;
  for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
    for (std::size_t i = 0; i < corpus.documents[d].tokens.size(); ++i) {
      const auto k = r.training_labels.labels[d][i];
      const auto w = corpus.documents[d].tokens[i];
      double nk = 0.0;
      for (std::size_t v = 0; v < m.vocab_size(); ++v) nk += m.topic_word_count(k, static_cast<tse::WordId>(v));
      expected += std::log((m.topic_word_count(k, w) + eta) / (nk + V * eta));
    }
  }
  EXPECT_NEAR(tse::corpus_log_likelihood(m, r.training_labels, corpus), expected, 1e-9 * std::abs(expected));
}

TEST(CorpusLogLikelihood, MoreTextIsLessLikely) {
  const auto corpus = make_corpus({"a b", "b a a"});
  TopicModel m(HdpHyper{}, 2, 1, {3, 2}, {1.0});
  const auto labels = tse::label_corpus(m, corpus, 1);
  tse::Corpus smaller = corpus;
  smaller.documents.pop_back();
  tse::TopicLabeling small_labels{{labels.labels[0]}};
  EXPECT_LT(tse::corpus_log_likelihood(m, labels, corpus), tse::corpus_log_likelihood(m, small_labels, smaller));
}

TEST(CorpusLogLikelihood, ShapeMismatch) {
  const auto corpus = make_corpus({"a b"});
  TopicModel m(HdpHyper{}, 2, 1, {1, 1}, {1.0});
  EXPECT_THROW(tse::corpus_log_likelihood(m, tse::TopicLabeling{{{0}}}, corpus), tse::Error);
}

TEST(LabelingFile, RoundTrip) {
  const auto corpus = make_corpus({"a b c", "", "c c"});
  tse::TopicLabeling lab{{{0, 2, 1}, {}, {1, 1}}};
  std::stringstream ss;
  tse::write_labeling(ss, corpus, lab);
  EXPECT_EQ(ss.str(), "a|0 b|2 c|1\n\nc|1 c|1\n");
  EXPECT_TRUE(tse::read_labeling(ss, corpus) == lab);
}

TEST(LabelingFile, RejectsMismatch) {
  const auto corpus = make_corpus({"a b"});
  std::istringstream wrong_word("a|0 c|1\n");
  EXPECT_THROW(tse::read_labeling(wrong_word, corpus), tse::FormatError);
  std::istringstream bad_topic("a|x b|0\n");
  EXPECT_THROW(tse::read_labeling(bad_topic, corpus), tse::FormatError);
}

TEST(DocTopicsFile, RoundTripSumsToOne) {
  tse::DocTopics topics{{0.5, 0.25, 0.25}, {0.99995, 0.00005, 0.0}};
  std::stringstream ss;
  tse::write_doc_topics(ss, topics);
  EXPECT_EQ(ss.str(), "0 0:0.5 1:0.25 2:0.25\n1 0:0.99995\n");
  const auto back = tse::read_doc_topics(ss, 3);
  ASSERT_EQ(back.size(), 2u);
  for (const auto& row : back) EXPECT_NEAR(std::accumulate(row.begin(), row.end(), 0.0), 1.0, 1e-9);
  EXPECT_DOUBLE_EQ(back[0][1], 0.25);
  std::stringstream everything;
  tse::write_doc_topics(everything, topics, 0.0);
  EXPECT_EQ(everything.str(), "0 0:0.5 1:0.25 2:0.25\n1 0:0.99995 1:5e-05 2:0\n");
}

TEST(DocTopicsFile, InfersTopicCountAndRejectsGarbage) {
  std::istringstream in("0 3:1\n1 0:1\n");
  EXPECT_EQ(tse::read_doc_topics(in, 0)[0].size(), 4u);
  std::istringstream bad("0 1:abc\n");
  EXPECT_THROW(tse::read_doc_topics(bad, 2), tse::FormatError);
  std::istringstream oob("0 5:1\n");
  EXPECT_THROW(tse::read_doc_topics(oob, 2), tse::FormatError);
}

}  // namespace
