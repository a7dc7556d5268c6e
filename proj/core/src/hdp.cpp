#include "tse/hdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>

#include "tse/binary_io.hpp"
#include "tse/error.hpp"
#include "tse/text.hpp"

namespace tse {

void HdpHyper::validate() const {
  if (!(gamma > 0) || !(alpha0 > 0) || !(eta > 0)) throw ConfigError("HDP concentrations must be positive");
  if (max_topics < 1) throw ConfigError("max_topics must be >= 1");
}

void FoldInOptions::validate() const {
  if (sweeps < 1) throw ConfigError("fold-in needs at least one sweep");
  if (burn_in >= sweeps) throw ConfigError("fold-in burn-in must be smaller than the sweep count");
}

// ---------------------------------------------------------------------------
// TopicModel

TopicModel::TopicModel(HdpHyper hyper, std::size_t vocab_size, std::size_t num_topics,
                       std::vector<std::uint32_t> topic_word_count, std::vector<double> beta)
    : hyper_(hyper),
      vocab_size_(vocab_size),
      num_topics_(num_topics),
      topic_word_(std::move(topic_word_count)),
      beta_(std::move(beta)) {
  hyper_.validate();
  if (num_topics_ < 1) throw FormatError("topic model needs at least one topic");
  if (topic_word_.size() != num_topics_ * vocab_size_) throw FormatError("topic-word table has the wrong size");
  if (beta_.size() != num_topics_) throw FormatError("beta has the wrong size");
  const double beta_sum = std::accumulate(beta_.begin(), beta_.end(), 0.0);
  if (!(beta_sum > 0)) throw FormatError("beta must have positive mass");
  for (auto& b : beta_) {
    if (!(b >= 0)) throw FormatError("beta entries must be non-negative");
    b /= beta_sum;
  }
  topic_count_.assign(num_topics_, 0);
  inv_denominator_.resize(num_topics_);
  for (std::size_t k = 0; k < num_topics_; ++k) {
    std::uint64_t total = 0;
    for (std::size_t w = 0; w < vocab_size_; ++w) total += topic_word_[k * vocab_size_ + w];
    topic_count_[k] = total;
    inv_denominator_[k] = 1.0 / (static_cast<double>(total) + hyper_.eta * static_cast<double>(vocab_size_));
  }
}

std::uint64_t TopicModel::total_count() const {
  return std::accumulate(topic_count_.begin(), topic_count_.end(), std::uint64_t{0});
}

TopicId TopicModel::most_probable_topic() const {
  return static_cast<TopicId>(std::max_element(beta_.begin(), beta_.end()) - beta_.begin());
}

std::vector<double> TopicModel::topic_word_distribution(TopicId k) const {
  std::vector<double> phi_k(vocab_size_);
  for (std::size_t w = 0; w < vocab_size_; ++w) phi_k[w] = phi(k, static_cast<WordId>(w));
  return phi_k;
}

void TopicModel::save(std::ostream& out) const {
  io::write_magic(out, "HDP1");
  io::write_u32(out, static_cast<std::uint32_t>(num_topics_));
  io::write_u32(out, static_cast<std::uint32_t>(vocab_size_));
  io::write_f64(out, hyper_.gamma);
  io::write_f64(out, hyper_.alpha0);
  io::write_f64(out, hyper_.eta);
  io::write_u64(out, hyper_.max_topics);
  for (auto c : topic_word_) io::write_u32(out, c);
  for (auto b : beta_) io::write_f64(out, b);
}

void TopicModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  save(out);
}

TopicModel TopicModel::load(std::istream& in) {
  if (io::read_magic(in, 4) != "HDP1") throw FormatError("not an HDP1 topic model");
  const std::size_t k = io::read_u32(in);
  const std::size_t v = io::read_u32(in);
  HdpHyper hyper;
  hyper.gamma = io::read_f64(in);
  hyper.alpha0 = io::read_f64(in);
  hyper.eta = io::read_f64(in);
  hyper.max_topics = io::read_u64(in);
  if (k == 0 || k > (1u << 20) || v > (1u << 28) || k * v > (std::size_t{1} << 32)) {
    throw FormatError("topic model dimensions out of range");
  }
  std::vector<std::uint32_t> counts(k * v);
  for (auto& c : counts) c = io::read_u32(in);
  std::vector<double> beta(k);
  for (auto& b : beta) b = io::read_f64(in);
  return TopicModel(hyper, v, k, std::move(counts), std::move(beta));
}

TopicModel TopicModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return load(in);
}

// ---------------------------------------------------------------------------
// Collapsed Gibbs sampler

HdpSampler::HdpSampler(const Corpus& corpus, HdpHyper hyper, std::uint64_t seed)
    : hyper_(hyper), rng_(derive_seed(seed, 0x4844)), vocab_size_(corpus.vocab.size()) {
  hyper_.validate();
  docs_.reserve(corpus.documents.size());
  for (const auto& doc : corpus.documents) {
    for (WordId w : doc.tokens) {
      if (w < 0 || static_cast<std::size_t>(w) >= vocab_size_) throw FormatError("token id outside vocabulary");
    }
    docs_.push_back(doc.tokens);
    corpus_tokens_ += doc.tokens.size();
  }
  if (corpus_tokens_ == 0) throw FormatError("corpus has no tokens to model");

  z_.resize(docs_.size());
  doc_topic_.resize(docs_.size());
  // Sequential initialization: every token is drawn from the conditional
  // given the tokens placed before it.
  for (std::size_t d = 0; d < docs_.size(); ++d) {
    z_[d].resize(docs_[d].size());
    for (std::size_t i = 0; i < docs_[d].size(); ++i) {
      const WordId w = docs_[d][i];
      const TopicId k = sample_topic(d, w);
      z_[d][i] = k;
      add_token(d, w, k);
    }
  }
  sample_beta();
}

std::size_t HdpSampler::active_topics() const {
  return static_cast<std::size_t>(std::count(active_.begin(), active_.end(), true));
}

std::uint64_t HdpSampler::assigned_tokens() const {
  std::uint64_t n = 0;
  for (std::size_t k = 0; k < active_.size(); ++k) n += static_cast<std::uint64_t>(topic_count_[k]);
  return n;
}

void HdpSampler::add_token(std::size_t d, WordId w, TopicId k) {
  const auto slot = static_cast<std::size_t>(k);
  auto& dk = doc_topic_[d];
  if (dk.size() <= slot) dk.resize(active_.size(), 0);
  ++dk[slot];
  ++topic_word_[slot][static_cast<std::size_t>(w)];
  ++topic_count_[slot];
}

void HdpSampler::remove_token(std::size_t d, WordId w, TopicId k) {
  const auto slot = static_cast<std::size_t>(k);
  --doc_topic_[d][slot];
  --topic_word_[slot][static_cast<std::size_t>(w)];
  if (--topic_count_[slot] == 0) {
    // An emptied topic returns its stick mass to the unused remainder.
    active_[slot] = false;
    beta_new_ += beta_[slot];
    beta_[slot] = 0.0;
  }
}

TopicId HdpSampler::new_slot() {
  std::size_t slot = 0;
  while (slot < active_.size() && active_[slot]) ++slot;
  if (slot == active_.size()) {
    active_.push_back(false);
    beta_.push_back(0.0);
    topic_count_.push_back(0);
    topic_word_.emplace_back(vocab_size_, 0);
  }
  const double b = tse::sample_beta(rng_, 1.0, hyper_.gamma);
  active_[slot] = true;
  beta_[slot] = b * beta_new_;
  beta_new_ *= 1.0 - b;
  return static_cast<TopicId>(slot);
}

TopicId HdpSampler::sample_topic(std::size_t d, WordId w) {
  const std::size_t slots = active_.size();
  scratch_.resize(slots);
  const auto& dk = doc_topic_[d];
  const double v_eta = hyper_.eta * static_cast<double>(vocab_size_);
  std::size_t n_active = 0;
  double total = 0.0;
  for (std::size_t k = 0; k < slots; ++k) {
    if (active_[k]) {
      ++n_active;
      const double n_dk = k < dk.size() ? dk[k] : 0;
      total += (n_dk + hyper_.alpha0 * beta_[k]) * (topic_word_[k][static_cast<std::size_t>(w)] + hyper_.eta) /
               (static_cast<double>(topic_count_[k]) + v_eta);
    }
    scratch_[k] = total;
  }
  const bool allow_new = n_active < hyper_.max_topics;
  const double p_new = allow_new ? hyper_.alpha0 * beta_new_ / static_cast<double>(vocab_size_) : 0.0;
  const double u = uniform01(rng_) * (total + p_new);
  if (u >= total && allow_new) return new_slot();
  std::size_t k = static_cast<std::size_t>(std::upper_bound(scratch_.begin(), scratch_.end(), u) - scratch_.begin());
  if (k >= slots) k = slots - 1;
  while (!active_[k]) --k;  // rounding at the very top can land on a trailing inactive slot
  return static_cast<TopicId>(k);
}

void HdpSampler::sample_beta() {
  // Antoniak draws of table counts, then beta ~ Dir(m_1..m_K, gamma).
  std::vector<double> tables(active_.size(), 0.0);
  for (const auto& dk : doc_topic_) {
    for (std::size_t k = 0; k < dk.size(); ++k) {
      if (dk[k] <= 0) continue;
      const double a = hyper_.alpha0 * beta_[k];
      double m = 1.0;
      for (std::int32_t j = 1; j < dk[k]; ++j) {
        if (sample_bernoulli(rng_, a / (a + j))) m += 1.0;
      }
      tables[k] += m;
    }
  }
  double total = 0.0;
  for (std::size_t k = 0; k < active_.size(); ++k) {
    beta_[k] = active_[k] ? sample_gamma(rng_, tables[k]) : 0.0;
    total += beta_[k];
  }
  beta_new_ = sample_gamma(rng_, hyper_.gamma);
  total += beta_new_;
  for (auto& b : beta_) b /= total;
  beta_new_ /= total;
  total_tables_ = std::accumulate(tables.begin(), tables.end(), 0.0);
}

void HdpSampler::sweep() {
  for (std::size_t d = 0; d < docs_.size(); ++d) {
    const auto& doc = docs_[d];
    for (std::size_t i = 0; i < doc.size(); ++i) {
      const WordId w = doc[i];
      remove_token(d, w, z_[d][i]);
      const TopicId k = sample_topic(d, w);
      z_[d][i] = k;
      add_token(d, w, k);
    }
  }
  sample_beta();
}

void HdpSampler::resample_hyperparameters(double prior_shape, double prior_rate) {
  // Escobar & West auxiliary-variable updates.
  const double m = total_tables_;
  double sum_log_w = 0.0;
  double sum_s = 0.0;
  for (const auto& doc : docs_) {
    if (doc.empty()) continue;
    const auto n = static_cast<double>(doc.size());
    sum_log_w += std::log(tse::sample_beta(rng_, hyper_.alpha0 + 1.0, n));
    if (sample_bernoulli(rng_, n / (n + hyper_.alpha0))) sum_s += 1.0;
  }
  hyper_.alpha0 = sample_gamma(rng_, prior_shape + m - sum_s, 1.0 / (prior_rate - sum_log_w));

  const auto k = static_cast<double>(active_topics());
  const double eta_aux = tse::sample_beta(rng_, hyper_.gamma + 1.0, m);
  const double rate = prior_rate - std::log(eta_aux);
  const double odds = (prior_shape + k - 1.0) / (m * rate);
  const double shape = sample_bernoulli(rng_, odds / (1.0 + odds)) ? prior_shape + k : prior_shape + k - 1.0;
  hyper_.gamma = sample_gamma(rng_, std::max(shape, 1e-3), 1.0 / rate);
}

bool HdpSampler::counts_consistent() const {
  std::vector<std::vector<std::int32_t>> tw(active_.size(), std::vector<std::int32_t>(vocab_size_, 0));
  std::vector<std::int64_t> tc(active_.size(), 0);
  for (std::size_t d = 0; d < docs_.size(); ++d) {
    std::vector<std::int32_t> dk(active_.size(), 0);
    for (std::size_t i = 0; i < docs_[d].size(); ++i) {
      const auto k = static_cast<std::size_t>(z_[d][i]);
      if (k >= active_.size() || !active_[k]) return false;
      ++dk[k];
      ++tw[k][static_cast<std::size_t>(docs_[d][i])];
      ++tc[k];
    }
    for (std::size_t k = 0; k < active_.size(); ++k) {
      const std::int32_t stored = k < doc_topic_[d].size() ? doc_topic_[d][k] : 0;
      if (stored != dk[k]) return false;
    }
  }
  for (std::size_t k = 0; k < active_.size(); ++k) {
    if (tc[k] != topic_count_[k] || tw[k] != topic_word_[k]) return false;
    if (active_[k] != (tc[k] > 0)) return false;
  }
  return assigned_tokens() == corpus_tokens_;
}

double HdpSampler::log_likelihood() const {
  const double v_eta = hyper_.eta * static_cast<double>(vocab_size_);
  const double lg_eta = std::lgamma(hyper_.eta);
  double ll = 0.0;
  for (std::size_t k = 0; k < active_.size(); ++k) {
    if (!active_[k]) continue;
    ll += std::lgamma(v_eta) - std::lgamma(static_cast<double>(topic_count_[k]) + v_eta);
    for (auto c : topic_word_[k]) {
      if (c > 0) ll += std::lgamma(c + hyper_.eta) - lg_eta;
    }
  }
  return ll;
}

HdpSampler::Result HdpSampler::finalize(double prune_threshold) const {
  const std::size_t slots = active_.size();
  const auto total = static_cast<double>(assigned_tokens());
  std::vector<bool> keep(slots, false);
  std::size_t kept = 0;
  for (std::size_t k = 0; k < slots; ++k) {
    if (active_[k] && static_cast<double>(topic_count_[k]) / total >= prune_threshold) {
      keep[k] = true;
      ++kept;
    }
  }
  if (kept == 0) {
    std::size_t best = 0;
    for (std::size_t k = 0; k < slots; ++k) {
      if (topic_count_[k] > topic_count_[best]) best = k;
    }
    keep[best] = true;
  }

  auto z = z_;
  auto doc_topic = doc_topic_;
  auto topic_word = topic_word_;
  auto topic_count = topic_count_;
  for (auto& dk : doc_topic) dk.resize(slots, 0);
  const double v_eta = hyper_.eta * static_cast<double>(vocab_size_);
  for (std::size_t d = 0; d < docs_.size(); ++d) {
    for (std::size_t i = 0; i < docs_[d].size(); ++i) {
      const auto old = static_cast<std::size_t>(z[d][i]);
      if (keep[old]) continue;
      const auto w = static_cast<std::size_t>(docs_[d][i]);
      --doc_topic[d][old];
      --topic_word[old][w];
      --topic_count[old];
      std::size_t best = slots;
      double best_p = -1.0;
      for (std::size_t k = 0; k < slots; ++k) {
        if (!keep[k]) continue;
        const double p = (doc_topic[d][k] + hyper_.alpha0 * beta_[k]) * (topic_word[k][w] + hyper_.eta) /
                         (static_cast<double>(topic_count[k]) + v_eta);
        if (p > best_p) {
          best_p = p;
          best = k;
        }
      }
      ++doc_topic[d][best];
      ++topic_word[best][w];
      ++topic_count[best];
      z[d][i] = static_cast<TopicId>(best);
    }
  }

  Result result;
  result.remap.assign(slots, -1);
  std::size_t next = 0;
  std::vector<std::uint32_t> counts;
  std::vector<double> beta;
  for (std::size_t k = 0; k < slots; ++k) {
    if (!keep[k]) continue;
    result.remap[k] = static_cast<TopicId>(next++);
    for (auto c : topic_word[k]) counts.push_back(static_cast<std::uint32_t>(c));
    beta.push_back(std::max(beta_[k], 1e-300));
  }
  result.model = TopicModel(hyper_, vocab_size_, next, std::move(counts), std::move(beta));
  result.labels.labels.resize(z.size());
  for (std::size_t d = 0; d < z.size(); ++d) {
    result.labels.labels[d].reserve(z[d].size());
    for (TopicId k : z[d]) result.labels.labels[d].push_back(result.remap[static_cast<std::size_t>(k)]);
  }
  return result;
}

HdpTrainResult train_hdp(const Corpus& corpus, const HdpHyper& hyper, const HdpTrainOptions& options,
                         const HdpObserver& observer) {
  if (options.iterations < 1) throw ConfigError("HDP training needs at least one iteration");
  if (!(options.prune_threshold >= 0 && options.prune_threshold < 1)) {
    throw ConfigError("prune threshold must be in [0, 1)");
  }
  HdpSampler sampler(corpus, hyper, options.seed);
  HdpTrainResult out;
  out.log_likelihood_trace.reserve(options.iterations);
  for (std::size_t it = 1; it <= options.iterations; ++it) {
    sampler.sweep();
    if (options.resample_hyper) sampler.resample_hyperparameters(options.hyper_prior_shape, options.hyper_prior_rate);
    out.log_likelihood_trace.push_back(sampler.log_likelihood());
    if (observer) observer(it, sampler);
  }
  auto finalized = sampler.finalize(options.prune_threshold);
  out.model = std::move(finalized.model);
  out.remap = std::move(finalized.remap);
  out.training_labels = std::move(finalized.labels);
  return out;
}

// ---------------------------------------------------------------------------
// Fold-in

FoldInResult fold_in(const TopicModel& model, std::span<const WordId> tokens, std::uint64_t seed,
                     const FoldInOptions& options) {
  options.validate();
  const std::size_t k_count = model.num_topics();
  const double alpha0 = model.hyper().alpha0;
  const auto& beta = model.beta();
  const TopicId fallback = model.most_probable_topic();

  FoldInResult result;
  result.labels.assign(tokens.size(), fallback);

  std::vector<std::size_t> positions;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const WordId w = tokens[i];
    if (w == kNoWord) continue;
    if (w < 0 || static_cast<std::size_t>(w) >= model.vocab_size()) throw FormatError("token id outside topic model vocabulary");
    positions.push_back(i);
  }
  if (positions.empty()) {
    result.distribution = beta;
    return result;
  }
  if (k_count == 1) {
    result.labels.assign(tokens.size(), 0);
    result.distribution = {1.0};
    return result;
  }

  // phi is frozen, so each token's column is computed once.
  const std::size_t n = positions.size();
  std::vector<double> phi(n * k_count);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < k_count; ++k) {
      phi[j * k_count + k] = model.phi(static_cast<TopicId>(k), tokens[positions[j]]);
    }
  }
  std::vector<double> prior(k_count);
  for (std::size_t k = 0; k < k_count; ++k) prior[k] = alpha0 * beta[k];

  Rng rng(seed);
  std::vector<std::int32_t> n_dk(k_count, 0);
  std::vector<TopicId> z(n, 0);
  std::vector<double> cdf(k_count);
  auto draw = [&](std::size_t j) {
    double total = 0.0;
    const double* col = &phi[j * k_count];
    for (std::size_t k = 0; k < k_count; ++k) {
      total += (n_dk[k] + prior[k]) * col[k];
      cdf[k] = total;
    }
    const double u = uniform01(rng) * total;
    auto k = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    return static_cast<TopicId>(std::min(k, k_count - 1));
  };

  for (std::size_t j = 0; j < n; ++j) {
    z[j] = draw(j);
    ++n_dk[static_cast<std::size_t>(z[j])];
  }
  std::vector<double> theta_sum(k_count, 0.0);
  std::size_t samples = 0;
  const double denom = static_cast<double>(n) + alpha0;
  for (std::size_t sweep = 0; sweep < options.sweeps; ++sweep) {
    for (std::size_t j = 0; j < n; ++j) {
      --n_dk[static_cast<std::size_t>(z[j])];
      z[j] = draw(j);
      ++n_dk[static_cast<std::size_t>(z[j])];
    }
    if (sweep >= options.burn_in) {
      for (std::size_t k = 0; k < k_count; ++k) theta_sum[k] += (n_dk[k] + prior[k]) / denom;
      ++samples;
    }
  }
  for (std::size_t j = 0; j < n; ++j) result.labels[positions[j]] = z[j];
  double total = 0.0;
  for (auto& t : theta_sum) total += t;
  result.distribution.resize(k_count);
  for (std::size_t k = 0; k < k_count; ++k) result.distribution[k] = theta_sum[k] / total;
  return result;
}

namespace {

void check_vocab(const TopicModel& model, const Corpus& corpus) {
  if (model.vocab_size() != corpus.vocab.size()) {
    throw FormatError("vocabulary size mismatch: topic model has " + std::to_string(model.vocab_size()) +
                      " words, corpus vocabulary has " + std::to_string(corpus.vocab.size()));
  }
}

template <typename Fn>
void for_each_document(std::size_t n_docs, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n_docs));
  if (threads == 1) {
    for (std::size_t d = 0; d < n_docs; ++d) fn(d);
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t d = t; d < n_docs; d += threads) fn(d);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

TopicLabeling label_corpus(const TopicModel& model, const Corpus& corpus, std::uint64_t seed,
                           const FoldInOptions& options, std::size_t threads) {
  check_vocab(model, corpus);
  options.validate();
  TopicLabeling labeling;
  labeling.labels.resize(corpus.documents.size());
  for_each_document(corpus.documents.size(), threads, [&](std::size_t d) {
    labeling.labels[d] = fold_in(model, corpus.documents[d].tokens, derive_seed(seed, d), options).labels;
  });
  return labeling;
}

TopicDist infer_doc_topics(const TopicModel& model, const Document& doc, std::uint64_t seed,
                           const FoldInOptions& options) {
  return fold_in(model, doc.tokens, derive_seed(seed, doc.doc_id), options).distribution;
}

DocTopics infer_corpus_topics(const TopicModel& model, const Corpus& corpus, std::uint64_t seed,
                              const FoldInOptions& options, std::size_t threads) {
  check_vocab(model, corpus);
  options.validate();
  DocTopics out(corpus.documents.size());
  for_each_document(corpus.documents.size(), threads, [&](std::size_t d) {
    out[d] = infer_doc_topics(model, corpus.documents[d], seed, options);
  });
  return out;
}

double corpus_log_likelihood(const TopicModel& model, const TopicLabeling& labeling, const Corpus& corpus) {
  if (labeling.labels.size() != corpus.documents.size()) throw FormatError("labeling and corpus differ in length");
  double ll = 0.0;
  for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
    const auto& tokens = corpus.documents[d].tokens;
    const auto& labels = labeling.labels[d];
    if (labels.size() != tokens.size()) throw FormatError("labeling shape differs at document " + std::to_string(d));
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= model.num_topics()) {
        throw FormatError("topic label out of range");
      }
      ll += std::log(model.phi(labels[i], tokens[i]));
    }
  }
  return ll;
}

// ---------------------------------------------------------------------------
// Text formats

void write_labeling(std::ostream& out, const Corpus& corpus, const TopicLabeling& labeling) {
  if (labeling.labels.size() != corpus.documents.size()) throw FormatError("labeling and corpus differ in length");
  for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
    const auto& tokens = corpus.documents[d].tokens;
    if (labeling.labels[d].size() != tokens.size()) throw FormatError("labeling shape differs at document " + std::to_string(d));
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (i) out << ' ';
      out << corpus.vocab.token_of(tokens[i]) << '|' << labeling.labels[d][i];
    }
    out << '\n';
  }
  if (!out) throw IoError("failed to write labeling");
}

TopicLabeling read_labeling(std::istream& in, const Corpus& corpus) {
  TopicLabeling labeling;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no > corpus.documents.size()) throw FormatError("labeling has more lines than the corpus");
    const auto& tokens = corpus.documents[line_no - 1].tokens;
    std::vector<TopicId> labels;
    std::istringstream ss(line);
    std::string item;
    while (ss >> item) {
      const auto bar = item.rfind('|');
      const std::string where = "labeling line " + std::to_string(line_no);
      if (bar == std::string::npos) throw FormatError(where + ": token without topic");
      if (labels.size() >= tokens.size()) throw FormatError(where + ": more tokens than the corpus document");
      const std::string word = item.substr(0, bar);
      if (word != corpus.vocab.token_of(tokens[labels.size()])) throw FormatError(where + ": word mismatch '" + word + "'");
      int k = 0;
      try {
        std::size_t used = 0;
        k = std::stoi(item.substr(bar + 1), &used);
        if (used != item.size() - bar - 1 || k < 0) throw std::invalid_argument("topic");
      } catch (const std::exception&) {
        throw FormatError(where + ": bad topic id in '" + item + "'");
      }
      labels.push_back(k);
    }
    if (labels.size() != tokens.size()) throw FormatError("labeling line " + std::to_string(line_no) + ": fewer tokens than the corpus document");
    labeling.labels.push_back(std::move(labels));
  }
  if (labeling.labels.size() != corpus.documents.size()) throw FormatError("labeling has fewer lines than the corpus");
  return labeling;
}

void write_doc_topics(std::ostream& out, const DocTopics& topics, double min_prob) {
  char buf[64];
  for (std::size_t d = 0; d < topics.size(); ++d) {
    out << d;
    for (std::size_t k = 0; k < topics[d].size(); ++k) {
      if (topics[d][k] < min_prob) continue;
      std::snprintf(buf, sizeof buf, " %zu:%.9g", k, topics[d][k]);
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw IoError("failed to write document topics");
}

DocTopics read_doc_topics(std::istream& in, std::size_t num_topics) {
  std::vector<std::vector<std::pair<std::size_t, double>>> sparse;
  std::size_t max_topic = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = "doc-topic line " + std::to_string(line_no);
    std::istringstream ss(line);
    std::size_t doc_id = 0;
    if (!(ss >> doc_id)) throw FormatError(where + ": missing document id");
    if (doc_id != sparse.size()) throw FormatError(where + ": document ids must be dense and ordered");
    std::vector<std::pair<std::size_t, double>> entries;
    std::string item;
    while (ss >> item) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) throw FormatError(where + ": expected k:p");
      try {
        const std::size_t k = std::stoul(item.substr(0, colon));
        const double p = std::stod(item.substr(colon + 1));
        if (!(p >= 0)) throw std::invalid_argument("p");
        entries.emplace_back(k, p);
        max_topic = std::max(max_topic, k);
      } catch (const std::exception&) {
        throw FormatError(where + ": bad entry '" + item + "'");
      }
    }
    if (entries.empty()) throw FormatError(where + ": no topic entries");
    sparse.push_back(std::move(entries));
  }
  if (num_topics == 0) num_topics = max_topic + 1;
  if (max_topic >= num_topics) throw FormatError("doc-topic file references topic " + std::to_string(max_topic) +
                                                 " but the model has " + std::to_string(num_topics));
  DocTopics out(sparse.size(), TopicDist(num_topics, 0.0));
  for (std::size_t d = 0; d < sparse.size(); ++d) {
    double total = 0.0;
    for (auto [k, p] : sparse[d]) {
      out[d][k] += p;
      total += p;
    }
    if (!(total > 0)) throw FormatError("doc-topic line " + std::to_string(d + 1) + ": zero mass");
    for (auto& p : out[d]) p /= total;
  }
  return out;
}

}  // namespace tse
