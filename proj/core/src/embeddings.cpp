#include "tse/embeddings.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <thread>

#include "tse/binary_io.hpp"
#include "tse/error.hpp"

namespace tse {
namespace {

constexpr std::uint64_t entry_key(WordId w, TopicId k) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(w)) << 32) | static_cast<std::uint32_t>(k);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// log(1 + exp(x)) without overflow.
double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

void check_word(const EmbeddingModel& model, WordId w) {
  if (w < 0 || static_cast<std::size_t>(w) >= model.vocab_size()) throw OovError("word id " + std::to_string(w));
}

void check_topic(const EmbeddingModel& model, TopicId k) {
  if (k < 0 || static_cast<std::size_t>(k) >= model.num_topics()) {
    throw ConfigError("topic " + std::to_string(k) + " out of range for a model with " +
                      std::to_string(model.num_topics()) + " topics");
  }
}

void check_distribution(const EmbeddingModel& model, std::span<const double> p) {
  if (p.size() != model.num_topics()) {
    throw ConfigError("malformed topic distribution: " + std::to_string(p.size()) + " entries for " +
                      std::to_string(model.num_topics()) + " topics");
  }
  double total = 0.0;
  for (double x : p) {
    if (!(x >= 0) || !std::isfinite(x)) throw ConfigError("malformed topic distribution: negative or non-finite entry");
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-6) throw ConfigError("malformed topic distribution: entries sum to " + std::to_string(total));
}

// Mean of the word's topic rows; used for (word, topic) pairs never trained.
Vector fallback_row(const EmbeddingModel& model, WordId w) {
  const auto entries = model.topic_entries_of(w);
  if (entries.empty()) throw OovError(model.vocab().token_of(w) + " has no topic representations");
  Vector v(model.dim(), 0.0);
  for (auto e : entries) axpy(1.0, model.topic_row(e), v);
  for (auto& x : v) x /= static_cast<double>(entries.size());
  return v;
}

/// Topic indices with positive mass, most probable first, at most top_m.
std::vector<std::pair<TopicId, double>> top_topics(std::span<const double> p, std::size_t top_m) {
  std::vector<std::pair<TopicId, double>> out;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] > 0) out.emplace_back(static_cast<TopicId>(k), p[k]);
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (top_m > 0 && out.size() > top_m) out.resize(top_m);
  double total = 0.0;
  for (const auto& [k, w] : out) total += w;
  for (auto& [k, w] : out) w /= total;
  return out;
}

}  // namespace

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::kSge: return "sge";
    case Variant::kHtle: return "htle";
    case Variant::kHtleAdd: return "htleadd";
    case Variant::kStle: return "stle";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "sge") return Variant::kSge;
  if (lower == "htle") return Variant::kHtle;
  if (lower == "htleadd") return Variant::kHtleAdd;
  if (lower == "stle") return Variant::kStle;
  throw ConfigError("unknown variant '" + std::string(name) + "' (expected sge, htle, htleadd or stle)");
}

void TrainConfig::validate() const {
  if (dim < 1) throw ConfigError("dim must be >= 1");
  if (window < 1) throw ConfigError("window must be >= 1");
  if (negatives < 1) throw ConfigError("negatives must be >= 1");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (!(learning_rate > 0)) throw ConfigError("learning rate must be > 0");
  if (!(subsample >= 0)) throw ConfigError("subsampling threshold must be >= 0 (0 disables)");
  if (!(negative_power > 0 && negative_power <= 1)) throw ConfigError("negative power must be in (0, 1]");
  if (threads < 1) throw ConfigError("threads must be >= 1");
}

// ---------------------------------------------------------------------------
// EmbeddingModel

EmbeddingModel::EmbeddingModel(Variant variant, std::size_t dim, std::size_t num_topics, Vocabulary vocab,
                               std::vector<std::pair<WordId, TopicId>> topic_entries)
    : variant_(variant), dim_(dim), num_topics_(num_topics), vocab_(std::move(vocab)) {
  if (dim_ < 1) throw ConfigError("dim must be >= 1");
  if (variant_ != Variant::kSge) {
    if (num_topics_ < 1) throw ConfigError("topic variants need at least one topic");
    if (!std::is_sorted(topic_entries.begin(), topic_entries.end()) ||
        std::adjacent_find(topic_entries.begin(), topic_entries.end()) != topic_entries.end()) {
      throw ConfigError("topic entries must be sorted and unique");
    }
    for (const auto& [w, k] : topic_entries) {
      if (w < 0 || static_cast<std::size_t>(w) >= vocab_.size() || k < 0 ||
          static_cast<std::size_t>(k) >= num_topics_) {
        throw ConfigError("topic entry out of range");
      }
    }
    entry_keys_ = std::move(topic_entries);
  }
  topic_table_.assign(entry_keys_.size() * dim_, 0.0);
  if (has_generic_table()) generic_table_.assign(vocab_.size() * dim_, 0.0);
  output_table_.assign(vocab_.size() * dim_, 0.0);
  index_entries();
}

void EmbeddingModel::index_entries() {
  entry_index_.clear();
  entry_index_.reserve(entry_keys_.size());
  word_entry_offsets_.assign(vocab_.size() + 1, 0);
  word_entries_.resize(entry_keys_.size());
  for (std::size_t e = 0; e < entry_keys_.size(); ++e) {
    entry_index_.emplace(entry_key(entry_keys_[e].first, entry_keys_[e].second), e);
    ++word_entry_offsets_[static_cast<std::size_t>(entry_keys_[e].first) + 1];
  }
  std::partial_sum(word_entry_offsets_.begin(), word_entry_offsets_.end(), word_entry_offsets_.begin());
  // Entries are sorted by (word, topic), so they are already grouped by word.
  std::iota(word_entries_.begin(), word_entries_.end(), std::size_t{0});
}

std::optional<std::size_t> EmbeddingModel::find_topic_entry(WordId w, TopicId k) const {
  auto it = entry_index_.find(entry_key(w, k));
  if (it == entry_index_.end()) return std::nullopt;
  return it->second;
}

std::span<const std::size_t> EmbeddingModel::topic_entries_of(WordId w) const {
  if (w < 0 || static_cast<std::size_t>(w) >= vocab_.size() || entry_keys_.empty()) return {};
  const auto b = word_entry_offsets_[static_cast<std::size_t>(w)];
  const auto e = word_entry_offsets_[static_cast<std::size_t>(w) + 1];
  return {word_entries_.data() + b, e - b};
}

std::string EmbeddingModel::entry_name(std::size_t topic_entry) const {
  const auto [w, k] = entry_keys_.at(topic_entry);
  return vocab_.token_of(w) + "#" + std::to_string(k);
}

namespace {
constexpr char kModelFormatVersion = '1';
}

void EmbeddingModel::save(std::ostream& out) const {
  io::write_magic(out, std::string("TSE") + kModelFormatVersion);
  io::write_u8(out, static_cast<std::uint8_t>(variant_));
  io::write_u32(out, static_cast<std::uint32_t>(dim_));
  io::write_u32(out, static_cast<std::uint32_t>(num_topics_));
  io::write_u32(out, static_cast<std::uint32_t>(vocab_.size()));
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    io::write_string(out, vocab_.tokens()[i]);
    io::write_u64(out, vocab_.counts()[i]);
  }
  io::write_u64(out, entry_keys_.size());
  for (const auto& [w, k] : entry_keys_) {
    io::write_u32(out, static_cast<std::uint32_t>(w));
    io::write_u32(out, static_cast<std::uint32_t>(k));
  }
  for (double x : topic_table_) io::write_f64(out, x);
  for (double x : generic_table_) io::write_f64(out, x);
  for (double x : output_table_) io::write_f64(out, x);
}

void EmbeddingModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  save(out);
}

EmbeddingModel EmbeddingModel::load(std::istream& in) {
  const std::string magic = io::read_magic(in, 4);
  if (magic.compare(0, 3, "TSE") != 0) throw FormatError("not a TSE embedding model (bad magic bytes)");
  if (magic[3] != kModelFormatVersion) {
    throw FormatError(std::string("unsupported embedding model version ") + magic[3] + " (this build reads version " +
                      kModelFormatVersion + ")");
  }
  const std::uint8_t variant_byte = io::read_u8(in);
  if (variant_byte > static_cast<std::uint8_t>(Variant::kStle)) throw FormatError("unknown variant byte");
  const auto variant = static_cast<Variant>(variant_byte);
  const std::size_t dim = io::read_u32(in);
  const std::size_t k = io::read_u32(in);
  const std::size_t v = io::read_u32(in);
  if (dim == 0 || dim > (1u << 16) || v > (1u << 26)) throw FormatError("model dimensions out of range");
  std::vector<std::pair<std::string, std::uint64_t>> entries;
  entries.reserve(v);
  for (std::size_t i = 0; i < v; ++i) {
    std::string tok = io::read_string(in);
    const std::uint64_t c = io::read_u64(in);
    entries.emplace_back(std::move(tok), c);
  }
  const std::uint64_t n_entries = io::read_u64(in);
  if (n_entries > std::uint64_t{v} * std::max<std::size_t>(k, 1)) throw FormatError("topic entry count out of range");
  std::vector<std::pair<WordId, TopicId>> keys(n_entries);
  for (auto& [w, t] : keys) {
    w = static_cast<WordId>(io::read_u32(in));
    t = static_cast<TopicId>(io::read_u32(in));
  }
  EmbeddingModel model(variant, dim, k, Vocabulary::from_entries(std::move(entries)), std::move(keys));
  for (auto& x : model.topic_table_) x = io::read_f64(in);
  for (auto& x : model.generic_table_) x = io::read_f64(in);
  for (auto& x : model.output_table_) x = io::read_f64(in);
  return model;
}

EmbeddingModel EmbeddingModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return load(in);
}

void EmbeddingModel::export_text(std::ostream& out) const {
  const std::size_t n_generic = generic_table_.size() / dim_;
  const std::size_t total = entry_keys_.size() + n_generic + vocab_.size();
  out << total << ' ' << dim_ << '\n';
  char buf[32];
  auto write_row = [&](const std::string& name, std::span<const double> r) {
    out << name;
    for (double x : r) {
      std::snprintf(buf, sizeof buf, " %.6f", x);
      out << buf;
    }
    out << '\n';
  };
  for (std::size_t e = 0; e < entry_keys_.size(); ++e) write_row(entry_name(e), topic_row(e));
  for (std::size_t w = 0; w < n_generic; ++w) write_row(vocab_.tokens()[w], generic_row(static_cast<WordId>(w)));
  for (std::size_t w = 0; w < vocab_.size(); ++w) write_row(vocab_.tokens()[w] + "@ctx", output_row(static_cast<WordId>(w)));
  if (!out) throw IoError("failed to write text export");
}

// ---------------------------------------------------------------------------
// Target representations

Vector topic_embedding(const EmbeddingModel& model, WordId word, TopicId topic) {
  check_word(model, word);
  const auto generic = [&] {
    auto r = model.generic_row(word);
    return Vector(r.begin(), r.end());
  };
  if (model.variant() == Variant::kSge) return generic();
  check_topic(model, topic);
  const auto entry = model.find_topic_entry(word, topic);
  if (model.variant() == Variant::kHtleAdd) {
    Vector h = generic();
    if (entry) axpy(1.0, model.topic_row(*entry), h);
    return h;
  }
  if (entry) {
    auto r = model.topic_row(*entry);
    return Vector(r.begin(), r.end());
  }
  return fallback_row(model, word);
}

Vector embed_mixture(const EmbeddingModel& model, WordId word, std::span<const double> weights) {
  check_word(model, word);
  if (model.variant() != Variant::kSge && weights.size() != model.num_topics()) {
    throw ConfigError("mixture weights need one entry per topic");
  }
  Vector h(model.dim(), 0.0);
  if (model.variant() == Variant::kSge) {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    axpy(total, model.generic_row(word), h);
    return h;
  }
  std::optional<Vector> fallback;
  double total = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] == 0.0) continue;
    total += weights[k];
    const auto entry = model.find_topic_entry(word, static_cast<TopicId>(k));
    if (entry) {
      axpy(weights[k], model.topic_row(*entry), h);
    } else if (model.variant() != Variant::kHtleAdd) {
      if (!fallback) fallback = fallback_row(model, word);
      axpy(weights[k], *fallback, h);
    }
  }
  if (model.variant() == Variant::kHtleAdd) axpy(total, model.generic_row(word), h);
  return h;
}

Vector embed_target(const EmbeddingModel& model, WordId word, const TopicInfo& topic) {
  check_word(model, word);
  switch (model.variant()) {
    case Variant::kSge:
      return topic_embedding(model, word, 0);
    case Variant::kHtle:
    case Variant::kHtleAdd:
      if (!std::holds_alternative<TopicId>(topic)) {
        throw ConfigError(std::string(variant_name(model.variant())) + " needs a hard topic id");
      }
      return topic_embedding(model, word, std::get<TopicId>(topic));
    case Variant::kStle:
      if (std::holds_alternative<TopicId>(topic)) return topic_embedding(model, word, std::get<TopicId>(topic));
      if (!std::holds_alternative<std::span<const double>>(topic)) {
        throw ConfigError("stle needs a topic distribution");
      }
      check_distribution(model, std::get<std::span<const double>>(topic));
      return embed_mixture(model, word, std::get<std::span<const double>>(topic));
  }
  throw ConfigError("unknown variant");
}

TargetSpec make_target(const EmbeddingModel& model, WordId word, const TopicInfo& topic, std::size_t stle_top_m) {
  check_word(model, word);
  TargetSpec spec;
  const auto topic_term = [&](TopicId k, double weight) {
    const auto entry = model.find_topic_entry(word, k);
    if (!entry) {
      throw OovError(model.vocab().token_of(word) + "#" + std::to_string(k) + " has no row in the model");
    }
    spec.terms.push_back({TargetTerm::Table::kTopic, *entry, weight});
  };
  switch (model.variant()) {
    case Variant::kSge:
      spec.terms.push_back({TargetTerm::Table::kGeneric, static_cast<std::size_t>(word), 1.0});
      break;
    case Variant::kHtle:
    case Variant::kHtleAdd:
      if (!std::holds_alternative<TopicId>(topic)) throw ConfigError("hard variants need a topic id");
      check_topic(model, std::get<TopicId>(topic));
      topic_term(std::get<TopicId>(topic), 1.0);
      if (model.variant() == Variant::kHtleAdd) {
        spec.terms.push_back({TargetTerm::Table::kGeneric, static_cast<std::size_t>(word), 1.0});
      }
      break;
    case Variant::kStle:
      if (std::holds_alternative<TopicId>(topic)) {
        check_topic(model, std::get<TopicId>(topic));
        topic_term(std::get<TopicId>(topic), 1.0);
      } else if (std::holds_alternative<std::span<const double>>(topic)) {
        const auto p = std::get<std::span<const double>>(topic);
        check_distribution(model, p);
        for (const auto& [k, w] : top_topics(p, stle_top_m)) topic_term(k, w);
      } else {
        throw ConfigError("stle needs a topic distribution");
      }
      break;
  }
  return spec;
}

// ---------------------------------------------------------------------------
// Negative-sampling update

double sgns_step(EmbeddingModel& model, const TargetSpec& target, WordId context, std::span<const WordId> negatives,
                 double lr, SgnsWorkspace& ws) {
  const std::size_t dim = model.dim();
  const auto input_row = [&](const TargetTerm& t) {
    return t.table == TargetTerm::Table::kTopic ? model.topic_row(t.index)
                                                : model.generic_row(static_cast<WordId>(t.index));
  };
  ws.hidden.assign(dim, 0.0);
  ws.hidden_grad.assign(dim, 0.0);
  for (const auto& t : target.terms) axpy(t.weight, input_row(t), ws.hidden);

  // Coefficients g = label - s(h.o) at the current point: (context, then negatives).
  ws.coefficients.clear();
  double loss = 0.0;
  const auto visit = [&](WordId w, double label) {
    const double x = dot(ws.hidden, model.output_row(w));
    loss += label > 0 ? softplus(-x) : softplus(x);
    const double g = label - sigmoid(x);
    ws.coefficients.push_back(g);
    axpy(g, model.output_row(w), ws.hidden_grad);
  };
  visit(context, 1.0);
  for (WordId n : negatives) {
    if (n != context) visit(n, 0.0);
  }
  if (lr == 0.0) return loss;

  std::size_t i = 0;
  axpy(lr * ws.coefficients[i++], ws.hidden, model.output_row(context));
  for (WordId n : negatives) {
    if (n != context) axpy(lr * ws.coefficients[i++], ws.hidden, model.output_row(n));
  }
  for (const auto& t : target.terms) axpy(lr * t.weight, ws.hidden_grad, input_row(t));
  return loss;
}

// ---------------------------------------------------------------------------
// Training

EmbeddingModel train_embeddings(const Corpus& corpus, const TopicLabeling* labeling, const DocTopics* doc_topics,
                                const TrainConfig& config, std::size_t num_topics, TrainStats* stats) {
  config.validate();
  const Variant variant = config.variant;
  const bool hard = variant == Variant::kHtle || variant == Variant::kHtleAdd;
  if (hard && labeling == nullptr) {
    throw ConfigError("variant " + std::string(variant_name(variant)) + " requires a topic labeling");
  }
  if (variant == Variant::kStle && doc_topics == nullptr) {
    throw ConfigError("variant stle requires document topic distributions");
  }
  const std::size_t n_docs = corpus.documents.size();
  if (hard) {
    if (labeling->labels.size() != n_docs) throw FormatError("labeling and corpus differ in length");
    TopicId max_label = 0;
    for (std::size_t d = 0; d < n_docs; ++d) {
      if (labeling->labels[d].size() != corpus.documents[d].tokens.size()) {
        throw FormatError("labeling shape differs at document " + std::to_string(d));
      }
      for (TopicId k : labeling->labels[d]) {
        if (k < 0) throw FormatError("negative topic label");
        max_label = std::max(max_label, k);
      }
    }
    if (num_topics == 0) num_topics = static_cast<std::size_t>(max_label) + 1;
    if (static_cast<std::size_t>(max_label) >= num_topics) throw FormatError("topic label exceeds the topic count");
  }
  if (variant == Variant::kStle) {
    if (doc_topics->size() != n_docs) throw FormatError("document topics and corpus differ in length");
    if (num_topics == 0) num_topics = n_docs > 0 ? (*doc_topics)[0].size() : 1;
    for (const auto& p : *doc_topics) {
      if (p.size() != num_topics) throw FormatError("document topic vector has the wrong length");
    }
  }
  if (variant == Variant::kSge) num_topics = std::max<std::size_t>(num_topics, 1);

  // STLE topic selections are fixed per document.
  std::vector<std::vector<std::pair<TopicId, double>>> doc_selection;
  if (variant == Variant::kStle) {
    doc_selection.reserve(n_docs);
    for (const auto& p : *doc_topics) doc_selection.push_back(top_topics(p, config.stle_top_m));
  }

  std::vector<std::pair<WordId, TopicId>> keys;
  if (hard) {
    for (std::size_t d = 0; d < n_docs; ++d) {
      const auto& toks = corpus.documents[d].tokens;
      for (std::size_t i = 0; i < toks.size(); ++i) keys.emplace_back(toks[i], labeling->labels[d][i]);
    }
  } else if (variant == Variant::kStle) {
    for (std::size_t d = 0; d < n_docs; ++d) {
      for (WordId w : corpus.documents[d].tokens) {
        for (const auto& [k, weight] : doc_selection[d]) keys.emplace_back(w, k);
      }
    }
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

  EmbeddingModel model(variant, config.dim, num_topics, corpus.vocab, std::move(keys));
  {
    Rng init(derive_seed(config.seed, 0));
    const double scale = 1.0 / static_cast<double>(config.dim);
    auto fill = [&](std::vector<double>& table) {
      for (auto& x : table) x = (uniform01(init) - 0.5) * scale;
    };
    if (model.has_topic_table()) fill(model.topic_table());
    if (model.has_generic_table()) fill(model.generic_table());
  }

  std::vector<double> keep(corpus.vocab.size());
  for (std::size_t w = 0; w < keep.size(); ++w) {
    keep[w] = config.subsample > 0 ? keep_probability(corpus.vocab, static_cast<WordId>(w), config.subsample) : 1.0;
  }
  const NegativeSampler sampler(corpus.vocab, config.negative_power);
  const double total_work = static_cast<double>(config.epochs) * static_cast<double>(corpus.token_count()) + 1.0;
  const double min_lr = config.learning_rate * 1e-4;

  const std::size_t threads = std::max<std::size_t>(1, std::min(config.threads, std::max<std::size_t>(n_docs, 1)));
  std::atomic<std::uint64_t> processed{0};
  std::vector<double> epoch_loss(config.epochs, 0.0);
  std::vector<std::uint64_t> epoch_pairs(config.epochs, 0);

  auto worker = [&](std::size_t thread_id, std::vector<double>& loss_out, std::vector<std::uint64_t>& pairs_out) {
    Rng rng(derive_seed(config.seed, 1 + thread_id));
    SgnsWorkspace ws;
    std::vector<std::size_t> sentence;
    std::vector<TargetSpec> targets;
    std::vector<WordId> negs(config.negatives);
    const std::size_t begin = n_docs * thread_id / threads;
    const std::size_t end = n_docs * (thread_id + 1) / threads;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
      double loss = 0.0;
      std::uint64_t pairs = 0;
      for (std::size_t d = begin; d < end; ++d) {
        const auto& toks = corpus.documents[d].tokens;
        sentence.clear();
        for (std::size_t i = 0; i < toks.size(); ++i) {
          const double p = keep[static_cast<std::size_t>(toks[i])];
          if (p < 1.0 && uniform01(rng) >= p) continue;
          sentence.push_back(i);
        }
        targets.clear();
        for (std::size_t i : sentence) {
          const WordId w = toks[i];
          if (hard) {
            targets.push_back(make_target(model, w, labeling->labels[d][i]));
          } else if (variant == Variant::kStle) {
            TargetSpec spec;
            for (const auto& [k, weight] : doc_selection[d]) {
              spec.terms.push_back({TargetTerm::Table::kTopic, *model.find_topic_entry(w, k), weight});
            }
            targets.push_back(std::move(spec));
          } else {
            targets.push_back(make_target(model, w, std::monostate{}));
          }
        }
        const std::uint64_t base = processed.load(std::memory_order_relaxed);
        for (std::size_t s = 0; s < sentence.size(); ++s) {
          const double progress = static_cast<double>(base + sentence[s]) / total_work;
          const double lr = std::max(min_lr, config.learning_rate * (1.0 - progress));
          const auto b = static_cast<std::ptrdiff_t>(1 + uniform_below(rng, config.window));
          const auto lo = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(s) - b);
          const auto hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(sentence.size()) - 1,
                                                   static_cast<std::ptrdiff_t>(s) + b);
          for (std::ptrdiff_t j = lo; j <= hi; ++j) {
            if (j == static_cast<std::ptrdiff_t>(s)) continue;
            const WordId ctx = toks[sentence[static_cast<std::size_t>(j)]];
            for (auto& n : negs) n = sampler.sample(rng);
            loss += sgns_step(model, targets[s], ctx, negs, lr, ws);
            ++pairs;
          }
        }
        processed.fetch_add(toks.size(), std::memory_order_relaxed);
      }
      loss_out[epoch] += loss;
      pairs_out[epoch] += pairs;
    }
  };

  if (threads == 1) {
    worker(0, epoch_loss, epoch_pairs);
  } else {
    std::vector<std::vector<double>> losses(threads, std::vector<double>(config.epochs, 0.0));
    std::vector<std::vector<std::uint64_t>> pairs(threads, std::vector<std::uint64_t>(config.epochs, 0));
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker, t, std::ref(losses[t]), std::ref(pairs[t]));
    for (auto& th : pool) th.join();
    for (std::size_t t = 0; t < threads; ++t) {
      for (std::size_t e = 0; e < config.epochs; ++e) {
        epoch_loss[e] += losses[t][e];
        epoch_pairs[e] += pairs[t][e];
      }
    }
  }

  if (stats) {
    stats->epoch_mean_loss.clear();
    stats->updates = 0;
    for (std::size_t e = 0; e < config.epochs; ++e) {
      stats->epoch_mean_loss.push_back(epoch_pairs[e] ? epoch_loss[e] / static_cast<double>(epoch_pairs[e]) : 0.0);
      stats->updates += epoch_pairs[e];
    }
  }
  return model;
}

// ---------------------------------------------------------------------------
// Nearest neighbors

std::vector<Neighbor> nearest_neighbors(const EmbeddingModel& model, WordId word, const TopicInfo& topic,
                                        std::size_t k) {
  if (k < 1) throw ConfigError("k must be >= 1");
  const Vector query = embed_target(model, word, topic);
  const double qn = std::sqrt(dot(query, query));

  struct Candidate {
    std::size_t index;
    double cosine;
  };
  std::vector<Candidate> candidates;
  const auto score = [&](std::span<const double> v) {
    const double vn = std::sqrt(dot(v, v));
    return (qn == 0.0 || vn == 0.0) ? 0.0 : dot(query, v) / (qn * vn);
  };

  if (model.variant() == Variant::kSge) {
    for (std::size_t w = 0; w < model.vocab_size(); ++w) {
      if (static_cast<WordId>(w) == word) continue;
      candidates.push_back({w, score(model.generic_row(static_cast<WordId>(w)))});
    }
  } else {
    std::optional<std::size_t> excluded;
    if (std::holds_alternative<TopicId>(topic)) excluded = model.find_topic_entry(word, std::get<TopicId>(topic));
    Vector buf(model.dim());
    for (std::size_t e = 0; e < model.topic_entry_count(); ++e) {
      if (excluded && *excluded == e) continue;
      auto row = model.topic_row(e);
      if (model.variant() == Variant::kHtleAdd) {
        auto generic = model.generic_row(model.topic_entry_key(e).first);
        for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = row[i] + generic[i];
        candidates.push_back({e, score(buf)});
      } else {
        candidates.push_back({e, score(row)});
      }
    }
  }

  const std::size_t n = std::min(k, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(n), candidates.end(),
                    [](const Candidate& a, const Candidate& b) {
                      return a.cosine != b.cosine ? a.cosine > b.cosine : a.index < b.index;
                    });
  std::vector<Neighbor> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = candidates[i];
    if (model.variant() == Variant::kSge) {
      const auto w = static_cast<WordId>(c.index);
      out.push_back({model.vocab().token_of(w), w, -1, c.cosine});
    } else {
      const auto [w, t] = model.topic_entry_key(c.index);
      out.push_back({model.entry_name(c.index), w, t, c.cosine});
    }
  }
  return out;
}

}  // namespace tse
