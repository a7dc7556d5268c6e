#include "tse/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "tse/error.hpp"
#include "tse/text.hpp"

namespace tse {
namespace {

std::vector<std::string> tokenize_line(std::string_view line, std::size_t line_no) {
  try {
    return text::tokenize(line);
  } catch (const FormatError&) {
    throw FormatError("invalid UTF-8 on line " + std::to_string(line_no));
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

}  // namespace

Vocabulary Vocabulary::from_entries(std::vector<std::pair<std::string, std::uint64_t>> entries) {
  Vocabulary v;
  v.tokens_.reserve(entries.size());
  v.counts_.reserve(entries.size());
  for (auto& [token, count] : entries) {
    if (token.empty()) throw FormatError("empty token in vocabulary");
    const auto id = static_cast<WordId>(v.tokens_.size());
    if (!v.ids_.emplace(token, id).second) throw FormatError("duplicate token in vocabulary: " + token);
    v.total_ += count;
    v.tokens_.push_back(std::move(token));
    v.counts_.push_back(count);
  }
  return v;
}

std::optional<WordId> Vocabulary::find(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

WordId Vocabulary::id_of(std::string_view token) const {
  auto id = find(token);
  if (!id) throw OovError(std::string(token));
  return *id;
}

const std::string& Vocabulary::token_of(WordId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) throw OovError("id " + std::to_string(id));
  return tokens_[static_cast<std::size_t>(id)];
}

std::uint64_t Vocabulary::count(WordId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= counts_.size()) throw OovError("id " + std::to_string(id));
  return counts_[static_cast<std::size_t>(id)];
}

void Vocabulary::save(std::ostream& out) const {
  for (std::size_t i = 0; i < tokens_.size(); ++i) out << tokens_[i] << '\t' << counts_[i] << '\n';
  if (!out) throw IoError("failed to write vocabulary");
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  save(out);
}

Vocabulary Vocabulary::load(std::istream& in) {
  std::vector<std::pair<std::string, std::uint64_t>> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw FormatError("vocabulary line " + std::to_string(line_no) + ": missing tab");
    std::uint64_t count = 0;
    try {
      std::size_t used = 0;
      count = std::stoull(line.substr(tab + 1), &used);
      if (used != line.size() - tab - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw FormatError("vocabulary line " + std::to_string(line_no) + ": bad count");
    }
    if (!entries.empty() && entries.back().second < count) {
      throw FormatError("vocabulary line " + std::to_string(line_no) + ": counts not in descending order");
    }
    entries.emplace_back(line.substr(0, tab), count);
  }
  return from_entries(std::move(entries));
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  auto in = open_input(path);
  return load(in);
}

std::size_t Corpus::token_count() const {
  std::size_t n = 0;
  for (const auto& d : documents) n += d.tokens.size();
  return n;
}

Vocabulary build_vocab(std::istream& raw_corpus, std::size_t min_count) {
  if (min_count < 1) throw ConfigError("min_count must be >= 1");
  std::unordered_map<std::string, std::uint64_t> counts;
  std::string line;
  std::size_t line_no = 0;
  std::uint64_t seen = 0;
  while (std::getline(raw_corpus, line)) {
    ++line_no;
    for (auto& tok : tokenize_line(line, line_no)) {
      ++counts[std::move(tok)];
      ++seen;
    }
  }
  if (seen == 0) throw FormatError("empty corpus");

  std::vector<std::pair<std::string, std::uint64_t>> entries;
  for (auto& [tok, c] : counts) {
    if (c >= min_count) entries.emplace_back(tok, c);
  }
  if (entries.empty()) throw FormatError("no token occurs at least " + std::to_string(min_count) + " times");
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  return Vocabulary::from_entries(std::move(entries));
}

Vocabulary build_vocab(const std::filesystem::path& path, std::size_t min_count) {
  auto in = open_input(path);
  return build_vocab(in, min_count);
}

std::vector<WordId> encode_line(std::string_view line, const Vocabulary& vocab) {
  std::vector<WordId> ids;
  for (const auto& tok : text::tokenize(line)) {
    if (auto id = vocab.find(tok)) ids.push_back(*id);
  }
  return ids;
}

Corpus load_corpus(std::istream& in, const Vocabulary& vocab) {
  Corpus corpus;
  corpus.vocab = vocab;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    Document doc;
    doc.doc_id = corpus.documents.size();
    for (const auto& tok : tokenize_line(line, line_no)) {
      if (auto id = vocab.find(tok)) doc.tokens.push_back(*id);
    }
    corpus.documents.push_back(std::move(doc));
  }
  if (in.bad()) throw IoError("read error while loading corpus");
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, const Vocabulary& vocab) {
  auto in = open_input(path);
  return load_corpus(in, vocab);
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& doc : corpus.documents) {
    for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
      if (i) out << ' ';
      out << corpus.vocab.token_of(doc.tokens[i]);
    }
    out << '\n';
  }
}

double keep_probability(const Vocabulary& vocab, WordId word, double threshold) {
  if (!(threshold > 0)) throw ConfigError("subsampling threshold must be > 0");
  const auto count = vocab.count(word);
  if (count == 0) return 1.0;
  const double f = static_cast<double>(count) / static_cast<double>(vocab.total_tokens());
  if (f <= threshold) return 1.0;
  const double r = threshold / f;
  return std::min(1.0, std::sqrt(r) + r);
}

NegativeSampler::NegativeSampler(const Vocabulary& vocab, double power) {
  if (!(power > 0 && power <= 1)) throw ConfigError("negative sampling power must be in (0, 1]");
  if (vocab.empty()) throw ConfigError("negative sampling over an empty vocabulary");
  const std::size_t n = vocab.size();
  probability_.resize(n);
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    probability_[i] = std::pow(static_cast<double>(vocab.counts()[i]), power);
    total += probability_[i];
  }
  if (!(total > 0)) throw ConfigError("negative sampling over a vocabulary with zero counts");
  for (auto& p : probability_) p /= total;

  // Vose's alias construction.
  accept_.assign(n, 1.0);
  alias_.resize(n);
  std::vector<double> scaled(n);
  std::vector<std::size_t> small, large;
  for (std::size_t i = 0; i < n; ++i) {
    alias_[i] = static_cast<WordId>(i);
    scaled[i] = probability_[i] * static_cast<double>(n);
    (scaled[i] < 1.0 ? small : large).push_back(i);
  }
  while (!small.empty() && !large.empty()) {
    const std::size_t s = small.back();
    small.pop_back();
    const std::size_t l = large.back();
    accept_[s] = scaled[s];
    alias_[s] = static_cast<WordId>(l);
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
}

WordId NegativeSampler::sample(Rng& rng) const {
  const auto i = static_cast<std::size_t>(uniform_below(rng, accept_.size()));
  return uniform01(rng) < accept_[i] ? static_cast<WordId>(i) : alias_[i];
}

}  // namespace tse
