#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tse/random.hpp"

namespace tse {

using WordId = std::int32_t;

/// Placeholder for an out-of-vocabulary token inside an evaluation context.
/// Never stored in a Document.
inline constexpr WordId kNoWord = -1;

inline constexpr std::size_t kDefaultMinCount = 5;
inline constexpr double kDefaultSubsample = 1e-4;
inline constexpr double kDefaultNegativePower = 0.75;

/// Token <-> id map with occurrence counts. Ids are ordered by descending
/// count, ties broken lexicographically.
class Vocabulary {
 public:
  Vocabulary() = default;

  /// Entries must already be in id order (descending count).
  static Vocabulary from_entries(std::vector<std::pair<std::string, std::uint64_t>> entries);

  [[nodiscard]] std::size_t size() const { return tokens_.size(); }
  [[nodiscard]] bool empty() const { return tokens_.empty(); }
  [[nodiscard]] std::optional<WordId> find(std::string_view token) const;
  /// Throws OovError when absent.
  [[nodiscard]] WordId id_of(std::string_view token) const;
  [[nodiscard]] const std::string& token_of(WordId id) const;
  [[nodiscard]] std::uint64_t count(WordId id) const;
  [[nodiscard]] std::uint64_t total_tokens() const { return total_; }
  [[nodiscard]] const std::vector<std::string>& tokens() const { return tokens_; }
  [[nodiscard]] const std::vector<std::uint64_t>& counts() const { return counts_; }

  /// TSV "token<TAB>count" per line, descending count.
  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(std::istream& in);
  static Vocabulary load(const std::filesystem::path& path);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_ && a.counts_ == b.counts_;
  }

 private:
  std::vector<std::string> tokens_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, WordId> ids_;
  std::uint64_t total_ = 0;
};

struct Document {
  std::size_t doc_id = 0;
  std::vector<WordId> tokens;
};

struct Corpus {
  std::vector<Document> documents;
  Vocabulary vocab;

  [[nodiscard]] std::size_t token_count() const;
};

/// Counts tokens of a one-document-per-line stream. Throws FormatError
/// "empty corpus" if no token survives tokenization, and a FormatError naming
/// the line on invalid UTF-8.
Vocabulary build_vocab(std::istream& raw_corpus, std::size_t min_count = kDefaultMinCount);
Vocabulary build_vocab(const std::filesystem::path& path, std::size_t min_count = kDefaultMinCount);

Corpus load_corpus(std::istream& in, const Vocabulary& vocab);
Corpus load_corpus(const std::filesystem::path& path, const Vocabulary& vocab);

/// Maps raw text to ids with the corpus tokenizer; OOV tokens are dropped.
std::vector<WordId> encode_line(std::string_view line, const Vocabulary& vocab);

/// Writes the corpus back as text, one document per line.
void write_corpus(std::ostream& out, const Corpus& corpus);

/// word2vec-style subsampling: min(1, sqrt(t/f) + t/f) with f the relative
/// frequency of the word.
double keep_probability(const Vocabulary& vocab, WordId word, double threshold);

/// Samples word ids with probability proportional to count^power (Walker's
/// alias method, O(1) per draw).
class NegativeSampler {
 public:
  NegativeSampler(const Vocabulary& vocab, double power = kDefaultNegativePower);

  WordId sample(Rng& rng) const;
  [[nodiscard]] double probability(WordId word) const { return probability_.at(static_cast<std::size_t>(word)); }
  [[nodiscard]] std::size_t size() const { return probability_.size(); }

 private:
  std::vector<double> probability_;
  std::vector<double> accept_;
  std::vector<WordId> alias_;
};

inline NegativeSampler negative_table(const Vocabulary& vocab, double power = kDefaultNegativePower) {
  return NegativeSampler(vocab, power);
}

}  // namespace tse
