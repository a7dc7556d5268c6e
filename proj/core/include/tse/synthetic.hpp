#pragma once

// Synthetic corpora with known structure, used to check topic recovery and
// sense separation end to end.

#include <cstdint>
#include <string>
#include <vector>

#include "tse/datasets.hpp"

namespace tse {

struct LdaCorpusConfig {
  std::size_t topics = 3;
  std::size_t words_per_topic = 10;  ///< disjoint vocabularies
  std::size_t documents = 200;
  std::size_t tokens_per_doc = 100;
  double doc_alpha = 0.3;  ///< symmetric Dirichlet over topics per document
  std::uint64_t seed = 1;
};

struct LdaCorpus {
  std::vector<std::string> lines;
  std::vector<std::string> words;                  ///< word index -> token
  std::vector<std::vector<double>> topic_word;     ///< generator phi over `words`
  std::vector<std::vector<double>> doc_topic;      ///< generator theta
};

LdaCorpus make_lda_corpus(const LdaCorpusConfig& config);

/// Two topically disjoint domains generated by a random walk over concept
/// rings. Each concept has several synonymous surface forms; a pseudoword
/// replaces the main form of one concept in each domain.
struct PseudoSenseConfig {
  std::size_t docs_per_domain = 2500;
  std::size_t tokens_per_doc = 100;
  std::size_t concepts_per_domain = 60;
  std::size_t synonyms_per_concept = 3;
  std::size_t shared_words = 40;
  double shared_rate = 0.25;
  std::size_t walk_step = 2;
  /// Number of fused word pairs. The first fuses the main forms of both
  /// concepts and is balanced between domains; the others fuse a main form
  /// in domain A with the rarest form in domain B, so sense A dominates.
  std::size_t pseudowords = 4;
  std::uint64_t seed = 7;
};

struct Pseudoword {
  std::string name;
  std::string word_a;  ///< replaced surface form in domain A
  std::string word_b;
  std::vector<std::string> synonyms_a;  ///< other forms of the fused concepts
  std::vector<std::string> synonyms_b;
};

struct PseudoSenseCorpus {
  std::vector<std::string> lines;
  std::vector<int> domain;  ///< 0 = A, 1 = B, per line
  std::vector<std::string> domain_a_words;
  std::vector<std::string> domain_b_words;
  std::vector<std::string> shared_words;
  std::vector<Pseudoword> pseudowords;
  PseudoSenseConfig config;
};

PseudoSenseCorpus make_pseudo_sense_corpus(const PseudoSenseConfig& config);

/// Lexical substitution instances for the pseudowords, with fresh sentences
/// from the same generator. Gold = the same-domain synonyms of the fused
/// concept, more frequent forms weighted higher. Pseudoword i is tagged with
/// POS n., v., adj., adv. in turn.
std::vector<LexsubInstance> make_synthetic_lexsub(const PseudoSenseCorpus& corpus, std::size_t instances_per_sense,
                                                  std::uint64_t seed);

/// SCWS-style pairs for the pseudowords: same-domain pairs rated high,
/// cross-domain pairs rated low.
std::vector<ScwsInstance> make_synthetic_scws(const PseudoSenseCorpus& corpus, std::size_t pairs, std::uint64_t seed);

}  // namespace tse
