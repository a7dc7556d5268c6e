#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tse/datasets.hpp"
#include "tse/inference.hpp"

namespace tse {

/// Pearson correlation of average ranks. Throws on length mismatch, fewer
/// than two items or zero rank variance.
double spearman(std::span<const double> xs, std::span<const double> ys);

/// Average (mid) ranks, 1-based.
std::vector<double> average_ranks(std::span<const double> values);

/// Generalized average precision of a ranking against weighted gold items.
double gap(std::span<const std::string> ranking, std::span<const std::pair<std::string, int>> gold);

enum class MwMethod { kAuto, kExact, kNormal };

struct MannWhitneyResult {
  double u = 0.0;  ///< U statistic of the first sample
  double p = 1.0;  ///< two-sided
  bool exact = false;
};

/// Mann-Whitney-Wilcoxon rank-sum test. Auto uses exact enumeration when
/// n_a + n_b <= 16 and the tie-corrected normal approximation otherwise.
MannWhitneyResult mann_whitney(std::span<const double> a, std::span<const double> b,
                               MwMethod method = MwMethod::kAuto);

/// "▲" for p < .01, "△" for p < .05, "" otherwise.
std::string_view significance_marker(double p);

struct ScwsReport {
  double rho = 0.0;
  std::size_t pairs = 0;
  std::size_t oov_pairs = 0;
  std::vector<double> scores;
};

/// Context tokens mapped to ids, unknown words as kNoWord.
ScoredContext make_context(const Vocabulary& vocab, std::span<const std::string> tokens, std::size_t target_index);

ScwsReport eval_scws(const EmbeddingModel& model, const TopicAssigner* topics, std::span<const ScwsInstance> data,
                     const ScorerOptions& options = {});

enum class LexsubScorer { kSampled, kExpected, kSgeC };
std::string_view scorer_name(LexsubScorer s);
LexsubScorer parse_scorer(std::string_view name);

struct LexsubInstanceResult {
  std::string id;
  std::string pos;
  double gap = 0.0;
  /// No candidate could be scored; the lexicographic fallback ranking was used.
  bool fallback = false;
  std::vector<std::string> ranking;
};

struct LexsubReport {
  double overall = 0.0;
  std::map<std::string, std::pair<double, std::size_t>> by_pos;  ///< mean GAP, instance count
  std::vector<LexsubInstanceResult> instances;
  std::size_t dropped_multiword = 0;
  std::size_t dropped_instances = 0;
  std::size_t fallback_instances = 0;

  [[nodiscard]] std::vector<double> instance_gaps() const;
};

/// Candidates for an instance are the pooled gold substitutes of every
/// instance with the same target and POS. Scorable candidates are ranked by
/// descending score (ties lexicographic), unscorable ones follow
/// lexicographically.
LexsubReport eval_lexsub(const EmbeddingModel& model, const TopicAssigner* topics,
                         std::span<const LexsubInstance> data, LexsubScorer scorer,
                         const ScorerOptions& options = {});

/// Fixed-width table with one row per run and n./v./adj./adv./All columns.
/// Runs after the first carry a significance marker against the first.
std::string format_lexsub_table(std::span<const std::pair<std::string, LexsubReport>> runs);

}  // namespace tse
