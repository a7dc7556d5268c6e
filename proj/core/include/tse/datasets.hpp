#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace tse {

/// One SCWS pair. Contexts are whitespace-split with the target marked by
/// <b>...</b> in the source file.
struct ScwsInstance {
  std::string id;
  std::string word1, pos1;
  std::vector<std::string> context1;
  std::size_t target1 = 0;
  std::string word2, pos2;
  std::vector<std::string> context2;
  std::size_t target2 = 0;
  double human_score = 0.0;
};

struct LexsubInstance {
  std::string id;
  std::string target;
  std::string pos;  ///< normalized: "n.", "v.", "adj.", "adv." or as given
  std::size_t target_index = 0;
  std::vector<std::string> context;
  std::vector<std::pair<std::string, int>> gold;
};

/// Accepts the canonical 8-column TSV and the original SCWS release (extra
/// per-rater columns are ignored). Errors carry the 1-based line number.
std::vector<ScwsInstance> read_scws(std::istream& in);
std::vector<ScwsInstance> read_scws(const std::filesystem::path& path);
void write_scws(std::ostream& out, const std::vector<ScwsInstance>& data);

/// id, target, pos, target_index, context, "sub:weight;sub:weight".
std::vector<LexsubInstance> read_lexsub(std::istream& in);
std::vector<LexsubInstance> read_lexsub(const std::filesystem::path& path);
void write_lexsub(std::ostream& out, const std::vector<LexsubInstance>& data);

/// Maps "n", "noun", "v", "a", "adj", "j", "r", "adv" (with or without a
/// trailing dot) to the four main classes; other tags are returned as given.
std::string normalize_pos(std::string_view pos);

struct LexsubConversion {
  std::vector<LexsubInstance> instances;
  std::size_t dropped_multiword = 0;
  std::size_t dropped_instances = 0;
};

/// Converts a SemEval-2007 style release (XML with <lexelt item="lemma.p">,
/// <instance id=...>, <context> ... <head>w</head> ...) plus its gold file
/// ("lemma.p id :: sub n;sub n;") to LexsubInstance records. Multiword
/// substitutes are dropped and counted.
LexsubConversion convert_semeval_lexsub(std::istream& xml, std::istream& gold);

}  // namespace tse
