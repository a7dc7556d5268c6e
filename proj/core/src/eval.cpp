#include "tse/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <set>
#include <unordered_map>

#include "tse/error.hpp"
#include "tse/text.hpp"

namespace tse {

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double mid = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = mid;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw ConfigError("spearman: lists differ in length");
  if (xs.size() < 2) throw ConfigError("spearman: need at least two items");
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  const double n = static_cast<double>(rx.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw Error("spearman: zero rank variance");
  return sxy / std::sqrt(sxx * syy);
}

double gap(std::span<const std::string> ranking, std::span<const std::pair<std::string, int>> gold) {
  if (gold.empty()) throw ConfigError("gap: empty gold set");
  std::unordered_map<std::string, double> weight;
  std::vector<double> ideal;
  for (const auto& [item, w] : gold) {
    if (w < 1) throw ConfigError("gap: gold weights must be >= 1");
    if (weight.emplace(item, w).second) ideal.push_back(w);
  }
  double numerator = 0.0;
  double cumulative = 0.0;
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    auto it = weight.find(ranking[i]);
    if (it == weight.end()) continue;
    const double x = it->second;
    weight.erase(it);  // later duplicates carry no weight
    cumulative += x;
    numerator += cumulative / static_cast<double>(i + 1);
  }
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  double denominator = 0.0;
  cumulative = 0.0;
  for (std::size_t j = 0; j < ideal.size(); ++j) {
    cumulative += ideal[j];
    denominator += cumulative / static_cast<double>(j + 1);
  }
  return numerator / denominator;
}

MannWhitneyResult mann_whitney(std::span<const double> a, std::span<const double> b, MwMethod method) {
  if (a.empty() || b.empty()) throw ConfigError("mann_whitney: both samples must be non-empty");
  const std::size_t na = a.size();
  const std::size_t nb = b.size();
  const std::size_t n = na + nb;
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto ranks = average_ranks(pooled);

  // Twice the rank sums are integers; compare statistics in those units.
  std::vector<std::int64_t> rank2(n);
  for (std::size_t i = 0; i < n; ++i) rank2[i] = std::llround(2.0 * ranks[i]);
  std::int64_t rank2_a = 0;
  for (std::size_t i = 0; i < na; ++i) rank2_a += rank2[i];
  const auto base2 = static_cast<std::int64_t>(na * (na + 1));     // 2 * na(na+1)/2
  const auto center2 = static_cast<std::int64_t>(na * nb);         // 2 * mean of U
  const std::int64_t u2 = rank2_a - base2;
  const std::int64_t observed = std::llabs(u2 - center2);

  MannWhitneyResult result;
  result.u = static_cast<double>(u2) / 2.0;

  const bool exact = method == MwMethod::kExact || (method == MwMethod::kAuto && n <= 16);
  if (exact) {
    if (n > 30) throw ConfigError("mann_whitney: exact enumeration limited to 30 observations");
    std::uint64_t extreme = 0;
    std::uint64_t total = 0;
    // Enumerate every choice of na positions for the first sample.
    std::function<void(std::size_t, std::size_t, std::int64_t)> rec = [&](std::size_t start, std::size_t left,
                                                                          std::int64_t sum) {
      if (left == 0) {
        ++total;
        if (std::llabs(sum - base2 - center2) >= observed) ++extreme;
        return;
      }
      for (std::size_t i = start; i + left <= n; ++i) rec(i + 1, left - 1, sum + rank2[i]);
    };
    rec(0, na, 0);
    result.p = static_cast<double>(extreme) / static_cast<double>(total);
    result.exact = true;
    return result;
  }

  std::vector<double> sorted = pooled;
  std::sort(sorted.begin(), sorted.end());
  double tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }
  const double dn = static_cast<double>(n);
  const double variance = static_cast<double>(na) * static_cast<double>(nb) / 12.0 *
                          ((dn + 1.0) - (n > 1 ? tie_term / (dn * (dn - 1.0)) : 0.0));
  if (variance <= 0.0) {
    result.p = 1.0;
    return result;
  }
  const double deviation = std::max(0.0, static_cast<double>(observed) / 2.0 - 0.5);
  result.p = std::min(1.0, std::erfc(deviation / std::sqrt(variance) / std::sqrt(2.0)));
  return result;
}

std::string_view significance_marker(double p) {
  if (p < 0.01) return "▲";
  if (p < 0.05) return "△";
  return "";
}

namespace {

WordId lookup(const Vocabulary& vocab, std::string_view raw) {
  const auto pieces = text::tokenize(raw);
  if (pieces.size() != 1) return kNoWord;
  const auto id = vocab.find(pieces[0]);
  return id ? *id : kNoWord;
}

std::string normalized(std::string_view raw) {
  auto pieces = text::tokenize(raw);
  if (pieces.empty()) return std::string(raw);
  std::string out = pieces[0];
  for (std::size_t i = 1; i < pieces.size(); ++i) out += " " + pieces[i];
  return out;
}

}  // namespace

ScoredContext make_context(const Vocabulary& vocab, std::span<const std::string> tokens, std::size_t target_index) {
  if (target_index >= tokens.size()) throw ConfigError("target index outside the context");
  ScoredContext ctx;
  ctx.target_index = target_index;
  ctx.tokens.reserve(tokens.size());
  for (const auto& t : tokens) ctx.tokens.push_back(lookup(vocab, t));
  return ctx;
}

ScwsReport eval_scws(const EmbeddingModel& model, const TopicAssigner* topics, std::span<const ScwsInstance> data,
                     const ScorerOptions& options) {
  if (data.empty()) throw ConfigError("empty SCWS dataset");
  ScwsReport report;
  std::vector<double> human;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& inst = data[i];
    auto c1 = make_context(model.vocab(), inst.context1, inst.target1);
    auto c2 = make_context(model.vocab(), inst.context2, inst.target2);
    c1.tokens[c1.target_index] = lookup(model.vocab(), inst.word1);
    c2.tokens[c2.target_index] = lookup(model.vocab(), inst.word2);
    ScorerOptions o = options;
    o.seed = derive_seed(options.seed, i);
    const PairScore s = sim_pair(model, topics, c1, c2, o);
    if (s.oov) ++report.oov_pairs;
    report.scores.push_back(s.score);
    human.push_back(inst.human_score);
  }
  report.pairs = data.size();
  report.rho = spearman(report.scores, human);
  return report;
}

std::string_view scorer_name(LexsubScorer s) {
  switch (s) {
    case LexsubScorer::kSampled: return "smp";
    case LexsubScorer::kExpected: return "exp";
    case LexsubScorer::kSgeC: return "sge+c";
  }
  return "unknown";
}

LexsubScorer parse_scorer(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "smp" || lower == "sampled") return LexsubScorer::kSampled;
  if (lower == "exp" || lower == "expected") return LexsubScorer::kExpected;
  if (lower == "sge+c" || lower == "sgec" || lower == "sge-c") return LexsubScorer::kSgeC;
  throw ConfigError("unknown scorer '" + std::string(name) + "' (expected smp, exp or sge+c)");
}

std::vector<double> LexsubReport::instance_gaps() const {
  std::vector<double> out;
  out.reserve(instances.size());
  for (const auto& r : instances) out.push_back(r.gap);
  return out;
}

LexsubReport eval_lexsub(const EmbeddingModel& model, const TopicAssigner* topics,
                         std::span<const LexsubInstance> data, LexsubScorer scorer, const ScorerOptions& options) {
  if (scorer != LexsubScorer::kSgeC && topics == nullptr) {
    throw ConfigError("the sampled and expected scorers need a topic model");
  }
  LexsubReport report;

  // Multiword substitutes are not scorable with single-word embeddings.
  std::vector<LexsubInstance> kept;
  for (const auto& inst : data) {
    LexsubInstance copy = inst;
    copy.gold.clear();
    for (const auto& [sub, w] : inst.gold) {
      const std::string norm = normalized(sub);
      if (norm.find(' ') != std::string::npos) {
        ++report.dropped_multiword;
        continue;
      }
      auto it = std::find_if(copy.gold.begin(), copy.gold.end(), [&](const auto& g) { return g.first == norm; });
      if (it == copy.gold.end()) {
        copy.gold.emplace_back(norm, w);
      } else {
        it->second += w;
      }
    }
    if (copy.gold.empty()) {
      ++report.dropped_instances;
      continue;
    }
    kept.push_back(std::move(copy));
  }
  if (kept.empty()) throw ConfigError("lexsub dataset has no usable instances");

  std::map<std::pair<std::string, std::string>, std::set<std::string>> pool;
  for (const auto& inst : kept) {
    auto& cands = pool[{normalized(inst.target), inst.pos}];
    for (const auto& [sub, w] : inst.gold) cands.insert(sub);
  }

  std::map<std::string, std::pair<double, std::size_t>> sums;
  double total = 0.0;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const auto& inst = kept[i];
    ScoredContext ctx = make_context(model.vocab(), inst.context, inst.target_index);
    if (const WordId lemma = lookup(model.vocab(), inst.target); lemma != kNoWord) ctx.tokens[ctx.target_index] = lemma;
    ScorerOptions o = options;
    o.seed = derive_seed(options.seed, i);

    std::vector<std::pair<double, std::string>> scored;
    std::vector<std::string> unscorable;
    for (const auto& cand : pool[{normalized(inst.target), inst.pos}]) {
      const WordId w = lookup(model.vocab(), cand);
      std::optional<double> s;
      if (w != kNoWord && ctx.target() != kNoWord) {
        switch (scorer) {
          case LexsubScorer::kSampled:
            s = sim_tse_sampled(model, *topics, w, ctx, o);
            break;
          case LexsubScorer::kExpected:
            if (!ctx.topic_dist) {
              ctx.topic_dist = topics->distribution(ctx.tokens, derive_seed(o.seed, 3));
              double norm = std::accumulate(ctx.topic_dist->begin(), ctx.topic_dist->end(), 0.0);
              for (auto& p : *ctx.topic_dist) p /= norm;
            }
            s = sim_tse_expected(model, *topics, w, ctx, o);
            break;
          case LexsubScorer::kSgeC:
            s = sim_sge_c(model, w, ctx, o.window);
            break;
        }
      }
      if (s) {
        scored.emplace_back(*s, cand);
      } else {
        unscorable.push_back(cand);
      }
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    LexsubInstanceResult r;
    r.id = inst.id;
    r.pos = inst.pos;
    r.fallback = scored.empty();
    for (auto& [s, c] : scored) r.ranking.push_back(c);
    for (auto& c : unscorable) r.ranking.push_back(c);  // std::set order is lexicographic
    r.gap = gap(r.ranking, inst.gold);
    if (r.fallback) ++report.fallback_instances;
    total += r.gap;
    auto& [sum, count] = sums[inst.pos];
    sum += r.gap;
    ++count;
    report.instances.push_back(std::move(r));
  }
  report.overall = total / static_cast<double>(kept.size());
  for (const auto& [pos, sc] : sums) report.by_pos[pos] = {sc.first / static_cast<double>(sc.second), sc.second};
  return report;
}

std::string format_lexsub_table(std::span<const std::pair<std::string, LexsubReport>> runs) {
  static const char* kColumns[] = {"n.", "v.", "adj.", "adv."};
  std::size_t name_width = 5;
  for (const auto& [name, r] : runs) name_width = std::max(name_width, name.size());
  std::string out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-*s", static_cast<int>(name_width), "Model");
  out += buf;
  for (const char* c : kColumns) {
    std::snprintf(buf, sizeof buf, " %8s", c);
    out += buf;
  }
  out += "      All\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& [name, r] = runs[i];
    std::snprintf(buf, sizeof buf, "%-*s", static_cast<int>(name_width), name.c_str());
    out += buf;
    for (const char* c : kColumns) {
      auto it = r.by_pos.find(c);
      if (it == r.by_pos.end()) {
        std::snprintf(buf, sizeof buf, " %8s", "-");
      } else {
        std::snprintf(buf, sizeof buf, " %8.1f", 100.0 * it->second.first);
      }
      out += buf;
    }
    std::snprintf(buf, sizeof buf, " %8.1f", 100.0 * r.overall);
    out += buf;
    if (i > 0 && r.overall > runs[0].second.overall) {
      const auto a = r.instance_gaps();
      const auto b = runs[0].second.instance_gaps();
      out += significance_marker(mann_whitney(a, b).p);
    }
    out += '\n';
  }
  return out;
}

}  // namespace tse
