#include "tse/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "tse/error.hpp"
#include "tse/random.hpp"

namespace tse {
namespace {

std::size_t draw_index(Rng& rng, const std::vector<double>& cdf) {
  const double u = uniform01(rng) * cdf.back();
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return std::min(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

std::vector<double> cumulative(const std::vector<double>& w) {
  std::vector<double> c(w.size());
  std::partial_sum(w.begin(), w.end(), c.begin());
  return c;
}

std::vector<double> dirichlet(Rng& rng, std::size_t n, double alpha) {
  std::vector<double> v(n);
  double total = 0.0;
  for (auto& x : v) {
    x = sample_gamma(rng, alpha);
    total += x;
  }
  if (total <= 0.0) {
    v.assign(n, 1.0 / static_cast<double>(n));
    return v;
  }
  for (auto& x : v) x /= total;
  return v;
}

template <typename T>
void shuffle(Rng& rng, std::vector<T>& v) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_below(rng, i)]);
}

std::string two_digits(std::size_t i) {
  std::string s = std::to_string(i);
  return s.size() < 2 ? "0" + s : s;
}

const char* const kPosCycle[] = {"n.", "v.", "adj.", "adv."};

// Random-walk generator over two concept rings plus shared filler words.
class ConceptLanguage {
 public:
  explicit ConceptLanguage(const PseudoSenseConfig& cfg) : cfg_(cfg) {
    if (cfg.concepts_per_domain < 2 || cfg.synonyms_per_concept < 2) {
      throw ConfigError("pseudo-sense corpus needs >= 2 concepts per domain and >= 2 synonyms per concept");
    }
    if (cfg.pseudowords < 1 || cfg.pseudowords > cfg.concepts_per_domain) {
      throw ConfigError("pseudoword count must be between 1 and the concept count");
    }
    std::vector<double> form_weight(cfg.synonyms_per_concept);
    for (std::size_t s = 0; s < form_weight.size(); ++s) form_weight[s] = std::pow(0.5, static_cast<double>(s));
    form_cdf_ = cumulative(form_weight);
    std::vector<double> shared_weight(std::max<std::size_t>(cfg.shared_words, 1));
    for (std::size_t r = 0; r < shared_weight.size(); ++r) shared_weight[r] = 1.0 / static_cast<double>(r + 1);
    shared_cdf_ = cumulative(shared_weight);

    const std::size_t stride = cfg.concepts_per_domain / cfg.pseudowords;
    const std::size_t rare_form = cfg.synonyms_per_concept - 1;
    for (std::size_t p = 0; p < cfg.pseudowords; ++p) {
      const std::size_t concept_id = p * stride;
      const std::size_t form_b = p == 0 ? 0 : rare_form;
      Pseudoword pw;
      pw.name = p == 0 ? "appleano" : "pseudo" + std::to_string(p);
      pw.word_a = form_name(0, concept_id, 0);
      pw.word_b = form_name(1, concept_id, form_b);
      for (std::size_t s = 0; s < cfg.synonyms_per_concept; ++s) {
        if (s != 0) pw.synonyms_a.push_back(form_name(0, concept_id, s));
        if (s != form_b) pw.synonyms_b.push_back(form_name(1, concept_id, s));
      }
      replace_[{0, concept_id, 0}] = pw.name;
      replace_[{1, concept_id, form_b}] = pw.name;
      fused_.push_back(concept_id);
      pseudowords_.push_back(std::move(pw));
    }
  }

  static std::string form_name(int domain, std::size_t concept_id, std::size_t form) {
    return std::string(domain == 0 ? "a" : "b") + two_digits(concept_id) + "_" + std::to_string(form);
  }

  std::string surface(int domain, std::size_t concept_id, std::size_t form) const {
    auto it = replace_.find({domain, concept_id, form});
    return it == replace_.end() ? form_name(domain, concept_id, form) : it->second;
  }

  std::string shared(Rng& rng) const { return "s" + two_digits(draw_index(rng, shared_cdf_)); }

  std::size_t step(Rng& rng, std::size_t pos) const {
    const auto c = static_cast<std::ptrdiff_t>(cfg_.concepts_per_domain);
    const auto span = static_cast<std::ptrdiff_t>(2 * cfg_.walk_step + 1);
    const auto delta = static_cast<std::ptrdiff_t>(uniform_below(rng, static_cast<std::uint64_t>(span))) -
                       static_cast<std::ptrdiff_t>(cfg_.walk_step);
    return static_cast<std::size_t>(((static_cast<std::ptrdiff_t>(pos) + delta) % c + c) % c);
  }

  std::string emit(Rng& rng, int domain, std::size_t concept_id) const {
    return surface(domain, concept_id, draw_index(rng, form_cdf_));
  }

  /// Token sequence of one document; concept positions follow a walk.
  std::vector<std::string> document(Rng& rng, int domain, std::size_t length) const {
    std::vector<std::string> out;
    out.reserve(length);
    std::size_t pos = uniform_below(rng, cfg_.concepts_per_domain);
    for (std::size_t i = 0; i < length; ++i) {
      if (cfg_.shared_words > 0 && uniform01(rng) < cfg_.shared_rate) {
        out.push_back(shared(rng));
      } else {
        pos = step(rng, pos);
        out.push_back(emit(rng, domain, pos));
      }
    }
    return out;
  }

  /// Sentence whose middle token is `center_word`, with walks running
  /// outward from `concept_id` on both sides.
  std::vector<std::string> sentence_around(Rng& rng, int domain, std::size_t concept_id, const std::string& center_word,
                                           std::size_t half) const {
    std::vector<std::string> left, right;
    for (int side = 0; side < 2; ++side) {
      auto& out = side == 0 ? left : right;
      std::size_t pos = concept_id;
      for (std::size_t i = 0; i < half; ++i) {
        if (cfg_.shared_words > 0 && uniform01(rng) < cfg_.shared_rate) {
          out.push_back(shared(rng));
        } else {
          pos = step(rng, pos);
          out.push_back(emit(rng, domain, pos));
        }
      }
    }
    std::reverse(left.begin(), left.end());
    left.push_back(center_word);
    left.insert(left.end(), right.begin(), right.end());
    return left;
  }

  const std::vector<Pseudoword>& pseudowords() const { return pseudowords_; }
  std::size_t fused_concept(std::size_t p) const { return fused_[p]; }
  const PseudoSenseConfig& config() const { return cfg_; }

 private:
  PseudoSenseConfig cfg_;
  std::vector<double> form_cdf_;
  std::vector<double> shared_cdf_;
  std::map<std::tuple<int, std::size_t, std::size_t>, std::string> replace_;
  std::vector<Pseudoword> pseudowords_;
  std::vector<std::size_t> fused_;
};

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

}  // namespace

LdaCorpus make_lda_corpus(const LdaCorpusConfig& config) {
  if (config.topics < 1 || config.words_per_topic < 1 || config.documents < 1 || config.tokens_per_doc < 1) {
    throw ConfigError("LDA corpus sizes must be positive");
  }
  Rng rng(derive_seed(config.seed, 0x1da));
  LdaCorpus out;
  const std::size_t vocab = config.topics * config.words_per_topic;
  for (std::size_t w = 0; w < vocab; ++w) out.words.push_back("w" + two_digits(w));
  std::vector<std::vector<double>> phi_cdf;
  for (std::size_t t = 0; t < config.topics; ++t) {
    std::vector<double> phi(vocab, 0.0);
    const auto local = dirichlet(rng, config.words_per_topic, 1.0);
    for (std::size_t j = 0; j < config.words_per_topic; ++j) phi[t * config.words_per_topic + j] = local[j];
    phi_cdf.push_back(cumulative(phi));
    out.topic_word.push_back(std::move(phi));
  }
  for (std::size_t d = 0; d < config.documents; ++d) {
    auto theta = dirichlet(rng, config.topics, config.doc_alpha);
    const auto theta_cdf = cumulative(theta);
    std::vector<std::string> tokens;
    for (std::size_t i = 0; i < config.tokens_per_doc; ++i) {
      const std::size_t t = draw_index(rng, theta_cdf);
      tokens.push_back(out.words[draw_index(rng, phi_cdf[t])]);
    }
    out.lines.push_back(join(tokens));
    out.doc_topic.push_back(std::move(theta));
  }
  return out;
}

PseudoSenseCorpus make_pseudo_sense_corpus(const PseudoSenseConfig& config) {
  ConceptLanguage lang(config);
  Rng rng(derive_seed(config.seed, 0x5e45e));
  PseudoSenseCorpus out;
  out.config = config;
  out.pseudowords = lang.pseudowords();

  std::vector<int> domains;
  for (std::size_t i = 0; i < config.docs_per_domain; ++i) {
    domains.push_back(0);
    domains.push_back(1);
  }
  shuffle(rng, domains);
  for (int d : domains) {
    out.lines.push_back(join(lang.document(rng, d, config.tokens_per_doc)));
    out.domain.push_back(d);
  }

  std::vector<std::string> fused_originals;
  for (const auto& pw : out.pseudowords) {
    fused_originals.push_back(pw.word_a);
    fused_originals.push_back(pw.word_b);
  }
  const auto is_fused = [&](const std::string& w) {
    return std::find(fused_originals.begin(), fused_originals.end(), w) != fused_originals.end();
  };
  for (std::size_t c = 0; c < config.concepts_per_domain; ++c) {
    for (std::size_t s = 0; s < config.synonyms_per_concept; ++s) {
      const auto a = ConceptLanguage::form_name(0, c, s);
      const auto b = ConceptLanguage::form_name(1, c, s);
      if (!is_fused(a)) out.domain_a_words.push_back(a);
      if (!is_fused(b)) out.domain_b_words.push_back(b);
    }
  }
  for (std::size_t r = 0; r < config.shared_words; ++r) out.shared_words.push_back("s" + two_digits(r));
  return out;
}

std::vector<LexsubInstance> make_synthetic_lexsub(const PseudoSenseCorpus& corpus, std::size_t instances_per_sense,
                                                  std::uint64_t seed) {
  ConceptLanguage lang(corpus.config);
  Rng rng(derive_seed(seed, 0x1e85));
  constexpr std::size_t kHalf = 12;
  std::vector<LexsubInstance> out;
  for (std::size_t p = 0; p < corpus.pseudowords.size(); ++p) {
    const auto& pw = corpus.pseudowords[p];
    for (int domain = 0; domain < 2; ++domain) {
      const auto& synonyms = domain == 0 ? pw.synonyms_a : pw.synonyms_b;
      for (std::size_t i = 0; i < instances_per_sense; ++i) {
        LexsubInstance inst;
        inst.id = pw.name + "." + (domain == 0 ? "a" : "b") + "." + std::to_string(i);
        inst.target = pw.name;
        inst.pos = kPosCycle[p % 4];
        inst.context = lang.sentence_around(rng, domain, lang.fused_concept(p), pw.name, kHalf);
        inst.target_index = kHalf;
        // Synonyms are listed most frequent first.
        for (std::size_t s = 0; s < synonyms.size(); ++s) {
          inst.gold.emplace_back(synonyms[s], static_cast<int>(synonyms.size() - s));
        }
        out.push_back(std::move(inst));
      }
    }
  }
  return out;
}

std::vector<ScwsInstance> make_synthetic_scws(const PseudoSenseCorpus& corpus, std::size_t pairs, std::uint64_t seed) {
  ConceptLanguage lang(corpus.config);
  Rng rng(derive_seed(seed, 0x5c35));
  constexpr std::size_t kHalf = 10;
  std::vector<ScwsInstance> out;
  for (std::size_t i = 0; i < pairs; ++i) {
    const std::size_t p = uniform_below(rng, corpus.pseudowords.size());
    const auto& pw = corpus.pseudowords[p];
    const int d1 = static_cast<int>(uniform_below(rng, 2));
    const bool same = uniform01(rng) < 0.5;
    const int d2 = same ? d1 : 1 - d1;
    const bool use_synonym = uniform01(rng) < 0.5;
    const auto& syns = d2 == 0 ? pw.synonyms_a : pw.synonyms_b;
    const std::string w2 = use_synonym ? syns[uniform_below(rng, syns.size())] : pw.name;

    ScwsInstance inst;
    inst.id = std::to_string(i + 1);
    inst.word1 = pw.name;
    inst.pos1 = kPosCycle[p % 4];
    inst.word2 = w2;
    inst.pos2 = inst.pos1;
    inst.context1 = lang.sentence_around(rng, d1, lang.fused_concept(p), pw.name, kHalf);
    inst.target1 = kHalf;
    inst.context2 = lang.sentence_around(rng, d2, lang.fused_concept(p), w2, kHalf);
    inst.target2 = kHalf;
    const double base = same ? 8.0 : 1.0;
    inst.human_score = std::round((base + 2.0 * uniform01(rng)) * 10.0) / 10.0;
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace tse
