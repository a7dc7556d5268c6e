#pragma once

// Central finite differences against the SGNS update: the step moves every
// parameter by -lr * dL/dtheta, so the applied change recovers the analytic
// gradient without access to internals.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "tse/embeddings.hpp"
#include "tse/random.hpp"

namespace tse::oracle {

// Loss evaluated straight from the tables, per variant semantics.
inline double sgns_loss(const EmbeddingModel& m, WordId w, TopicId topic, const std::vector<double>& p, WordId ctx,
                        const std::vector<WordId>& negs) {
  const std::size_t dim = m.dim();
  std::vector<double> h(dim, 0.0);
  switch (m.variant()) {
    case Variant::kSge:
      for (std::size_t i = 0; i < dim; ++i) h[i] = m.generic_row(w)[i];
      break;
    case Variant::kHtle:
      for (std::size_t i = 0; i < dim; ++i) h[i] = m.topic_row(*m.find_topic_entry(w, topic))[i];
      break;
    case Variant::kHtleAdd:
      for (std::size_t i = 0; i < dim; ++i) h[i] = m.topic_row(*m.find_topic_entry(w, topic))[i] + m.generic_row(w)[i];
      break;
    case Variant::kStle:
      for (std::size_t k = 0; k < p.size(); ++k) {
        for (std::size_t i = 0; i < dim; ++i) h[i] += p[k] * m.topic_row(*m.find_topic_entry(w, static_cast<TopicId>(k)))[i];
      }
      break;
  }
  const auto dot = [&](WordId c) {
    double s = 0.0;
    for (std::size_t i = 0; i < dim; ++i) s += h[i] * m.output_row(c)[i];
    return s;
  };
  double loss = -std::log(1.0 / (1.0 + std::exp(-dot(ctx))));
  for (WordId n : negs) loss += -std::log(1.0 / (1.0 + std::exp(dot(n))));
  return loss;
}

// Worst relative error over all parameters for one random configuration.
// Parameters with negligible gradient must agree absolutely to 1e-9, else
// the result is infinite.
inline double max_sgns_gradient_error(Variant v, std::uint64_t seed, std::size_t dim = 8) {
  const std::size_t V = 6, K = 3;
  std::vector<std::pair<std::string, std::uint64_t>> words;
  for (std::size_t i = 0; i < V; ++i) words.emplace_back("w" + std::to_string(i), 100 - i);
  std::vector<std::pair<WordId, TopicId>> entries;
  if (v != Variant::kSge) {
    for (std::size_t w = 0; w < V; ++w) {
      for (std::size_t k = 0; k < K; ++k) entries.emplace_back(static_cast<WordId>(w), static_cast<TopicId>(k));
    }
  }
  EmbeddingModel m(v, dim, K, Vocabulary::from_entries(words), entries);
  Rng init(seed);
  for (auto* t : {&m.topic_table(), &m.generic_table(), &m.output_table()}) {
    for (auto& x : *t) x = 2 * uniform01(init) - 1;
  }

  Rng rng(seed + 1000);
  const auto w = static_cast<WordId>(uniform_below(rng, V));
  const auto topic = static_cast<TopicId>(uniform_below(rng, K));
  std::vector<double> p(K);
  double z = 0.0;
  for (auto& x : p) z += x = 0.1 + uniform01(rng);
  for (auto& x : p) x /= z;
  const auto ctx = static_cast<WordId>((w + 1) % static_cast<WordId>(V));
  std::vector<WordId> negs;
  for (int i = 0; i < 3; ++i) negs.push_back(static_cast<WordId>((ctx + 1 + i) % static_cast<WordId>(V)));

  const TopicInfo info = v == Variant::kStle ? TopicInfo(std::span<const double>(p)) : TopicInfo(topic);
  const auto target = make_target(m, w, info, 0);
  const double lr = 0.5;
  auto stepped = m;
  SgnsWorkspace ws;
  sgns_step(stepped, target, ctx, negs, lr, ws);

  double worst = 0.0;
  const double eps = 1e-5;
  std::vector<double>* before_tables[] = {&m.topic_table(), &m.generic_table(), &m.output_table()};
  const std::vector<double>* after_tables[] = {&stepped.topic_table(), &stepped.generic_table(), &stepped.output_table()};
  for (int t = 0; t < 3; ++t) {
    auto& params = *before_tables[t];
    const auto& after = *after_tables[t];
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double analytic = -(after[i] - params[i]) / lr;
      const double saved = params[i];
      params[i] = saved + eps;
      const double up = sgns_loss(m, w, topic, p, ctx, negs);
      params[i] = saved - eps;
      const double down = sgns_loss(m, w, topic, p, ctx, negs);
      params[i] = saved;
      const double numeric = (up - down) / (2 * eps);
      const double scale = std::max(std::abs(analytic), std::abs(numeric));
      if (scale < 1e-7) {
        if (std::abs(analytic - numeric) > 1e-9) return std::numeric_limits<double>::infinity();
        continue;
      }
      worst = std::max(worst, std::abs(analytic - numeric) / scale);
    }
  }
  return worst;
}

}  // namespace tse::oracle
