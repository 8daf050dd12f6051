#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hhi/backends/interfaces.hpp"
#include "hhi/bench/imsitu.hpp"
#include "hhi/captioner/decode.hpp"
#include "hhi/core/errors.hpp"
#include "hhi/core/parallel.hpp"
#include "hhi/core/serde.hpp"
#include "hhi/core/types.hpp"
#include "hhi/metrics/aggregate.hpp"
#include "hhi/metrics/normalize.hpp"
#include "hhi/metrics/verbs.hpp"

namespace hhi::metrics {

inline std::vector<int> default_k_list() { return {1, 5, 8}; }

struct EvalConfig {
  std::vector<int> k_list = default_k_list();
  VerbMode verb_mode = VerbMode::kSlotFormat;
  // Beams are bare verb lemmas; each is scored through both sentence
  // templates and the better value is kept per metric.
  bool categorical = false;
  std::size_t workers = 1;

  void validate() const {
    if (k_list.empty()) throw ValidationError("k_list is empty");
    for (int k : k_list)
      if (k < 1) throw ValidationError("k values must be at least 1");
    if (workers < 1) throw ValidationError("workers must be at least 1");
  }
};

inline void to_json(Json& j, const EvalConfig& c) {
  j = Json{{"k_list", c.k_list},
           {"verb_mode", to_string(c.verb_mode)},
           {"categorical", c.categorical},
           {"workers", c.workers}};
}

inline void from_json(const Json& j, EvalConfig& c) {
  c = EvalConfig{};
  if (auto v = json_detail::get_optional<std::vector<int>>(j, "k_list")) c.k_list = *v;
  if (auto v = json_detail::get_optional<std::string>(j, "verb_mode")) c.verb_mode = verb_mode_from_string(*v);
  if (auto v = json_detail::get_optional<bool>(j, "categorical")) c.categorical = *v;
  if (auto v = json_detail::get_optional<std::size_t>(j, "workers")) c.workers = *v;
  c.validate();
}

struct EvalBackends {
  const TextSimilarityBackend* similarity = nullptr;
  const NliBackend* nli = nullptr;
  const EmbeddingTable* embeddings = nullptr;
  const ParserBackend* parser = nullptr;
};

struct Scores {
  double BL = 0.0;
  double p_e = 0.0;
  double p_c = 0.0;
  double sim = 0.0;

  friend bool operator==(const Scores&, const Scores&) = default;
};

inline Scores best_of(const Scores& a, const Scores& b) {
  return {better_of(a.BL, b.BL, Direction::kHigherBetter), better_of(a.p_e, b.p_e, Direction::kHigherBetter),
          better_of(a.p_c, b.p_c, Direction::kLowerBetter), better_of(a.sim, b.sim, Direction::kHigherBetter)};
}

struct ItemScores {
  std::string sample_id;
  Source source = Source::kWhosWaldo;
  int beams_used = 0;
  Scores scores;
};

struct SourceMeans {
  Scores mean;
  std::size_t n = 0;
};

struct MetricReport {
  int k = 1;
  std::vector<ItemScores> per_item;
  std::map<Source, SourceMeans> per_source;
  Scores macro;

  void validate() const {
    auto check = [](const Scores& s, const std::string& where) {
      auto prob = [&](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0)) throw ValidationError(where + ": " + name + " outside [0,1]");
      };
      prob(s.p_e, "p_e");
      prob(s.p_c, "p_c");
      if (!(s.sim >= -1.0 && s.sim <= 1.0)) throw ValidationError(where + ": sim outside [-1,1]");
      if (!std::isfinite(s.BL)) throw ValidationError(where + ": BL is not finite");
    };
    for (const auto& it : per_item) check(it.scores, it.sample_id);
    for (const auto& [src, m] : per_source) check(m.mean, std::string(to_string(src)));
    check(macro, "macro");
  }
};

inline std::string_view source_label(Source s) {
  switch (s) {
    case Source::kWhosWaldo: return "WW";
    case Source::kConceptualCaptions: return "CC";
    case Source::kCoco: return "COCO";
    case Source::kCcNews: return "CC-News";
    case Source::kSynthetic: return "synthetic";
  }
  return "?";
}

namespace eval_detail {

/// Order-independent mean: values are summed in sorted order so that the
/// result does not depend on item order.
inline double stable_mean(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline Scores mean_of(const std::vector<Scores>& xs) {
  std::vector<double> bl, pe, pc, sim;
  for (const auto& x : xs) {
    bl.push_back(x.BL);
    pe.push_back(x.p_e);
    pc.push_back(x.p_c);
    sim.push_back(x.sim);
  }
  return {stable_mean(bl), stable_mean(pe), stable_mean(pc), stable_mean(sim)};
}

template <class Item>
std::map<std::string, const captioner::Prediction*> index_predictions(
    const std::vector<captioner::Prediction>& predictions, const std::vector<Item>& items) {
  std::map<std::string, const captioner::Prediction*> by_id;
  for (const auto& p : predictions) {
    if (p.beams.empty()) throw ValidationError("prediction '" + p.sample_id + "' has no beams");
    if (!by_id.emplace(p.sample_id, &p).second)
      throw ValidationError("duplicate prediction for sample '" + p.sample_id + "'");
  }
  std::vector<std::string> missing;
  for (const auto& it : items)
    if (!by_id.count(it.id)) missing.push_back(it.id);
  if (!missing.empty()) {
    std::string msg = std::to_string(missing.size()) + " benchmark item(s) without predictions: ";
    for (std::size_t i = 0; i < missing.size(); ++i) msg += (i ? ", " : "") + missing[i];
    throw ValidationError(msg);
  }
  return by_id;
}

inline int max_k(const std::vector<int>& ks) { return *std::max_element(ks.begin(), ks.end()); }

inline std::string premise_for(const LabeledSample& s) {
  if (s.caption.source == Source::kCoco && !s.references.empty()) return s.references.front();
  return s.caption.text;
}

}  // namespace eval_detail

/// Per-beam scores of a slot-format prediction against a gold interaction.
inline Scores score_beam(const std::string& prediction, const std::string& premise, const std::string& gold,
                         const std::string& gold_verb, const EvalBackends& b, VerbMode mode) {
  Scores s;
  s.BL = b.similarity->score(normalize_for_similarity(prediction), normalize_for_similarity(gold));
  auto g = nli_groundedness(premise, prediction, *b.nli);
  s.p_e = g.p_e;
  s.p_c = g.p_c;
  s.sim = verb_similarity(extract_verb(prediction, mode, b.parser), gold_verb, *b.embeddings);
  return s;
}

/// Scores every benchmark item for each k in the config. k larger than an
/// item's beam count uses all of its beams.
inline std::vector<MetricReport> evaluate(const std::vector<captioner::Prediction>& predictions,
                                          const std::vector<LabeledSample>& benchmark, const EvalBackends& b,
                                          const EvalConfig& cfg = {}) {
  cfg.validate();
  if (!b.similarity || !b.nli || !b.embeddings) throw ValidationError("evaluate needs similarity, NLI and embeddings");
  if (cfg.verb_mode == VerbMode::kParsed && !b.parser && !cfg.categorical)
    throw ValidationError("parsed verb mode needs a parser backend");
  for (const auto& it : benchmark)
    if (!it.label) throw ValidationError("benchmark item '" + it.id + "' has no gold label");
  auto by_id = eval_detail::index_predictions(predictions, benchmark);
  const int kmax = eval_detail::max_k(cfg.k_list);

  auto per_beam = parallel_map(benchmark.size(), cfg.workers, [&](std::size_t i) {
    const auto& item = benchmark[i];
    const auto& beams = by_id.at(item.id)->beams;
    const std::string premise = eval_detail::premise_for(item);
    const std::string& gold = item.label->text;
    auto gold_verb = extract_verb(gold, VerbMode::kSlotFormat);
    if (!gold_verb) throw ValidationError("gold label of '" + item.id + "' has no verb");
    const std::size_t n = std::min<std::size_t>(beams.size(), static_cast<std::size_t>(kmax));
    std::vector<Scores> out;
    out.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
      if (cfg.categorical) {
        auto [p1, p2] = wrap_categorical_verb(beams[j].text);
        out.push_back(best_of(
            score_beam(underscores_to_slots(p1), premise, gold, *gold_verb, b, VerbMode::kSlotFormat),
            score_beam(underscores_to_slots(p2), premise, gold, *gold_verb, b, VerbMode::kSlotFormat)));
      } else {
        out.push_back(score_beam(beams[j].text, premise, gold, *gold_verb, b, cfg.verb_mode));
      }
    }
    return out;
  });

  std::vector<MetricReport> reports;
  for (int k : cfg.k_list) {
    MetricReport r;
    r.k = k;
    std::map<Source, std::vector<Scores>> by_source;
    for (std::size_t i = 0; i < benchmark.size(); ++i) {
      const auto& beams = per_beam[i];
      const int kk = std::min<int>(k, static_cast<int>(beams.size()));
      std::vector<double> bl, pe, pc, sim;
      for (const auto& s : beams) {
        bl.push_back(s.BL);
        pe.push_back(s.p_e);
        pc.push_back(s.p_c);
        sim.push_back(s.sim);
      }
      Scores agg{topk_aggregate(bl, kk, Direction::kHigherBetter), topk_aggregate(pe, kk, Direction::kHigherBetter),
                 topk_aggregate(pc, kk, Direction::kLowerBetter), topk_aggregate(sim, kk, Direction::kHigherBetter)};
      r.per_item.push_back({benchmark[i].id, benchmark[i].caption.source, kk, agg});
      by_source[benchmark[i].caption.source].push_back(agg);
    }
    std::vector<Scores> source_means;
    for (const auto& [src, xs] : by_source) {
      r.per_source[src] = {eval_detail::mean_of(xs), xs.size()};
      source_means.push_back(r.per_source[src].mean);
    }
    r.macro = eval_detail::mean_of(source_means);
    r.validate();
    reports.push_back(std::move(r));
  }
  return reports;
}

// ---------------------------------------------------------------------------
// imSitu-HHI: verb similarity only.

struct SituItemScore {
  std::string sample_id;
  std::string verb;
  Split split = Split::kTest;
  double sim = 0.0;
};

struct SituReport {
  int k = 1;
  std::vector<SituItemScore> per_item;
  double overall = 0.0;
  std::vector<std::pair<std::string, double>> top_verbs;
  std::map<Split, double> per_split;
};

inline constexpr std::size_t kTopVerbColumns = 15;

/// Verbs ordered by frequency in the benchmark, most common first, ties by
/// name.
inline std::vector<std::string> most_common_verbs(const std::vector<bench::SituSample>& items, std::size_t n) {
  std::map<std::string, std::size_t> counts;
  for (const auto& it : items) ++counts[it.verb];
  std::vector<std::pair<std::string, std::size_t>> v(counts.begin(), counts.end());
  std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size() && i < n; ++i) out.push_back(v[i].first);
  return out;
}

inline std::vector<SituReport> evaluate_imsitu(const std::vector<captioner::Prediction>& predictions,
                                               const std::vector<bench::SituSample>& benchmark,
                                               const EvalBackends& b, const EvalConfig& cfg = {}) {
  cfg.validate();
  if (!b.embeddings) throw ValidationError("imSitu evaluation needs embeddings");
  if (cfg.verb_mode == VerbMode::kParsed && !b.parser && !cfg.categorical)
    throw ValidationError("parsed verb mode needs a parser backend");
  auto by_id = eval_detail::index_predictions(predictions, benchmark);
  const int kmax = eval_detail::max_k(cfg.k_list);

  auto per_beam = parallel_map(benchmark.size(), cfg.workers, [&](std::size_t i) {
    const auto& item = benchmark[i];
    const auto& beams = by_id.at(item.id)->beams;
    const std::size_t n = std::min<std::size_t>(beams.size(), static_cast<std::size_t>(kmax));
    std::vector<double> out;
    for (std::size_t j = 0; j < n; ++j) {
      std::optional<std::string> verb;
      if (cfg.categorical) verb = extract::to_present_continuous(beams[j].text);
      else verb = extract_verb(beams[j].text, cfg.verb_mode, b.parser);
      out.push_back(verb_similarity(verb, item.verb, *b.embeddings));
    }
    return out;
  });

  const auto columns = most_common_verbs(benchmark, kTopVerbColumns);
  std::vector<SituReport> reports;
  for (int k : cfg.k_list) {
    SituReport r;
    r.k = k;
    std::vector<double> all;
    std::map<std::string, std::vector<double>> by_verb;
    std::map<Split, std::vector<double>> by_split;
    for (std::size_t i = 0; i < benchmark.size(); ++i) {
      const int kk = std::min<int>(k, static_cast<int>(per_beam[i].size()));
      const double s = topk_aggregate(per_beam[i], kk, Direction::kHigherBetter);
      r.per_item.push_back({benchmark[i].id, benchmark[i].verb, benchmark[i].split, s});
      all.push_back(s);
      by_verb[benchmark[i].verb].push_back(s);
      by_split[benchmark[i].split].push_back(s);
    }
    r.overall = eval_detail::stable_mean(all);
    for (const auto& v : columns) r.top_verbs.emplace_back(v, eval_detail::stable_mean(by_verb[v]));
    for (auto& [split, xs] : by_split) r.per_split[split] = eval_detail::stable_mean(xs);
    reports.push_back(std::move(r));
  }
  return reports;
}

}  // namespace hhi::metrics
