#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "hhi/core/errors.hpp"
#include "hhi/core/text.hpp"
#include "hhi/core/types.hpp"
#include "hhi/distill/pseudo_label.hpp"

namespace hhi::bench {

inline bool is_benchmark_source(Source s) {
  return s == Source::kWhosWaldo || s == Source::kConceptualCaptions || s == Source::kCoco;
}

/// Validates a gold-labelled test set: every record needs a benchmark source
/// and a label obeying the pseudo-label grammar. All offenders are reported
/// in one error.
inline std::vector<LabeledSample> ingest_wenda(const std::vector<LabeledSample>& records) {
  std::vector<std::string> offenders;
  std::set<std::string> ids;
  for (const auto& r : records) {
    std::string why;
    if (!ids.insert(r.id).second) why = "duplicate id";
    else if (!is_benchmark_source(r.caption.source)) why = "source '" + std::string(to_string(r.caption.source)) + "'";
    else if (!r.label) why = "missing gold label";
    else if (auto v = distill::filter_pseudo_label(r.label->text); !v.accepted)
      why = "label '" + r.label->text + "' violates the label grammar";
    if (!why.empty()) offenders.push_back(r.id + " (" + why + ")");
  }
  if (!offenders.empty()) {
    std::string msg = std::to_string(offenders.size()) + " invalid benchmark record(s): ";
    for (std::size_t i = 0; i < offenders.size(); ++i) msg += (i ? "; " : "") + offenders[i];
    throw ValidationError(msg);
  }
  std::vector<LabeledSample> out = records;
  for (auto& s : out) s.split = Split::kTest;
  return out;
}

inline std::map<Source, std::vector<LabeledSample>> partition_by_source(const std::vector<LabeledSample>& items) {
  std::map<Source, std::vector<LabeledSample>> out;
  for (const auto& s : items) out[s.caption.source].push_back(s);
  return out;
}

struct BenchmarkSummary {
  std::size_t items = 0;
  std::size_t unique_verbs = 0;
  std::size_t unique_interactions = 0;
  std::map<std::string, std::size_t> per_source;
};

inline BenchmarkSummary summarize_benchmark(const std::vector<LabeledSample>& items) {
  BenchmarkSummary s;
  std::set<std::string> verbs, labels;
  for (const auto& it : items) {
    ++s.items;
    ++s.per_source[std::string(to_string(it.caption.source))];
    if (!it.label) continue;
    labels.insert(it.label->text);
    auto w = text::split_ws(it.label->text);
    if (w.size() > 1) verbs.insert(w[1]);
  }
  s.unique_verbs = verbs.size();
  s.unique_interactions = labels.size();
  return s;
}

}  // namespace hhi::bench
