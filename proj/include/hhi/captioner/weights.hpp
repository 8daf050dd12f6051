#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "hhi/backends/interfaces.hpp"
#include "hhi/core/errors.hpp"
#include "hhi/core/types.hpp"

namespace hhi::captioner {

/// Loss multiplier c(L)^(-1/4) * c(C)^(-1).
inline double sample_weight(long long label_count, long long caption_count) {
  if (label_count < 1 || caption_count < 1)
    throw ValidationError("sample_weight needs positive counts, got (" + std::to_string(label_count) + ", " +
                          std::to_string(caption_count) + ")");
  return std::pow(static_cast<double>(label_count), -0.25) / static_cast<double>(caption_count);
}

struct WeightCounts {
  std::map<std::string, long long> label_counts;
  std::map<std::string, long long> caption_counts;
};

enum class TrainingTarget { kPseudoLabel, kRawCaption };

inline TrainingTarget training_target_from_string(std::string_view s) {
  if (s == "pseudo-label") return TrainingTarget::kPseudoLabel;
  if (s == "raw-caption") return TrainingTarget::kRawCaption;
  throw ValidationError("unknown training target '" + std::string(s) + "'");
}

inline WeightCounts count_weights(const std::vector<LabeledSample>& samples) {
  WeightCounts c;
  for (const auto& s : samples) {
    ++c.caption_counts[s.caption.text];
    if (s.label) ++c.label_counts[s.label->text];
  }
  return c;
}

/// One weighted example per sample. Pseudo-label mode targets the label
/// (every sample must carry one); raw-caption mode targets the caption and
/// weighs by caption count only.
inline std::vector<WeightedExample> build_training_set(const std::vector<LabeledSample>& samples,
                                                       TrainingTarget target) {
  const auto counts = count_weights(samples);
  std::vector<WeightedExample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    const long long cc = counts.caption_counts.at(s.caption.text);
    if (target == TrainingTarget::kRawCaption) {
      out.push_back({s.image_ref, s.caption.text, sample_weight(1, cc)});
      continue;
    }
    if (!s.label) throw ValidationError("sample '" + s.id + "' has no label to train on");
    out.push_back({s.image_ref, s.label->text, sample_weight(counts.label_counts.at(s.label->text), cc)});
  }
  return out;
}

}  // namespace hhi::captioner
