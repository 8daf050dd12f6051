#pragma once

#include <vector>

#include "hhi/backends/interfaces.hpp"
#include "hhi/core/errors.hpp"
#include "hhi/core/random.hpp"
#include "hhi/synth/types.hpp"

namespace hhi::distill {

/// Summarizer input for a caption: "{prefix} {caption}", or the bare caption
/// when the prefix is empty.
inline std::string summarizer_input(std::string_view caption, std::string_view prefix) {
  if (prefix.empty()) return std::string(caption);
  return std::string(prefix) + " " + std::string(caption);
}

inline TrainingExample make_training_example(const synth::InteractionCaptionPair& pair,
                                             std::string_view prefix) {
  return {summarizer_input(pair.caption.text, prefix), pair.interaction.text};
}

inline std::vector<TrainingExample> make_training_set(const std::vector<synth::InteractionCaptionPair>& pairs,
                                                      std::string_view prefix) {
  std::vector<TrainingExample> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(make_training_example(p, prefix));
  return out;
}

/// Seeded shuffle, then round-robin deal into k disjoint folds whose sizes
/// differ by at most one.
template <class T>
std::vector<std::vector<T>> split_folds(const std::vector<T>& items, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ValidationError("split_folds needs k >= 2");
  if (k > items.size())
    throw ValidationError("cannot split " + std::to_string(items.size()) + " items into " + std::to_string(k) +
                          " folds");
  std::vector<std::size_t> idx(items.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  rng::Engine eng(seed);
  rng::shuffle(idx, eng);
  std::vector<std::vector<T>> folds(k);
  for (std::size_t i = 0; i < idx.size(); ++i) folds[i % k].push_back(items[idx[i]]);
  return folds;
}

}  // namespace hhi::distill
