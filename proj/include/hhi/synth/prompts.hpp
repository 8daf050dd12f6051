#pragma once

#include <span>
#include <string>
#include <vector>

#include "hhi/core/errors.hpp"
#include "hhi/core/names.hpp"
#include "hhi/core/text.hpp"
#include "hhi/synth/types.hpp"

namespace hhi::synth {

inline constexpr std::size_t kDefaultShots = 10;
inline constexpr std::string_view kCaptionCue = "Caption of image showing ";

/// Few-shot prompt for novel interactions: every seed filled from the start
/// of `pool`, one per line, with a trailing newline.
inline std::string build_interaction_prompt(std::span<const Interaction> seeds, const NamePool& pool,
                                            std::size_t shots = kDefaultShots) {
  if (seeds.size() != shots)
    throw ValidationError("interaction prompt needs exactly " + std::to_string(shots) + " seeds, got " +
                          std::to_string(seeds.size()));
  std::string out;
  for (const auto& s : seeds) {
    out += fill_names(s.text, pool).text;
    out += '\n';
  }
  return out;
}

struct CaptionPrompt {
  std::string text;
  std::vector<std::string> target_names;  // names filled into I*
  std::string target_filled;              // I* with those names
};

namespace prompt_detail {

// Fills a pair's caption with fresh names from `pool` starting at `offset`,
// then its interaction with the same people (via slot_map, else by position).
inline std::pair<std::string, std::string> fill_pair(const InteractionCaptionPair& p, const NamePool& pool,
                                                     std::size_t& offset) {
  const std::size_t caption_slots = count_slots(p.caption.text);
  auto cap_pool = pool.slice(offset, caption_slots);
  offset += caption_slots;
  std::string caption = fill_names(p.caption.text, cap_pool).text;

  const std::size_t inter_slots = count_slots(p.interaction.text);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < inter_slots; ++i) {
    int src = i < p.slot_map.size() ? p.slot_map[i] : (p.slot_map.empty() ? static_cast<int>(i) : -1);
    if (src >= 0 && static_cast<std::size_t>(src) < caption_slots) {
      names.push_back(cap_pool.names()[static_cast<std::size_t>(src)]);
    } else {
      names.push_back(pool.slice(offset, 1).names()[0]);
      ++offset;
    }
  }
  // Repeated people are legitimate in a caption but not in a pool.
  std::string inter;
  std::size_t cursor = 0, slot = 0;
  const std::string& t = p.interaction.text;
  for (auto pos = t.find(kNameToken); pos != std::string::npos; pos = t.find(kNameToken, cursor)) {
    inter.append(t, cursor, pos - cursor);
    inter += names[slot++];
    cursor = pos + kNameToken.size();
  }
  inter.append(t, cursor);
  return {std::move(inter), std::move(caption)};
}

}  // namespace prompt_detail

/// Few-shot prompt for a synthetic caption of `target`. I* takes the first
/// names of `pool`; each example pair then takes the next unused names, so
/// no name is shared between examples or with I*.
inline CaptionPrompt build_caption_prompt(std::span<const InteractionCaptionPair> pairs,
                                          const Interaction& target, const NamePool& pool,
                                          std::size_t shots = kDefaultShots) {
  if (pairs.size() != shots)
    throw ValidationError("caption prompt needs exactly " + std::to_string(shots) + " pairs, got " +
                          std::to_string(pairs.size()));
  const std::size_t target_slots = count_slots(target.text);
  auto filled = fill_names(target.text, pool.slice(0, target_slots));
  std::size_t offset = target_slots;

  CaptionPrompt out;
  for (const auto& p : pairs) {
    auto [inter, caption] = prompt_detail::fill_pair(p, pool, offset);
    out.text += std::string(kCaptionCue) + inter + '\n';
    out.text += text::collapse_whitespace(caption) + '\n';
  }
  out.text += std::string(kCaptionCue) + filled.text + ":";
  out.target_names = filled.names();
  out.target_filled = filled.text;
  return out;
}

}  // namespace hhi::synth
