#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hhi/core/errors.hpp"
#include "hhi/core/serde.hpp"
#include "hhi/core/types.hpp"

namespace hhi::synth {

enum class Provenance { kWhosWaldoSeed, kSynthetic };

inline std::string_view to_string(Provenance p) {
  return p == Provenance::kWhosWaldoSeed ? "whos-waldo-seed" : "synthetic";
}

inline Provenance provenance_from_string(std::string_view s) {
  if (s == "whos-waldo-seed") return Provenance::kWhosWaldoSeed;
  if (s == "synthetic") return Provenance::kSynthetic;
  throw ValidationError("unknown provenance '" + std::string(s) + "'");
}

/// An (interaction, caption) training unit.
///
/// `slot_map[i]`, when present, is the caption slot whose person fills the
/// i-th interaction slot; without it slots correspond positionally.
struct InteractionCaptionPair {
  Interaction interaction;
  MaskedCaption caption;
  double entailment = 1.0;
  Provenance provenance = Provenance::kSynthetic;
  std::optional<std::uint64_t> gen_seed;
  std::vector<int> slot_map;

  void validate() const {
    if (interaction.text.empty()) throw ValidationError("pair has an empty interaction");
    if (caption.text.empty()) throw ValidationError("pair has an empty caption");
    if (!(entailment >= 0.0 && entailment <= 1.0)) throw ValidationError("p_e outside [0,1]");
    if (provenance == Provenance::kSynthetic && !(entailment > 0.5))
      throw ValidationError("synthetic pair with p_e <= 0.5");
  }

  friend bool operator==(const InteractionCaptionPair&, const InteractionCaptionPair&) = default;
};

inline void to_json(Json& j, const InteractionCaptionPair& p) {
  j = Json{{"interaction", p.interaction.text},
           {"caption", p.caption.text},
           {"p_e", p.entailment},
           {"provenance", to_string(p.provenance)}};
  if (p.gen_seed) j["gen_seed"] = *p.gen_seed;
  if (!p.slot_map.empty()) j["slot_map"] = p.slot_map;
}

inline void from_json(const Json& j, InteractionCaptionPair& p) {
  using json_detail::get_required;
  p.interaction.text = get_required<std::string>(j, "interaction");
  p.caption.text = get_required<std::string>(j, "caption");
  p.entailment = j.value("p_e", 1.0);
  p.provenance = provenance_from_string(j.value("provenance", std::string("synthetic")));
  p.caption.source = p.provenance == Provenance::kWhosWaldoSeed ? Source::kWhosWaldo : Source::kSynthetic;
  if (j.contains("gen_seed") && !j.at("gen_seed").is_null()) p.gen_seed = j.at("gen_seed").get<std::uint64_t>();
  else p.gen_seed.reset();
  p.slot_map = j.value("slot_map", std::vector<int>{});
  p.validate();
}

}  // namespace hhi::synth
