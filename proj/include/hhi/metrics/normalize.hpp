#pragma once

#include <string>
#include <string_view>

#include "hhi/backends/interfaces.hpp"
#include "hhi/core/errors.hpp"
#include "hhi/core/names.hpp"
#include "hhi/core/text.hpp"

namespace hhi::metrics {

inline std::string normalize_for_similarity(std::string_view text) {
  return text::replace_all(text, kNameToken, "person");
}

inline std::string normalize_for_nli(std::string_view text) { return text::replace_all(text, kNameToken, "_"); }

struct Groundedness {
  double p_e = 0.0;
  double p_c = 0.0;
};

/// Caption as premise, prediction as hypothesis; both slot-normalised.
inline Groundedness nli_groundedness(std::string_view premise_caption, std::string_view prediction,
                                     const NliBackend& nli) {
  if (text::trim(prediction).empty()) throw ValidationError("empty prediction");
  if (text::trim(premise_caption).empty()) throw ValidationError("empty premise caption");
  auto s = nli.score(normalize_for_nli(premise_caption), normalize_for_nli(prediction));
  s.validate();
  return {s.entailment, s.contradiction};
}

}  // namespace hhi::metrics
