#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hhi/backends/interfaces.hpp"
#include "hhi/core/names.hpp"
#include "hhi/core/parse.hpp"
#include "hhi/core/text.hpp"

namespace hhi::synth {

struct FilterVerdict {
  bool accepted = false;
  std::vector<std::string> reasons;
};

namespace filter_detail {

/// Start offsets of whole-word occurrences of `word` in `s`.
inline std::vector<std::size_t> word_positions(std::string_view s, std::string_view word) {
  std::vector<std::size_t> out;
  if (word.empty()) return out;
  auto boundary = [&](std::size_t i) { return i >= s.size() || !text::is_alpha(s[i]); };
  for (auto pos = s.find(word); pos != std::string_view::npos; pos = s.find(word, pos + 1))
    if ((pos == 0 || boundary(pos - 1)) && boundary(pos + word.size())) out.push_back(pos);
  return out;
}

inline bool has_ing_word(std::string_view s) {
  for (const auto& w : text::split_ws(s)) {
    auto core = text::strip_punct(w);
    if (text::ends_with_word_suffix(text::lower(core), "ing")) return true;
  }
  return false;
}

}  // namespace filter_detail

/// Checks raw generator output for a prompt filled with `first`/`second`.
/// `lexicon` lists every name that could have leaked in from the pool.
inline FilterVerdict filter_novel_interaction(std::string_view text, std::string_view first = "Alex",
                                              std::string_view second = "Bailey",
                                              std::span<const std::string> lexicon = default_name_lexicon()) {
  using filter_detail::word_positions;
  FilterVerdict v;
  auto a = word_positions(text, first);
  auto b = word_positions(text, second);
  if (a.size() != 1 || b.size() != 1 || a[0] > b[0]) v.reasons.emplace_back("name-order");
  for (const auto& n : lexicon) {
    if (n == first || n == second) continue;
    if (!word_positions(text, n).empty()) {
      v.reasons.emplace_back("other-name");
      break;
    }
  }
  std::string rest(text);
  for (auto n : {first, second}) rest = text::replace_all(rest, n, "");
  if (std::any_of(rest.begin(), rest.end(), text::is_upper)) v.reasons.emplace_back("uppercase");
  if (!filter_detail::has_ing_word(text)) v.reasons.emplace_back("no-ing-word");
  auto t = text::trim(text);
  if (t.ends_with(" the") || t.ends_with(" a")) v.reasons.emplace_back("dangling-article");
  v.accepted = v.reasons.empty();
  return v;
}

inline const std::vector<std::string>& interaction_banned_substrings() {
  static const std::vector<std::string> k = {"photo", "image", "picture", "in this", "In this"};
  return k;
}

struct PairVerdict {
  bool accepted = false;
  double p_e = 0.0;
  std::vector<std::string> reasons;
};

/// Filters a generated caption C* for a masked target interaction I*.
/// `names` are the names I* was filled with in the prompt; `parse` is a
/// parse of the filled I*.
inline PairVerdict filter_synthetic_pair(const Interaction& interaction, std::string_view caption,
                                         std::span<const std::string> names, const NliBackend& nli,
                                         const DependencyParse& parse, std::string_view pair_id = {}) {
  PairVerdict v;
  for (const auto& n : names)
    if (filter_detail::word_positions(caption, n).empty()) {
      v.reasons.emplace_back("missing-name");
      break;
    }
  const std::size_t slots = count_slots(interaction.text);
  if (slots > names.size())
    throw ValidationError("interaction has " + std::to_string(slots) + " slots but only " +
                          std::to_string(names.size()) + " names were given");
  const std::string hypothesis =
      fill_names(interaction.text, NamePool(std::vector<std::string>(names.begin(), names.begin() + slots))).text;
  try {
    auto s = nli.score(std::string(caption), hypothesis);
    s.validate();
    v.p_e = s.entailment;
  } catch (const BackendError& e) {
    throw BackendError(std::string(pair_id.empty() ? "" : "pair " + std::string(pair_id) + ": ") + e.what());
  }
  if (!(v.p_e > 0.5)) v.reasons.emplace_back("entailment");
  if (std::none_of(parse.tokens.begin(), parse.tokens.end(), [](const Token& t) { return t.upos == "VERB"; }))
    v.reasons.emplace_back("no-verb");
  for (const auto& b : interaction_banned_substrings())
    if (interaction.text.find(b) != std::string::npos) {
      v.reasons.emplace_back("banned-substring");
      break;
    }
  v.accepted = v.reasons.empty();
  return v;
}

}  // namespace hhi::synth
