#pragma once

#include <set>
#include <string>
#include <string_view>
#include <unordered_map>

#include "hhi/core/errors.hpp"
#include "hhi/core/text.hpp"

namespace hhi::extract {

namespace inflect_detail {

inline bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

// Vowel-group count; a 'u' right after 'q' does not start a group.
inline int syllables(std::string_view w) {
  int groups = 0;
  bool in_group = false;
  for (std::size_t i = 0; i < w.size(); ++i) {
    bool v = is_vowel(w[i]) || (w[i] == 'y' && i > 0);
    if (w[i] == 'u' && i > 0 && w[i - 1] == 'q') v = false;
    if (v && !in_group) ++groups;
    in_group = v;
  }
  return groups;
}

// Consonant-vowel-consonant ending, treating "qu" as a consonant cluster.
inline bool ends_cvc(std::string_view w) {
  const std::size_t n = w.size();
  if (n < 2) return false;
  const char last = w[n - 1], mid = w[n - 2];
  if (is_vowel(last) || last == 'w' || last == 'x' || last == 'y') return false;
  if (!is_vowel(mid)) return false;
  if (n == 2) return false;
  const char before = w[n - 3];
  if (before == 'u' && n >= 4 && w[n - 4] == 'q') return true;
  return !is_vowel(before);
}

// Multi-syllable verbs stressed on the final syllable: these double the
// final consonant even though spelling alone cannot tell.
inline const std::set<std::string_view>& final_stress() {
  static const std::set<std::string_view> k = {
      "abet",     "acquit",   "admit",    "allot",   "begin",    "commit",  "compel",
      "concur",   "confer",   "control",  "defer",   "deter",    "embed",   "emit",
      "equip",    "excel",    "expel",    "forbid",  "forget",   "handicap", "incur",
      "kidnap",   "occur",    "omit",     "outrun",  "overlap",  "patrol",  "permit",
      "prefer",   "propel",   "rebel",    "recur",   "refer",    "regret",  "remit",
      "repel",    "submit",   "transfer", "transmit", "unwrap",  "upset",   "zigzag"};
  return k;
}

inline const std::unordered_map<std::string_view, std::string_view>& irregular() {
  static const std::unordered_map<std::string_view, std::string_view> k = {
      {"be", "being"},   {"see", "seeing"},   {"flee", "fleeing"}, {"singe", "singeing"},
      {"dye", "dyeing"}, {"die", "dying"},    {"lie", "lying"},    {"tie", "tying"},
      {"vie", "vying"},  {"panic", "panicking"}, {"picnic", "picnicking"},
      {"mimic", "mimicking"}, {"traffic", "trafficking"}, {"frolic", "frolicking"}};
  return k;
}

}  // namespace inflect_detail

/// English -ing form of a verb lemma ("bid" -> "bidding", "welcome" ->
/// "welcoming", "visit" -> "visiting").
inline std::string to_present_continuous(std::string_view lemma) {
  using namespace inflect_detail;
  if (lemma.empty()) throw ValidationError("cannot inflect an empty lemma");
  for (char c : lemma)
    if (text::is_space(c)) throw ValidationError("lemma must be a single word: '" + std::string(lemma) + "'");
  const std::string w = text::lower(lemma);
  if (auto it = irregular().find(w); it != irregular().end()) return std::string(it->second);

  const std::size_t n = w.size();
  if (n >= 2 && w.ends_with("ie")) return w.substr(0, n - 2) + "ying";
  if (n >= 2 && w.back() == 'e') {
    if (w.ends_with("ee") || w.ends_with("ye") || w.ends_with("oe")) return w + "ing";
    return w.substr(0, n - 1) + "ing";
  }
  if (ends_cvc(w) && (syllables(w) == 1 || final_stress().count(w)))
    return w + w.back() + "ing";
  return w + "ing";
}

}  // namespace hhi::extract
