#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hhi/backends/interfaces.hpp"
#include "hhi/core/names.hpp"
#include "hhi/core/parse.hpp"

namespace hhi::synth {

namespace post_detail {

inline bool is_person(const Token& t) {
  return t.entity == "PERSON" || t.entity == "NAME" || t.form == kNameToken;
}

inline bool subtree_has_person(const DependencyParse& p, std::size_t i) {
  for (auto k : p.subtree(i))
    if (is_person(p[k])) return true;
  return false;
}

inline void erase_subtree(const DependencyParse& p, std::size_t i, std::set<std::size_t>& removed) {
  for (auto k : p.subtree(i)) removed.insert(k);
}

// Person conjuncts of `n` (transitively through conj).
inline void person_conjuncts(const DependencyParse& p, std::size_t n, std::vector<std::size_t>& out) {
  for (auto c : p.children(n, "conj")) {
    if (!is_person(p[c])) continue;
    out.push_back(c);
    person_conjuncts(p, c, out);
  }
}

}  // namespace post_detail

/// Removes prepositional phrases without a person and rewrites a coordinated
/// subject ("[NAME] and [NAME] meeting") as a trailing "with [NAME]".
/// `parse` is a parse of the interaction text (masked, or filled with names
/// the parser tags as PERSON). Returns none unless exactly two slots remain.
inline std::optional<Interaction> postprocess_interaction(const Interaction& /*interaction*/,
                                                          const DependencyParse& parse) {
  using namespace post_detail;
  parse.validate();
  if (parse.size() == 0) return std::nullopt;
  const DependencyParse& p = parse;
  std::set<std::size_t> removed;

  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i].deprel == "prep" && !subtree_has_person(p, i)) erase_subtree(p, i, removed);

  std::size_t moved = 0;
  const std::size_t root = p.root();
  if (p[root].upos == "VERB") {
    for (auto s : p.children(root)) {
      if ((p[s].deprel != "nsubj" && p[s].deprel != "nsubjpass") || !is_person(p[s])) continue;
      std::vector<std::size_t> conj;
      person_conjuncts(p, s, conj);
      for (auto c : conj) {
        erase_subtree(p, c, removed);
        ++moved;
      }
      for (auto c : p.children(s)) {
        const auto& rel = p[c].deprel;
        if (rel == "prep" && text::lower(p[c].form) == "with" && subtree_has_person(p, c)) {
          for (auto k : p.subtree(c))
            if (is_person(p[k]) && p.entity_span(k).first == k) ++moved;
          erase_subtree(p, c, removed);
        }
        if (!conj.empty() && (rel == "cc" || (rel == "punct" && p[c].form == ","))) removed.insert(c);
      }
      break;
    }
  }

  std::vector<std::size_t> kept;
  std::map<std::size_t, std::string> replace;
  std::set<std::pair<std::size_t, std::size_t>> mentions;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (removed.count(i)) continue;
    if (is_person(p[i])) {
      if (!mentions.insert(p.entity_span(i)).second) continue;
      replace[i] = std::string(kNameToken);
    }
    kept.push_back(i);
  }
  while (!kept.empty() && p[kept.back()].upos == "PUNCT") kept.pop_back();

  std::string out = render_tokens(p, kept, replace);
  if (moved > 0) {
    out += " with";
    for (std::size_t k = 0; k < moved; ++k) out += (k ? " and " : " ") + std::string(kNameToken);
  }
  if (count_slots(out) != 2) return std::nullopt;
  return Interaction{out};
}

inline std::optional<Interaction> postprocess_interaction(const Interaction& interaction,
                                                          const ParserBackend& parser) {
  return postprocess_interaction(interaction, parser.parse(interaction.text));
}

}  // namespace hhi::synth
