#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "hhi/core/errors.hpp"
#include "hhi/core/names.hpp"
#include "hhi/core/parse.hpp"
#include "hhi/core/serde.hpp"
#include "hhi/core/types.hpp"
#include "hhi/extract/inflect.hpp"

namespace hhi::extract {

struct ExtractionRuleConfig {
  std::set<std::string> banned_entity_types{"DATE", "GPE", "FAC", "ORG", "LOC", "TIME"};
  int min_name_entities = 2;
  bool require_subject_name = true;

  void validate() const {
    if (min_name_entities < 2) throw ValidationError("min_name_entities must be >= 2");
  }
};

inline void to_json(Json& j, const ExtractionRuleConfig& c) {
  j = Json{{"banned_entity_types", c.banned_entity_types},
           {"min_name_entities", c.min_name_entities},
           {"require_subject_name", c.require_subject_name}};
}

inline void from_json(const Json& j, ExtractionRuleConfig& c) {
  if (j.contains("banned_entity_types"))
    c.banned_entity_types = j.at("banned_entity_types").get<std::set<std::string>>();
  c.min_name_entities = j.value("min_name_entities", c.min_name_entities);
  c.require_subject_name = j.value("require_subject_name", c.require_subject_name);
  c.validate();
}

/// An extracted interaction plus the character spans (in the parsed text)
/// of the person mentions it contains, in output order.
struct ExtractionResult {
  Interaction interaction;
  std::vector<CharSpan> person_spans;
};

namespace rules_detail {

inline const std::set<std::string_view>& argument_relations() {
  static const std::set<std::string_view> k = {"nsubj", "nsubjpass", "dobj", "obj", "iobj", "dative",
                                               "prep",  "agent",     "prt",  "attr", "oprd", "obl"};
  return k;
}

inline bool is_subject(std::string_view deprel) { return deprel == "nsubj" || deprel == "nsubjpass"; }

class Extractor {
 public:
  Extractor(const DependencyParse& parse, const ExtractionRuleConfig& cfg,
            std::span<const CharSpan> filled)
      : p_(parse), cfg_(cfg), filled_(filled.begin(), filled.end()) {}

  bool is_person(std::size_t i) const {
    const Token& t = p_[i];
    if (t.entity == "PERSON" || t.entity == "NAME" || t.form == kNameToken) return true;
    return std::any_of(filled_.begin(), filled_.end(),
                       [&](const CharSpan& s) { return s.contains(t.span); });
  }

  bool is_banned(std::size_t i) const {
    return !p_[i].entity.empty() && cfg_.banned_entity_types.count(p_[i].entity) > 0;
  }

  bool has_person_subject(std::size_t verb) const {
    for (auto c : p_.children(verb))
      if (is_subject(p_[c].deprel) && is_person(c)) return true;
    return false;
  }

  std::optional<ExtractionResult> run() {
    for (std::size_t v = 0; v < p_.size(); ++v) {
      if (p_[v].upos != "VERB") continue;
      const bool subj = has_person_subject(v);
      if (cfg_.require_subject_name && !subj) continue;
      return from_verb(v);
    }
    return std::nullopt;
  }

 private:
  // Head of a nominal plus its determiner/possessor; person heads also pull
  // in their coordinated person conjuncts.
  void add_nominal(std::size_t n) {
    picked_.insert(n);
    for (auto c : p_.children(n)) {
      const auto& rel = p_[c].deprel;
      if (rel == "det" || rel == "poss" || rel == "nmod:poss") picked_.insert(c);
    }
    if (!is_person(n)) return;
    std::size_t last_conj = n;
    for (auto c : p_.children(n, "conj")) {
      if (!is_person(c)) continue;
      add_nominal(c);
      last_conj = std::max(last_conj, c);
    }
    if (last_conj == n) return;
    for (auto c : p_.children(n)) {
      const auto& rel = p_[c].deprel;
      const bool joiner = rel == "cc" || (rel == "punct" && p_[c].form == ",");
      if (joiner && c > n && c < last_conj) picked_.insert(c);
    }
  }

  void add_preposition(std::size_t x, int depth) {
    std::vector<std::size_t> comps;
    for (auto c : p_.children(x)) {
      const auto& rel = p_[c].deprel;
      if (rel == "pobj" || rel == "pcomp" || rel == "obj") comps.push_back(c);
    }
    for (auto c : comps)
      if (is_banned(c)) return;
    picked_.insert(x);
    for (auto c : comps) {
      if (p_[c].upos == "ADP") {
        if (depth == 0) add_preposition(c, depth + 1);
      } else {
        add_nominal(c);
      }
    }
  }

  std::optional<ExtractionResult> from_verb(std::size_t v) {
    picked_ = {v};
    for (auto x : p_.children(v)) {
      const auto& rel = p_[x].deprel;
      if (!argument_relations().count(rel)) continue;
      if (is_banned(x)) continue;
      if (rel == "prep" || rel == "agent" || p_[x].upos == "ADP") add_preposition(x, 0);
      else if (rel == "prt") picked_.insert(x);
      else add_nominal(x);
    }

    std::vector<std::size_t> order(picked_.begin(), picked_.end());
    std::map<std::size_t, std::string> replace;
    replace[v] = to_present_continuous(p_[v].lemma);
    std::vector<std::size_t> shown;
    std::set<std::pair<std::size_t, std::size_t>> mentions;
    ExtractionResult out;
    for (auto i : order) {
      if (is_person(i)) {
        auto span = p_.entity_span(i);
        if (!mentions.insert(span).second) continue;
        replace[i] = std::string(kNameToken);
        out.person_spans.push_back({p_[span.first].span.begin, p_[span.second].span.end});
      }
      shown.push_back(i);
    }
    if (static_cast<int>(mentions.size()) < cfg_.min_name_entities) return std::nullopt;
    out.interaction = Interaction{render_tokens(p_, shown, replace)};
    return out;
  }

  const DependencyParse& p_;
  const ExtractionRuleConfig& cfg_;
  std::vector<CharSpan> filled_;
  std::set<std::size_t> picked_;
};

}  // namespace rules_detail

/// Interaction text for the first verb (token order) with a person subject,
/// or none when fewer than `min_name_entities` people take part. `filled`
/// lists the spans of generic names substituted into masked captions; those
/// tokens count as people even without an entity label.
inline std::optional<ExtractionResult> extract_interaction_detailed(
    const DependencyParse& parse, const ExtractionRuleConfig& cfg = {},
    std::span<const CharSpan> filled = {}) {
  cfg.validate();
  parse.validate();
  return rules_detail::Extractor(parse, cfg, filled).run();
}

inline std::optional<Interaction> extract_interaction(const DependencyParse& parse,
                                                      const ExtractionRuleConfig& cfg = {},
                                                      std::span<const CharSpan> filled = {}) {
  auto r = extract_interaction_detailed(parse, cfg, filled);
  if (!r) return std::nullopt;
  return std::move(r->interaction);
}

}  // namespace hhi::extract
