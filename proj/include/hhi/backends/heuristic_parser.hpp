#pragma once

#include <algorithm>
#include <cctype>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "hhi/backends/interfaces.hpp"
#include "hhi/core/names.hpp"
#include "hhi/core/text.hpp"
#include "hhi/extract/inflect.hpp"

namespace hhi {

/// Rule-based dependency parser for short interaction-shaped texts such as
/// "[NAME] and [NAME] meeting at a hotel". The first "-ing" word that is not
/// used as a noun becomes the root verb; everything before it is the subject,
/// everything after it is attached as objects and prepositional phrases.
/// Deterministic and dependency-free, so it is used for tests and as the
/// default parser of the desk-scale pipeline.
class HeuristicParser : public ParserBackend {
 public:
  HeuristicParser() : HeuristicParser(default_name_lexicon()) {}
  explicit HeuristicParser(const std::vector<std::string>& person_names)
      : names_(person_names.begin(), person_names.end()) {}

  DependencyParse parse(const std::string& input) const override {
    DependencyParse p;
    p.text = input;
    tokenize(p);
    if (p.tokens.empty()) throw ValidationError("cannot parse empty text");
    tag(p);
    attach(p);
    p.validate();
    return p;
  }

 private:
  static bool in(const std::set<std::string_view>& s, std::string_view w) { return s.count(w) > 0; }

  static const std::set<std::string_view>& determiners() {
    static const std::set<std::string_view> k = {"a", "an", "the", "this", "that", "these", "those",
                                                 "some", "each", "every", "another", "any", "no"};
    return k;
  }
  static const std::set<std::string_view>& possessives() {
    static const std::set<std::string_view> k = {"his", "her", "their", "its", "my", "your", "our"};
    return k;
  }
  static const std::set<std::string_view>& prepositions() {
    static const std::set<std::string_view> k = {
        "with",    "at",     "in",      "on",      "to",      "from",   "for",    "of",
        "during",  "near",   "over",    "under",   "around",  "after",  "before", "behind",
        "beside",  "besides", "between", "by",     "into",    "onto",   "through", "toward",
        "towards", "against", "about",  "across",  "along",   "among",  "like",   "inside",
        "outside", "above",  "below",   "beneath", "past",    "upon",   "within", "without",
        "throughout", "alongside", "amid"};
    return k;
  }
  static const std::set<std::string_view>& subordinators() {
    static const std::set<std::string_view> k = {"as",   "that", "while", "when",  "because", "if",
                                                 "what", "who",  "which", "where", "whether", "since",
                                                 "until", "though", "although"};
    return k;
  }
  static const std::set<std::string_view>& pronouns() {
    static const std::set<std::string_view> k = {"he",   "she", "they", "him",   "them", "it",   "we",
                                                 "us",   "i",   "me",   "you",   "he'll", "she'll",
                                                 "he's", "she's", "they're", "himself", "herself",
                                                 "themselves", "each-other", "one"};
    return k;
  }
  static const std::set<std::string_view>& auxiliaries() {
    static const std::set<std::string_view> k = {"is",   "are", "was",  "were", "be",   "being", "been",
                                                 "has",  "have", "had", "will", "would", "can",
                                                 "could", "do", "does", "did",  "to-be"};
    return k;
  }
  static const std::set<std::string_view>& ing_nouns() {
    static const std::set<std::string_view> k = {
        "morning", "evening",  "building", "wedding", "ceiling", "nothing",  "something",
        "anything", "everything", "thing", "king",    "ring",    "spring",   "string",
        "wing",    "sibling",  "clothing", "during",  "bring",   "sing",     "swing",
        "sting",   "offspring", "darling", "pudding", "lightning", "earring", "railing",
        "outing",  "ending",   "beginning", "awning", "stuffing", "icing",    "ping"};
    return k;
  }
  static const std::set<std::string_view>& adverbs() {
    static const std::set<std::string_view> k = {"next",  "together", "up",    "out",  "down",
                                                 "back",  "away",     "off",   "also", "closely",
                                                 "warmly", "happily", "again", "here", "there",
                                                 "not",   "just",     "still", "very"};
    return k;
  }

  // Whitespace tokens with trailing , . ; : ! ? ) and "'s" split off, and a
  // leading "(" split off.
  static void tokenize(DependencyParse& p) {
    const std::string& s = p.text;
    auto push = [&](std::size_t b, std::size_t e) {
      Token t;
      t.form = s.substr(b, e - b);
      t.span = {b, e};
      p.tokens.push_back(std::move(t));
    };
    std::size_t i = 0;
    while (i < s.size()) {
      while (i < s.size() && text::is_space(s[i])) ++i;
      if (i >= s.size()) break;
      std::size_t j = i;
      while (j < s.size() && !text::is_space(s[j])) ++j;
      std::size_t b = i, e = j;
      while (b < e && (s[b] == '(' || s[b] == '"')) {
        push(b, b + 1);
        ++b;
      }
      std::vector<std::pair<std::size_t, std::size_t>> tail;
      while (e > b) {
        const char c = s[e - 1];
        if (c == ',' || c == '.' || c == ';' || c == ':' || c == '!' || c == '?' || c == ')' ||
            c == '"') {
          tail.emplace_back(e - 1, e);
          --e;
        } else if (e - b > 2 && s.compare(e - 2, 2, "'s") == 0) {
          tail.emplace_back(e - 2, e);
          e -= 2;
        } else {
          break;
        }
      }
      if (e > b) push(b, e);
      for (auto it = tail.rbegin(); it != tail.rend(); ++it) push(it->first, it->second);
      i = j;
    }
    for (std::size_t k = 0; k + 1 < p.tokens.size(); ++k)
      p.tokens[k].space_after = p.tokens[k + 1].span.begin > p.tokens[k].span.end;
    if (!p.tokens.empty()) p.tokens.back().space_after = false;
  }

  static std::string ing_lemma(const std::string& w) {
    const std::string stem = w.substr(0, w.size() - 3);
    std::vector<std::string> cands;
    if (stem.size() <= 2 && stem.ends_with("y")) cands.push_back(stem.substr(0, stem.size() - 1) + "ie");
    if (stem.size() >= 2 && stem[stem.size() - 1] == stem[stem.size() - 2])
      cands.push_back(stem.substr(0, stem.size() - 1));
    cands.push_back(stem + "e");
    cands.push_back(stem);
    // Prefer the "+e" lemma only when the bare stem would inflect differently.
    for (const auto& c : cands) {
      if (c.empty()) continue;
      if (c == stem + "e" && extract::to_present_continuous(stem) == w) continue;
      if (extract::to_present_continuous(c) == w) return c;
    }
    return stem;
  }

  bool is_person_form(const std::string& form) const {
    return form == kNameToken || names_.count(form) > 0;
  }

  void tag(DependencyParse& p) const {
    for (std::size_t i = 0; i < p.size(); ++i) {
      Token& t = p.tokens[i];
      const std::string w = text::lower(t.form);
      t.lemma = w;
      if (is_person_form(t.form)) {
        t.upos = "PROPN";
        t.entity = "PERSON";
        t.iob = 'B';
      } else if (t.form == "'s") {
        t.upos = "PART";
      } else if (t.form.size() == 1 && std::ispunct(static_cast<unsigned char>(t.form[0])) &&
                 t.form != "&") {
        t.upos = "PUNCT";
      } else if (w == "and" || w == "&" || w == "or" || w == "but") {
        t.upos = "CCONJ";
      } else if (in(determiners(), w)) {
        t.upos = "DET";
      } else if (in(possessives(), w)) {
        t.upos = "PRON";
        t.xpos = "PRP$";
      } else if (in(prepositions(), w)) {
        t.upos = "ADP";
      } else if (in(subordinators(), w)) {
        t.upos = "SCONJ";
      } else if (in(pronouns(), w)) {
        t.upos = "PRON";
      } else if (in(auxiliaries(), w)) {
        t.upos = "AUX";
      } else if (in(adverbs(), w)) {
        t.upos = "ADV";
      } else if (!w.empty() && std::all_of(w.begin(), w.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
        t.upos = "NUM";
      } else if (w.size() > 4 && w.ends_with("ing") && !in(ing_nouns(), w) &&
                 !(i > 0 && (p[i - 1].upos == "DET" || p[i - 1].xpos == "PRP$"))) {
        t.upos = "VERB";
        t.lemma = ing_lemma(w);
      } else {
        t.upos = text::is_upper(t.form[0]) ? "PROPN" : "NOUN";
      }
    }
  }

  static bool nominal(const Token& t) {
    return t.upos == "NOUN" || t.upos == "PROPN" || t.upos == "PRON" || t.upos == "NUM" ||
           t.upos == "DET" || t.upos == "PART" || t.upos == "ADJ";
  }

  // Attaches the nominal chunk [b, e) internally and returns its head.
  static std::size_t attach_chunk(DependencyParse& p, std::size_t b, std::size_t e) {
    std::size_t head = e - 1;
    while (head > b && (p[head].upos == "PART" || p[head].upos == "DET")) --head;
    for (std::size_t k = b; k < e; ++k) {
      if (k == head) continue;
      Token& t = p.tokens[k];
      t.head = static_cast<int>(head);
      if (t.upos == "PART") {
        t.deprel = "case";
        if (k > b) t.head = static_cast<int>(k - 1);
      } else if (k + 1 < e && p[k + 1].upos == "PART" && k + 1 != head) {
        t.deprel = "poss";
      } else if (t.upos == "DET") {
        t.deprel = "det";
      } else if (t.xpos == "PRP$") {
        t.deprel = "poss";
      } else if (t.upos == "NUM") {
        t.deprel = "nummod";
      } else {
        t.deprel = "compound";
      }
    }
    return head;
  }

  static void attach(DependencyParse& p) {
    const std::size_t n = p.size();
    std::optional<std::size_t> root;
    for (std::size_t i = 0; i < n; ++i)
      if (p[i].upos == "VERB") {
        root = i;
        break;
      }
    if (!root) {
      // No verb: flat structure under the first token.
      for (std::size_t i = 0; i < n; ++i) {
        p.tokens[i].head = 0;
        p.tokens[i].deprel = i == 0 ? "ROOT" : "dep";
      }
      return;
    }
    const std::size_t v = *root;
    p.tokens[v].head = static_cast<int>(v);
    p.tokens[v].deprel = "ROOT";

    auto set = [&](std::size_t i, std::size_t head, const char* rel) {
      p.tokens[i].head = static_cast<int>(head);
      p.tokens[i].deprel = rel;
    };

    // Subject side: chunks joined by and/&/commas, or by a "with" phrase.
    std::optional<std::size_t> subj;
    constexpr std::size_t kNone = static_cast<std::size_t>(-1);
    std::size_t last_head = kNone;
    std::size_t open_prep = kNone;
    for (std::size_t i = 0; i < v;) {
      const Token& t = p[i];
      if (nominal(t)) {
        std::size_t e = i;
        while (e < v && nominal(p[e])) ++e;
        std::size_t h = attach_chunk(p, i, e);
        if (open_prep != kNone) set(h, open_prep, "pobj");
        else if (!subj) set(h, v, "nsubj"), subj = h;
        else set(h, *subj, "conj");
        open_prep = kNone;
        last_head = h;
        i = e;
        continue;
      }
      if (t.upos == "ADP") {
        set(i, (last_head != kNone ? last_head : v), "prep");
        open_prep = i;
      } else if (t.upos == "CCONJ") {
        set(i, subj.value_or(v), "cc");
      } else if (t.upos == "PUNCT") {
        set(i, subj.value_or(v), "punct");
      } else if (t.upos == "AUX") {
        set(i, v, "aux");
      } else {
        set(i, v, "advmod");
      }
      ++i;
    }

    // Verb side.
    last_head = kNone;
    open_prep = kNone;
    std::optional<std::size_t> clause;
    std::optional<std::size_t> last_obj;
    bool after_cc = false;
    for (std::size_t i = v + 1; i < n;) {
      const Token& t = p[i];
      if (clause) {
        set(i, *clause, "dep");
        ++i;
        continue;
      }
      if (nominal(t)) {
        std::size_t e = i;
        while (e < n && nominal(p[e])) ++e;
        std::size_t h = attach_chunk(p, i, e);
        if (after_cc && last_head != kNone) {
          set(h, last_head, "conj");
        } else if (open_prep != kNone) {
          set(h, open_prep, "pobj");
          last_head = h;
        } else if (last_obj && last_head == *last_obj) {
          p.tokens[*last_obj].deprel = "dative";
          set(h, v, "dobj");
          last_obj = h;
          last_head = h;
        } else {
          set(h, v, "dobj");
          last_obj = h;
          last_head = h;
        }
        open_prep = kNone;
        after_cc = false;
        i = e;
        continue;
      }
      if (t.upos == "ADP") {
        const bool of = text::lower(t.form) == "of";
        set(i, of && last_head != kNone ? last_head : v, "prep");
        open_prep = i;
        last_obj.reset();
      } else if (t.upos == "CCONJ") {
        set(i, (last_head != kNone ? last_head : v), "cc");
        after_cc = true;
      } else if (t.upos == "SCONJ" || t.upos == "VERB" || t.upos == "AUX") {
        set(i, v, t.upos == "VERB" ? "advcl" : "mark");
        clause = i;
      } else if (t.upos == "PUNCT") {
        set(i, v, "punct");
      } else {
        set(i, v, "advmod");
        last_obj.reset();
      }
      ++i;
    }
  }

  std::unordered_set<std::string> names_;
};

}  // namespace hhi
