#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hhi/backends/interfaces.hpp"
#include "hhi/core/errors.hpp"
#include "hhi/core/names.hpp"
#include "hhi/core/text.hpp"
#include "hhi/extract/inflect.hpp"

namespace hhi::metrics {

enum class VerbMode { kSlotFormat, kParsed };

inline std::string_view to_string(VerbMode m) { return m == VerbMode::kSlotFormat ? "slot-format" : "parsed"; }

inline VerbMode verb_mode_from_string(std::string_view s) {
  if (s == "slot-format") return VerbMode::kSlotFormat;
  if (s == "parsed") return VerbMode::kParsed;
  throw ValidationError("unknown verb mode '" + std::string(s) + "' (expected slot-format or parsed)");
}

/// Slot-format outputs put the verb right after the first [NAME]; free-form
/// captions go through the parser and the first VERB is re-inflected.
inline std::optional<std::string> extract_verb(std::string_view prediction, VerbMode mode,
                                               const ParserBackend* parser = nullptr) {
  if (mode == VerbMode::kSlotFormat) {
    for (const auto& w : text::split_ws(prediction)) {
      if (w == kNameToken) continue;
      auto bare = text::strip_punct(w);
      if (bare.empty()) continue;
      return text::lower(bare);
    }
    return std::nullopt;
  }
  if (!parser) throw ValidationError("parsed verb extraction requires a parser backend");
  if (text::trim(prediction).empty()) return std::nullopt;
  auto parse = parser->parse(std::string(prediction));
  for (const auto& t : parse.tokens) {
    if (t.upos != "VERB") continue;
    std::string lemma = t.lemma.empty() || t.lemma == "_" ? t.form : t.lemma;
    lemma = text::lower(lemma);
    if (lemma.empty() || lemma.find_first_of(" \t") != std::string::npos) continue;
    return extract::to_present_continuous(lemma);
  }
  return std::nullopt;
}

/// Cosine similarity of the two verbs' embeddings. A missing verb or an
/// out-of-vocabulary word is the zero vector and scores 0.
inline double verb_similarity(const std::optional<std::string>& pred_verb, std::string_view gold_verb,
                              const EmbeddingTable& emb) {
  if (text::trim(gold_verb).empty()) throw ValidationError("gold verb is empty");
  if (!pred_verb) return 0.0;
  auto a = emb.lookup(*pred_verb);
  auto b = emb.lookup(gold_verb);
  if (!a || !b) return 0.0;
  if (a->size() != b->size()) throw ValidationError("embedding dimensions differ");
  double dot = 0.0, na = 0.0, nb = 0.0;
  bool same = true;
  for (std::size_t i = 0; i < a->size(); ++i) {
    const double x = (*a)[i], y = (*b)[i];
    dot += x * y;
    na += x * x;
    nb += y * y;
    same = same && (*a)[i] == (*b)[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  if (same) return 1.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

/// Sentence templates for a situation recognizer's bare verb output.
inline std::pair<std::string, std::string> wrap_categorical_verb(std::string_view verb) {
  auto ving = extract::to_present_continuous(verb);
  return {"_ " + ving + " _", "_ " + ving + " with _"};
}

/// "_" placeholders back to slot tokens so wrapped verbs score like any
/// slot-format prediction.
inline std::string underscores_to_slots(std::string_view s) {
  auto words = text::split_ws(s);
  for (auto& w : words)
    if (w == "_") w = std::string(kNameToken);
  return text::join(words, " ");
}

struct DiversityStats {
  std::size_t n_i = 0;
  std::size_t n_v = 0;
};

inline DiversityStats diversity(const std::vector<std::string>& predictions, VerbMode mode,
                                const ParserBackend* parser = nullptr) {
  std::set<std::string> texts;
  std::set<std::string> verbs;
  for (const auto& p : predictions) {
    if (!texts.insert(p).second) continue;
    if (auto v = extract_verb(p, mode, parser)) verbs.insert(*v);
  }
  return {texts.size(), verbs.size()};
}

}  // namespace hhi::metrics
