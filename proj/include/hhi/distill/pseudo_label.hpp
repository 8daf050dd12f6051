#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <variant>
#include <vector>

#include "hhi/backends/interfaces.hpp"
#include "hhi/core/errors.hpp"
#include "hhi/core/jsonl.hpp"
#include "hhi/core/names.hpp"
#include "hhi/core/parallel.hpp"
#include "hhi/core/text.hpp"
#include "hhi/core/types.hpp"
#include "hhi/distill/training.hpp"

namespace hhi::distill {

enum class RejectionReason { kFormat, kBannedSubstring, kDedupCaption, kDedupDatetime, kFaceCount };

inline std::string_view to_string(RejectionReason r) {
  switch (r) {
    case RejectionReason::kFormat: return "format";
    case RejectionReason::kBannedSubstring: return "banned-substring";
    case RejectionReason::kDedupCaption: return "dedup-caption";
    case RejectionReason::kDedupDatetime: return "dedup-datetime";
    case RejectionReason::kFaceCount: return "face-count";
  }
  return "format";
}

inline RejectionReason rejection_from_string(std::string_view s) {
  for (auto r : {RejectionReason::kFormat, RejectionReason::kBannedSubstring, RejectionReason::kDedupCaption,
                 RejectionReason::kDedupDatetime, RejectionReason::kFaceCount})
    if (to_string(r) == s) return r;
  throw ValidationError("unknown rejection reason '" + std::string(s) + "'");
}

struct PseudoLabelRecord {
  std::string sample_id;
  Interaction label;
  bool accepted = false;
  std::optional<RejectionReason> rejection_reason;

  friend bool operator==(const PseudoLabelRecord&, const PseudoLabelRecord&) = default;
};

inline void to_json(Json& j, const PseudoLabelRecord& r) {
  j = Json{{"sample_id", r.sample_id}, {"label", r.label.text}, {"accepted", r.accepted}};
  if (r.rejection_reason) j["rejection_reason"] = to_string(*r.rejection_reason);
}

inline void from_json(const Json& j, PseudoLabelRecord& r) {
  r.sample_id = json_detail::get_required<std::string>(j, "sample_id");
  r.label.text = j.value("label", std::string());
  r.accepted = json_detail::get_required<bool>(j, "accepted");
  if (j.contains("rejection_reason")) r.rejection_reason = rejection_from_string(j.at("rejection_reason").get<std::string>());
  else r.rejection_reason.reset();
  if (r.accepted && r.rejection_reason) throw ValidationError("accepted record carries a rejection reason");
  if (!r.accepted && !r.rejection_reason) throw ValidationError("rejected record lacks a rejection reason");
}

inline std::vector<LabeledSample> select_eligible_samples(const std::vector<LabeledSample>& dataset,
                                                          int min_faces = 2) {
  std::vector<LabeledSample> out;
  for (const auto& s : dataset)
    if (s.face_count >= min_faces) out.push_back(s);
  return out;
}

struct LabelVerdict {
  bool accepted = false;
  std::optional<RejectionReason> reason;
};

inline const std::vector<std::string>& label_banned_substrings() {
  static const std::vector<std::string> k = {"photo", "image", "picture"};
  return k;
}

/// Label grammar: "[NAME]", then a word ending in "ing", then a tail with
/// exactly one more "[NAME]"; no banned substring anywhere.
inline LabelVerdict filter_pseudo_label(std::string_view label) {
  LabelVerdict v;
  auto words = text::split_ws(label);
  bool format = words.size() >= 3 && words[0] == kNameToken && text::ends_with_word_suffix(words[1], "ing") &&
                count_slots(words[1]) == 0;
  if (format) {
    std::size_t tail = 0;
    for (std::size_t i = 2; i < words.size(); ++i) tail += count_slots(words[i]);
    format = tail == 1;
  }
  if (!format) {
    v.reason = RejectionReason::kFormat;
    return v;
  }
  const std::string low = text::lower(label);
  for (const auto& b : label_banned_substrings())
    if (low.find(b) != std::string::npos) {
      v.reason = RejectionReason::kBannedSubstring;
      return v;
    }
  v.accepted = true;
  return v;
}

/// Why `s` would leak test data, if it would.
class TestLeakIndex {
 public:
  explicit TestLeakIndex(const std::vector<LabeledSample>& test) {
    for (const auto& t : test) {
      captions_.insert(t.caption.text);
      if (t.datetime_meta) datetimes_.insert(*t.datetime_meta);
    }
  }
  std::optional<RejectionReason> check(const LabeledSample& s) const {
    if (captions_.count(s.caption.text)) return RejectionReason::kDedupCaption;
    if (s.datetime_meta && datetimes_.count(*s.datetime_meta)) return RejectionReason::kDedupDatetime;
    return std::nullopt;
  }

 private:
  std::unordered_set<std::string> captions_;
  std::unordered_set<std::string> datetimes_;
};

inline std::vector<LabeledSample> dedupe_against_test(const std::vector<LabeledSample>& train,
                                                      const std::vector<LabeledSample>& test) {
  TestLeakIndex index(test);
  std::vector<LabeledSample> out;
  for (const auto& s : train)
    if (!index.check(s)) out.push_back(s);
  return out;
}

struct CorpusStats {
  std::size_t n_samples = 0;
  std::size_t n_unique_verbs = 0;
  std::size_t n_unique_interactions = 0;
  std::map<std::string, std::size_t> rejection_histogram;
};

inline void to_json(Json& j, const CorpusStats& s) {
  j = Json{{"n_samples", s.n_samples},
           {"n_unique_verbs", s.n_unique_verbs},
           {"n_unique_interactions", s.n_unique_interactions},
           {"rejection_histogram", s.rejection_histogram}};
}

/// Accepted labels count once per sample; the verb is the label's second word.
inline CorpusStats corpus_stats(const std::vector<PseudoLabelRecord>& records) {
  CorpusStats s;
  std::set<std::string> verbs, interactions;
  for (const auto& r : records) {
    if (!r.accepted) {
      ++s.rejection_histogram[std::string(to_string(*r.rejection_reason))];
      continue;
    }
    ++s.n_samples;
    interactions.insert(r.label.text);
    auto words = text::split_ws(r.label.text);
    if (words.size() > 1) verbs.insert(words[1]);
  }
  s.n_unique_verbs = verbs.size();
  s.n_unique_interactions = interactions.size();
  return s;
}

struct PseudoLabelConfig {
  std::string task_prefix = "summarize:";
  int min_faces = 2;
  std::size_t workers = 1;
  // Summaries computed so far are saved here if the summarizer fails.
  std::optional<std::string> checkpoint_path;
};

struct PseudoLabelRun {
  std::vector<PseudoLabelRecord> records;
  CorpusStats stats;
};

/// Runs the student over eligible captions. Every input sample yields one
/// record, in input order: ineligible samples are rejected for face count,
/// summaries are checked against the label grammar, and surviving labels on
/// samples that leak test captions or date-times are rejected last.
inline PseudoLabelRun generate_pseudo_labels(const std::vector<LabeledSample>& dataset,
                                             const SummarizerModel& summarizer,
                                             const std::vector<LabeledSample>& test_set,
                                             const PseudoLabelConfig& cfg = {}) {
  std::map<std::string, std::string> done;
  if (cfg.checkpoint_path && std::filesystem::exists(*cfg.checkpoint_path))
    done = read_json_file(*cfg.checkpoint_path).at("summaries").get<std::map<std::string, std::string>>();

  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < dataset.size(); ++i)
    if (dataset[i].face_count >= cfg.min_faces) eligible.push_back(i);

  using Result = std::variant<std::string, BackendError>;
  auto summaries = parallel_map(eligible.size(), cfg.workers, [&](std::size_t k) -> Result {
    const auto& s = dataset[eligible[k]];
    if (auto it = done.find(s.id); it != done.end()) return it->second;
    try {
      return summarizer.summarize(summarizer_input(s.caption.text, cfg.task_prefix));
    } catch (const BackendError& e) {
      return e;
    }
  });
  for (std::size_t k = 0; k < summaries.size(); ++k) {
    if (auto* err = std::get_if<BackendError>(&summaries[k])) {
      for (std::size_t m = 0; m < summaries.size(); ++m)
        if (auto* ok = std::get_if<std::string>(&summaries[m])) done[dataset[eligible[m]].id] = *ok;
      if (cfg.checkpoint_path) write_json_file(*cfg.checkpoint_path, Json{{"summaries", done}});
      throw BackendError("summarizer failed on sample '" + dataset[eligible[k]].id + "': " + err->what());
    }
  }

  TestLeakIndex leaks(test_set);
  PseudoLabelRun run;
  run.records.reserve(dataset.size());
  std::size_t next = 0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    PseudoLabelRecord r;
    r.sample_id = dataset[i].id;
    if (next < eligible.size() && eligible[next] == i) {
      r.label.text = std::get<std::string>(summaries[next++]);
      auto v = filter_pseudo_label(r.label.text);
      if (!v.accepted) r.rejection_reason = v.reason;
      else r.rejection_reason = leaks.check(dataset[i]);
    } else {
      r.rejection_reason = RejectionReason::kFaceCount;
    }
    r.accepted = !r.rejection_reason.has_value();
    run.records.push_back(std::move(r));
  }
  if (cfg.checkpoint_path && std::filesystem::exists(*cfg.checkpoint_path))
    std::filesystem::remove(*cfg.checkpoint_path);
  run.stats = corpus_stats(run.records);
  return run;
}

/// Samples with their accepted pseudo-label attached.
inline std::vector<LabeledSample> apply_labels(const std::vector<LabeledSample>& dataset,
                                               const std::vector<PseudoLabelRecord>& records) {
  std::map<std::string, const PseudoLabelRecord*> by_id;
  for (const auto& r : records)
    if (r.accepted) by_id[r.sample_id] = &r;
  std::vector<LabeledSample> out;
  for (const auto& s : dataset)
    if (auto it = by_id.find(s.id); it != by_id.end()) {
      auto copy = s;
      copy.label = it->second->label;
      out.push_back(std::move(copy));
    }
  return out;
}

}  // namespace hhi::distill
