#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hhi/core/errors.hpp"
#include "hhi/core/serde.hpp"

namespace hhi {

enum class Source { kWhosWaldo, kCcNews, kCoco, kConceptualCaptions, kSynthetic };
enum class Split { kTrain, kDev, kTest };

inline constexpr std::array<std::pair<Source, std::string_view>, 5> kSourceNames{{
    {Source::kWhosWaldo, "whos-waldo"},
    {Source::kCcNews, "cc-news"},
    {Source::kCoco, "coco"},
    {Source::kConceptualCaptions, "conceptual-captions"},
    {Source::kSynthetic, "synthetic"},
}};

inline constexpr std::array<std::pair<Split, std::string_view>, 3> kSplitNames{{
    {Split::kTrain, "train"},
    {Split::kDev, "dev"},
    {Split::kTest, "test"},
}};

inline std::string_view to_string(Source s) {
  for (auto [v, name] : kSourceNames)
    if (v == s) return name;
  return "unknown";
}

inline std::string_view to_string(Split s) {
  for (auto [v, name] : kSplitNames)
    if (v == s) return name;
  return "unknown";
}

inline Source source_from_string(std::string_view s) {
  for (auto [v, name] : kSourceNames)
    if (name == s) return v;
  throw ValidationError("unknown source '" + std::string(s) + "'");
}

inline Split split_from_string(std::string_view s) {
  for (auto [v, name] : kSplitNames)
    if (name == s) return v;
  throw ValidationError("unknown split '" + std::string(s) + "'");
}

/// Half-open character range [begin, end) into a UTF-8 string.
struct CharSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool overlaps(const CharSpan& o) const { return begin < o.end && o.begin < end; }
  bool contains(const CharSpan& o) const { return begin <= o.begin && o.end <= end; }
  friend bool operator==(const CharSpan&, const CharSpan&) = default;
};

/// Caption text whose person names are masked with the literal `[NAME]` token.
struct MaskedCaption {
  std::string text;
  Source source = Source::kSynthetic;

  friend bool operator==(const MaskedCaption&, const MaskedCaption&) = default;
};

/// Free-text interaction with `[NAME]` slots, e.g. "[NAME] hugging [NAME]".
struct Interaction {
  std::string text;

  friend bool operator==(const Interaction&, const Interaction&) = default;
  friend auto operator<=>(const Interaction&, const Interaction&) = default;
};

/// One dataset row: an image, its masked caption, face detections and an
/// optional (pseudo or gold) interaction label.
struct LabeledSample {
  std::string id;
  std::string image_ref;
  MaskedCaption caption;
  int face_count = 0;
  std::optional<std::string> datetime_meta;
  std::optional<Interaction> label;
  Split split = Split::kTrain;
  // Additional reference captions (COCO items carry several); the first
  // entry, when present, is the NLI premise.
  std::vector<std::string> references;

  friend bool operator==(const LabeledSample&, const LabeledSample&) = default;
};

inline void to_json(Json& j, const LabeledSample& s) {
  j = Json::object();
  j["id"] = s.id;
  j["image_ref"] = s.image_ref;
  j["caption"] = s.caption.text;
  j["source"] = to_string(s.caption.source);
  j["face_count"] = s.face_count;
  if (s.datetime_meta) j["datetime_meta"] = *s.datetime_meta;
  if (s.label) j["label"] = s.label->text;
  j["split"] = to_string(s.split);
  if (!s.references.empty()) j["references"] = s.references;
}

inline void from_json(const Json& j, LabeledSample& s) {
  using json_detail::get_optional;
  using json_detail::get_required;
  s.id = get_required<std::string>(j, "id");
  s.image_ref = get_required<std::string>(j, "image_ref");
  s.caption.text = get_required<std::string>(j, "caption");
  if (s.caption.text.empty()) throw ValidationError("field 'caption' is empty");
  s.caption.source = source_from_string(get_required<std::string>(j, "source"));
  s.face_count = get_required<int>(j, "face_count");
  if (s.face_count < 0) throw ValidationError("field 'face_count' is negative");
  s.datetime_meta = get_optional<std::string>(j, "datetime_meta");
  if (auto label = get_optional<std::string>(j, "label")) s.label = Interaction{*label};
  else s.label.reset();
  s.split = split_from_string(get_required<std::string>(j, "split"));
  s.references = get_optional<std::vector<std::string>>(j, "references").value_or(
      std::vector<std::string>{});
}

}  // namespace hhi
