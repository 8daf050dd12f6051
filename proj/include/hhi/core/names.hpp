#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "hhi/core/errors.hpp"
#include "hhi/core/random.hpp"
#include "hhi/core/text.hpp"
#include "hhi/core/types.hpp"

namespace hhi {

inline constexpr std::string_view kNameToken = "[NAME]";

inline std::size_t count_slots(std::string_view text) {
  return text::count_occurrences(text, kNameToken);
}

/// A name placed into a masked text, with where it landed.
struct NameSubstitution {
  std::string name;
  CharSpan span;

  friend bool operator==(const NameSubstitution&, const NameSubstitution&) = default;
};

struct FilledText {
  std::string text;
  std::vector<NameSubstitution> substitutions;

  std::vector<CharSpan> spans() const {
    std::vector<CharSpan> out;
    out.reserve(substitutions.size());
    for (const auto& s : substitutions) out.push_back(s.span);
    return out;
  }
  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(substitutions.size());
    for (const auto& s : substitutions) out.push_back(s.name);
    return out;
  }
};

/// Generic first names used to make masked text read as ordinary English.
/// The first two entries are the fixed pair used for novel-interaction
/// prompting.
inline const std::vector<std::string>& default_name_lexicon() {
  static const std::vector<std::string> kNames = {
      "Alex",    "Bailey",  "Casey",   "Drew",    "Emerson", "Finley",  "Gray",    "Harper",
      "Indigo",  "Jordan",  "Kendall", "Logan",   "Morgan",  "Noel",    "Oakley",  "Parker",
      "Quinn",   "Riley",   "Sawyer",  "Taylor",  "Umber",   "Val",     "Wren",    "Xen",
      "Yael",    "Zion",    "Adam",    "Bob",     "Estella", "Lorne",   "Angelia", "Gladi",
      "Emmie",   "Jacinthe", "Bettye", "Hester",  "Kippie",  "Paulie",  "Ainsley", "Blair",
      "Cameron", "Dakota",  "Eden",    "Frankie", "Gale",    "Hayden",  "Jessie",  "Kai",
      "Lane",    "Marlowe", "Nico",    "Ollie",   "Peyton",  "Reese",   "Rowan",   "Sage",
      "Shay",    "Skyler",  "Tatum",   "Toby",    "Wynn",    "Arden",   "Brook",   "Corey",
      "Darcy",   "Ellis",   "Flynn",   "Greer",   "Hollis",  "Jules",   "Kit",     "Lee",
      "Micah",   "Nell",    "Perry",   "Remy",    "Robin",   "Sam",     "Sidney",  "Terry"};
  return kNames;
}

/// Reads a name lexicon: one name per line, blank lines ignored.
inline std::vector<std::string> load_name_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open name lexicon " + path);
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    auto t = text::trim(line);
    if (!t.empty()) names.emplace_back(t);
  }
  return names;
}

/// Ordered list of distinct single-token names. Substitution is positional:
/// the i-th `[NAME]` slot receives names()[i].
class NamePool {
 public:
  NamePool() = default;
  explicit NamePool(std::vector<std::string> names, std::uint64_t seed = 0)
      : names_(std::move(names)), seed_(seed) {
    std::unordered_set<std::string_view> seen;
    for (const auto& n : names_) {
      if (n.empty() || std::any_of(n.begin(), n.end(), text::is_space))
        throw ValidationError("pool names must be non-empty single tokens: '" + n + "'");
      if (!seen.insert(n).second) throw ValidationError("duplicate pool name '" + n + "'");
    }
  }

  /// Pool built from a seeded Fisher-Yates shuffle of `lexicon`.
  static NamePool shuffled(std::vector<std::string> lexicon, std::uint64_t seed) {
    rng::Engine eng(seed);
    rng::shuffle(lexicon, eng);
    return NamePool(std::move(lexicon), seed);
  }

  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return names_.size(); }
  std::uint64_t seed() const { return seed_; }

  /// Sub-pool of `count` names starting at `offset`.
  NamePool slice(std::size_t offset, std::size_t count) const {
    if (offset + count > names_.size())
      throw ValidationError("name pool exhausted: need " + std::to_string(offset + count) +
                            " names, pool has " + std::to_string(names_.size()));
    return NamePool(std::vector<std::string>(names_.begin() + static_cast<std::ptrdiff_t>(offset),
                                             names_.begin() + static_cast<std::ptrdiff_t>(offset + count)),
                    seed_);
  }

 private:
  std::vector<std::string> names_;
  std::uint64_t seed_ = 0;
};

/// Replaces every span with `[NAME]`; all other characters are preserved.
inline MaskedCaption mask_names(std::string_view text, std::span<const CharSpan> spans,
                                Source source = Source::kSynthetic) {
  std::vector<CharSpan> sorted(spans.begin(), spans.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const CharSpan& a, const CharSpan& b) { return a.begin < b.begin; });
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const auto& s = sorted[i];
    if (s.begin >= s.end || s.end > text.size())
      throw ValidationError("name span [" + std::to_string(s.begin) + "," + std::to_string(s.end) +
                            ") out of range for text of length " + std::to_string(text.size()));
    if (i > 0 && sorted[i - 1].overlaps(s)) throw ValidationError("overlapping name spans");
  }
  MaskedCaption out;
  out.source = source;
  std::size_t cursor = 0;
  for (const auto& s : sorted) {
    out.text.append(text.substr(cursor, s.begin - cursor));
    out.text.append(kNameToken);
    cursor = s.end;
  }
  out.text.append(text.substr(cursor));
  return out;
}

/// Fills the i-th `[NAME]` with pool.names()[i] and records where each went.
inline FilledText fill_names(std::string_view masked, const NamePool& pool) {
  const std::size_t need = count_slots(masked);
  if (need > pool.size())
    throw ValidationError("name pool exhausted: text needs " + std::to_string(need) +
                          " names, pool has " + std::to_string(pool.size()));
  FilledText out;
  out.substitutions.reserve(need);
  std::size_t cursor = 0;
  std::size_t slot = 0;
  for (auto pos = masked.find(kNameToken); pos != std::string_view::npos;
       pos = masked.find(kNameToken, cursor)) {
    out.text.append(masked.substr(cursor, pos - cursor));
    const std::string& name = pool.names()[slot++];
    CharSpan span{out.text.size(), out.text.size() + name.size()};
    out.text.append(name);
    out.substitutions.push_back({name, span});
    cursor = pos + kNameToken.size();
  }
  out.text.append(masked.substr(cursor));
  return out;
}

inline FilledText fill_names(const MaskedCaption& masked, const NamePool& pool) {
  return fill_names(std::string_view(masked.text), pool);
}

/// Re-masks every whole-word occurrence of the given names.
inline std::string remask_names(std::string_view text, std::span<const std::string> names) {
  std::vector<CharSpan> spans;
  auto boundary = [&](std::size_t i) { return i >= text.size() || !text::is_alpha(text[i]); };
  for (const auto& n : names) {
    if (n.empty()) continue;
    for (auto pos = text.find(n); pos != std::string_view::npos; pos = text.find(n, pos + 1)) {
      if ((pos == 0 || boundary(pos - 1)) && boundary(pos + n.size())) {
        CharSpan s{pos, pos + n.size()};
        bool clash = std::any_of(spans.begin(), spans.end(),
                                 [&](const CharSpan& o) { return o.overlaps(s); });
        if (!clash) spans.push_back(s);
      }
    }
  }
  return mask_names(text, spans).text;
}

}  // namespace hhi
