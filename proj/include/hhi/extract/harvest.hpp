#pragma once

#include <algorithm>
#include <regex>
#include <string>
#include <vector>

#include "hhi/core/errors.hpp"
#include "hhi/core/jsonl.hpp"
#include "hhi/core/serde.hpp"
#include "hhi/core/text.hpp"

namespace hhi::extract {

/// Line selection and cleanup for scraping captions out of news text.
///
/// Strip patterns are literal strings or templates. In a template, `...`
/// stands for arbitrary text and `(number)` for a run of digits. A template
/// wrapped in brackets, e.g. "(AP Photo ...)", removes the whole bracketed
/// credit; an unbracketed template, e.g. "Image copyright ... Image caption",
/// removes only the two markers and keeps the text between them. Every select
/// pattern is stripped as well.
struct HarvestConfig {
  std::size_t max_chars = 1000;
  std::vector<std::string> select_patterns;
  std::vector<std::string> strip_patterns;

  static HarvestConfig defaults() {
    HarvestConfig c;
    c.select_patterns = {"(left)",   "(right)",   "(center)",        ", left,",    ", right,",
                         ", center,", ", centre,", ", pictured,",    "PHOTO: ",    "Photo by",
                         "Image copyright", "Getty ", "AP Photo",    "AP Image"};
    c.strip_patterns = {"(Image ...)", "(Photo ...)",  "(AP Photo ...)", "(Credit ...)",
                        "[Image ...]", "[Featured Image ...]", "Getty Images",
                        "Image copyright ... Image caption", "Photo:", "FILE PHOTO:",
                        "Image (number) of (number)"};
    return c;
  }

  void validate() const {
    if (max_chars == 0) throw ValidationError("harvest: max_chars must be positive");
    if (select_patterns.empty()) throw ValidationError("harvest: select_patterns is empty");
    if (strip_patterns.empty()) throw ValidationError("harvest: strip_patterns is empty");
  }
};

inline void to_json(Json& j, const HarvestConfig& c) {
  j = Json{{"max_chars", c.max_chars},
           {"select_patterns", c.select_patterns},
           {"strip_patterns", c.strip_patterns}};
}

inline void from_json(const Json& j, HarvestConfig& c) {
  c = HarvestConfig::defaults();
  c.max_chars = j.value("max_chars", c.max_chars);
  if (j.contains("select_patterns")) c.select_patterns = j.at("select_patterns").get<std::vector<std::string>>();
  if (j.contains("strip_patterns")) c.strip_patterns = j.at("strip_patterns").get<std::vector<std::string>>();
  c.validate();
}

namespace harvest_detail {

inline bool is_template(const std::string& p) {
  return p.find("...") != std::string::npos || p.find("(number)") != std::string::npos;
}

inline std::string escape_regex(std::string_view s) {
  static const std::string kSpecial = R"(\^$.|?*+()[]{}/)";
  std::string out;
  for (char c : s) {
    if (kSpecial.find(c) != std::string::npos) out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

struct CompiledPattern {
  std::regex re;
  std::string replacement;
};

inline CompiledPattern compile_template(const std::string& p) {
  const bool bracketed = p.size() >= 2 && ((p.front() == '(' && p.back() == ')') ||
                                           (p.front() == '[' && p.back() == ']'));
  const std::string closer = bracketed ? std::string(1, p.back()) : std::string();
  std::string re;
  bool keeps = false;
  for (std::size_t i = 0; i < p.size();) {
    if (p.compare(i, 8, "(number)") == 0) {
      re += "\\d+";
      i += 8;
    } else if (p.compare(i, 3, "...") == 0) {
      // Absorb the whitespace around the ellipsis into the wildcard.
      while (re.size() >= 2 && re.ends_with(" ")) re.pop_back();
      if (bracketed) {
        re += "[^" + escape_regex(closer) + "]*";
      } else {
        re += "\\s*(.*?)\\s*";
        keeps = true;
      }
      i += 3;
      while (i < p.size() && p[i] == ' ') ++i;
    } else {
      re += escape_regex(std::string_view(&p[i], 1));
      ++i;
    }
  }
  return {std::regex(re), keeps ? " $1 " : " "};
}

}  // namespace harvest_detail

/// Removes every strip pattern (templates first, then literals longest
/// first) until nothing changes, then normalizes whitespace.
inline std::string strip_caption(const std::string& line, const HarvestConfig& cfg) {
  using namespace harvest_detail;
  std::vector<CompiledPattern> templates;
  std::vector<std::string> literals;
  auto add = [&](const std::string& p) {
    if (p.empty()) return;
    if (is_template(p)) templates.push_back(compile_template(p));
    else if (std::find(literals.begin(), literals.end(), p) == literals.end()) literals.push_back(p);
  };
  for (const auto& p : cfg.strip_patterns) add(p);
  for (const auto& p : cfg.select_patterns) add(p);
  std::stable_sort(literals.begin(), literals.end(),
                   [](const std::string& a, const std::string& b) { return a.size() > b.size(); });

  std::string cur = text::collapse_whitespace(line);
  for (int round = 0; round < 16; ++round) {
    std::string next = cur;
    for (const auto& t : templates) next = std::regex_replace(next, t.re, t.replacement);
    for (const auto& l : literals) next = text::replace_all(next, l, " ");
    next = text::collapse_whitespace(next);
    // Removing ", left," style markers leaves the surrounding words; tidy
    // the spacing in front of punctuation that the removal exposed.
    next = text::replace_all(next, " ,", ",");
    if (next == cur) break;
    cur = std::move(next);
  }
  return cur;
}

inline std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++n;
  return n;
}

/// Keeps caption-like lines: at most max_chars characters and containing at
/// least one select pattern. Returned lines have all strip patterns removed.
inline std::vector<std::string> harvest_captions(const std::vector<std::string>& lines,
                                                 const HarvestConfig& cfg) {
  cfg.validate();
  std::vector<std::string> out;
  for (const auto& raw : lines) {
    if (utf8_length(raw) > cfg.max_chars) continue;
    bool selected = std::any_of(cfg.select_patterns.begin(), cfg.select_patterns.end(),
                                [&](const std::string& p) { return raw.find(p) != std::string::npos; });
    if (!selected) continue;
    std::string cleaned = strip_caption(raw, cfg);
    if (!cleaned.empty()) out.push_back(std::move(cleaned));
  }
  return out;
}

}  // namespace hhi::extract
