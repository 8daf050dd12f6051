#pragma once

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hhi/core/errors.hpp"
#include "hhi/core/names.hpp"
#include "hhi/core/text.hpp"
#include "hhi/core/types.hpp"

namespace hhi {

/// One token of a dependency parse. `head` is a 0-based token index; the root
/// token is its own head.
struct Token {
  std::string form;
  std::string lemma;
  std::string upos;
  std::string xpos;
  int head = 0;
  std::string deprel;
  std::string entity;   // entity label without IOB prefix; empty when outside
  char iob = 'O';       // 'B', 'I' or 'O'
  CharSpan span;
  bool space_after = true;
};

/// Token-level parse of one sentence or caption (CoNLL-U compatible).
class DependencyParse {
 public:
  std::string id;
  std::string text;
  std::vector<Token> tokens;
  // Sentence-level comments other than sent_id/text, in file order.
  std::vector<std::pair<std::string, std::string>> comments;

  std::size_t size() const { return tokens.size(); }
  const Token& operator[](std::size_t i) const { return tokens[i]; }

  std::optional<std::string> comment(std::string_view key) const {
    for (const auto& [k, v] : comments)
      if (k == key) return v;
    return std::nullopt;
  }

  /// Checks head ranges, a single root, acyclicity and ordered spans.
  void validate() const {
    const int n = static_cast<int>(tokens.size());
    int roots = 0;
    for (int i = 0; i < n; ++i) {
      const int h = tokens[i].head;
      if (h < 0 || h >= n)
        throw ValidationError(where() + "token " + std::to_string(i + 1) + " has head out of range");
      if (h == i) ++roots;
    }
    if (n > 0 && roots != 1)
      throw ValidationError(where() + "expected exactly one root, found " + std::to_string(roots));
    for (int i = 0; i < n; ++i) {
      int cur = i;
      for (int steps = 0; tokens[cur].head != cur; ++steps) {
        if (steps > n) throw ValidationError(where() + "cycle through token " + std::to_string(i + 1));
        cur = tokens[cur].head;
      }
    }
    for (int i = 1; i < n; ++i)
      if (tokens[i].span.begin < tokens[i - 1].span.end)
        throw ValidationError(where() + "token spans overlap or are out of order at token " +
                              std::to_string(i + 1));
  }

  std::size_t root() const {
    for (std::size_t i = 0; i < tokens.size(); ++i)
      if (tokens[i].head == static_cast<int>(i)) return i;
    throw ValidationError(where() + "parse has no root");
  }

  std::vector<std::size_t> children(std::size_t i) const {
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < tokens.size(); ++c)
      if (c != i && tokens[c].head == static_cast<int>(i)) out.push_back(c);
    return out;
  }

  std::vector<std::size_t> children(std::size_t i, std::string_view deprel) const {
    std::vector<std::size_t> out;
    for (auto c : children(i))
      if (tokens[c].deprel == deprel) out.push_back(c);
    return out;
  }

  /// All tokens dominated by `i` (including `i`), ascending.
  std::vector<std::size_t> subtree(std::size_t i) const {
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < tokens.size(); ++c) {
      std::size_t cur = c;
      for (std::size_t steps = 0; steps <= tokens.size(); ++steps) {
        if (cur == i) {
          out.push_back(c);
          break;
        }
        if (tokens[cur].head == static_cast<int>(cur)) break;
        cur = static_cast<std::size_t>(tokens[cur].head);
      }
    }
    return out;
  }

  /// Token range [first, last] of the entity mention containing `i`.
  std::pair<std::size_t, std::size_t> entity_span(std::size_t i) const {
    if (tokens[i].entity.empty()) return {i, i};
    std::size_t b = i;
    while (b > 0 && tokens[b].iob == 'I' && tokens[b - 1].entity == tokens[i].entity) --b;
    std::size_t e = i;
    while (e + 1 < tokens.size() && tokens[e + 1].iob == 'I' &&
           tokens[e + 1].entity == tokens[i].entity)
      ++e;
    return {b, e};
  }

 private:
  std::string where() const { return id.empty() ? std::string() : "parse '" + id + "': "; }
};

/// Punctuation-like tokens that attach to the preceding word when rendering.
inline bool attaches_left(std::string_view form) {
  static const std::set<std::string_view> kLeft = {",", ".", ";", ":", "!", "?", ")", "'s",
                                                   "’s", "'", "%", "n't"};
  return kLeft.count(form) > 0;
}

/// Renders a subset of tokens (ascending indices). Adjacent tokens keep their
/// original spacing; gaps become a single space.
inline std::string render_tokens(const DependencyParse& parse, const std::vector<std::size_t>& idx,
                                 const std::map<std::size_t, std::string>& replace = {}) {
  std::string out;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const std::size_t i = idx[k];
    auto it = replace.find(i);
    const std::string& form = it != replace.end() ? it->second : parse[i].form;
    if (k > 0) {
      const std::size_t prev = idx[k - 1];
      bool space = (prev + 1 == i) ? parse[prev].space_after : !attaches_left(form);
      if (space) out.push_back(' ');
    }
    out += form;
  }
  return out;
}

namespace conllu_detail {

inline std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> cols;
  std::size_t start = 0;
  for (std::size_t pos; (pos = line.find('\t', start)) != std::string::npos; start = pos + 1)
    cols.push_back(line.substr(start, pos - start));
  cols.push_back(line.substr(start));
  return cols;
}

inline std::vector<std::pair<std::string, std::string>> parse_misc(const std::string& misc) {
  std::vector<std::pair<std::string, std::string>> kv;
  if (misc == "_" || misc.empty()) return kv;
  std::stringstream ss(misc);
  std::string item;
  while (std::getline(ss, item, '|')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) kv.emplace_back(item, "");
    else kv.emplace_back(item.substr(0, eq), item.substr(eq + 1));
  }
  return kv;
}

// Assigns character spans: aligned against `# text` when present, otherwise
// the text is rebuilt from forms and SpaceAfter.
inline void assign_spans(DependencyParse& p, std::size_t line_no) {
  if (p.text.empty()) {
    for (auto& t : p.tokens) {
      t.span = {p.text.size(), p.text.size() + t.form.size()};
      p.text += t.form;
      if (t.space_after) p.text += ' ';
    }
    while (!p.text.empty() && p.text.back() == ' ') p.text.pop_back();
    return;
  }
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < p.tokens.size(); ++i) {
    auto& t = p.tokens[i];
    auto pos = p.text.find(t.form, cursor);
    if (pos == std::string::npos)
      throw ValidationError("line " + std::to_string(line_no) + ": token '" + t.form +
                            "' not found in sentence text");
    t.span = {pos, pos + t.form.size()};
    cursor = t.span.end;
  }
  for (std::size_t i = 0; i + 1 < p.tokens.size(); ++i)
    p.tokens[i].space_after = p.tokens[i + 1].span.begin > p.tokens[i].span.end;
}

inline Token parse_token_line(const std::vector<std::string>& cols, std::size_t line_no) {
  auto fail = [&](const std::string& msg) {
    return ValidationError("line " + std::to_string(line_no) + ": " + msg);
  };
  if (cols.size() != 10) throw fail("expected 10 columns, got " + std::to_string(cols.size()));
  Token t;
  t.form = cols[1];
  t.lemma = cols[2] == "_" ? text::lower(cols[1]) : cols[2];
  t.upos = cols[3];
  t.xpos = cols[4] == "_" ? std::string() : cols[4];
  try {
    t.head = std::stoi(cols[6]) - 1;  // CoNLL-U root is 0 -> fixed up by caller
  } catch (const std::exception&) {
    throw fail("bad HEAD '" + cols[6] + "'");
  }
  t.deprel = cols[7];
  for (const auto& [k, v] : parse_misc(cols[9])) {
    if (k == "SpaceAfter" && v == "No") t.space_after = false;
    if (k == "NER" || k == "Entity") {
      if (v == "O" || v.empty()) continue;
      if (v.size() > 2 && (v[0] == 'B' || v[0] == 'I') && v[1] == '-') {
        t.iob = v[0];
        t.entity = v.substr(2);
      } else {
        t.iob = 'B';
        t.entity = v;
      }
    }
  }
  return t;
}

}  // namespace conllu_detail

/// Reads blank-line separated CoNLL-U sentences. Multiword-token ranges and
/// empty nodes are skipped. Entity labels come from MISC `NER=B-PERSON`
/// (IOB) or `Entity=PERSON`.
inline std::vector<DependencyParse> read_conllu(std::istream& in) {
  std::vector<DependencyParse> out;
  DependencyParse cur;
  std::size_t line_no = 0, sent_start = 0;
  bool open = false;
  auto flush = [&] {
    if (!open) return;
    const int n = static_cast<int>(cur.tokens.size());
    for (int i = 0; i < n; ++i) {
      auto& t = cur.tokens[i];
      if (t.head == -1) t.head = i;  // HEAD 0
      else if (t.head < 0 || t.head >= n)
        throw ValidationError("line " + std::to_string(sent_start) + ": head out of range in sentence");
    }
    conllu_detail::assign_spans(cur, sent_start);
    cur.validate();
    out.push_back(std::move(cur));
    cur = DependencyParse{};
    open = false;
  };
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) {
      flush();
      continue;
    }
    if (!open) {
      open = true;
      sent_start = line_no;
    }
    if (line[0] == '#') {
      auto body = std::string(text::trim(std::string_view(line).substr(1)));
      auto eq = body.find(" = ");
      if (eq == std::string::npos) continue;
      std::string key = body.substr(0, eq), value = body.substr(eq + 3);
      if (key == "sent_id") cur.id = value;
      else if (key == "text") cur.text = value;
      else cur.comments.emplace_back(key, value);
      continue;
    }
    auto cols = conllu_detail::split_tabs(line);
    if (cols.empty() || cols[0].find_first_of("-.") != std::string::npos) continue;
    cur.tokens.push_back(conllu_detail::parse_token_line(cols, line_no));
  }
  flush();
  return out;
}

inline std::vector<DependencyParse> read_conllu_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  try {
    return read_conllu(in);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

inline void write_conllu(std::ostream& out, const DependencyParse& p) {
  if (!p.id.empty()) out << "# sent_id = " << p.id << '\n';
  out << "# text = " << p.text << '\n';
  for (const auto& [k, v] : p.comments) out << "# " << k << " = " << v << '\n';
  for (std::size_t i = 0; i < p.tokens.size(); ++i) {
    const auto& t = p.tokens[i];
    std::string misc;
    auto add = [&](const std::string& kv) { misc += (misc.empty() ? "" : "|") + kv; };
    if (!t.entity.empty()) add("NER=" + std::string(1, t.iob) + "-" + t.entity);
    if (!t.space_after && i + 1 < p.tokens.size()) add("SpaceAfter=No");
    const int head = t.head == static_cast<int>(i) ? 0 : t.head + 1;
    out << (i + 1) << '\t' << t.form << '\t' << t.lemma << '\t' << t.upos << '\t'
        << (t.xpos.empty() ? "_" : t.xpos) << "\t_\t" << head << '\t' << t.deprel << "\t_\t"
        << (misc.empty() ? "_" : misc) << '\n';
  }
  out << '\n';
}

}  // namespace hhi
