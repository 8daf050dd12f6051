#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "hhi/backends/interfaces.hpp"
#include "hhi/core/parse.hpp"

namespace hhi {

/// Serves pre-computed parses (e.g. exported from an external parser as
/// CoNLL-U) keyed by sentence text. Unknown texts go to the fallback parser
/// or raise a BackendError.
class ConlluLookupParser : public ParserBackend {
 public:
  explicit ConlluLookupParser(std::vector<DependencyParse> parses,
                              std::shared_ptr<const ParserBackend> fallback = nullptr)
      : fallback_(std::move(fallback)) {
    for (auto& p : parses) {
      auto key = p.text;
      by_text_.insert_or_assign(std::move(key), std::move(p));
    }
  }

  static ConlluLookupParser from_file(const std::string& path,
                                      std::shared_ptr<const ParserBackend> fallback = nullptr) {
    return ConlluLookupParser(read_conllu_file(path), std::move(fallback));
  }

  DependencyParse parse(const std::string& text) const override {
    if (auto it = by_text_.find(text); it != by_text_.end()) return it->second;
    if (fallback_) return fallback_->parse(text);
    throw BackendError("no parse available for '" + text + "'");
  }

  std::size_t size() const { return by_text_.size(); }

 private:
  std::map<std::string, DependencyParse> by_text_;
  std::shared_ptr<const ParserBackend> fallback_;
};

}  // namespace hhi
