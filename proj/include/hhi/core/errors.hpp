#pragma once

#include <stdexcept>
#include <string>

namespace hhi {

/// Input violates a documented contract (bad spans, malformed records, wrong counts).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A pluggable backend (generator, NLI, summarizer, ...) failed or is unreachable.
class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hhi
