#pragma once

// Pluggable model backends. Every model (teacher LM, NLI classifier,
// summarizer, captioner, learned text metric, parser) sits behind one of
// these interfaces; implementations must be safe to call concurrently
// through const methods.

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hhi/core/errors.hpp"
#include "hhi/core/parse.hpp"
#include "hhi/core/serde.hpp"

namespace hhi {

// ---------------------------------------------------------------------------
// Text generation

struct GenerationParams {
  double nucleus_p = 0.95;
  double temperature = 1.0;
  int no_repeat_ngram = 3;
  int max_new_tokens = 40;
  std::string stop = "\n";
  std::uint64_t seed = 0;

  void validate() const {
    if (!(nucleus_p > 0.0 && nucleus_p <= 1.0)) throw ValidationError("nucleus_p must be in (0,1]");
    if (!(temperature > 0.0)) throw ValidationError("temperature must be positive");
    if (no_repeat_ngram < 0) throw ValidationError("no_repeat_ngram must be >= 0");
    if (max_new_tokens <= 0) throw ValidationError("max_new_tokens must be positive");
  }
};

inline void to_json(Json& j, const GenerationParams& p) {
  j = Json{{"nucleus_p", p.nucleus_p},
           {"temperature", p.temperature},
           {"no_repeat_ngram", p.no_repeat_ngram},
           {"max_new_tokens", p.max_new_tokens},
           {"stop", p.stop},
           {"seed", p.seed}};
}

inline void from_json(const Json& j, GenerationParams& p) {
  p.nucleus_p = j.value("nucleus_p", p.nucleus_p);
  p.temperature = j.value("temperature", p.temperature);
  p.no_repeat_ngram = j.value("no_repeat_ngram", p.no_repeat_ngram);
  p.max_new_tokens = j.value("max_new_tokens", p.max_new_tokens);
  p.stop = j.value("stop", p.stop);
  p.seed = j.value("seed", p.seed);
  p.validate();
}

/// Deterministic given (prompt, params.seed).
class TextGeneratorBackend {
 public:
  virtual ~TextGeneratorBackend() = default;
  virtual std::string generate(const std::string& prompt, const GenerationParams& params) const = 0;
};

// ---------------------------------------------------------------------------
// Natural language inference

struct NliScores {
  double entailment = 0.0;
  double contradiction = 0.0;
  double neutral = 0.0;

  void validate() const {
    for (double p : {entailment, contradiction, neutral})
      if (!(p >= 0.0 && p <= 1.0)) throw BackendError("NLI probability outside [0,1]");
    if (std::abs(entailment + contradiction + neutral - 1.0) > 1e-6)
      throw BackendError("NLI probabilities do not sum to 1");
  }
};

class NliBackend {
 public:
  virtual ~NliBackend() = default;
  virtual NliScores score(const std::string& premise, const std::string& hypothesis) const = 0;
};

// ---------------------------------------------------------------------------
// Syntactic parsing

class ParserBackend {
 public:
  virtual ~ParserBackend() = default;
  virtual DependencyParse parse(const std::string& text) const = 0;
};

// ---------------------------------------------------------------------------
// Student summarizer

enum class LrSchedule { kLinear };

struct TrainConfig {
  int epochs = 3;
  int batch_size = 8;
  double lr = 5e-5;
  LrSchedule schedule = LrSchedule::kLinear;
  std::pair<double, double> optimizer_betas{0.9, 0.999};
  double max_grad_norm = 1.0;
  std::string task_prefix = "summarize:";

  void validate() const {
    if (epochs <= 0 || batch_size <= 0 || !(lr > 0.0) || !(max_grad_norm > 0.0))
      throw ValidationError("train config: epochs, batch_size, lr and max_grad_norm must be positive");
    auto [b1, b2] = optimizer_betas;
    if (!(b1 > 0 && b1 < 1 && b2 > 0 && b2 < 1))
      throw ValidationError("train config: betas must be in (0,1)");
  }
};

inline void to_json(Json& j, const TrainConfig& c) {
  j = Json{{"epochs", c.epochs},
           {"batch_size", c.batch_size},
           {"lr", c.lr},
           {"schedule", "linear"},
           {"optimizer_betas", {c.optimizer_betas.first, c.optimizer_betas.second}},
           {"max_grad_norm", c.max_grad_norm},
           {"task_prefix", c.task_prefix}};
}

inline void from_json(const Json& j, TrainConfig& c) {
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.lr = j.value("lr", c.lr);
  if (j.value("schedule", std::string("linear")) != "linear")
    throw ValidationError("train config: only the linear schedule is supported");
  if (auto it = j.find("optimizer_betas"); it != j.end()) {
    auto b = it->get<std::vector<double>>();
    if (b.size() != 2) throw ValidationError("train config: optimizer_betas needs two values");
    c.optimizer_betas = {b[0], b[1]};
  }
  c.max_grad_norm = j.value("max_grad_norm", c.max_grad_norm);
  c.task_prefix = j.value("task_prefix", c.task_prefix);
  c.validate();
}

struct TrainingExample {
  std::string input;
  std::string target;

  friend bool operator==(const TrainingExample&, const TrainingExample&) = default;
};

/// A trained summarizer. summarize() is deterministic for a fixed model.
class SummarizerModel {
 public:
  virtual ~SummarizerModel() = default;
  virtual std::string summarize(const std::string& input) const = 0;
  /// Serializable description sufficient to reload the model.
  virtual Json describe() const = 0;
};

class SummarizerBackend {
 public:
  virtual ~SummarizerBackend() = default;
  virtual std::shared_ptr<const SummarizerModel> fit(const std::vector<TrainingExample>& examples,
                                                     const TrainConfig& cfg) const = 0;
};

// ---------------------------------------------------------------------------
// Image captioner

struct CaptionerTrainConfig {
  int batch_size = 16;
  double lr = 1e-5;
  std::pair<double, double> optimizer_betas{0.9, 0.999};
  double weight_decay = 0.1;
  int epochs = 2;
  bool freeze_image_encoder = true;
};

inline void to_json(Json& j, const CaptionerTrainConfig& c) {
  j = Json{{"batch_size", c.batch_size},
           {"lr", c.lr},
           {"optimizer_betas", {c.optimizer_betas.first, c.optimizer_betas.second}},
           {"weight_decay", c.weight_decay},
           {"epochs", c.epochs},
           {"freeze_image_encoder", c.freeze_image_encoder}};
}

inline void from_json(const Json& j, CaptionerTrainConfig& c) {
  c.batch_size = j.value("batch_size", c.batch_size);
  c.lr = j.value("lr", c.lr);
  if (auto it = j.find("optimizer_betas"); it != j.end()) {
    auto b = it->get<std::vector<double>>();
    if (b.size() != 2) throw ValidationError("captioner config: optimizer_betas needs two values");
    c.optimizer_betas = {b[0], b[1]};
  }
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.epochs = j.value("epochs", c.epochs);
  c.freeze_image_encoder = j.value("freeze_image_encoder", c.freeze_image_encoder);
  if (c.batch_size <= 0 || c.epochs <= 0 || !(c.lr > 0))
    throw ValidationError("captioner config: batch_size, epochs and lr must be positive");
}

struct WeightedExample {
  std::string image_ref;
  std::string target;
  double weight = 1.0;
};

struct Beam {
  std::string text;
  double score = 0.0;

  friend bool operator==(const Beam&, const Beam&) = default;
};

/// Beam-search output: beams ordered by non-increasing score, at most `width`.
struct BeamSet {
  std::vector<Beam> beams;
  int width = 0;

  void validate() const {
    if (width <= 0) throw ValidationError("beam width must be positive");
    if (beams.size() > static_cast<std::size_t>(width))
      throw ValidationError("beam set holds more beams than its width");
    for (std::size_t i = 1; i < beams.size(); ++i)
      if (beams[i].score > beams[i - 1].score)
        throw ValidationError("beam scores must be non-increasing");
  }
};

inline void to_json(Json& j, const Beam& b) { j = Json{{"text", b.text}, {"score", b.score}}; }
inline void from_json(const Json& j, Beam& b) {
  b.text = json_detail::get_required<std::string>(j, "text");
  b.score = j.value("score", 0.0);
}

class CaptionerModel {
 public:
  virtual ~CaptionerModel() = default;
  virtual BeamSet decode(const std::string& image_ref, int width) const = 0;
  /// Echo of the training configuration; attests e.g. a frozen image encoder.
  virtual Json config_echo() const = 0;
  virtual Json describe() const = 0;
};

class CaptionerBackend {
 public:
  virtual ~CaptionerBackend() = default;
  virtual std::shared_ptr<const CaptionerModel> fit(const std::vector<WeightedExample>& samples,
                                                    const CaptionerTrainConfig& cfg) const = 0;
};

// ---------------------------------------------------------------------------
// Evaluation backends

/// Learned reference-based text similarity (a BLEURT-style scorer).
class TextSimilarityBackend {
 public:
  virtual ~TextSimilarityBackend() = default;
  virtual double score(const std::string& candidate, const std::string& reference) const = 0;
};

/// Word-embedding lookup with a fixed dimension.
class EmbeddingTable {
 public:
  virtual ~EmbeddingTable() = default;
  virtual std::optional<std::span<const float>> lookup(std::string_view word) const = 0;
  virtual std::size_t dimension() const = 0;
};

}  // namespace hhi
