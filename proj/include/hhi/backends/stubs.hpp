#pragma once

// Deterministic in-process backends. They stand in for the neural models so
// that every pipeline stage can run and be tested without GPUs.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "hhi/backends/interfaces.hpp"
#include "hhi/core/hash.hpp"
#include "hhi/core/names.hpp"
#include "hhi/core/random.hpp"
#include "hhi/core/text.hpp"

namespace hhi {

namespace stub_detail {

inline std::vector<std::string> content_words(std::string_view s) {
  std::vector<std::string> out;
  for (const auto& w : text::split_ws(s)) {
    auto core = text::strip_punct(w);
    if (!core.empty()) out.push_back(text::lower(core));
  }
  return out;
}

inline double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& w : a) inter += b.count(w);
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

inline std::set<std::string> word_set(std::string_view s) {
  auto v = content_words(s);
  return {v.begin(), v.end()};
}

inline std::vector<std::string> lines_of(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto nl = s.find('\n', start);
    if (nl == std::string_view::npos) nl = s.size();
    out.emplace_back(s.substr(start, nl - start));
    start = nl + 1;
  }
  return out;
}

}  // namespace stub_detail

// ---------------------------------------------------------------------------
// Generators

/// Always returns the same text.
class EchoGenerator : public TextGeneratorBackend {
 public:
  explicit EchoGenerator(std::string text) : text_(std::move(text)) {}
  std::string generate(const std::string&, const GenerationParams&) const override { return text_; }

 private:
  std::string text_;
};

/// Imitates a few-shot language model by recombining its prompt.
///
/// For an interaction prompt (one filled interaction per line) it rewrites a
/// randomly chosen prompt line with the first two prompt names, sometimes
/// corrupting it the way a sampled continuation might. For a caption prompt
/// (ending "Caption of image showing X:") it writes a caption around X, now
/// and then dropping a name or drifting off topic. Output depends only on
/// the prompt and params.seed.
class TemplateGenerator : public TextGeneratorBackend {
 public:
  static constexpr std::string_view kCaptionCue = "Caption of image showing ";

  std::string generate(const std::string& prompt, const GenerationParams& params) const override {
    params.validate();
    rng::Engine eng(rng::derive(params.seed, fingerprint64(prompt)));
    auto lines = stub_detail::lines_of(prompt);
    while (!lines.empty() && text::trim(lines.back()).empty()) lines.pop_back();
    if (lines.empty()) return {};
    const std::string& last = lines.back();
    if (last.starts_with(kCaptionCue) && last.ends_with(":"))
      return caption(last.substr(kCaptionCue.size(), last.size() - kCaptionCue.size() - 1), eng);
    return interaction(lines, eng);
  }

 private:
  static std::string caption(const std::string& target, rng::Engine& eng) {
    static const std::vector<std::string> kPlaces = {
        "at the annual gala",     "during the opening ceremony", "at the training ground",
        "outside the courthouse", "at the community center",     "on the main stage",
        "after the final match",  "at the charity dinner"};
    static const std::vector<std::string> kDates = {"on Monday", "last week", "in March 2016",
                                                    "on Sept. 30, 2012", "earlier this year"};
    const auto& place = kPlaces[rng::below(eng, kPlaces.size())];
    const auto& date = kDates[rng::below(eng, kDates.size())];
    const std::uint64_t mode = rng::below(eng, 10);
    auto words = text::split_ws(target);
    std::string first = words.empty() ? std::string("Someone") : words.front();
    switch (mode) {
      case 0:  // loses the second participant
        return first + " speaks to reporters " + place + " " + date + ".";
      case 1:  // drifts off topic but keeps the names
        return "A view of the venue " + place + " " + date + ", where " + target + " was announced.";
      default:
        return target + " " + place + " " + date + ".";
    }
  }

  static std::string interaction(const std::vector<std::string>& lines, rng::Engine& eng) {
    const std::string& pick = lines[rng::below(eng, lines.size())];
    const std::uint64_t mode = rng::below(eng, 12);
    std::string out = pick;
    if (mode == 0) out += " near the";
    else if (mode == 1 && !out.empty()) out = "Yesterday " + out;
    else if (mode == 2) out = text::replace_all(out, "ing ", "s ");
    return out;
  }
};

// ---------------------------------------------------------------------------
// NLI

/// Entailment grows with the share of hypothesis words found in the premise:
/// p_e = 0.05 + 0.9 * overlap, p_c = 0.3 * (1 - p_e), p_n = rest.
class OverlapNli : public NliBackend {
 public:
  NliScores score(const std::string& premise, const std::string& hypothesis) const override {
    auto hyp = stub_detail::content_words(hypothesis);
    auto prem = stub_detail::word_set(premise);
    double overlap = 0.0;
    if (!hyp.empty()) {
      std::size_t hit = 0;
      for (const auto& w : hyp) hit += prem.count(w);
      overlap = static_cast<double>(hit) / static_cast<double>(hyp.size());
    }
    NliScores s;
    s.entailment = 0.05 + 0.9 * overlap;
    s.contradiction = 0.3 * (1.0 - s.entailment);
    s.neutral = 1.0 - s.entailment - s.contradiction;
    return s;
  }
};

/// Replays recorded scores keyed by (premise, hypothesis) or by hypothesis
/// alone; unknown pairs go to the fallback or raise a BackendError.
class TableNli : public NliBackend {
 public:
  explicit TableNli(std::shared_ptr<const NliBackend> fallback = nullptr)
      : fallback_(std::move(fallback)) {}

  void add(const std::string& premise, const std::string& hypothesis, NliScores s) {
    s.validate();
    pairs_[{premise, hypothesis}] = s;
  }
  void add_hypothesis(const std::string& hypothesis, NliScores s) {
    s.validate();
    hyps_[hypothesis] = s;
  }
  /// Entailment-only shorthand: contradiction and neutral split the rest.
  static NliScores entailing(double p_e) { return {p_e, (1.0 - p_e) / 2, (1.0 - p_e) / 2}; }

  NliScores score(const std::string& premise, const std::string& hypothesis) const override {
    if (auto it = pairs_.find({premise, hypothesis}); it != pairs_.end()) return it->second;
    if (auto it = hyps_.find(hypothesis); it != hyps_.end()) return it->second;
    if (fallback_) return fallback_->score(premise, hypothesis);
    throw BackendError("no recorded NLI score for premise '" + premise + "' / hypothesis '" +
                       hypothesis + "'");
  }

 private:
  std::map<std::pair<std::string, std::string>, NliScores> pairs_;
  std::map<std::string, NliScores> hyps_;
  std::shared_ptr<const NliBackend> fallback_;
};

// ---------------------------------------------------------------------------
// Summarizers

class CannedSummarizerModel : public SummarizerModel {
 public:
  explicit CannedSummarizerModel(std::string text) : text_(std::move(text)) {}
  std::string summarize(const std::string&) const override { return text_; }
  Json describe() const override { return Json{{"kind", "canned"}, {"text", text_}}; }

 private:
  std::string text_;
};

class CannedSummarizer : public SummarizerBackend {
 public:
  explicit CannedSummarizer(std::string text) : text_(std::move(text)) {}
  std::shared_ptr<const SummarizerModel> fit(const std::vector<TrainingExample>&,
                                             const TrainConfig& cfg) const override {
    cfg.validate();
    return std::make_shared<CannedSummarizerModel>(text_);
  }

 private:
  std::string text_;
};

/// Returns the target of the training example whose input shares the most
/// words with the query (Jaccard); ties go to the earliest example.
class NearestNeighbourModel : public SummarizerModel {
 public:
  NearestNeighbourModel(std::vector<TrainingExample> examples, std::string prefix)
      : examples_(std::move(examples)), prefix_(std::move(prefix)) {
    sets_.reserve(examples_.size());
    for (const auto& e : examples_) sets_.push_back(stub_detail::word_set(e.input));
  }

  std::string summarize(const std::string& input) const override {
    if (examples_.empty()) throw BackendError("summarizer model has no training examples");
    const auto q = stub_detail::word_set(input);
    std::size_t best = 0;
    double best_score = -1.0;
    for (std::size_t i = 0; i < sets_.size(); ++i) {
      double s = stub_detail::jaccard(q, sets_[i]);
      if (s > best_score) {
        best_score = s;
        best = i;
      }
    }
    return examples_[best].target;
  }

  Json describe() const override {
    Json ex = Json::array();
    for (const auto& e : examples_) ex.push_back(Json{{"input", e.input}, {"target", e.target}});
    return Json{{"kind", "nearest-neighbour"}, {"task_prefix", prefix_}, {"examples", ex}};
  }

  static std::shared_ptr<const NearestNeighbourModel> load(const Json& j) {
    if (j.value("kind", std::string()) != "nearest-neighbour")
      throw ValidationError("not a nearest-neighbour summarizer model");
    std::vector<TrainingExample> ex;
    for (const auto& e : j.at("examples"))
      ex.push_back({e.at("input").get<std::string>(), e.at("target").get<std::string>()});
    return std::make_shared<NearestNeighbourModel>(std::move(ex), j.value("task_prefix", std::string()));
  }

 private:
  std::vector<TrainingExample> examples_;
  std::vector<std::set<std::string>> sets_;
  std::string prefix_;
};

class NearestNeighbourSummarizer : public SummarizerBackend {
 public:
  std::shared_ptr<const SummarizerModel> fit(const std::vector<TrainingExample>& examples,
                                             const TrainConfig& cfg) const override {
    cfg.validate();
    if (examples.empty()) throw ValidationError("cannot fit a summarizer on zero examples");
    return std::make_shared<NearestNeighbourModel>(examples, cfg.task_prefix);
  }
};

// ---------------------------------------------------------------------------
// Captioners

/// Decodes the image's own training target first (score 0), followed by the
/// remaining targets ranked by total sample weight (score = log share).
class PriorCaptionerModel : public CaptionerModel {
 public:
  PriorCaptionerModel(std::map<std::string, std::string> own, std::vector<Beam> prior, Json echo)
      : own_(std::move(own)), prior_(std::move(prior)), echo_(std::move(echo)) {}

  BeamSet decode(const std::string& image_ref, int width) const override {
    if (width <= 0) throw ValidationError("beam width must be positive");
    BeamSet out;
    out.width = width;
    auto it = own_.find(image_ref);
    if (it != own_.end()) out.beams.push_back({it->second, 0.0});
    for (const auto& b : prior_) {
      if (static_cast<int>(out.beams.size()) >= width) break;
      if (it != own_.end() && b.text == it->second) continue;
      out.beams.push_back(b);
    }
    return out;
  }

  Json config_echo() const override { return echo_; }

  Json describe() const override {
    Json own = Json::object();
    for (const auto& [k, v] : own_) own[k] = v;
    return Json{{"kind", "prior"}, {"own", own}, {"prior", prior_}, {"config", echo_}};
  }

  static std::shared_ptr<const PriorCaptionerModel> load(const Json& j) {
    if (j.value("kind", std::string()) != "prior") throw ValidationError("not a prior captioner model");
    std::map<std::string, std::string> own;
    for (const auto& [k, v] : j.at("own").items()) own[k] = v.get<std::string>();
    return std::make_shared<PriorCaptionerModel>(std::move(own), j.at("prior").get<std::vector<Beam>>(),
                                                 j.at("config"));
  }

 private:
  std::map<std::string, std::string> own_;
  std::vector<Beam> prior_;
  Json echo_;
};

class PriorCaptioner : public CaptionerBackend {
 public:
  std::shared_ptr<const CaptionerModel> fit(const std::vector<WeightedExample>& samples,
                                            const CaptionerTrainConfig& cfg) const override {
    if (!cfg.freeze_image_encoder)
      throw ValidationError("this captioner only supports a frozen image encoder");
    std::map<std::string, std::string> own;
    std::map<std::string, double> mass;
    double total = 0.0;
    for (const auto& s : samples) {
      own.emplace(s.image_ref, s.target);
      mass[s.target] += s.weight;
      total += s.weight;
    }
    std::vector<Beam> prior;
    for (const auto& [t, m] : mass) prior.push_back({t, std::log(m / total)});
    std::stable_sort(prior.begin(), prior.end(),
                     [](const Beam& a, const Beam& b) { return a.score > b.score; });
    for (auto& b : prior) b.score = std::min(b.score, 0.0);
    Json echo = cfg;
    return std::make_shared<PriorCaptionerModel>(std::move(own), std::move(prior), echo);
  }
};

/// Serves beams recorded per image, e.g. predictions of an external model.
class FixedBeamCaptioner : public CaptionerModel {
 public:
  explicit FixedBeamCaptioner(std::map<std::string, std::vector<Beam>> beams)
      : beams_(std::move(beams)) {}

  BeamSet decode(const std::string& image_ref, int width) const override {
    auto it = beams_.find(image_ref);
    if (it == beams_.end()) throw BackendError("no recorded beams for image '" + image_ref + "'");
    BeamSet out;
    out.width = width;
    const std::size_t n = std::min<std::size_t>(it->second.size(), static_cast<std::size_t>(std::max(width, 0)));
    out.beams.assign(it->second.begin(), it->second.begin() + static_cast<std::ptrdiff_t>(n));
    out.validate();
    return out;
  }
  Json config_echo() const override { return Json{{"freeze_image_encoder", true}}; }
  Json describe() const override { return Json{{"kind", "fixed"}, {"images", beams_.size()}}; }

 private:
  std::map<std::string, std::vector<Beam>> beams_;
};

// ---------------------------------------------------------------------------
// Text similarity

/// Token-level F1 between candidate and reference (lowercased words).
class TokenF1Similarity : public TextSimilarityBackend {
 public:
  double score(const std::string& candidate, const std::string& reference) const override {
    auto c = stub_detail::content_words(candidate);
    auto r = stub_detail::content_words(reference);
    if (c.empty() || r.empty()) return 0.0;
    std::map<std::string, int> rc;
    for (const auto& w : r) ++rc[w];
    int common = 0;
    for (const auto& w : c)
      if (auto it = rc.find(w); it != rc.end() && it->second > 0) {
        --it->second;
        ++common;
      }
    if (common == 0) return 0.0;
    const double p = static_cast<double>(common) / static_cast<double>(c.size());
    const double q = static_cast<double>(common) / static_cast<double>(r.size());
    return 2 * p * q / (p + q);
  }
};

class TableSimilarity : public TextSimilarityBackend {
 public:
  void add(const std::string& candidate, const std::string& reference, double s) {
    table_[{candidate, reference}] = s;
  }
  double score(const std::string& candidate, const std::string& reference) const override {
    auto it = table_.find({candidate, reference});
    if (it == table_.end())
      throw BackendError("no recorded similarity for '" + candidate + "' vs '" + reference + "'");
    return it->second;
  }

 private:
  std::map<std::pair<std::string, std::string>, double> table_;
};

// ---------------------------------------------------------------------------
// Word embeddings

class MemoryEmbeddingTable : public EmbeddingTable {
 public:
  explicit MemoryEmbeddingTable(std::size_t dim) : dim_(dim) {}

  void add(const std::string& word, std::vector<float> vec) {
    if (vec.size() != dim_)
      throw ValidationError("embedding for '" + word + "' has dimension " + std::to_string(vec.size()) +
                            ", expected " + std::to_string(dim_));
    vectors_[word] = std::move(vec);
  }

  std::optional<std::span<const float>> lookup(std::string_view word) const override {
    auto it = vectors_.find(std::string(word));
    if (it == vectors_.end()) return std::nullopt;
    return std::span<const float>(it->second);
  }
  std::size_t dimension() const override { return dim_; }
  std::size_t size() const { return vectors_.size(); }

  /// Text format: one word per line followed by whitespace-separated floats.
  static std::shared_ptr<MemoryEmbeddingTable> load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open embedding table " + path);
    std::shared_ptr<MemoryEmbeddingTable> table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      std::istringstream ss(line);
      std::string word;
      if (!(ss >> word)) continue;
      std::vector<float> vec;
      float x;
      while (ss >> x) vec.push_back(x);
      if (!ss.eof()) throw ValidationError(path + ":" + std::to_string(line_no) + ": bad float");
      if (vec.empty()) throw ValidationError(path + ":" + std::to_string(line_no) + ": no vector");
      if (!table) table = std::make_shared<MemoryEmbeddingTable>(vec.size());
      try {
        table->add(word, std::move(vec));
      } catch (const ValidationError& e) {
        throw ValidationError(path + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
    if (!table) throw ValidationError("embedding table " + path + " is empty");
    return table;
  }

 private:
  std::size_t dim_;
  std::unordered_map<std::string, std::vector<float>> vectors_;
};

}  // namespace hhi
