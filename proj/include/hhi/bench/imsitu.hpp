#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "hhi/backends/interfaces.hpp"
#include "hhi/core/errors.hpp"
#include "hhi/core/parallel.hpp"
#include "hhi/core/serde.hpp"
#include "hhi/core/text.hpp"
#include "hhi/core/types.hpp"

namespace hhi::bench {

/// One situation-recognition item: an image, its verb, the texts of its
/// semantic-frame arguments (empty for unfilled roles) and the number of
/// person detections.
struct SituSample {
  std::string id;
  std::string image_ref;
  std::string verb;
  std::vector<std::string> arguments;
  int person_detections = 0;
  Split split = Split::kTrain;

  friend bool operator==(const SituSample&, const SituSample&) = default;
};

inline void to_json(Json& j, const SituSample& s) {
  j = Json{{"id", s.id},
           {"image_ref", s.image_ref},
           {"verb", s.verb},
           {"arguments", s.arguments},
           {"person_detections", s.person_detections},
           {"split", to_string(s.split)}};
}

inline void from_json(const Json& j, SituSample& s) {
  using json_detail::get_required;
  s.id = get_required<std::string>(j, "id");
  s.image_ref = get_required<std::string>(j, "image_ref");
  s.verb = get_required<std::string>(j, "verb");
  if (s.verb.empty()) throw ValidationError("field 'verb' is empty");
  s.arguments = get_required<std::vector<std::string>>(j, "arguments");
  s.person_detections = get_required<int>(j, "person_detections");
  if (s.person_detections < 0) throw ValidationError("field 'person_detections' is negative");
  s.split = split_from_string(get_required<std::string>(j, "split"));
}

struct BenchConfig {
  int min_persons = 2;
  int min_human_args = 2;
  double nli_threshold = 0.5;
  std::set<std::string> banned_verbs;
  int min_verb_support = 100;

  void validate() const {
    if (min_persons < 0 || min_human_args < 0 || min_verb_support < 0)
      throw ValidationError("bench config: counts must be non-negative");
    if (!(nli_threshold >= 0.0 && nli_threshold <= 1.0))
      throw ValidationError("bench config: nli_threshold must be in [0,1]");
  }
};

inline std::set<std::string> load_banned_verbs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open banned verb list " + path);
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto t = text::trim(line);
    if (!t.empty() && t.front() != '#') out.emplace(t);
  }
  return out;
}

inline void to_json(Json& j, const BenchConfig& c) {
  j = Json{{"min_persons", c.min_persons},
           {"min_human_args", c.min_human_args},
           {"nli_threshold", c.nli_threshold},
           {"banned_verbs", c.banned_verbs},
           {"min_verb_support", c.min_verb_support}};
}

inline void from_json(const Json& j, BenchConfig& c) {
  c.min_persons = j.value("min_persons", c.min_persons);
  c.min_human_args = j.value("min_human_args", c.min_human_args);
  c.nli_threshold = j.value("nli_threshold", c.nli_threshold);
  if (j.contains("banned_verbs")) c.banned_verbs = j.at("banned_verbs").get<std::set<std::string>>();
  if (j.contains("banned_verbs_file")) c.banned_verbs = load_banned_verbs(j.at("banned_verbs_file").get<std::string>());
  c.min_verb_support = j.value("min_verb_support", c.min_verb_support);
  c.validate();
}

/// Decides whether an argument text names a human via NLI:
/// premise "This is a {arg}.", hypothesis "This is a human.", human iff
/// p_e > threshold. Answers are cached per argument text; safe to share
/// between threads.
class HumanArgumentClassifier {
 public:
  HumanArgumentClassifier(const NliBackend& nli, double threshold) : nli_(nli), threshold_(threshold) {}

  bool operator()(const std::string& arg) const {
    if (arg.empty()) throw ValidationError("argument text is empty");
    {
      std::lock_guard lock(mu_);
      if (auto it = cache_.find(arg); it != cache_.end()) return it->second;
    }
    auto s = nli_.score("This is a " + arg + ".", "This is a human.");
    s.validate();
    const bool human = s.entailment > threshold_;
    std::lock_guard lock(mu_);
    cache_.emplace(arg, human);
    return human;
  }

  std::size_t cached() const {
    std::lock_guard lock(mu_);
    return cache_.size();
  }

 private:
  const NliBackend& nli_;
  double threshold_;
  mutable std::mutex mu_;
  mutable std::unordered_map<std::string, bool> cache_;
};

inline bool classify_human_argument(const std::string& arg, const HumanArgumentClassifier& classifier) {
  return classifier(arg);
}

/// Uncached one-off classification.
inline bool classify_human_argument(const std::string& arg, const NliBackend& nli, double threshold) {
  return HumanArgumentClassifier(nli, threshold)(arg);
}

struct VerbSupport {
  std::string verb;
  std::size_t support = 0;

  friend bool operator==(const VerbSupport&, const VerbSupport&) = default;
};

struct BenchResult {
  std::vector<SituSample> subset;
  std::vector<VerbSupport> support;  // kept verbs, descending support then verb
  std::size_t filtered_pool = 0;     // samples passing all per-sample filters
};

/// Per-sample filters (person detections, human arguments, banned verbs),
/// then verb support counted over the filtered pool and cut at
/// min_verb_support. The subset keeps input order.
inline BenchResult build_imsitu_hhi(const std::vector<SituSample>& samples, const BenchConfig& cfg,
                                    const HumanArgumentClassifier& classifier, std::size_t workers = 1) {
  cfg.validate();
  std::vector<const SituSample*> candidates;
  for (const auto& s : samples)
    if (s.person_detections >= cfg.min_persons && !cfg.banned_verbs.count(s.verb)) candidates.push_back(&s);

  std::vector<std::string> unique;
  {
    std::set<std::string> seen;
    for (const auto* s : candidates)
      for (const auto& a : s->arguments)
        if (!a.empty() && seen.insert(a).second) unique.push_back(a);
  }
  auto verdicts = parallel_map(unique.size(), workers, [&](std::size_t i) { return classifier(unique[i]) ? 1 : 0; });
  std::unordered_map<std::string, bool> human;
  for (std::size_t i = 0; i < unique.size(); ++i) human[unique[i]] = verdicts[i] != 0;

  std::vector<const SituSample*> pool;
  for (const auto* s : candidates) {
    int n = 0;
    for (const auto& a : s->arguments)
      if (!a.empty() && human[a]) ++n;
    if (n >= cfg.min_human_args) pool.push_back(s);
  }

  std::map<std::string, std::size_t> counts;
  for (const auto* s : pool) ++counts[s->verb];

  BenchResult r;
  r.filtered_pool = pool.size();
  for (const auto& [verb, n] : counts)
    if (n >= static_cast<std::size_t>(cfg.min_verb_support)) r.support.push_back({verb, n});
  std::stable_sort(r.support.begin(), r.support.end(),
                   [](const VerbSupport& a, const VerbSupport& b) { return a.support > b.support; });
  std::set<std::string> kept;
  for (const auto& v : r.support) kept.insert(v.verb);
  for (const auto* s : pool)
    if (kept.count(s->verb)) r.subset.push_back(*s);
  return r;
}

inline BenchResult build_imsitu_hhi(const std::vector<SituSample>& samples, const BenchConfig& cfg,
                                    const NliBackend& nli, std::size_t workers = 1) {
  HumanArgumentClassifier classifier(nli, cfg.nli_threshold);
  return build_imsitu_hhi(samples, cfg, classifier, workers);
}

inline void write_support_tsv(std::ostream& out, const std::vector<VerbSupport>& table) {
  out << "verb\tsupport\n";
  for (const auto& v : table) out << v.verb << '\t' << v.support << '\n';
}

inline std::vector<VerbSupport> read_support_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::vector<VerbSupport> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    if (++line_no == 1 || text::trim(line).empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw ValidationError(path + ":" + std::to_string(line_no) + ": expected verb<TAB>support");
    out.push_back({line.substr(0, tab), static_cast<std::size_t>(std::stoul(line.substr(tab + 1)))});
  }
  return out;
}

}  // namespace hhi::bench
