#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "hhi/backends/interfaces.hpp"
#include "hhi/core/names.hpp"
#include "hhi/core/parallel.hpp"
#include "hhi/core/random.hpp"
#include "hhi/synth/filters.hpp"
#include "hhi/synth/prompts.hpp"

namespace hhi::synth {

struct NovelConfig {
  GenerationParams generation;  // nucleus 0.95, temperature 1.0
  std::size_t budget = 0;
  std::size_t max_attempts = 0;  // 0 means 20 * budget
  std::size_t shots = kDefaultShots;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

struct NovelResult {
  std::vector<Interaction> interactions;
  Json manifest;
};

/// Generates distinct novel interaction texts from parsing-based seeds.
/// Prompts are filled with the fixed names "Alex", "Bailey", ... so that the
/// output filter can check name order; accepted texts are re-masked.
inline NovelResult generate_novel_interactions(const std::vector<Interaction>& seeds,
                                               const TextGeneratorBackend& generator,
                                               const NovelConfig& cfg) {
  cfg.generation.validate();
  if (cfg.budget > 0 && seeds.size() < cfg.shots)
    throw ValidationError("need at least " + std::to_string(cfg.shots) + " seed interactions, got " +
                          std::to_string(seeds.size()));
  const NamePool pool(default_name_lexicon());
  const std::vector<std::string> fixed = {pool.names()[0], pool.names()[1]};
  const std::size_t max_attempts = cfg.max_attempts ? cfg.max_attempts : 20 * cfg.budget;

  struct Outcome {
    std::string text;
    FilterVerdict verdict;
  };
  auto attempt = [&](std::size_t a) {
    rng::Engine eng(rng::derive(cfg.seed, a));
    std::vector<Interaction> shots;
    for (auto k : rng::sample_indices(seeds.size(), cfg.shots, eng)) shots.push_back(seeds[k]);
    GenerationParams gp = cfg.generation;
    gp.seed = rng::derive(cfg.seed ^ 0x5bd1e995ULL, a);
    std::string out = generator.generate(build_interaction_prompt(shots, pool, cfg.shots), gp);
    auto cut = gp.stop.empty() ? std::string::npos : out.find(gp.stop);
    Outcome o;
    o.text = std::string(text::trim(std::string_view(out).substr(0, cut)));
    o.verdict = filter_novel_interaction(o.text, fixed[0], fixed[1]);
    return o;
  };

  NovelResult r;
  std::set<std::string> seen;
  std::map<std::string, std::size_t> rejections;
  std::size_t attempted = 0, duplicates = 0;
  const std::size_t batch = std::max<std::size_t>(cfg.workers, 1) * 4;
  while (r.interactions.size() < cfg.budget && attempted < max_attempts) {
    const std::size_t n = std::min(batch, max_attempts - attempted);
    const std::size_t begin = attempted;
    auto outcomes = parallel_map(n, cfg.workers, [&](std::size_t i) { return attempt(begin + i); });
    for (auto& o : outcomes) {
      if (r.interactions.size() >= cfg.budget) break;
      ++attempted;
      if (!o.verdict.accepted) {
        for (const auto& why : o.verdict.reasons) ++rejections[why];
        continue;
      }
      std::string masked = remask_names(o.text, fixed);
      if (!seen.insert(masked).second) {
        ++duplicates;
        continue;
      }
      r.interactions.push_back({std::move(masked)});
    }
  }
  r.manifest = Json{{"seed", cfg.seed},
                    {"budget", cfg.budget},
                    {"attempted", attempted},
                    {"accepted", r.interactions.size()},
                    {"duplicates", duplicates},
                    {"rejection_histogram", rejections},
                    {"generation", cfg.generation}};
  return r;
}

}  // namespace hhi::synth
