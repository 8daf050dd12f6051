#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hhi/backends/interfaces.hpp"
#include "hhi/core/errors.hpp"
#include "hhi/core/jsonl.hpp"
#include "hhi/core/names.hpp"
#include "hhi/core/parallel.hpp"
#include "hhi/core/random.hpp"
#include "hhi/synth/filters.hpp"
#include "hhi/synth/postprocess.hpp"
#include "hhi/synth/prompts.hpp"
#include "hhi/synth/types.hpp"

namespace hhi::synth {

struct SynthesisConfig {
  GenerationParams generation = [] {
    GenerationParams g;
    g.temperature = 0.7;
    g.max_new_tokens = 200;
    return g;
  }();
  std::size_t budget = 0;
  std::size_t shots = kDefaultShots;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::vector<std::string> name_lexicon = default_name_lexicon();
  // Written when a backend fails; pass the same path back to resume.
  std::optional<std::string> checkpoint_path;
};

struct SynthesisBackends {
  const TextGeneratorBackend& generator;
  const NliBackend& nli;
  const ParserBackend& parser;
};

struct SynthesisResult {
  std::vector<InteractionCaptionPair> pairs;
  Json manifest;
};

namespace run_detail {

struct Outcome {
  std::optional<InteractionCaptionPair> pair;
  std::string rejection;
  std::optional<std::string> backend_error;
};

struct State {
  std::size_t next_attempt = 0;
  std::size_t attempted = 0;
  std::vector<InteractionCaptionPair> pairs;
  std::map<std::string, std::size_t> rejections;
};

inline Json state_to_json(const State& s, std::uint64_t seed) {
  return Json{{"seed", seed},
              {"next_attempt", s.next_attempt},
              {"attempted", s.attempted},
              {"rejection_histogram", s.rejections},
              {"pairs", s.pairs}};
}

inline State state_from_json(const Json& j, std::uint64_t seed) {
  if (j.at("seed").get<std::uint64_t>() != seed)
    throw ValidationError("checkpoint was written with a different seed");
  State s;
  s.next_attempt = j.at("next_attempt").get<std::size_t>();
  s.attempted = j.at("attempted").get<std::size_t>();
  s.rejections = j.at("rejection_histogram").get<std::map<std::string, std::size_t>>();
  s.pairs = j.at("pairs").get<std::vector<InteractionCaptionPair>>();
  return s;
}

inline std::string first_line(const std::string& s, const std::string& stop) {
  auto cut = stop.empty() ? std::string::npos : s.find(stop);
  return std::string(text::trim(std::string_view(s).substr(0, cut)));
}

}  // namespace run_detail

/// Synthesizes caption/interaction pairs: each novel interaction I* is used
/// at most once, in a seeded order, and every attempt draws its own example
/// pairs, name pool and generation seed from (seed, attempt index). Results
/// are therefore identical for any worker count.
inline SynthesisResult run_synthesis(const std::vector<Interaction>& novel,
                                     const std::vector<InteractionCaptionPair>& seed_pairs,
                                     const SynthesisBackends& backends, const SynthesisConfig& cfg) {
  using namespace run_detail;
  cfg.generation.validate();
  State st;
  if (cfg.checkpoint_path && std::filesystem::exists(*cfg.checkpoint_path))
    st = state_from_json(read_json_file(*cfg.checkpoint_path), cfg.seed);

  if (cfg.budget > 0 && seed_pairs.size() < cfg.shots)
    throw ValidationError("need at least " + std::to_string(cfg.shots) + " seed pairs, got " +
                          std::to_string(seed_pairs.size()));

  std::vector<std::size_t> order(novel.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  {
    rng::Engine eng(rng::derive(cfg.seed, 0));
    rng::shuffle(order, eng);
  }

  auto attempt = [&](std::size_t a) -> Outcome {
    Outcome o;
    const Interaction& target = novel[order[a]];
    rng::Engine eng(rng::derive(cfg.seed, 1 + 2 * a));
    std::vector<InteractionCaptionPair> shots;
    for (auto k : rng::sample_indices(seed_pairs.size(), cfg.shots, eng)) shots.push_back(seed_pairs[k]);
    auto pool = NamePool::shuffled(cfg.name_lexicon, rng::derive(cfg.seed, 2 + 2 * a));
    try {
      auto prompt = build_caption_prompt(shots, target, pool, cfg.shots);
      GenerationParams gp = cfg.generation;
      gp.seed = rng::derive(cfg.seed, 0x9e37ULL + a);
      const std::string caption = first_line(backends.generator.generate(prompt.text, gp), gp.stop);
      if (caption.empty()) {
        o.rejection = "empty-output";
        return o;
      }
      auto parse = backends.parser.parse(prompt.target_filled);
      auto verdict = filter_synthetic_pair(target, caption, prompt.target_names, backends.nli, parse,
                                           "attempt " + std::to_string(a));
      if (!verdict.accepted) {
        o.rejection = verdict.reasons.front();
        return o;
      }
      auto post = postprocess_interaction(target, parse);
      if (!post) {
        o.rejection = "postprocess";
        return o;
      }
      InteractionCaptionPair pair;
      pair.interaction = *post;
      pair.caption = {remask_names(caption, prompt.target_names), Source::kSynthetic};
      pair.entailment = verdict.p_e;
      pair.provenance = Provenance::kSynthetic;
      pair.gen_seed = gp.seed;
      o.pair = std::move(pair);
    } catch (const BackendError& e) {
      o.backend_error = e.what();
    }
    return o;
  };

  const std::size_t batch = std::max<std::size_t>(cfg.workers, 1) * 4;
  bool exhausted = false;
  while (st.pairs.size() < cfg.budget) {
    if (st.next_attempt >= order.size()) {
      exhausted = true;
      break;
    }
    const std::size_t begin = st.next_attempt;
    const std::size_t n = std::min(batch, order.size() - begin);
    auto outcomes = parallel_map(n, cfg.workers, [&](std::size_t i) { return attempt(begin + i); });
    for (auto& o : outcomes) {
      if (st.pairs.size() >= cfg.budget) break;
      if (o.backend_error) {
        if (cfg.checkpoint_path) write_json_file(*cfg.checkpoint_path, state_to_json(st, cfg.seed));
        throw BackendError(*o.backend_error + (cfg.checkpoint_path ? " (checkpoint written to " +
                                                                         *cfg.checkpoint_path + ")"
                                                                   : std::string()));
      }
      ++st.attempted;
      ++st.next_attempt;
      if (o.pair) st.pairs.push_back(std::move(*o.pair));
      else ++st.rejections[o.rejection];
    }
  }
  if (cfg.checkpoint_path && std::filesystem::exists(*cfg.checkpoint_path))
    std::filesystem::remove(*cfg.checkpoint_path);

  SynthesisResult r;
  r.pairs = std::move(st.pairs);
  r.manifest = Json{{"seed", cfg.seed},
                    {"budget", cfg.budget},
                    {"attempted", st.attempted},
                    {"accepted", r.pairs.size()},
                    {"seeds_exhausted", exhausted},
                    {"rejection_histogram", st.rejections},
                    {"generation", cfg.generation}};
  return r;
}

}  // namespace hhi::synth
