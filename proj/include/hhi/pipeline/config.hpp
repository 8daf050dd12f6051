#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <set>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hhi/backends/interfaces.hpp"
#include "hhi/bench/imsitu.hpp"
#include "hhi/captioner/decode.hpp"
#include "hhi/captioner/weights.hpp"
#include "hhi/core/errors.hpp"
#include "hhi/core/jsonl.hpp"
#include "hhi/core/serde.hpp"
#include "hhi/extract/harvest.hpp"
#include "hhi/extract/rules.hpp"
#include "hhi/metrics/evaluate.hpp"
#include "hhi/synth/prompts.hpp"

namespace hhi::pipeline {

inline constexpr std::string_view kEnvPrefix = "HHI_";

inline const std::vector<std::string>& backend_names() {
  static const std::vector<std::string> k = {"generator", "nli", "parser", "similarity", "summarizer", "captioner"};
  return k;
}

inline std::map<std::string, std::string> default_backends() {
  return {{"generator", "template"},  {"nli", "overlap"},           {"parser", "heuristic"},
          {"similarity", "token-f1"}, {"summarizer", "nearest-neighbour"}, {"captioner", "prior"}};
}

inline const std::vector<std::string>& path_names() {
  static const std::vector<std::string> k = {"names", "embeddings", "banned_verbs"};
  return k;
}

struct NovelSection {
  GenerationParams generation;
  std::size_t budget = 100;
  std::size_t shots = synth::kDefaultShots;
  std::size_t max_attempts = 0;
};

struct SynthesisSection {
  GenerationParams generation = [] {
    GenerationParams g;
    g.temperature = 0.7;
    g.max_new_tokens = 200;
    return g;
  }();
  std::size_t budget = 100;
  std::size_t shots = synth::kDefaultShots;
};

struct DistillSection {
  TrainConfig train;
  int min_faces = 2;
};

struct CaptionerSection {
  CaptionerTrainConfig train;
  captioner::TrainingTarget target = captioner::TrainingTarget::kPseudoLabel;
  int beam_width = captioner::kDefaultBeamWidth;
};

struct PipelineConfig {
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::map<std::string, std::string> backends = default_backends();
  std::map<std::string, std::string> paths;
  extract::HarvestConfig harvest = extract::HarvestConfig::defaults();
  extract::ExtractionRuleConfig extract;
  NovelSection novel;
  SynthesisSection synthesis;
  DistillSection distill;
  bench::BenchConfig bench;
  CaptionerSection captioner;
  metrics::EvalConfig metrics;

  std::optional<std::string> path(const std::string& name) const {
    auto it = paths.find(name);
    if (it == paths.end() || it->second.empty()) return std::nullopt;
    return it->second;
  }

  void validate() const {
    if (workers < 1) throw ValidationError("workers must be at least 1");
    for (const auto& [name, spec] : backends) {
      if (std::find(backend_names().begin(), backend_names().end(), name) == backend_names().end())
        throw ValidationError("unknown backend '" + name + "'");
      if (spec.empty()) throw ValidationError("backend '" + name + "' has an empty endpoint");
    }
    for (const auto& [name, p] : paths) {
      if (std::find(path_names().begin(), path_names().end(), name) == path_names().end())
        throw ValidationError("unknown path entry '" + name + "'");
      if (!p.empty() && !std::filesystem::exists(p))
        throw ValidationError("path '" + name + "' does not exist: " + p);
    }
    harvest.validate();
    extract.validate();
    novel.generation.validate();
    synthesis.generation.validate();
    distill.train.validate();
    bench.validate();
    metrics.validate();
    if (captioner.beam_width < 1) throw ValidationError("captioner beam_width must be positive");
  }
};

inline std::string_view to_string(captioner::TrainingTarget t) {
  return t == captioner::TrainingTarget::kPseudoLabel ? "pseudo-label" : "raw-caption";
}

inline void to_json(Json& j, const PipelineConfig& c) {
  Json backends = Json::object();
  for (const auto& [k, v] : c.backends) backends[k] = v;
  Json paths = Json::object();
  for (const auto& [k, v] : c.paths) paths[k] = v;
  j = Json{{"seed", c.seed},
           {"workers", c.workers},
           {"backends", backends},
           {"paths", paths},
           {"harvest", c.harvest},
           {"extract", c.extract},
           {"novel",
            {{"generation", c.novel.generation},
             {"budget", c.novel.budget},
             {"shots", c.novel.shots},
             {"max_attempts", c.novel.max_attempts}}},
           {"synthesis",
            {{"generation", c.synthesis.generation}, {"budget", c.synthesis.budget}, {"shots", c.synthesis.shots}}},
           {"distill", {{"train", c.distill.train}, {"min_faces", c.distill.min_faces}}},
           {"bench", c.bench},
           {"captioner",
            {{"train", c.captioner.train},
             {"target", to_string(c.captioner.target)},
             {"beam_width", c.captioner.beam_width}}},
           {"metrics", c.metrics}};
}

namespace config_detail {

inline void merge_generation(const Json& j, GenerationParams& g) {
  Json base = g;
  base.update(j);
  g = base.get<GenerationParams>();
}

}  // namespace config_detail

/// Sections and keys absent from `j` keep their defaults.
inline void apply_config_json(const Json& j, PipelineConfig& c) {
  using config_detail::merge_generation;
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  static const std::set<std::string> known = {"seed",    "workers", "backends",  "paths", "harvest", "extract",
                                              "novel",   "synthesis", "distill", "bench", "captioner", "metrics"};
  for (const auto& [k, _] : j.items())
    if (!known.count(k)) throw ValidationError("unknown config section '" + k + "'");
  c.seed = j.value("seed", c.seed);
  c.workers = j.value("workers", c.workers);
  if (j.contains("backends"))
    for (const auto& [k, v] : j.at("backends").items()) c.backends[k] = v.get<std::string>();
  if (j.contains("paths"))
    for (const auto& [k, v] : j.at("paths").items()) c.paths[k] = v.is_null() ? "" : v.get<std::string>();
  if (j.contains("harvest")) {
    Json base = c.harvest;
    base.update(j.at("harvest"));
    c.harvest = base.get<extract::HarvestConfig>();
  }
  if (j.contains("extract")) {
    Json base = c.extract;
    base.update(j.at("extract"));
    c.extract = base.get<extract::ExtractionRuleConfig>();
  }
  if (j.contains("novel")) {
    const auto& s = j.at("novel");
    if (s.contains("generation")) merge_generation(s.at("generation"), c.novel.generation);
    c.novel.budget = s.value("budget", c.novel.budget);
    c.novel.shots = s.value("shots", c.novel.shots);
    c.novel.max_attempts = s.value("max_attempts", c.novel.max_attempts);
  }
  if (j.contains("synthesis")) {
    const auto& s = j.at("synthesis");
    if (s.contains("generation")) merge_generation(s.at("generation"), c.synthesis.generation);
    c.synthesis.budget = s.value("budget", c.synthesis.budget);
    c.synthesis.shots = s.value("shots", c.synthesis.shots);
  }
  if (j.contains("distill")) {
    const auto& s = j.at("distill");
    if (s.contains("train")) {
      Json base = c.distill.train;
      base.update(s.at("train"));
      c.distill.train = base.get<TrainConfig>();
    }
    c.distill.min_faces = s.value("min_faces", c.distill.min_faces);
  }
  if (j.contains("bench")) {
    Json base = c.bench;
    base.update(j.at("bench"));
    c.bench = base.get<bench::BenchConfig>();
  }
  if (j.contains("captioner")) {
    const auto& s = j.at("captioner");
    if (s.contains("train")) {
      Json base = c.captioner.train;
      base.update(s.at("train"));
      c.captioner.train = base.get<CaptionerTrainConfig>();
    }
    if (s.contains("target")) c.captioner.target = captioner::training_target_from_string(s.at("target").get<std::string>());
    c.captioner.beam_width = s.value("beam_width", c.captioner.beam_width);
  }
  if (j.contains("metrics")) {
    Json base = c.metrics;
    base.update(j.at("metrics"));
    c.metrics = base.get<metrics::EvalConfig>();
  }
}

inline PipelineConfig load_config(const std::string& path) {
  PipelineConfig c;
  try {
    apply_config_json(read_json_file(path), c);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  // Relative paths inside a config file are relative to that file.
  const auto dir = std::filesystem::path(path).parent_path();
  for (auto& [_, p] : c.paths)
    if (!p.empty() && std::filesystem::path(p).is_relative()) p = (dir / p).lexically_normal().string();
  return c;
}

/// Environment overrides: HHI_SEED, HHI_WORKERS, HHI_BACKEND_<NAME> and
/// HHI_PATH_<NAME> (upper-case names).
inline void apply_env(PipelineConfig& c, const std::function<const char*(const char*)>& getenv = std::getenv) {
  auto var = [&](const std::string& suffix) -> std::optional<std::string> {
    const std::string name = std::string(kEnvPrefix) + suffix;
    if (const char* v = getenv(name.c_str()); v && *v) return std::string(v);
    return std::nullopt;
  };
  auto upper = [](std::string s) {
    for (auto& ch : s) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    return s;
  };
  try {
    if (auto v = var("SEED")) c.seed = std::stoull(*v);
    if (auto v = var("WORKERS")) c.workers = std::stoul(*v);
  } catch (const std::exception&) {
    throw ValidationError(std::string(kEnvPrefix) + "SEED and " + std::string(kEnvPrefix) + "WORKERS must be integers");
  }
  for (const auto& b : backend_names())
    if (auto v = var("BACKEND_" + upper(b))) c.backends[b] = *v;
  for (const auto& p : path_names())
    if (auto v = var("PATH_" + upper(p))) c.paths[p] = *v;
}

/// Parses "name=endpoint".
inline std::pair<std::string, std::string> parse_backend_flag(const std::string& flag) {
  auto eq = flag.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == flag.size())
    throw ValidationError("--backend expects <name>=<endpoint>, got '" + flag + "'");
  auto name = flag.substr(0, eq);
  if (std::find(backend_names().begin(), backend_names().end(), name) == backend_names().end())
    throw ValidationError("unknown backend '" + name + "'");
  return {name, flag.substr(eq + 1)};
}

}  // namespace hhi::pipeline
