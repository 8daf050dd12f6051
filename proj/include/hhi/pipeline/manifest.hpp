#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hhi/core/errors.hpp"
#include "hhi/core/hash.hpp"
#include "hhi/core/jsonl.hpp"
#include "hhi/core/serde.hpp"

namespace hhi::pipeline {

/// What a stage reads, writes and depends on. outputs.front() is the
/// primary output; its manifest lives next to it.
struct StageSpec {
  std::string stage;
  Json config;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::uint64_t seed = 0;
};

struct StageOutcome {
  bool skipped = false;
  Json manifest;
};

inline std::string manifest_path(const std::string& output) { return output + ".manifest.json"; }

inline std::string config_hash(const Json& config) { return sha256_hex(config.dump()); }

inline Json hash_files(const std::vector<std::string>& paths) {
  Json out = Json::object();
  for (const auto& p : paths) out[p] = sha256_file(p);
  return out;
}

namespace manifest_detail {

inline bool up_to_date(const StageSpec& spec, const Json& inputs) {
  const auto path = manifest_path(spec.outputs.front());
  if (!std::filesystem::exists(path)) return false;
  Json m;
  try {
    m = read_json_file(path);
  } catch (const ValidationError&) {
    return false;
  }
  if (m.value("stage", std::string()) != spec.stage) return false;
  if (m.value("config_hash", std::string()) != config_hash(spec.config)) return false;
  if (m.value("seed", std::uint64_t{0}) != spec.seed || !m.contains("seed")) return false;
  if (m.value("input_hashes", Json::object()) != inputs) return false;
  const auto outputs = m.value("output_hashes", Json::object());
  for (const auto& o : spec.outputs) {
    if (!outputs.contains(o) || !std::filesystem::exists(o)) return false;
    if (outputs.at(o).get<std::string>() != sha256_file(o)) return false;
  }
  return true;
}

}  // namespace manifest_detail

/// Runs `body` (which writes the outputs and returns a JSON object of
/// counts) unless a matching manifest shows the outputs are current.
template <class F>
StageOutcome run_stage(const StageSpec& spec, bool force, F&& body) {
  if (spec.outputs.empty()) throw ValidationError(spec.stage + ": no output path");
  for (const auto& in : spec.inputs)
    if (!std::filesystem::is_regular_file(in)) throw ValidationError(spec.stage + ": input not found: " + in);
  const Json inputs = hash_files(spec.inputs);
  if (!force && manifest_detail::up_to_date(spec, inputs))
    return {true, read_json_file(manifest_path(spec.outputs.front()))};
  for (const auto& o : spec.outputs) {
    auto dir = std::filesystem::path(o).parent_path();
    if (!dir.empty()) std::filesystem::create_directories(dir);
  }
  Json counts = body();
  Json m{{"stage", spec.stage},
         {"config_hash", config_hash(spec.config)},
         {"config", spec.config},
         {"seed", spec.seed},
         {"input_hashes", inputs},
         {"output_hashes", hash_files(spec.outputs)},
         {"counts", counts}};
  write_json_file(manifest_path(spec.outputs.front()), m);
  return {false, m};
}

}  // namespace hhi::pipeline
