#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "hhi/bench/imsitu.hpp"
#include "hhi/bench/wenda.hpp"
#include "hhi/captioner/decode.hpp"
#include "hhi/captioner/weights.hpp"
#include "hhi/core/hash.hpp"
#include "hhi/core/jsonl.hpp"
#include "hhi/core/names.hpp"
#include "hhi/core/parse.hpp"
#include "hhi/core/random.hpp"
#include "hhi/distill/pseudo_label.hpp"
#include "hhi/distill/training.hpp"
#include "hhi/extract/harvest.hpp"
#include "hhi/extract/rules.hpp"
#include "hhi/metrics/evaluate.hpp"
#include "hhi/metrics/report.hpp"
#include "hhi/pipeline/backends.hpp"
#include "hhi/pipeline/config.hpp"
#include "hhi/pipeline/manifest.hpp"
#include "hhi/synth/novel.hpp"
#include "hhi/synth/run.hpp"

// One function per CLI subcommand. Each declares its inputs, outputs and the
// configuration its result depends on, then runs under run_stage() so that a
// rerun with unchanged inputs is a no-op.

namespace hhi::pipeline {

namespace stage_detail {

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

inline void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path);
  out << body;
}

inline std::vector<std::string> lexicon(const PipelineConfig& cfg) {
  if (auto p = cfg.path("names")) return load_name_lexicon(*p);
  return default_name_lexicon();
}

inline std::vector<std::string> lexicon_inputs(const PipelineConfig& cfg) {
  if (auto p = cfg.path("names")) return {*p};
  return {};
}

inline Json with_backend(Json j, const PipelineConfig& cfg, std::initializer_list<const char*> names) {
  Json b = Json::object();
  for (const char* n : names) b[n] = cfg.backends.at(n);
  j["backends"] = b;
  return j;
}

inline bool is_conllu(const std::string& path) { return std::filesystem::path(path).extension() == ".conllu"; }

/// Rows with a string "interaction" field.
inline std::vector<Interaction> read_interactions(const std::string& path) {
  std::vector<Interaction> out;
  for (const auto& row : read_jsonl<Json>(path)) {
    if (!row.contains("interaction") || !row.at("interaction").is_string())
      throw ValidationError(path + ": every row needs a string 'interaction'");
    out.push_back({row.at("interaction").get<std::string>()});
  }
  return out;
}

}  // namespace stage_detail

// ---------------------------------------------------------------------------

struct HarvestArgs {
  std::string input;   // raw text, one candidate line per line
  std::string output;  // JSONL {caption_id, caption}
};

inline StageOutcome stage_harvest(const PipelineConfig& cfg, const HarvestArgs& a, bool force) {
  StageSpec spec{"harvest", Json{{"harvest", cfg.harvest}}, {a.input}, {a.output}, cfg.seed};
  return run_stage(spec, force, [&] {
    const auto lines = stage_detail::read_lines(a.input);
    std::vector<Json> rows;
    std::size_t selected = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      auto kept = extract::harvest_captions({lines[i]}, cfg.harvest);
      if (kept.empty()) continue;
      ++selected;
      rows.push_back(Json{{"caption_id", "line-" + std::to_string(i + 1)}, {"caption", kept.front()}});
    }
    write_jsonl(a.output, rows);
    return Json{{"lines", lines.size()}, {"captions", selected}};
  });
}

// ---------------------------------------------------------------------------

struct ExtractArgs {
  std::string input;                  // .conllu parses or JSONL {caption_id, caption}
  std::string output;                 // JSONL {caption_id, interaction}
  std::optional<std::string> pairs;   // optional seed pairs JSONL
};

namespace stage_detail {

struct ParsedCaption {
  std::string caption_id;
  DependencyParse parse;
  std::vector<CharSpan> filled;
  MaskedCaption masked;
};

inline std::vector<CharSpan> person_spans(const DependencyParse& p) {
  std::vector<CharSpan> out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& t = p[i];
    if (!(t.entity == "PERSON" || t.entity == "NAME" || t.form == kNameToken)) continue;
    auto [b, e] = p.entity_span(i);
    if (b != i && t.form != kNameToken) continue;
    out.push_back({p[b].span.begin, p[e].span.end});
  }
  return out;
}

inline int slot_of(const std::vector<CharSpan>& caption_spans, const CharSpan& s) {
  for (std::size_t i = 0; i < caption_spans.size(); ++i)
    if (caption_spans[i].overlaps(s)) return static_cast<int>(i);
  return -1;
}

}  // namespace stage_detail

inline StageOutcome stage_extract(const PipelineConfig& cfg, const ExtractArgs& a, bool force) {
  using namespace stage_detail;
  std::vector<std::string> outputs = {a.output};
  if (a.pairs) outputs.push_back(*a.pairs);
  auto inputs = lexicon_inputs(cfg);
  inputs.insert(inputs.begin(), a.input);
  Json conf = with_backend(Json{{"extract", cfg.extract}}, cfg, {"parser"});
  StageSpec spec{"extract", conf, inputs, outputs, cfg.seed};
  return run_stage(spec, force, [&] {
    const auto names = lexicon(cfg);
    std::vector<ParsedCaption> items;
    if (is_conllu(a.input)) {
      for (auto& p : read_conllu_file(a.input)) {
        ParsedCaption c;
        c.caption_id = p.id;
        c.masked = mask_names(p.text, person_spans(p), Source::kWhosWaldo);
        c.parse = std::move(p);
        items.push_back(std::move(c));
      }
    } else {
      auto parser = make_parser(cfg.backends.at("parser"), names);
      const auto rows = read_jsonl<Json>(a.input);
      items = parallel_map(rows.size(), cfg.workers, [&](std::size_t i) {
        const auto& row = rows[i];
        ParsedCaption c;
        c.caption_id = json_detail::get_required<std::string>(row, "caption_id");
        const auto caption = json_detail::get_required<std::string>(row, "caption");
        c.masked = MaskedCaption{caption, Source::kWhosWaldo};
        auto pool = NamePool::shuffled(names, rng::derive(cfg.seed, fingerprint64(c.caption_id)));
        auto filled = fill_names(caption, pool);
        c.filled = filled.spans();
        c.parse = parser->parse(filled.text);
        if (c.parse.id.empty()) c.parse.id = c.caption_id;
        return c;
      });
    }
    std::vector<Json> rows;
    std::vector<synth::InteractionCaptionPair> pairs;
    for (const auto& c : items) {
      auto r = extract::extract_interaction_detailed(c.parse, cfg.extract, c.filled);
      if (!r) continue;
      rows.push_back(Json{{"caption_id", c.caption_id}, {"interaction", r->interaction.text}});
      if (!a.pairs) continue;
      const auto caption_spans = c.filled.empty() ? person_spans(c.parse) : c.filled;
      synth::InteractionCaptionPair pair;
      pair.interaction = r->interaction;
      pair.caption = c.masked;
      pair.provenance = synth::Provenance::kWhosWaldoSeed;
      for (const auto& s : r->person_spans) pair.slot_map.push_back(slot_of(caption_spans, s));
      if (std::find(pair.slot_map.begin(), pair.slot_map.end(), -1) != pair.slot_map.end()) pair.slot_map.clear();
      pairs.push_back(std::move(pair));
    }
    write_jsonl(a.output, rows);
    if (a.pairs) write_jsonl(*a.pairs, pairs);
    return Json{{"captions", items.size()}, {"interactions", rows.size()}};
  });
}

// ---------------------------------------------------------------------------

struct GenInteractionsArgs {
  std::string input;   // rows with "interaction"
  std::string output;  // JSONL {interaction}
};

inline StageOutcome stage_gen_interactions(const PipelineConfig& cfg, const GenInteractionsArgs& a, bool force) {
  Json conf = stage_detail::with_backend(
      Json{{"novel",
            {{"generation", cfg.novel.generation},
             {"budget", cfg.novel.budget},
             {"shots", cfg.novel.shots},
             {"max_attempts", cfg.novel.max_attempts}}}},
      cfg, {"generator"});
  StageSpec spec{"gen-interactions", conf, {a.input}, {a.output}, cfg.seed};
  return run_stage(spec, force, [&] {
    auto seeds = stage_detail::read_interactions(a.input);
    auto generator = make_generator(cfg.backends.at("generator"));
    synth::NovelConfig nc;
    nc.generation = cfg.novel.generation;
    nc.budget = cfg.novel.budget;
    nc.max_attempts = cfg.novel.max_attempts;
    nc.shots = cfg.novel.shots;
    nc.seed = cfg.seed;
    nc.workers = cfg.workers;
    auto r = synth::generate_novel_interactions(seeds, *generator, nc);
    std::vector<Json> rows;
    for (const auto& i : r.interactions) rows.push_back(Json{{"interaction", i.text}});
    write_jsonl(a.output, rows);
    return r.manifest;
  });
}

// ---------------------------------------------------------------------------

struct GenPairsArgs {
  std::string seeds;   // seed pairs JSONL
  std::string novel;   // rows with "interaction"
  std::string output;  // synthetic pairs JSONL
};

inline StageOutcome stage_gen_pairs(const PipelineConfig& cfg, const GenPairsArgs& a, bool force) {
  using namespace stage_detail;
  Json conf = with_backend(Json{{"synthesis",
                                 {{"generation", cfg.synthesis.generation},
                                  {"budget", cfg.synthesis.budget},
                                  {"shots", cfg.synthesis.shots}}}},
                           cfg, {"generator", "nli", "parser"});
  auto inputs = lexicon_inputs(cfg);
  inputs.insert(inputs.begin(), {a.seeds, a.novel});
  StageSpec spec{"gen-pairs", conf, inputs, {a.output}, cfg.seed};
  return run_stage(spec, force, [&] {
    auto seeds = read_jsonl<synth::InteractionCaptionPair>(a.seeds);
    auto novel = read_interactions(a.novel);
    const auto names = lexicon(cfg);
    auto generator = make_generator(cfg.backends.at("generator"));
    auto nli = make_nli(cfg.backends.at("nli"));
    auto parser = make_parser(cfg.backends.at("parser"), names);
    synth::SynthesisConfig sc;
    sc.generation = cfg.synthesis.generation;
    sc.budget = cfg.synthesis.budget;
    sc.shots = cfg.synthesis.shots;
    sc.seed = cfg.seed;
    sc.workers = cfg.workers;
    sc.name_lexicon = names;
    sc.checkpoint_path = a.output + ".checkpoint.json";
    auto r = synth::run_synthesis(novel, seeds, {*generator, *nli, *parser}, sc);
    write_jsonl(a.output, r.pairs);
    return r.manifest;
  });
}

// ---------------------------------------------------------------------------

struct DistillTrainArgs {
  std::vector<std::string> pairs;  // pair JSONL files (seed and synthetic)
  std::string output;              // model descriptor JSON
};

inline StageOutcome stage_distill_train(const PipelineConfig& cfg, const DistillTrainArgs& a, bool force) {
  if (a.pairs.empty()) throw ValidationError("distill-train needs at least one pairs file");
  const std::string examples_path = a.output + ".examples.jsonl";
  Json conf = stage_detail::with_backend(Json{{"train", cfg.distill.train}}, cfg, {"summarizer"});
  StageSpec spec{"distill-train", conf, a.pairs, {a.output, examples_path}, cfg.seed};
  return run_stage(spec, force, [&] {
    std::vector<synth::InteractionCaptionPair> pairs;
    for (const auto& p : a.pairs) {
      auto part = read_jsonl<synth::InteractionCaptionPair>(p);
      pairs.insert(pairs.end(), part.begin(), part.end());
    }
    auto examples = distill::make_training_set(pairs, cfg.distill.train.task_prefix);
    write_jsonl(examples_path, [&] {
      std::vector<Json> rows;
      for (const auto& e : examples) rows.push_back(Json{{"input", e.input}, {"target", e.target}});
      return rows;
    }());
    const auto& bspec = cfg.backends.at("summarizer");
    auto backend = make_summarizer(bspec);
    Json model;
    if (backend) model = backend->fit(examples, cfg.distill.train)->describe();
    else model = Json{{"kind", "http"}, {"endpoint", bspec}};
    model["train_config"] = cfg.distill.train;
    write_json_file(a.output, model);
    return Json{{"pairs", pairs.size()}, {"examples", examples.size()}};
  });
}

// ---------------------------------------------------------------------------

struct PseudoLabelArgs {
  std::string input;                   // LabeledSample JSONL
  std::string model;                   // summarizer model descriptor
  std::optional<std::string> test;     // held-out benchmark, for dedup
  std::string output;                  // PseudoLabelRecord JSONL
  std::optional<std::string> labeled;  // dataset with accepted labels applied
};

inline std::string stats_path(const std::string& output) { return output + ".stats.json"; }

inline StageOutcome stage_pseudo_label(const PipelineConfig& cfg, const PseudoLabelArgs& a, bool force) {
  std::vector<std::string> inputs = {a.input, a.model};
  if (a.test) inputs.push_back(*a.test);
  std::vector<std::string> outputs = {a.output, stats_path(a.output)};
  if (a.labeled) outputs.push_back(*a.labeled);
  Json conf{{"task_prefix", cfg.distill.train.task_prefix}, {"min_faces", cfg.distill.min_faces}};
  StageSpec spec{"pseudo-label", conf, inputs, outputs, cfg.seed};
  return run_stage(spec, force, [&] {
    auto dataset = read_jsonl<LabeledSample>(a.input);
    std::vector<LabeledSample> test;
    if (a.test) test = read_jsonl<LabeledSample>(*a.test);
    auto model = load_summarizer_model(read_json_file(a.model));
    distill::PseudoLabelConfig pc;
    pc.task_prefix = cfg.distill.train.task_prefix;
    pc.min_faces = cfg.distill.min_faces;
    pc.workers = cfg.workers;
    pc.checkpoint_path = a.output + ".checkpoint.json";
    auto run = distill::generate_pseudo_labels(dataset, *model, test, pc);
    write_jsonl(a.output, run.records);
    write_json_file(stats_path(a.output), run.stats);
    if (a.labeled) write_jsonl(*a.labeled, distill::apply_labels(dataset, run.records));
    return Json(run.stats);
  });
}

// ---------------------------------------------------------------------------

struct BuildBenchArgs {
  std::string input;    // SituSample JSONL
  std::string output;   // subset JSONL
  std::string support;  // verb support TSV
};

inline StageOutcome stage_build_bench(const PipelineConfig& cfg, const BuildBenchArgs& a, bool force) {
  bench::BenchConfig bc = cfg.bench;
  std::vector<std::string> inputs = {a.input};
  if (auto p = cfg.path("banned_verbs")) {
    auto extra = bench::load_banned_verbs(*p);
    bc.banned_verbs.insert(extra.begin(), extra.end());
    inputs.push_back(*p);
  }
  Json conf = stage_detail::with_backend(Json{{"bench", bc}}, cfg, {"nli"});
  StageSpec spec{"build-bench", conf, inputs, {a.output, a.support}, cfg.seed};
  return run_stage(spec, force, [&] {
    auto samples = read_jsonl<bench::SituSample>(a.input);
    auto nli = make_nli(cfg.backends.at("nli"));
    auto r = bench::build_imsitu_hhi(samples, bc, *nli, cfg.workers);
    write_jsonl(a.output, r.subset);
    std::ofstream tsv(a.support, std::ios::binary | std::ios::trunc);
    if (!tsv) throw ValidationError("cannot write " + a.support);
    bench::write_support_tsv(tsv, r.support);
    return Json{{"samples", samples.size()},
                {"filtered_pool", r.filtered_pool},
                {"verbs", r.support.size()},
                {"subset", r.subset.size()}};
  });
}

// ---------------------------------------------------------------------------

struct TrainCaptionerArgs {
  std::string input;   // LabeledSample JSONL (labels required for pseudo-label targets)
  std::string output;  // captioner model descriptor
};

inline StageOutcome stage_train_captioner(const PipelineConfig& cfg, const TrainCaptionerArgs& a, bool force) {
  const std::string examples_path = a.output + ".examples.jsonl";
  Json conf = stage_detail::with_backend(
      Json{{"train", cfg.captioner.train}, {"target", to_string(cfg.captioner.target)}}, cfg, {"captioner"});
  StageSpec spec{"train-captioner", conf, {a.input}, {a.output, examples_path}, cfg.seed};
  return run_stage(spec, force, [&] {
    auto samples = read_jsonl<LabeledSample>(a.input);
    auto examples = captioner::build_training_set(samples, cfg.captioner.target);
    std::vector<Json> rows;
    for (const auto& e : examples)
      rows.push_back(Json{{"image_ref", e.image_ref}, {"target", e.target}, {"weight", e.weight}});
    write_jsonl(examples_path, rows);
    const auto& bspec = cfg.backends.at("captioner");
    auto backend = make_captioner(bspec);
    Json model;
    if (backend) model = backend->fit(examples, cfg.captioner.train)->describe();
    else model = Json{{"kind", "http"}, {"endpoint", bspec}};
    write_json_file(a.output, model);
    return Json{{"samples", samples.size()}, {"examples", examples.size()}};
  });
}

// ---------------------------------------------------------------------------

struct DecodeArgs {
  std::string model;   // captioner model descriptor
  std::string input;   // JSONL rows with id and image_ref
  std::string output;  // predictions JSONL
};

inline StageOutcome stage_decode(const PipelineConfig& cfg, const DecodeArgs& a, bool force) {
  Json conf{{"beam_width", cfg.captioner.beam_width}};
  StageSpec spec{"decode", conf, {a.model, a.input}, {a.output}, cfg.seed};
  return run_stage(spec, force, [&] {
    auto model = load_captioner_model(read_json_file(a.model));
    std::vector<captioner::DecodeRequest> reqs;
    for (const auto& row : read_jsonl<Json>(a.input))
      reqs.push_back({json_detail::get_required<std::string>(row, "id"),
                      json_detail::get_required<std::string>(row, "image_ref")});
    auto preds = captioner::decode_all(*model, reqs, cfg.captioner.beam_width, cfg.workers);
    write_jsonl(a.output, preds);
    return Json{{"items", preds.size()}, {"beam_width", cfg.captioner.beam_width}};
  });
}

// ---------------------------------------------------------------------------

enum class BenchMode { kWenda, kImsitu };

inline BenchMode bench_mode_from_string(std::string_view s) {
  if (s == "wenda") return BenchMode::kWenda;
  if (s == "imsitu") return BenchMode::kImsitu;
  throw ValidationError("unknown benchmark mode '" + std::string(s) + "' (expected wenda or imsitu)");
}

struct EvaluateArgs {
  std::string predictions;
  std::string benchmark;
  std::string output;                 // report JSON
  std::optional<std::string> tables;  // formatted tables
  BenchMode mode = BenchMode::kWenda;
  metrics::MethodLabel label;
};

inline StageOutcome stage_evaluate(const PipelineConfig& cfg, const EvaluateArgs& a, bool force) {
  auto emb_path = cfg.path("embeddings");
  if (!emb_path) throw ValidationError("evaluate needs an embedding table (paths.embeddings)");
  std::vector<std::string> outputs = {a.output};
  if (a.tables) outputs.push_back(*a.tables);
  const bool parsed = cfg.metrics.verb_mode == metrics::VerbMode::kParsed && !cfg.metrics.categorical;
  Json conf{{"metrics", cfg.metrics},
            {"mode", a.mode == BenchMode::kWenda ? "wenda" : "imsitu"},
            {"method", a.label.method},
            {"train_data", a.label.train_data}};
  if (a.mode == BenchMode::kWenda) conf = stage_detail::with_backend(conf, cfg, {"similarity", "nli"});
  if (parsed) conf["parser"] = cfg.backends.at("parser");
  StageSpec spec{"evaluate", conf, {a.predictions, a.benchmark, *emb_path}, outputs, cfg.seed};
  return run_stage(spec, force, [&] {
    auto preds = read_jsonl<captioner::Prediction>(a.predictions);
    auto emb = MemoryEmbeddingTable::load(*emb_path);
    std::shared_ptr<const ParserBackend> parser;
    if (parsed) parser = make_parser(cfg.backends.at("parser"));
    metrics::EvalConfig ec = cfg.metrics;
    ec.workers = cfg.workers;
    metrics::EvalBackends b;
    b.embeddings = emb.get();
    b.parser = parser.get();
    Json report;
    std::size_t items = 0;
    if (a.mode == BenchMode::kWenda) {
      auto bench = bench::ingest_wenda(read_jsonl<LabeledSample>(a.benchmark));
      items = bench.size();
      auto sim = make_similarity(cfg.backends.at("similarity"));
      auto nli = make_nli(cfg.backends.at("nli"));
      b.similarity = sim.get();
      b.nli = nli.get();
      report = metrics::report_to_json(metrics::evaluate(preds, bench, b, ec), ec, a.label);
    } else {
      auto bench = read_jsonl<bench::SituSample>(a.benchmark);
      items = bench.size();
      report = metrics::situ_report_to_json(metrics::evaluate_imsitu(preds, bench, b, ec), ec, a.label);
    }
    std::vector<std::string> top1;
    for (const auto& p : preds) top1.push_back(p.beams.front().text);
    const auto mode = ec.categorical ? metrics::VerbMode::kSlotFormat : ec.verb_mode;
    auto div = metrics::diversity(top1, mode, parser.get());
    report["diversity"] = Json{{"n_i", div.n_i}, {"n_v", div.n_v}};
    write_json_file(a.output, report);
    if (a.tables) stage_detail::write_text(*a.tables, metrics::format_tables({report}));
    return Json{{"items", items}, {"predictions", preds.size()}};
  });
}

// ---------------------------------------------------------------------------

struct ReportArgs {
  std::vector<std::string> inputs;  // report JSON files
  std::string output;               // tables text
};

inline StageOutcome stage_report(const PipelineConfig& cfg, const ReportArgs& a, bool force) {
  if (a.inputs.empty()) throw ValidationError("report needs at least one report file");
  StageSpec spec{"report", Json::object(), a.inputs, {a.output}, cfg.seed};
  return run_stage(spec, force, [&] {
    std::vector<Json> reports;
    for (const auto& p : a.inputs) reports.push_back(read_json_file(p));
    stage_detail::write_text(a.output, metrics::format_tables(reports));
    return Json{{"reports", reports.size()}};
  });
}

}  // namespace hhi::pipeline
