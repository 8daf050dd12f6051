// hhi: command-line driver for the HHI pseudo-labelling and evaluation
// pipeline. Every subcommand writes its outputs plus <output>.manifest.json.
//
// Exit codes: 0 success, 2 validation error, 3 backend error. Errors are
// reported on stderr as one JSON object {"error": kind, "message": text}.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hhi/hhi.hpp"

namespace {

using hhi::Json;
namespace pl = hhi::pipeline;

constexpr int kExitValidation = 2;
constexpr int kExitBackend = 3;

int fail(const char* kind, const std::string& message, int code) {
  std::cerr << Json{{"error", kind}, {"message", message}}.dump() << '\n';
  return code;
}

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  bool force = false;
  std::vector<std::string> backends;
  std::vector<std::string> paths;
};

pl::PipelineConfig resolve(const Globals& g) {
  pl::PipelineConfig cfg;
  if (!g.config.empty()) cfg = pl::load_config(g.config);
  pl::apply_env(cfg);
  if (g.seed) cfg.seed = *g.seed;
  if (g.workers) cfg.workers = *g.workers;
  for (const auto& b : g.backends) {
    auto [name, endpoint] = pl::parse_backend_flag(b);
    cfg.backends[name] = endpoint;
  }
  for (const auto& p : g.paths) {
    auto eq = p.find('=');
    if (eq == std::string::npos || eq == 0) throw hhi::ValidationError("--path expects <name>=<file>, got '" + p + "'");
    cfg.paths[p.substr(0, eq)] = p.substr(eq + 1);
  }
  cfg.validate();
  return cfg;
}

void print_outcome(const std::string& stage, const pl::StageOutcome& o) {
  std::cout << Json{{"stage", stage}, {"skipped", o.skipped}, {"counts", o.manifest.value("counts", Json::object())}}
                   .dump()
            << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HHI pseudo-label pipeline and evaluation toolkit"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "pipeline config JSON")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "global seed (overrides config)");
  app.add_option("--workers", g.workers, "worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--force", g.force, "rerun even when outputs are up to date");
  app.add_option("--backend", g.backends, "backend override <name>=<endpoint>, repeatable");
  app.add_option("--path", g.paths, "path override <name>=<file> (names, embeddings, banned_verbs)");
  app.footer(
      "Environment: HHI_SEED, HHI_WORKERS, HHI_BACKEND_<NAME>, HHI_PATH_<NAME> override the config file;\n"
      "command-line flags override the environment.");

  std::function<pl::StageOutcome(const pl::PipelineConfig&)> run;
  std::string stage;

  auto* harvest = app.add_subcommand("harvest", "select and clean caption lines from news text");
  pl::HarvestArgs ha;
  std::string patterns;
  harvest->add_option("--input", ha.input, "raw text, one line per candidate")->required();
  harvest->add_option("--output", ha.output, "captions JSONL")->required();
  harvest->add_option("--patterns", patterns, "HarvestConfig JSON replacing the built-in pattern lists");
  harvest->callback([&] {
    stage = "harvest";
    run = [&](const pl::PipelineConfig& c) {
      auto cfg = c;
      if (!patterns.empty()) cfg.harvest = hhi::read_json_file(patterns).get<hhi::extract::HarvestConfig>();
      return pl::stage_harvest(cfg, ha, g.force);
    };
  });

  auto* extract = app.add_subcommand("extract", "rule-based interaction extraction from parses");
  pl::ExtractArgs ea;
  std::string pairs_out;
  extract->add_option("--input", ea.input, "CoNLL-U parses (.conllu) or captions JSONL")->required();
  extract->add_option("--output", ea.output, "interactions JSONL")->required();
  extract->add_option("--pairs", pairs_out, "also write seed interaction-caption pairs");
  extract->callback([&] {
    stage = "extract";
    if (!pairs_out.empty()) ea.pairs = pairs_out;
    run = [&](const pl::PipelineConfig& c) { return pl::stage_extract(c, ea, g.force); };
  });

  auto* gi = app.add_subcommand("gen-interactions", "few-shot generation of novel interaction texts");
  pl::GenInteractionsArgs gia;
  std::optional<std::size_t> gi_budget;
  gi->add_option("--input", gia.input, "seed interactions JSONL")->required();
  gi->add_option("--output", gia.output, "novel interactions JSONL")->required();
  gi->add_option("--budget", gi_budget, "number of distinct interactions to keep");
  gi->callback([&] {
    stage = "gen-interactions";
    run = [&](const pl::PipelineConfig& c) {
      auto cfg = c;
      if (gi_budget) cfg.novel.budget = *gi_budget;
      return pl::stage_gen_interactions(cfg, gia, g.force);
    };
  });

  auto* gp = app.add_subcommand("gen-pairs", "synthetic interaction-caption pairs with NLI filtering");
  pl::GenPairsArgs gpa;
  std::optional<std::size_t> gp_budget;
  gp->add_option("--seeds", gpa.seeds, "seed pairs JSONL")->required();
  gp->add_option("--novel", gpa.novel, "novel interactions JSONL")->required();
  gp->add_option("--output", gpa.output, "synthetic pairs JSONL")->required();
  gp->add_option("--budget", gp_budget, "number of accepted pairs to produce");
  gp->callback([&] {
    stage = "gen-pairs";
    run = [&](const pl::PipelineConfig& c) {
      auto cfg = c;
      if (gp_budget) cfg.synthesis.budget = *gp_budget;
      return pl::stage_gen_pairs(cfg, gpa, g.force);
    };
  });

  auto* dt = app.add_subcommand("distill-train", "fit the student summarizer on interaction-caption pairs");
  pl::DistillTrainArgs dta;
  dt->add_option("--pairs", dta.pairs, "pairs JSONL, repeatable")->required();
  dt->add_option("--output", dta.output, "model descriptor JSON")->required();
  dt->callback([&] {
    stage = "distill-train";
    run = [&](const pl::PipelineConfig& c) { return pl::stage_distill_train(c, dta, g.force); };
  });

  auto* pls = app.add_subcommand("pseudo-label", "summarize captions into filtered pseudo-labels");
  pl::PseudoLabelArgs pla;
  std::string test_set, labeled;
  pls->add_option("--input", pla.input, "dataset JSONL")->required();
  pls->add_option("--model", pla.model, "summarizer model descriptor")->required();
  pls->add_option("--test", test_set, "test set JSONL for caption/date-time dedup");
  pls->add_option("--output", pla.output, "pseudo-label records JSONL")->required();
  pls->add_option("--labeled", labeled, "also write the dataset with accepted labels attached");
  pls->callback([&] {
    stage = "pseudo-label";
    if (!test_set.empty()) pla.test = test_set;
    if (!labeled.empty()) pla.labeled = labeled;
    run = [&](const pl::PipelineConfig& c) { return pl::stage_pseudo_label(c, pla, g.force); };
  });

  auto* bb = app.add_subcommand("build-bench", "select the imSitu-HHI subset");
  pl::BuildBenchArgs bba;
  std::optional<int> min_support;
  bb->add_option("--input", bba.input, "situation samples JSONL")->required();
  bb->add_option("--output", bba.output, "subset JSONL")->required();
  bb->add_option("--support", bba.support, "verb support TSV (default <output>.support.tsv)");
  bb->add_option("--min-verb-support", min_support, "verb support threshold");
  bb->callback([&] {
    stage = "build-bench";
    if (bba.support.empty()) bba.support = bba.output + ".support.tsv";
    run = [&](const pl::PipelineConfig& c) {
      auto cfg = c;
      if (min_support) cfg.bench.min_verb_support = *min_support;
      cfg.bench.validate();
      return pl::stage_build_bench(cfg, bba, g.force);
    };
  });

  auto* tc = app.add_subcommand("train-captioner", "fit the captioner on weighted pseudo-labels");
  pl::TrainCaptionerArgs tca;
  std::string target;
  tc->add_option("--input", tca.input, "labelled dataset JSONL")->required();
  tc->add_option("--output", tca.output, "captioner model descriptor")->required();
  tc->add_option("--target", target, "pseudo-label or raw-caption");
  tc->callback([&] {
    stage = "train-captioner";
    run = [&](const pl::PipelineConfig& c) {
      auto cfg = c;
      if (!target.empty()) cfg.captioner.target = hhi::captioner::training_target_from_string(target);
      return pl::stage_train_captioner(cfg, tca, g.force);
    };
  });

  auto* dec = app.add_subcommand("decode", "beam-search predictions for a set of images");
  pl::DecodeArgs da;
  std::optional<int> width;
  dec->add_option("--model", da.model, "captioner model descriptor")->required();
  dec->add_option("--input", da.input, "JSONL rows with id and image_ref")->required();
  dec->add_option("--output", da.output, "predictions JSONL")->required();
  dec->add_option("--beam-width", width, "beam width");
  dec->callback([&] {
    stage = "decode";
    run = [&](const pl::PipelineConfig& c) {
      auto cfg = c;
      if (width) cfg.captioner.beam_width = *width;
      if (cfg.captioner.beam_width < 1) throw hhi::ValidationError("beam width must be positive");
      return pl::stage_decode(cfg, da, g.force);
    };
  });

  auto* ev = app.add_subcommand("evaluate", "score predictions against a benchmark");
  pl::EvaluateArgs eva;
  std::string mode = "wenda", tables, verb_mode;
  std::vector<int> ks;
  bool categorical = false;
  ev->add_option("--predictions", eva.predictions, "predictions JSONL")->required();
  ev->add_option("--benchmark", eva.benchmark, "benchmark JSONL")->required();
  ev->add_option("--output", eva.output, "report JSON")->required();
  ev->add_option("--tables", tables, "also write formatted tables");
  ev->add_option("--mode", mode, "wenda or imsitu");
  ev->add_option("--method", eva.label.method, "method name for the tables");
  ev->add_option("--train-data", eva.label.train_data, "training data label for the tables");
  ev->add_option("--k", ks, "beam cut-offs, repeatable (default 1 5 8)");
  ev->add_option("--verb-mode", verb_mode, "slot-format or parsed");
  ev->add_flag("--categorical", categorical, "beams are bare verb lemmas (situation recognizers)");
  ev->callback([&] {
    stage = "evaluate";
    if (!tables.empty()) eva.tables = tables;
    run = [&](const pl::PipelineConfig& c) {
      auto cfg = c;
      eva.mode = pl::bench_mode_from_string(mode);
      if (!ks.empty()) cfg.metrics.k_list = ks;
      if (!verb_mode.empty()) cfg.metrics.verb_mode = hhi::metrics::verb_mode_from_string(verb_mode);
      if (categorical) cfg.metrics.categorical = true;
      cfg.metrics.validate();
      return pl::stage_evaluate(cfg, eva, g.force);
    };
  });

  auto* rep = app.add_subcommand("report", "format one or more report JSON files as tables");
  pl::ReportArgs ra;
  rep->add_option("--input", ra.inputs, "report JSON, repeatable")->required();
  rep->add_option("--output", ra.output, "tables text file")->required();
  rep->callback([&] {
    stage = "report";
    run = [&](const pl::PipelineConfig& c) { return pl::stage_report(c, ra, g.force); };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), kExitValidation);
  } catch (const hhi::ValidationError& e) {
    return fail("validation", e.what(), kExitValidation);
  }

  try {
    auto cfg = resolve(g);
    print_outcome(stage, run(cfg));
    return 0;
  } catch (const hhi::BackendError& e) {
    return fail("backend", e.what(), kExitBackend);
  } catch (const hhi::ValidationError& e) {
    return fail("validation", e.what(), kExitValidation);
  } catch (const nlohmann::json::exception& e) {
    return fail("validation", e.what(), kExitValidation);
  } catch (const std::filesystem::filesystem_error& e) {
    return fail("validation", e.what(), kExitValidation);
  }
}
