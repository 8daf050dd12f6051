#pragma once

#include <memory>
#include <string>

#include "hhi/backends/conllu_parser.hpp"
#include "hhi/backends/heuristic_parser.hpp"
#include "hhi/backends/http.hpp"
#include "hhi/backends/interfaces.hpp"
#include "hhi/backends/stubs.hpp"
#include "hhi/core/errors.hpp"
#include "hhi/core/jsonl.hpp"

// Backend endpoint syntax (the value of --backend <name>=<endpoint>):
//
//   generator   template | echo:<text> | http://host:port[/base]
//   nli         overlap | table:<jsonl> | http://...
//   parser      heuristic | conllu:<file> | http://...
//   similarity  token-f1 | table:<jsonl> | http://...
//   summarizer  nearest-neighbour | canned:<text> | http://...
//   captioner   prior | http://...
//
// table: files hold one recorded score per line, {premise?, hypothesis,
// entailment, contradiction, neutral} for NLI and {candidate, reference,
// score} for similarity. conllu: parses are looked up by sentence text and
// unknown sentences fall back to the heuristic parser.

namespace hhi::pipeline {

namespace backend_detail {

inline bool is_http(const std::string& spec) { return spec.starts_with("http://") || spec.starts_with("https://"); }

inline std::string after(const std::string& spec, std::string_view prefix) { return spec.substr(prefix.size()); }

[[noreturn]] inline void unknown(const std::string& kind, const std::string& spec) {
  throw ValidationError("unknown " + kind + " backend '" + spec + "'");
}

}  // namespace backend_detail

inline std::shared_ptr<const TextGeneratorBackend> make_generator(const std::string& spec) {
  using namespace backend_detail;
  if (spec == "template") return std::make_shared<TemplateGenerator>();
  if (spec.starts_with("echo:")) return std::make_shared<EchoGenerator>(after(spec, "echo:"));
  if (is_http(spec)) return std::make_shared<HttpGenerator>(spec);
  unknown("generator", spec);
}

inline std::shared_ptr<const NliBackend> make_nli(const std::string& spec) {
  using namespace backend_detail;
  if (spec == "overlap") return std::make_shared<OverlapNli>();
  if (spec.starts_with("table:")) {
    const auto path = after(spec, "table:");
    auto t = std::make_shared<TableNli>();
    for (const auto& row : read_jsonl<Json>(path)) {
      NliScores s{row.at("entailment").get<double>(), row.at("contradiction").get<double>(),
                  row.at("neutral").get<double>()};
      if (row.contains("premise")) t->add(row.at("premise").get<std::string>(), row.at("hypothesis").get<std::string>(), s);
      else t->add_hypothesis(row.at("hypothesis").get<std::string>(), s);
    }
    return t;
  }
  if (is_http(spec)) return std::make_shared<HttpNli>(spec);
  unknown("nli", spec);
}

inline std::shared_ptr<const ParserBackend> make_parser(const std::string& spec,
                                                        const std::vector<std::string>& names = default_name_lexicon()) {
  using namespace backend_detail;
  if (spec == "heuristic") return std::make_shared<HeuristicParser>(names);
  if (spec.starts_with("conllu:"))
    return std::make_shared<ConlluLookupParser>(
        ConlluLookupParser::from_file(after(spec, "conllu:"), std::make_shared<HeuristicParser>(names)));
  if (is_http(spec)) return std::make_shared<HttpParser>(spec);
  unknown("parser", spec);
}

inline std::shared_ptr<const TextSimilarityBackend> make_similarity(const std::string& spec) {
  using namespace backend_detail;
  if (spec == "token-f1") return std::make_shared<TokenF1Similarity>();
  if (spec.starts_with("table:")) {
    auto t = std::make_shared<TableSimilarity>();
    for (const auto& row : read_jsonl<Json>(after(spec, "table:")))
      t->add(row.at("candidate").get<std::string>(), row.at("reference").get<std::string>(),
             row.at("score").get<double>());
    return t;
  }
  if (is_http(spec)) return std::make_shared<HttpSimilarity>(spec);
  unknown("similarity", spec);
}

/// Remote summarizers are trained out of process; for them this returns
/// null and the stage only exports the training set.
inline std::shared_ptr<const SummarizerBackend> make_summarizer(const std::string& spec) {
  using namespace backend_detail;
  if (spec == "nearest-neighbour") return std::make_shared<NearestNeighbourSummarizer>();
  if (spec.starts_with("canned:")) return std::make_shared<CannedSummarizer>(after(spec, "canned:"));
  if (is_http(spec)) return nullptr;
  unknown("summarizer", spec);
}

inline std::shared_ptr<const SummarizerModel> load_summarizer_model(const Json& j) {
  const auto kind = j.value("kind", std::string());
  if (kind == "nearest-neighbour") return NearestNeighbourModel::load(j);
  if (kind == "canned") return std::make_shared<CannedSummarizerModel>(j.at("text").get<std::string>());
  if (kind == "http") return std::make_shared<HttpSummarizerModel>(j.at("endpoint").get<std::string>());
  throw ValidationError("unknown summarizer model kind '" + kind + "'");
}

inline std::shared_ptr<const CaptionerBackend> make_captioner(const std::string& spec) {
  using namespace backend_detail;
  if (spec == "prior") return std::make_shared<PriorCaptioner>();
  if (is_http(spec)) return nullptr;
  unknown("captioner", spec);
}

inline std::shared_ptr<const CaptionerModel> load_captioner_model(const Json& j) {
  const auto kind = j.value("kind", std::string());
  if (kind == "prior") return PriorCaptionerModel::load(j);
  if (kind == "http") return std::make_shared<HttpCaptionerModel>(j.at("endpoint").get<std::string>());
  throw ValidationError("unknown captioner model kind '" + kind + "'");
}

}  // namespace hhi::pipeline
