#include <gtest/gtest.h>

#include <atomic>
#include <cmath>

#include "hhi/backends/conllu_parser.hpp"
#include "hhi/backends/stubs.hpp"
#include "hhi/bench/imsitu.hpp"
#include "hhi/bench/wenda.hpp"
#include "hhi/core/jsonl.hpp"
#include "hhi/metrics/evaluate.hpp"
#include "hhi/metrics/report.hpp"
#include "support.hpp"

namespace hhi {
namespace {

std::shared_ptr<TableNli> nli_table(const std::string& rel) {
  auto t = std::make_shared<TableNli>();
  for (const auto& row : read_jsonl<Json>(testing::data_path(rel)))
    t->add(row.at("premise").get<std::string>(), row.at("hypothesis").get<std::string>(),
           {row.at("entailment").get<double>(), row.at("contradiction").get<double>(),
            row.at("neutral").get<double>()});
  return t;
}

std::set<std::string> banned() { return bench::load_banned_verbs(testing::source_path("data/banned_verbs.txt")); }

class CountingNli : public NliBackend {
 public:
  explicit CountingNli(const NliBackend& inner) : inner_(inner) {}
  NliScores score(const std::string& p, const std::string& h) const override {
    ++calls;
    return inner_.score(p, h);
  }
  mutable std::atomic<int> calls{0};

 private:
  const NliBackend& inner_;
};

TEST(Bench, BannedVerbListHasFiftyTwoEntries) { EXPECT_EQ(banned().size(), 52u); }

TEST(Bench, SubsetsAreNestedAndSupportHoldsOverRandomThresholds) {
  const auto samples = read_jsonl<bench::SituSample>(testing::data_path("imsitu/imsitu200.jsonl"));
  auto nli = nli_table("imsitu/nli.jsonl");
  bench::BenchConfig cfg;
  cfg.banned_verbs = banned();
  bench::HumanArgumentClassifier cls(*nli, cfg.nli_threshold);
  rng::Engine eng(10);
  for (int round = 0; round < 40; ++round) {
    int t1 = static_cast<int>(rng::below(eng, 60)), t2 = static_cast<int>(rng::below(eng, 60));
    if (t1 < t2) std::swap(t1, t2);
    cfg.min_verb_support = t1;
    auto hi = bench::build_imsitu_hhi(samples, cfg, cls);
    cfg.min_verb_support = t2;
    auto lo = bench::build_imsitu_hhi(samples, cfg, cls, 3);
    std::set<std::string> lo_ids;
    for (const auto& s : lo.subset) lo_ids.insert(s.id);
    for (const auto& s : hi.subset) EXPECT_TRUE(lo_ids.count(s.id)) << s.id << " T1=" << t1 << " T2=" << t2;
    std::map<std::string, std::size_t> counts;
    for (const auto& s : lo.subset) {
      ++counts[s.verb];
      EXPECT_FALSE(cfg.banned_verbs.count(s.verb));
    }
    for (const auto& v : lo.support) {
      EXPECT_GE(v.support, static_cast<std::size_t>(t2));
      EXPECT_EQ(counts[v.verb], v.support);
    }
  }
}

TEST(Bench, ClassifierAsksEachArgumentOnce) {
  const auto samples = read_jsonl<bench::SituSample>(testing::data_path("imsitu/imsitu200.jsonl"));
  auto nli = nli_table("imsitu/nli.jsonl");
  CountingNli counting(*nli);
  bench::BenchConfig cfg;
  cfg.min_verb_support = 0;
  bench::HumanArgumentClassifier cls(counting, cfg.nli_threshold);
  bench::build_imsitu_hhi(samples, cfg, cls, 4);
  const int first = counting.calls.load();
  EXPECT_EQ(static_cast<std::size_t>(first), cls.cached());
  bench::build_imsitu_hhi(samples, cfg, cls, 4);
  EXPECT_EQ(counting.calls.load(), first);
  EXPECT_FALSE(cls("mannequin"));
  EXPECT_THROW(cls(""), ValidationError);
}

TEST(Bench, FullScaleSupportTableMatchesShippedTable) {
  const auto samples = read_jsonl<bench::SituSample>(testing::data_path("imsitu/b6_samples.jsonl"));
  auto nli = nli_table("imsitu/nli.jsonl");
  bench::BenchConfig cfg;
  cfg.banned_verbs = banned();
  auto r = bench::build_imsitu_hhi(samples, cfg, *nli, 2);
  auto shipped = bench::read_support_tsv(testing::source_path("data/imsitu_hhi_support.tsv"));
  ASSERT_EQ(shipped.size(), 50u);
  auto by_verb = [](std::vector<bench::VerbSupport> v) {
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.verb < b.verb; });
    return v;
  };
  EXPECT_EQ(by_verb(r.support), by_verb(shipped));
  for (std::size_t i = 1; i < r.support.size(); ++i) {
    EXPECT_GE(r.support[i - 1].support, r.support[i].support);
    if (r.support[i - 1].support == r.support[i].support) {
      EXPECT_LT(r.support[i - 1].verb, r.support[i].verb);
    }
  }
  std::size_t total = 0;
  for (const auto& v : shipped) total += v.support;
  EXPECT_EQ(r.subset.size(), total);
}

TEST(Bench, SupportTsvRoundTrip) {
  std::vector<bench::VerbSupport> t = {{"teaching", 52}, {"helping", 30}};
  testing::TempDir dir;
  {
    std::ofstream out(dir.str("s.tsv"));
    bench::write_support_tsv(out, t);
  }
  EXPECT_EQ(bench::read_support_tsv(dir.str("s.tsv")), t);
}

TEST(Bench, ConfigValidation) {
  bench::BenchConfig c;
  c.nli_threshold = 1.5;
  EXPECT_THROW(c.validate(), ValidationError);
  EXPECT_THROW(Json({{"min_verb_support", -1}}).get<bench::BenchConfig>(), ValidationError);
}

TEST(Wenda, IngestRejectsBadRecordsAllAtOnce) {
  auto items = read_jsonl<LabeledSample>(testing::data_path("wenda12/benchmark.jsonl"));
  EXPECT_EQ(bench::ingest_wenda(items).size(), 12u);
  items[0].label = Interaction{"people hugging"};
  items[5].caption.source = Source::kCcNews;
  try {
    bench::ingest_wenda(items);
    FAIL();
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("2 invalid"), std::string::npos) << msg;
    EXPECT_NE(msg.find(items[0].id), std::string::npos);
    EXPECT_NE(msg.find(items[5].id), std::string::npos);
  }
}

std::shared_ptr<MemoryEmbeddingTable> embeddings() {
  return MemoryEmbeddingTable::load(testing::data_path("wenda12/embeddings.txt"));
}

TEST(VerbSimilarity, SymmetricAndOneOnlyForIdenticalNonzeroVectors) {
  auto emb = embeddings();
  std::vector<std::string> words = {"greeting", "hugging", "talking", "smiling", "teaching", "unknownword"};
  for (const auto& a : words)
    for (const auto& b : words) {
      const double ab = metrics::verb_similarity(a, b, *emb), ba = metrics::verb_similarity(b, a, *emb);
      EXPECT_DOUBLE_EQ(ab, ba);
      EXPECT_GE(ab, -1.0);
      EXPECT_LE(ab, 1.0);
      const bool identical_nonzero = a == b && a != "smiling" && a != "unknownword";
      EXPECT_EQ(ab == 1.0, identical_nonzero) << a << "/" << b;
    }
  EXPECT_EQ(metrics::verb_similarity(std::nullopt, "hugging", *emb), 0.0);
  EXPECT_THROW(metrics::verb_similarity("hugging", " ", *emb), ValidationError);
}

TEST(VerbSimilarity, EqualVectorsUnderDifferentWordsScoreOne) {
  MemoryEmbeddingTable t(3);
  t.add("a", {1, 2, 3});
  t.add("b", {1, 2, 3});
  t.add("c", {2, 4, 6});
  EXPECT_EQ(metrics::verb_similarity("a", "b", t), 1.0);
  EXPECT_NEAR(metrics::verb_similarity("a", "c", t), 1.0, 1e-12);
  EXPECT_THROW(t.add("d", {1, 2}), ValidationError);
}

TEST(Normalize, IdempotentAndLengthDependsOnSlotsOnly) {
  rng::Engine eng(12);
  const std::vector<std::string> words = {"[NAME]", "hugging", "with", "a", "_", "person", "[NAME]'s"};
  for (int i = 0; i < 2000; ++i) {
    std::string s;
    for (std::uint64_t n = 1 + rng::below(eng, 10); n > 0; --n) s += words[rng::below(eng, words.size())] + " ";
    for (auto f : {metrics::normalize_for_similarity, metrics::normalize_for_nli}) {
      const auto once = f(s);
      EXPECT_EQ(f(once), once);
    }
    const long slots = static_cast<long>(count_slots(s));
    EXPECT_EQ(metrics::normalize_for_similarity(s).size(), s.size());
    EXPECT_EQ(static_cast<long>(s.size()) - static_cast<long>(metrics::normalize_for_nli(s).size()), slots * 5L);
  }
}

TEST(Verbs, ParsedModeUsesTheLemma) {
  auto parser = ConlluLookupParser::from_file(testing::data_path("parses/verbs.conllu"));
  const auto expected = read_json_file(testing::data_path("parses/verbs_expected.json"));
  for (const auto& [text, want] : expected.items()) {
    auto got = metrics::extract_verb(text, metrics::VerbMode::kParsed, &parser);
    if (want.is_null()) EXPECT_FALSE(got.has_value()) << text;
    else EXPECT_EQ(got.value_or("<none>"), want.get<std::string>()) << text;
  }
  EXPECT_THROW(metrics::extract_verb("x", metrics::VerbMode::kParsed, nullptr), ValidationError);
}

TEST(Verbs, SlotFormatAndCategoricalWrapping) {
  EXPECT_EQ(metrics::extract_verb("[NAME] Hugging, [NAME]", metrics::VerbMode::kSlotFormat), "hugging");
  EXPECT_FALSE(metrics::extract_verb("[NAME] [NAME]", metrics::VerbMode::kSlotFormat).has_value());
  auto [a, b] = metrics::wrap_categorical_verb("hug");
  EXPECT_EQ(a, "_ hugging _");
  EXPECT_EQ(b, "_ hugging with _");
  EXPECT_EQ(metrics::underscores_to_slots(b), "[NAME] hugging with [NAME]");
}

TEST(Diversity, CountsDistinctTextsAndVerbs) {
  std::vector<std::string> preds = {"[NAME] hugging [NAME]", "[NAME] hugging [NAME]", "[NAME] hugging [NAME] warmly",
                                    "[NAME] greeting [NAME]", "[NAME]"};
  auto d = metrics::diversity(preds, metrics::VerbMode::kSlotFormat);
  EXPECT_EQ(d.n_i, 4u);
  EXPECT_EQ(d.n_v, 2u);
}

struct Wenda12 {
  std::vector<LabeledSample> bench = read_jsonl<LabeledSample>(testing::data_path("wenda12/benchmark.jsonl"));
  std::vector<captioner::Prediction> preds =
      read_jsonl<captioner::Prediction>(testing::data_path("wenda12/predictions.jsonl"));
  std::shared_ptr<TableNli> nli = nli_table("wenda12/nli.jsonl");
  std::shared_ptr<MemoryEmbeddingTable> emb = embeddings();
  TableSimilarity sim;
  Wenda12() {
    for (const auto& row : read_jsonl<Json>(testing::data_path("wenda12/similarity.jsonl")))
      sim.add(row.at("candidate").get<std::string>(), row.at("reference").get<std::string>(),
              row.at("score").get<double>());
  }
  metrics::EvalBackends backends() const { return {&sim, nli.get(), emb.get(), nullptr}; }
};

TEST(Evaluate, MatchesFrozenExpectedValues) {
  Wenda12 w;
  auto reports = metrics::evaluate(w.preds, w.bench, w.backends());
  const auto expected = read_json_file(testing::data_path("wenda12/expected.json"));
  ASSERT_EQ(reports.size(), 3u);
  for (const auto& r : reports) {
    const auto& want = expected.at(std::to_string(r.k));
    EXPECT_NEAR(r.macro.BL, want.at("macro").at("BL").get<double>(), 1e-12);
    EXPECT_NEAR(r.macro.p_c, want.at("macro").at("p_c").get<double>(), 1e-12);
    EXPECT_NEAR(r.per_source.at(Source::kCoco).mean.sim, want.at("per_source").at("COCO").at("sim").get<double>(),
                1e-12);
    for (const auto& it : r.per_item) EXPECT_LE(it.beams_used, r.k);
  }
}

TEST(Evaluate, PermutationInvariantWithinSource) {
  Wenda12 w;
  const auto base = metrics::report_to_json(metrics::evaluate(w.preds, w.bench, w.backends()), {}, {});
  rng::Engine eng(13);
  for (int round = 0; round < 10; ++round) {
    auto bench = w.bench;
    auto preds = w.preds;
    rng::shuffle(bench, eng);
    rng::shuffle(preds, eng);
    metrics::EvalConfig cfg;
    cfg.workers = 1 + round % 4;
    auto r = metrics::report_to_json(metrics::evaluate(preds, bench, w.backends(), cfg), {}, {});
    for (std::size_t i = 0; i < 3; ++i) {
      EXPECT_EQ(r["results"][i]["macro"], base["results"][i]["macro"]);
      EXPECT_EQ(r["results"][i]["per_source"], base["results"][i]["per_source"]);
    }
  }
}

TEST(Evaluate, TopKIsMonotoneInK) {
  Wenda12 w;
  metrics::EvalConfig cfg;
  cfg.k_list = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  auto reports = metrics::evaluate(w.preds, w.bench, w.backends(), cfg);
  for (std::size_t i = 1; i < reports.size(); ++i)
    for (std::size_t j = 0; j < reports[i].per_item.size(); ++j) {
      const auto& a = reports[i - 1].per_item[j].scores;
      const auto& b = reports[i].per_item[j].scores;
      EXPECT_GE(b.BL, a.BL);
      EXPECT_GE(b.p_e, a.p_e);
      EXPECT_LE(b.p_c, a.p_c);
      EXPECT_GE(b.sim, a.sim);
    }
}

TEST(Evaluate, MissingPredictionsAndBackendsAreValidationErrors) {
  Wenda12 w;
  auto preds = w.preds;
  preds.pop_back();
  EXPECT_THROW(metrics::evaluate(preds, w.bench, w.backends()), ValidationError);
  auto b = w.backends();
  b.embeddings = nullptr;
  EXPECT_THROW(metrics::evaluate(w.preds, w.bench, b), ValidationError);
  metrics::EvalConfig cfg;
  cfg.k_list = {0};
  EXPECT_THROW(metrics::evaluate(w.preds, w.bench, w.backends(), cfg), ValidationError);
}

TEST(Report, TablesCarryBlocksColumnsAndSources) {
  Wenda12 w;
  auto j = metrics::report_to_json(metrics::evaluate(w.preds, w.bench, w.backends()), {}, {"pHHI", "CC+pHHI"});
  const auto tables = metrics::format_tables({j});
  for (const char* needle : {"Results@1", "Results@5", "Results@8", "BL↑", "p_e↑", "p_c↓", "sim↑", "WW", "CC",
                             "COCO", "pHHI", "CC+pHHI"})
    EXPECT_NE(tables.find(needle), std::string::npos) << needle;
  EXPECT_EQ(j["results"][0]["per_source"]["WW"]["n"], 4);
}

}  // namespace
}  // namespace hhi
