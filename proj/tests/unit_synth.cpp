#include <gtest/gtest.h>

#include <atomic>

#include "hhi/backends/heuristic_parser.hpp"
#include "hhi/backends/stubs.hpp"
#include "hhi/core/jsonl.hpp"
#include "hhi/synth/filters.hpp"
#include "hhi/synth/novel.hpp"
#include "hhi/synth/postprocess.hpp"
#include "hhi/synth/prompts.hpp"
#include "hhi/synth/run.hpp"
#include "support.hpp"

namespace hhi::synth {
namespace {

std::vector<Interaction> seed_interactions() {
  return {{"[NAME] hugging [NAME]"},
          {"[NAME] shaking hands with [NAME]"},
          {"[NAME] and [NAME] discussing the plan"},
          {"[NAME] greeting [NAME] at the door"},
          {"[NAME] handing [NAME] a trophy"},
          {"[NAME] talking with [NAME]"},
          {"[NAME] coaching [NAME]"},
          {"[NAME] and [NAME] dancing"},
          {"[NAME] interviewing [NAME]"},
          {"[NAME] congratulating [NAME] after the race"},
          {"[NAME] teaching [NAME] to swim"},
          {"[NAME] kissing [NAME]"}};
}

std::vector<InteractionCaptionPair> seed_pairs() {
  std::vector<InteractionCaptionPair> out;
  const std::vector<std::pair<std::string, std::string>> rows = {
      {"[NAME] hugging [NAME]", "[NAME] hugs [NAME] after the final on Sunday."},
      {"[NAME] greeting [NAME]", "[NAME] greets [NAME] at the summit in 2014."},
      {"[NAME] talking with [NAME]", "[NAME], left, talks with [NAME] on stage."},
      {"[NAME] shaking hands with [NAME]", "[NAME] shakes hands with [NAME] and [NAME]."},
      {"[NAME] coaching [NAME]", "Coach [NAME] instructs [NAME] during practice."},
      {"[NAME] congratulating [NAME]", "[NAME] congratulates [NAME] on the award."},
      {"[NAME] interviewing [NAME]", "[NAME] interviews [NAME] for the evening show."}};
  for (const auto& [i, c] : rows) {
    InteractionCaptionPair p;
    p.interaction = {i};
    p.caption = {c, Source::kWhosWaldo};
    p.provenance = Provenance::kWhosWaldoSeed;
    out.push_back(p);
  }
  return out;
}

std::string dump(const std::vector<InteractionCaptionPair>& pairs) {
  std::stringstream s;
  write_jsonl(s, pairs);
  return s.str();
}

TEST(NovelFilter, VerdictsDoNotDependOnEvaluationOrder) {
  const auto cases = read_json_file(testing::data_path("filters/cases.json")).at("novel");
  std::vector<std::string> texts;
  for (const auto& c : cases) texts.push_back(c.at("text").get<std::string>());
  std::map<std::string, FilterVerdict> first;
  for (const auto& t : texts) first[t] = filter_novel_interaction(t);
  rng::Engine eng(2);
  for (int round = 0; round < 5; ++round) {
    rng::shuffle(texts, eng);
    for (const auto& t : texts) {
      auto v = filter_novel_interaction(t);
      EXPECT_EQ(v.accepted, first[t].accepted);
      EXPECT_EQ(v.reasons, first[t].reasons);
    }
  }
}

TEST(NovelFilter, IndividualRules) {
  EXPECT_TRUE(filter_novel_interaction("Alex hugging Bailey").accepted);
  auto has = [](const FilterVerdict& v, const std::string& r) {
    return std::find(v.reasons.begin(), v.reasons.end(), r) != v.reasons.end();
  };
  EXPECT_TRUE(has(filter_novel_interaction("Bailey hugging Alex"), "name-order"));
  EXPECT_TRUE(has(filter_novel_interaction("Alex hugging Bailey and Casey"), "other-name"));
  EXPECT_TRUE(has(filter_novel_interaction("Alex hugging Bailey at NASA"), "uppercase"));
  EXPECT_TRUE(has(filter_novel_interaction("Alex hugs Bailey"), "no-ing-word"));
  EXPECT_TRUE(has(filter_novel_interaction("Alex hugging Bailey near the"), "dangling-article"));
  EXPECT_FALSE(has(filter_novel_interaction("Alex sing Bailey"), "no-ing-word"));
  EXPECT_TRUE(has(filter_novel_interaction("Alex ing Bailey"), "no-ing-word"));
}

TEST(PairFilter, RequiresEntailmentAboveOneHalfStrictly) {
  HeuristicParser parser;
  const Interaction inter{"[NAME] hugging [NAME]"};
  const std::vector<std::string> names = {"Adam", "Bob"};
  for (double p : {0.5, 0.5000001, 0.9}) {
    TableNli nli;
    nli.add("Adam hugs Bob.", "Adam hugging Bob", TableNli::entailing(p));
    auto v = filter_synthetic_pair(inter, "Adam hugs Bob.", names, nli, parser.parse("Adam hugging Bob"));
    EXPECT_EQ(v.accepted, p > 0.5) << p;
    EXPECT_DOUBLE_EQ(v.p_e, p);
  }
}

TEST(PairFilter, BackendErrorsNameThePair) {
  HeuristicParser parser;
  TableNli empty;
  const std::vector<std::string> names = {"Adam", "Bob"};
  try {
    filter_synthetic_pair({"[NAME] hugging [NAME]"}, "Adam hugs Bob.", names, empty, parser.parse("Adam hugging Bob"),
                          "p-17");
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_NE(std::string(e.what()).find("p-17"), std::string::npos);
  }
}

TEST(Postprocess, IdempotentOnSeedsAndExactlyTwoSlots) {
  HeuristicParser parser;
  for (const auto& s : seed_interactions()) {
    auto once = postprocess_interaction(s, parser);
    if (!once) continue;
    EXPECT_EQ(count_slots(once->text), 2u);
    auto twice = postprocess_interaction(*once, parser);
    ASSERT_TRUE(twice) << once->text;
    EXPECT_EQ(*twice, *once);
  }
}

TEST(Prompts, CaptionPromptNeverSharesNamesAcrossExamples) {
  auto pairs = seed_pairs();
  pairs.resize(5);
  const auto pool = NamePool::shuffled(default_name_lexicon(), 9);
  auto prompt = build_caption_prompt(pairs, {"[NAME] hugging [NAME]"}, pool, 5);
  EXPECT_TRUE(prompt.text.ends_with(std::string(kCaptionCue) + prompt.target_filled + ":"));
  EXPECT_EQ(prompt.target_names, (std::vector<std::string>{pool.names()[0], pool.names()[1]}));
  EXPECT_EQ(prompt.text.find("[NAME]"), std::string::npos);
  EXPECT_THROW(build_caption_prompt(pairs, {"[NAME] hugging [NAME]"}, pool, 10), ValidationError);
}

TEST(Prompts, SlotMapCarriesCaptionPeopleIntoTheInteraction) {
  InteractionCaptionPair p;
  p.interaction = {"[NAME] greeting [NAME]"};
  p.caption = {"[NAME] watches as [NAME] greets [NAME]", Source::kWhosWaldo};
  p.slot_map = {1, 2};
  std::size_t offset = 0;
  auto [inter, caption] = prompt_detail::fill_pair(p, NamePool({"A", "B", "C", "D"}), offset);
  EXPECT_EQ(caption, "A watches as B greets C");
  EXPECT_EQ(inter, "B greeting C");
  EXPECT_EQ(offset, 3u);
}

struct SynthFixture {
  TemplateGenerator generator;
  OverlapNli nli;
  HeuristicParser parser;
  std::vector<Interaction> novel;

  SynthFixture() {
    NovelConfig nc;
    nc.budget = 40;
    nc.shots = 5;
    nc.seed = 3;
    novel = generate_novel_interactions(seed_interactions(), generator, nc).interactions;
  }
  SynthesisResult run(std::size_t workers, std::optional<std::string> checkpoint = std::nullopt,
                      const NliBackend* nli_override = nullptr) const {
    SynthesisConfig cfg;
    cfg.budget = 25;
    cfg.shots = 5;
    cfg.seed = 17;
    cfg.workers = workers;
    cfg.checkpoint_path = std::move(checkpoint);
    return run_synthesis(novel, seed_pairs(), {generator, nli_override ? *nli_override : nli, parser}, cfg);
  }
};

TEST(Novel, AcceptedInteractionsAreDistinctMaskedAndPassTheFilter) {
  SynthFixture f;
  ASSERT_FALSE(f.novel.empty());
  std::set<Interaction> distinct(f.novel.begin(), f.novel.end());
  EXPECT_EQ(distinct.size(), f.novel.size());
  for (const auto& i : f.novel) {
    EXPECT_EQ(count_slots(i.text), 2u) << i.text;
    auto filled = fill_names(i.text, NamePool({"Alex", "Bailey"}));
    EXPECT_TRUE(filter_novel_interaction(filled.text).accepted) << filled.text;
  }
}

TEST(Novel, SameResultForAnyWorkerCount) {
  TemplateGenerator g;
  NovelConfig nc;
  nc.budget = 30;
  nc.shots = 5;
  nc.seed = 8;
  auto a = generate_novel_interactions(seed_interactions(), g, nc);
  nc.workers = 5;
  auto b = generate_novel_interactions(seed_interactions(), g, nc);
  EXPECT_EQ(a.interactions, b.interactions);
  EXPECT_EQ(a.manifest, b.manifest);
}

TEST(Novel, TooFewSeedsIsAValidationError) {
  TemplateGenerator g;
  NovelConfig nc;
  nc.budget = 1;
  nc.shots = 20;
  EXPECT_THROW(generate_novel_interactions(seed_interactions(), g, nc), ValidationError);
}

TEST(Synthesis, EveryEmittedPairSatisfiesTheFilters) {
  SynthFixture f;
  auto r = f.run(1);
  ASSERT_FALSE(r.pairs.empty());
  for (const auto& p : r.pairs) {
    EXPECT_GT(p.entailment, 0.5);
    EXPECT_EQ(count_slots(p.interaction.text), 2u) << p.interaction.text;
    EXPECT_TRUE(filter_detail::has_ing_word(p.interaction.text)) << p.interaction.text;
    for (const auto& b : interaction_banned_substrings()) EXPECT_EQ(p.interaction.text.find(b), std::string::npos);
    EXPECT_EQ(p.provenance, Provenance::kSynthetic);
    EXPECT_TRUE(p.gen_seed.has_value());
    EXPECT_NO_THROW(p.validate());
  }
  EXPECT_EQ(r.manifest.at("accepted").get<std::size_t>(), r.pairs.size());
}

TEST(Synthesis, ByteIdenticalAcrossRunsAndWorkerCounts) {
  SynthFixture f;
  const auto a = dump(f.run(1).pairs);
  EXPECT_EQ(a, dump(f.run(1).pairs));
  EXPECT_EQ(a, dump(f.run(4).pairs));
}

class FlakyNli : public NliBackend {
 public:
  FlakyNli(const NliBackend& inner, int fail_at) : inner_(inner), fail_at_(fail_at) {}
  NliScores score(const std::string& p, const std::string& h) const override {
    if (calls_.fetch_add(1) == fail_at_) throw BackendError("connection reset");
    return inner_.score(p, h);
  }
  int calls() const { return calls_.load(); }

 private:
  const NliBackend& inner_;
  int fail_at_;
  mutable std::atomic<int> calls_{0};
};

TEST(Synthesis, ResumesFromCheckpointAfterBackendFailure) {
  SynthFixture f;
  testing::TempDir dir;
  const auto ckpt = dir.str("synth.ckpt.json");
  FlakyNli counting(f.nli, -1);
  const auto full = dump(f.run(1, std::nullopt, &counting).pairs);
  ASSERT_GE(counting.calls(), 4);
  FlakyNli flaky(f.nli, counting.calls() / 2);
  EXPECT_THROW(f.run(1, ckpt, &flaky), BackendError);
  ASSERT_TRUE(std::filesystem::exists(ckpt));
  EXPECT_EQ(dump(f.run(1, ckpt).pairs), full);
  EXPECT_FALSE(std::filesystem::exists(ckpt));
}

TEST(Pairs, JsonRoundTripAndValidation) {
  InteractionCaptionPair p;
  p.interaction = {"[NAME] hugging [NAME]"};
  p.caption = {"[NAME] hugs [NAME].", Source::kSynthetic};
  p.entailment = 0.75;
  p.gen_seed = 99;
  p.slot_map = {1, 0};
  Json j = p;
  EXPECT_EQ(j.get<InteractionCaptionPair>(), p);
  j["p_e"] = 0.4;
  EXPECT_THROW(j.get<InteractionCaptionPair>(), ValidationError);
  j["provenance"] = "whos-waldo-seed";
  EXPECT_NO_THROW(j.get<InteractionCaptionPair>());
}

}  // namespace
}  // namespace hhi::synth
