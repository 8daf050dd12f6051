#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "hhi/core/hash.hpp"
#include "hhi/core/jsonl.hpp"
#include "hhi/core/names.hpp"
#include "hhi/core/parallel.hpp"
#include "hhi/core/parse.hpp"
#include "hhi/core/random.hpp"
#include "support.hpp"

namespace hhi {
namespace {

std::string fuzz_masked(rng::Engine& eng, std::size_t slots) {
  static const std::vector<std::string> words = {"with", "the", "at", "a", "party,", "and", "hugging", "Gala",
                                                 "(left)", "2019", "talks", "to", "meets", "é", "-"};
  std::string out;
  for (std::size_t s = 0; s <= slots; ++s) {
    const auto n = rng::below(eng, 4);
    for (std::uint64_t w = 0; w < n; ++w) out += words[rng::below(eng, words.size())] + " ";
    if (s < slots) out += rng::below(eng, 5) == 0 ? "[NAME]'s " : "[NAME] ";
  }
  return out.empty() ? "photo" : out;
}

TEST(Names, MaskAfterFillIsIdentityOnFuzzedTexts) {
  rng::Engine eng(42);
  for (int i = 0; i < 2000; ++i) {
    const auto slots = rng::below(eng, 11);
    const MaskedCaption masked{fuzz_masked(eng, slots), Source::kWhosWaldo};
    const auto pool = NamePool::shuffled(default_name_lexicon(), static_cast<std::uint64_t>(i));
    const auto filled = fill_names(masked, pool);
    ASSERT_EQ(filled.substitutions.size(), slots);
    const auto spans = filled.spans();
    EXPECT_EQ(mask_names(filled.text, spans, masked.source), masked) << masked.text;
    for (const auto& s : filled.substitutions) EXPECT_EQ(filled.text.substr(s.span.begin, s.span.size()), s.name);
  }
}

TEST(Names, FillIsDeterministicAndPositional) {
  const NamePool pool({"Adam", "Bob", "Casey"});
  const auto a = fill_names("[NAME] hugging [NAME]", pool);
  const auto b = fill_names("[NAME] hugging [NAME]", pool);
  EXPECT_EQ(a.text, "Adam hugging Bob");
  EXPECT_EQ(a.text, b.text);
  EXPECT_EQ(a.substitutions, b.substitutions);
  EXPECT_EQ(a.names(), (std::vector<std::string>{"Adam", "Bob"}));
}

TEST(Names, ShuffledPoolDependsOnlyOnSeed) {
  const auto& lex = default_name_lexicon();
  EXPECT_EQ(NamePool::shuffled(lex, 7).names(), NamePool::shuffled(lex, 7).names());
  EXPECT_NE(NamePool::shuffled(lex, 7).names(), NamePool::shuffled(lex, 8).names());
  auto sorted = NamePool::shuffled(lex, 7).names();
  std::sort(sorted.begin(), sorted.end());
  auto want = lex;
  std::sort(want.begin(), want.end());
  EXPECT_EQ(sorted, want);
}

TEST(Names, PoolRejectsDuplicatesAndMultiTokenNames) {
  EXPECT_THROW(NamePool({"Adam", "Adam"}), ValidationError);
  EXPECT_THROW(NamePool({"Mary Ann"}), ValidationError);
  EXPECT_THROW(NamePool({""}), ValidationError);
  EXPECT_THROW(fill_names("[NAME] and [NAME]", NamePool({"Adam"})), ValidationError);
}

TEST(Names, TokenIsCaseSensitiveLiteral) {
  EXPECT_EQ(count_slots("[NAME] [name] [Name] NAME [NAME]"), 2u);
  EXPECT_EQ(fill_names("[name] meets [NAME]", NamePool({"Adam"})).text, "[name] meets Adam");
}

TEST(Names, MaskRejectsBadSpans) {
  const std::vector<CharSpan> overlap = {{0, 4}, {2, 6}};
  EXPECT_THROW(mask_names("Adam Bobby", overlap), ValidationError);
  const std::vector<CharSpan> past_end = {{0, 40}};
  EXPECT_THROW(mask_names("Adam", past_end), ValidationError);
}

TEST(Names, RemaskMatchesWholeWordsOnly) {
  const std::vector<std::string> names = {"Al", "Bo"};
  EXPECT_EQ(remask_names("Al greets Bo and Alice, Al's dog", names), "[NAME] greets [NAME] and Alice, [NAME]'s dog");
}

TEST(Names, LexiconFileSkipsBlankLines) {
  testing::TempDir dir;
  testing::spit(dir.path() / "names.txt", "Adam\n\n  Bob \nCasey\n");
  EXPECT_EQ(load_name_lexicon(dir.str("names.txt")), (std::vector<std::string>{"Adam", "Bob", "Casey"}));
}

TEST(Jsonl, LabeledSampleRoundTripPreservesEveryField) {
  LabeledSample s;
  s.id = "ww-1";
  s.image_ref = "img/1.jpg";
  s.caption = {"[NAME] greets [NAME]", Source::kWhosWaldo};
  s.face_count = 3;
  s.datetime_meta = "2019-05-01";
  s.label = Interaction{"[NAME] greeting [NAME]"};
  s.split = Split::kTest;
  s.references = {"two people", "a greeting"};
  LabeledSample bare;
  bare.id = "cc-1";
  bare.image_ref = "x";
  bare.caption = {"a caption", Source::kConceptualCaptions};
  std::stringstream buf;
  write_jsonl(buf, std::vector<LabeledSample>{s, bare});
  const auto back = read_jsonl<LabeledSample>(buf);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0], s);
  EXPECT_EQ(back[1], bare);
}

TEST(Jsonl, ErrorsCarryLineNumbers) {
  std::stringstream buf(
      "{\"id\":\"a\",\"image_ref\":\"i\",\"caption\":\"c\",\"source\":\"coco\",\"face_count\":1,\"split\":\"test\"}\n"
      "\n"
      "{\"id\":\"b\",\"image_ref\":\"i\",\"caption\":\"c\",\"source\":\"coco\",\"face_count\":-1,\"split\":\"test\"}\n");
  try {
    read_jsonl<LabeledSample>(buf, "f.jsonl");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("f.jsonl:3"), std::string::npos) << e.what();
  }
  std::stringstream junk("{not json\n");
  EXPECT_THROW(read_jsonl<LabeledSample>(junk), ValidationError);
}

TEST(Jsonl, UnknownSourceRejected) {
  std::stringstream buf(
      "{\"id\":\"a\",\"image_ref\":\"i\",\"caption\":\"c\",\"source\":\"flickr\",\"face_count\":1,\"split\":\"test\"}\n");
  EXPECT_THROW(read_jsonl<LabeledSample>(buf), ValidationError);
}

constexpr const char* kSentence =
    "# sent_id = s1\n"
    "# text = Adam Smith greets Bob.\n"
    "1\tAdam\tAdam\tPROPN\t_\t_\t3\tnsubj\t_\tNER=B-PERSON\n"
    "2\tSmith\tSmith\tPROPN\t_\t_\t1\tflat\t_\tNER=I-PERSON\n"
    "3\tgreets\tgreet\tVERB\t_\t_\t0\troot\t_\t_\n"
    "4\tBob\tBob\tPROPN\t_\t_\t3\tobj\t_\tNER=B-PERSON|SpaceAfter=No\n"
    "5\t.\t.\tPUNCT\t_\t_\t3\tpunct\t_\t_\n"
    "\n";

TEST(Conllu, ReadsStructureSpansAndEntities) {
  std::stringstream in(kSentence);
  const auto parses = read_conllu(in);
  ASSERT_EQ(parses.size(), 1u);
  const auto& p = parses[0];
  EXPECT_EQ(p.id, "s1");
  EXPECT_EQ(p.root(), 2u);
  EXPECT_EQ(p.children(2), (std::vector<std::size_t>{0, 3, 4}));
  EXPECT_EQ(p.subtree(0), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(p.entity_span(1), (std::pair<std::size_t, std::size_t>{0, 1}));
  EXPECT_EQ(p[3].entity, "PERSON");
  EXPECT_EQ(p.text.substr(p[3].span.begin, p[3].span.size()), "Bob");
  EXPECT_EQ(p.text.substr(p[2].span.begin, p[2].span.size()), "greets");
}

TEST(Conllu, WriteThenReadRoundTrips) {
  std::stringstream in(kSentence);
  const auto parses = read_conllu(in);
  std::stringstream out;
  write_conllu(out, parses[0]);
  std::stringstream again(out.str());
  const auto back = read_conllu(again);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].text, parses[0].text);
  for (std::size_t i = 0; i < back[0].size(); ++i) {
    EXPECT_EQ(back[0][i].form, parses[0][i].form);
    EXPECT_EQ(back[0][i].head, parses[0][i].head);
    EXPECT_EQ(back[0][i].deprel, parses[0][i].deprel);
    EXPECT_EQ(back[0][i].entity, parses[0][i].entity);
    EXPECT_EQ(back[0][i].span, parses[0][i].span);
  }
}

TEST(Conllu, RejectsTwoRootsAndCycles) {
  std::stringstream two_roots(
      "# text = a b\n1\ta\ta\tX\t_\t_\t0\troot\t_\t_\n2\tb\tb\tX\t_\t_\t0\troot\t_\t_\n\n");
  EXPECT_THROW(read_conllu(two_roots), ValidationError);
  std::stringstream cycle(
      "# text = a b c\n1\ta\ta\tX\t_\t_\t2\tdep\t_\t_\n2\tb\tb\tX\t_\t_\t1\tdep\t_\t_\n3\tc\tc\tX\t_\t_\t0\troot\t_\t_\n\n");
  EXPECT_THROW(read_conllu(cycle), ValidationError);
  std::stringstream out_of_range("# text = a\n1\ta\ta\tX\t_\t_\t5\troot\t_\t_\n\n");
  EXPECT_THROW(read_conllu(out_of_range), ValidationError);
}

TEST(Conllu, FixtureFileParsesAndValidates) {
  const auto parses = read_conllu_file(testing::data_path("parses/b2.conllu"));
  EXPECT_EQ(parses.size(), 7u);
  for (const auto& p : parses) EXPECT_NO_THROW(p.validate());
}

TEST(Random, BelowStaysInRangeAndSampleIndicesAreDistinct) {
  rng::Engine eng(1);
  for (std::uint64_t n = 1; n < 200; ++n) EXPECT_LT(rng::below(eng, n), n);
  auto idx = rng::sample_indices(50, 20, eng);
  EXPECT_EQ(idx.size(), 20u);
  EXPECT_EQ(std::set<std::size_t>(idx.begin(), idx.end()).size(), 20u);
  EXPECT_EQ(rng::sample_indices(5, 10, eng).size(), 5u);
  EXPECT_NE(rng::derive(1, 0), rng::derive(1, 1));
  EXPECT_EQ(rng::derive(9, 3), rng::derive(9, 3));
}

TEST(Parallel, ResultsAreInIndexOrderForAnyWorkerCount) {
  for (std::size_t w : {1u, 2u, 7u, 64u}) {
    auto out = parallel_map(100, w, [](std::size_t i) { return i * i; });
    for (std::size_t i = 0; i < out.size(); ++i) ASSERT_EQ(out[i], i * i);
  }
}

TEST(Parallel, RethrowsLowestFailingIndex) {
  try {
    parallel_map(50, 4, [](std::size_t i) -> int {
      if (i == 10 || i == 30) throw std::runtime_error("bad " + std::to_string(i));
      return 0;
    });
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "bad 10");
  }
}

TEST(Hash, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(fingerprint64("abc"), fingerprint64("abc"));
  EXPECT_NE(fingerprint64("abc"), fingerprint64("abd"));
}

}  // namespace
}  // namespace hhi
