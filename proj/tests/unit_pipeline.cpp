#include <gtest/gtest.h>

#include <thread>

#include "hhi/backends/http.hpp"
#include "hhi/pipeline/backends.hpp"
#include "hhi/pipeline/config.hpp"
#include "hhi/pipeline/manifest.hpp"
#include "support.hpp"

namespace hhi::pipeline {
namespace {

TEST(Config, RelativePathsResolveAgainstTheConfigFile) {
  testing::TempDir dir;
  std::filesystem::create_directories(dir.path() / "cfg");
  testing::spit(dir.path() / "cfg/names.txt", "Adam\nBob\n");
  testing::spit(dir.path() / "cfg/run.json",
                R"({"seed": 9, "workers": 3, "paths": {"names": "names.txt"}, "backends": {"nli": "overlap"}})");
  auto c = load_config(dir.str("cfg/run.json"));
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.workers, 3u);
  EXPECT_EQ(*c.path("names"), (dir.path() / "cfg/names.txt").lexically_normal().string());
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, ShippedDefaultConfigLoadsAndValidates) {
  auto c = load_config(testing::source_path("data/default_config.json"));
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(bench::load_banned_verbs(*c.path("banned_verbs")).size(), 52u);
  PipelineConfig fresh;
  fresh.paths = c.paths;
  EXPECT_EQ(Json(c), Json(fresh));
}

TEST(Config, UnknownSectionsAndBadFilesAreRejected) {
  testing::TempDir dir;
  testing::spit(dir.path() / "a.json", R"({"sead": 1})");
  EXPECT_THROW(load_config(dir.str("a.json")), ValidationError);
  testing::spit(dir.path() / "b.json", "{not json");
  EXPECT_THROW(load_config(dir.str("b.json")), ValidationError);
  EXPECT_THROW(load_config(dir.str("missing.json")), ValidationError);
}

TEST(Config, SectionsMergeOverDefaults) {
  PipelineConfig c;
  const auto before = c.bench.min_verb_support;
  apply_config_json(Json{{"bench", {{"min_persons", 3}}}}, c);
  EXPECT_EQ(c.bench.min_persons, 3);
  EXPECT_EQ(c.bench.min_verb_support, before);
}

TEST(Config, ValidateCatchesUnknownNamesAndMissingFiles) {
  PipelineConfig c;
  c.backends["oracle"] = "overlap";
  EXPECT_THROW(c.validate(), ValidationError);
  c = PipelineConfig{};
  c.backends["nli"] = "";
  EXPECT_THROW(c.validate(), ValidationError);
  c = PipelineConfig{};
  c.paths["weights"] = "x";
  EXPECT_THROW(c.validate(), ValidationError);
  c = PipelineConfig{};
  c.paths["names"] = "/nonexistent/names.txt";
  EXPECT_THROW(c.validate(), ValidationError);
  c = PipelineConfig{};
  c.workers = 0;
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(Config, JsonRoundTrip) {
  PipelineConfig c;
  c.seed = 77;
  c.backends["nli"] = "table:/tmp/x.jsonl";
  Json j = c;
  PipelineConfig back;
  apply_config_json(j, back);
  EXPECT_EQ(Json(back), j);
}

TEST(Env, OverridesSeedWorkersBackendsAndPaths) {
  std::map<std::string, std::string> env = {{"HHI_SEED", "42"},
                                            {"HHI_WORKERS", "4"},
                                            {"HHI_BACKEND_NLI", "http://localhost:1"},
                                            {"HHI_PATH_EMBEDDINGS", "/tmp/e.tsv"},
                                            {"HHI_BACKEND_PARSER", ""}};
  auto fake = [&](const char* k) -> const char* {
    auto it = env.find(k);
    return it == env.end() ? nullptr : it->second.c_str();
  };
  PipelineConfig c;
  const auto parser = c.backends["parser"];
  apply_env(c, fake);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.workers, 4u);
  EXPECT_EQ(c.backends["nli"], "http://localhost:1");
  EXPECT_EQ(c.backends["parser"], parser);
  EXPECT_EQ(c.paths["embeddings"], "/tmp/e.tsv");
  env["HHI_SEED"] = "many";
  EXPECT_THROW(apply_env(c, fake), ValidationError);
}

TEST(BackendFlag, Parsing) {
  EXPECT_EQ(parse_backend_flag("nli=http://h:1/x=y"), std::make_pair(std::string("nli"), std::string("http://h:1/x=y")));
  for (const char* bad : {"nli", "=overlap", "nli=", "oracle=overlap"})
    EXPECT_THROW(parse_backend_flag(bad), ValidationError) << bad;
}

TEST(Factories, KnownSpecsBuildAndUnknownSpecsFail) {
  EXPECT_TRUE(make_generator("template"));
  EXPECT_EQ(make_generator("echo:hi")->generate("p", GenerationParams{}), "hi");
  EXPECT_TRUE(make_nli("overlap"));
  EXPECT_TRUE(make_parser("heuristic"));
  EXPECT_TRUE(make_similarity("token-f1"));
  EXPECT_TRUE(make_summarizer("nearest-neighbour"));
  EXPECT_EQ(make_summarizer("http://localhost:1"), nullptr);
  EXPECT_TRUE(make_captioner("prior"));
  EXPECT_EQ(make_captioner("http://localhost:1"), nullptr);
  EXPECT_THROW(make_generator("gpt"), ValidationError);
  EXPECT_THROW(make_nli("roberta"), ValidationError);
  EXPECT_THROW(make_parser("spacy"), ValidationError);
  EXPECT_THROW(make_similarity("bleurt"), ValidationError);
  EXPECT_THROW(make_summarizer("t5"), ValidationError);
  EXPECT_THROW(make_captioner("blip"), ValidationError);
  EXPECT_THROW(load_summarizer_model(Json{{"kind", "t5"}}), ValidationError);
  EXPECT_THROW(load_captioner_model(Json{{"kind", "blip"}}), ValidationError);
  EXPECT_THROW(make_nli("ftp://host"), ValidationError);
}

TEST(Factories, TableNliReadsPairAndHypothesisRows) {
  testing::TempDir dir;
  testing::spit(dir.path() / "t.jsonl",
                R"({"premise": "a", "hypothesis": "b", "entailment": 0.9, "contradiction": 0.05, "neutral": 0.05})"
                "\n"
                R"({"hypothesis": "c", "entailment": 0.2, "contradiction": 0.3, "neutral": 0.5})"
                "\n");
  auto nli = make_nli("table:" + dir.str("t.jsonl"));
  EXPECT_DOUBLE_EQ(nli->score("a", "b").entailment, 0.9);
  EXPECT_DOUBLE_EQ(nli->score("anything", "c").entailment, 0.2);
  EXPECT_THROW(nli->score("a", "zzz"), BackendError);
}

struct StageFixture : ::testing::Test {
  testing::TempDir dir;
  std::string in = dir.str("in.txt"), out = dir.str("sub/out.txt");
  int runs = 0;

  StageSpec spec(std::uint64_t seed = 1, Json config = Json{{"k", 1}}) const {
    return StageSpec{"demo", std::move(config), {in}, {out}, seed};
  }
  StageOutcome run(const StageSpec& s, bool force = false) {
    return run_stage(s, force, [&] {
      ++runs;
      testing::spit(out, "result " + testing::slurp(in));
      return Json{{"n", runs}};
    });
  }
  void SetUp() override { testing::spit(in, "one"); }
};

TEST_F(StageFixture, SecondRunIsANoOp) {
  auto first = run(spec());
  EXPECT_FALSE(first.skipped);
  EXPECT_TRUE(std::filesystem::exists(manifest_path(out)));
  auto m = read_json_file(manifest_path(out));
  EXPECT_EQ(m["stage"], "demo");
  EXPECT_EQ(m["seed"], 1);
  EXPECT_EQ(m["config_hash"], config_hash(Json{{"k", 1}}));
  EXPECT_EQ(m["input_hashes"][in], sha256_file(in));
  EXPECT_EQ(m["output_hashes"][out], sha256_file(out));
  EXPECT_EQ(m["counts"]["n"], 1);
  auto second = run(spec());
  EXPECT_TRUE(second.skipped);
  EXPECT_EQ(runs, 1);
  EXPECT_FALSE(run(spec(), true).skipped);
  EXPECT_EQ(runs, 2);
}

TEST_F(StageFixture, AnyChangeTriggersARerun) {
  run(spec());
  testing::spit(in, "two");
  EXPECT_FALSE(run(spec()).skipped);
  EXPECT_FALSE(run(spec(2)).skipped);
  EXPECT_FALSE(run(spec(2, Json{{"k", 2}})).skipped);
  testing::spit(out, "tampered");
  EXPECT_FALSE(run(spec(2, Json{{"k", 2}})).skipped);
  EXPECT_TRUE(run(spec(2, Json{{"k", 2}})).skipped);
  testing::spit(manifest_path(out), "{broken");
  EXPECT_FALSE(run(spec(2, Json{{"k", 2}})).skipped);
  EXPECT_EQ(runs, 6);
}

TEST_F(StageFixture, MissingInputIsAValidationError) {
  std::filesystem::remove(in);
  EXPECT_THROW(run(spec()), ValidationError);
  EXPECT_EQ(runs, 0);
}

class LocalServer {
 public:
  LocalServer() {
    port_ = svr_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { svr_.listen_after_bind(); });
    svr_.wait_until_ready();
  }
  ~LocalServer() {
    svr_.stop();
    thread_.join();
  }
  httplib::Server& server() { return svr_; }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  httplib::Server svr_;
  int port_ = 0;
  std::thread thread_;
};

TEST(Http, NliParserAndSimilarityRoundTrip) {
  LocalServer s;
  s.server().Post("/nli", [](const httplib::Request& req, httplib::Response& res) {
    auto j = Json::parse(req.body);
    double e = j["premise"] == j["hypothesis"] ? 0.9 : 0.1;
    res.set_content(Json{{"entailment", e}, {"contradiction", 0.05}, {"neutral", 0.95 - e}}.dump(),
                    "application/json");
  });
  s.server().Post("/parse", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(Json{{"conllu", "# text = Hi\n1\tHi\thi\tINTJ\t_\t_\t0\troot\t_\t_\n\n"}}.dump(),
                    "application/json");
  });
  s.server().Post("/similarity", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"score": 0.25})", "application/json");
  });
  EXPECT_DOUBLE_EQ(make_nli(s.endpoint())->score("x", "x").entailment, 0.9);
  EXPECT_DOUBLE_EQ(make_nli(s.endpoint())->score("x", "y").entailment, 0.1);
  EXPECT_EQ(make_parser(s.endpoint())->parse("Hi").tokens.size(), 1u);
  EXPECT_DOUBLE_EQ(make_similarity(s.endpoint())->score("a", "b"), 0.25);
}

TEST(Http, BadRepliesAreBackendErrors) {
  LocalServer s;
  s.server().Post("/nli", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"entailment": 0.9, "contradiction": 0.9, "neutral": 0.9})", "application/json");
  });
  s.server().Post("/similarity", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"value": 1})", "application/json");
  });
  s.server().Post("/parse", [](const httplib::Request&, httplib::Response& res) {
    res.status = 500;
  });
  s.server().Post("/generate", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("not json", "application/json");
  });
  EXPECT_THROW(make_nli(s.endpoint())->score("a", "b"), BackendError);
  EXPECT_THROW(make_similarity(s.endpoint())->score("a", "b"), BackendError);
  EXPECT_THROW(make_parser(s.endpoint())->parse("a"), BackendError);
  EXPECT_THROW(make_generator(s.endpoint())->generate("a", GenerationParams{}), BackendError);
}

TEST(Http, UnreachableServerIsABackendError) {
  int port;
  {
    httplib::Server tmp;
    port = tmp.bind_to_any_port("127.0.0.1");
  }
  HttpJsonClient c("http://127.0.0.1:" + std::to_string(port), std::chrono::seconds(2));
  EXPECT_THROW(c.post("/nli", Json::object()), BackendError);
}

}  // namespace
}  // namespace hhi::pipeline
