#include <gtest/gtest.h>

#include "hhi/bench/imsitu.hpp"
#include "hhi/core/jsonl.hpp"
#include "support.hpp"

namespace hhi {
namespace {

using testing::data_path;
using testing::run_cli;
using testing::shell_quote;
using testing::source_path;

std::string q(const std::string& s) { return shell_quote(s); }

std::string wenda_backends() {
  return "--backend " + q("similarity=table:" + data_path("wenda12/similarity.jsonl")) + " --backend " +
         q("nli=table:" + data_path("wenda12/nli.jsonl")) + " --path " +
         q("embeddings=" + data_path("wenda12/embeddings.txt"));
}

std::string evaluate_args(const std::string& predictions) {
  return "evaluate --predictions " + q(predictions) + " --benchmark " + q(data_path("wenda12/benchmark.jsonl")) +
         " --output report.json";
}

TEST(Cli, EvaluateMatchesGoldenReport) {
  testing::TempDir dir;
  auto r = run_cli(wenda_backends() + " " + evaluate_args(data_path("wenda12/predictions.jsonl")), dir.path(),
                   dir.path());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto report = read_json_file(dir.str("report.json"));
  const auto expected = read_json_file(data_path("wenda12/expected.json"));
  ASSERT_EQ(report.at("results").size(), 3u);
  for (const auto& res : report.at("results")) {
    const auto& want = expected.at(std::to_string(res.at("k").get<int>()));
    for (const char* m : {"BL", "p_e", "p_c", "sim"})
      EXPECT_NEAR(res.at("macro").at(m).get<double>(), want.at("macro").at(m).get<double>(), 1e-9) << m;
  }
}

TEST(Cli, SecondRunIsSkippedUnlessForced) {
  testing::TempDir dir;
  const auto args = wenda_backends() + " " + evaluate_args(data_path("wenda12/predictions.jsonl"));
  ASSERT_EQ(run_cli(args, dir.path(), dir.path()).exit_code, 0);
  auto again = run_cli(args, dir.path(), dir.path());
  ASSERT_EQ(again.exit_code, 0) << again.err;
  EXPECT_TRUE(Json::parse(again.out).at("skipped").get<bool>()) << again.out;
  auto forced = run_cli("--force " + args, dir.path(), dir.path());
  ASSERT_EQ(forced.exit_code, 0) << forced.err;
  EXPECT_FALSE(Json::parse(forced.out).at("skipped").get<bool>());
  EXPECT_TRUE(std::filesystem::exists(dir.str("report.json.manifest.json")));
}

TEST(Cli, BuildBenchReproducesShippedSupportTable) {
  testing::TempDir dir;
  auto r = run_cli("--backend " + q("nli=table:" + data_path("imsitu/nli.jsonl")) + " --path " +
                       q("banned_verbs=" + source_path("data/banned_verbs.txt")) + " build-bench --input " +
                       q(data_path("imsitu/b6_samples.jsonl")) +
                       " --output subset.jsonl --support support.tsv --min-verb-support 100",
                   dir.path(), dir.path());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  auto got = bench::read_support_tsv(dir.str("support.tsv"));
  auto want = bench::read_support_tsv(source_path("data/imsitu_hhi_support.tsv"));
  auto by_verb = [](std::vector<bench::VerbSupport> v) {
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.verb < b.verb; });
    return v;
  };
  EXPECT_EQ(by_verb(got), by_verb(want));
}

TEST(Cli, PseudoLabelIsIndependentOfWorkerCount) {
  testing::TempDir dir;
  for (const char* f : {"ww_captions.jsonl", "dataset.jsonl", "test.jsonl"})
    std::filesystem::copy_file(data_path(std::string("corpus/") + f), dir.path() / f);
  ASSERT_EQ(run_cli("extract --input ww_captions.jsonl --output ww.jsonl --pairs pairs.jsonl", dir.path(), dir.path())
                .exit_code,
            0);
  ASSERT_EQ(run_cli("distill-train --pairs pairs.jsonl --output model.json", dir.path(), dir.path()).exit_code, 0);
  std::vector<std::string> outputs;
  for (const char* w : {"1", "4"}) {
    const std::string out = std::string("pseudo") + w + ".jsonl";
    auto r = run_cli(std::string("--workers ") + w +
                         " pseudo-label --input dataset.jsonl --model model.json --test test.jsonl --output " + out,
                     dir.path(), dir.path());
    ASSERT_EQ(r.exit_code, 0) << r.err;
    outputs.push_back(testing::slurp(dir.path() / out));
  }
  EXPECT_FALSE(outputs[0].empty());
  EXPECT_EQ(outputs[0], outputs[1]);
}

TEST(Cli, ValidationErrorsExitWithTwo) {
  testing::TempDir dir;
  EXPECT_EQ(run_cli("evaluate --predictions missing.jsonl --benchmark missing.jsonl --output r.json", dir.path(),
                    dir.path())
                .exit_code,
            2);
  EXPECT_EQ(run_cli("--backend oracle=x harvest --input a --output b", dir.path(), dir.path()).exit_code, 2);
  EXPECT_EQ(run_cli("--backend nli=roberta " + evaluate_args(data_path("wenda12/predictions.jsonl")), dir.path(),
                    dir.path())
                .exit_code,
            2);
  testing::spit(dir.path() / "bad.json", R"({"unknown_section": {}})");
  EXPECT_EQ(run_cli("--config bad.json harvest --input a --output b", dir.path(), dir.path()).exit_code, 2);
  EXPECT_EQ(run_cli("no-such-command", dir.path(), dir.path()).exit_code, 2);
  testing::spit(dir.path() / "broken.jsonl", "{\"id\": 1\n");
  auto r = run_cli(wenda_backends() + " " + evaluate_args(dir.str("broken.jsonl")), dir.path(), dir.path());
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("broken.jsonl:1"), std::string::npos) << r.err;
}

TEST(Cli, BackendErrorsExitWithThree) {
  testing::TempDir dir;
  testing::spit(dir.path() / "empty_nli.jsonl", "");
  auto r = run_cli("--backend " + q("similarity=table:" + data_path("wenda12/similarity.jsonl")) + " --backend " +
                       q("nli=table:" + dir.str("empty_nli.jsonl")) + " --path " +
                       q("embeddings=" + data_path("wenda12/embeddings.txt")) + " " +
                       evaluate_args(data_path("wenda12/predictions.jsonl")),
                   dir.path(), dir.path());
  EXPECT_EQ(r.exit_code, 3) << r.err;
  r = run_cli("--backend " + q("similarity=table:" + data_path("wenda12/similarity.jsonl")) +
                  " --backend nli=http://127.0.0.1:9 --path " + q("embeddings=" + data_path("wenda12/embeddings.txt")) +
                  " " + evaluate_args(data_path("wenda12/predictions.jsonl")), dir.path(),
              dir.path());
  EXPECT_EQ(r.exit_code, 3) << r.err;
}

}  // namespace
}  // namespace hhi
