/*
 * Copyright 2026 The OntoPlace Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "ontoplace/service.h"
#include "ontoplace/cli.h"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "ontoplace/ontology.h"
#include "test_util.h"

namespace ontoplace {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct RunResult {
  int code = 0;
  std::string out;
  std::string err;
};

RunResult Cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::Run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    ::unsetenv("ONTOPLACE_EMBED_URL");
    dir_ = testing::MakeTempDir("cli");
  }
  void TearDown() override {
    ::unsetenv("ONTOPLACE_EMBED_URL");
    fs::remove_all(dir_);
  }
  std::string Path(const std::string& name) const {
    return (fs::path(dir_) / name).string();
  }
  std::string toy_ = testing::ToyDir();
  std::string mentions_ = testing::ToyDir() + "/mentions.jsonl";
  std::string dir_;
};

TEST_F(CliTest, IngestReportsCounts) {
  const auto r = Cli({"ingest", "--ontology", toy_});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "concepts=31 complex=1 subsumptions=34 edges=74 warnings=1\n");
  EXPECT_NE(r.err.find("warning: "), std::string::npos);

  const auto split = Cli({"ingest", "--concepts", toy_ + "/concepts.jsonl",
                          "--subsumptions", toy_ + "/subsumptions.tsv"});
  EXPECT_EQ(split.code, 0) << split.err;
  EXPECT_EQ(split.out, r.out);
}

TEST_F(CliTest, ErrorsAreJsonLines) {
  const auto missing = Cli({"ingest", "--ontology", Path("absent")});
  EXPECT_EQ(missing.code, 1);
  const auto last = missing.err.substr(missing.err.rfind('{'));
  const json j = json::parse(last);
  EXPECT_EQ(j["error"], "not_found");

  const auto unknown = Cli({"candidates", "--bogus-flag"});
  EXPECT_EQ(unknown.code, 2);
  EXPECT_NE(unknown.err.find("--mentions"), std::string::npos);  // usage shown
  EXPECT_NE(unknown.err.find("\"usage\""), std::string::npos);

  EXPECT_EQ(Cli({"candidates", "--ontology", toy_}).code, 2);
  EXPECT_EQ(Cli({}).code, 2);
  EXPECT_EQ(Cli({"--help"}).code, 0);
}

// ingest -> index build -> candidates -> eval reproduces the golden reports
// computed by the independent toy oracle.
TEST_F(CliTest, ToyPipelineMatchesGoldenReports) {
  const auto index = Cli({"index", "build", "--ontology", toy_, "--out",
                          Path("toy.idx")});
  ASSERT_EQ(index.code, 0) << index.err;

  for (const std::string method : {"lexical", "fixed"}) {
    for (const std::string k : {"10", "50"}) {
      const std::string slates = Path(method + k + ".jsonl");
      const auto gen = Cli({"candidates", "--ontology", toy_, "--index",
                            Path("toy.idx"), "--embed", "hashing:64",
                            "--mentions", mentions_, "--method", method, "--k",
                            k, "--out", slates});
      ASSERT_EQ(gen.code, 0) << gen.err;
      EXPECT_EQ(gen.out, "mentions=12 k=" + k + " method=" + method +
                             " path=" + slates + "\n");

      const std::string golden_slates =
          toy_ + "/golden_slates_" + method + "_k" + k + ".jsonl";
      std::vector<CandidateSlate> produced;
      std::istringstream lines(testing::ReadText(slates));
      std::string line;
      while (std::getline(lines, line)) {
        produced.push_back(SlateFromJson(json::parse(line)));
      }
      EXPECT_EQ(testing::DiffAgainstGolden(produced, golden_slates, 1e-12), "");

      const auto eval = Cli({"eval", "--slates", slates});
      ASSERT_EQ(eval.code, 0) << eval.err;
      EXPECT_EQ(eval.out, testing::ReadText(toy_ + "/golden_report_" + method +
                                            "_k" + k + ".md"));
    }
  }
}

TEST_F(CliTest, SeedAndParallelismDoNotChangeOutput) {
  const std::vector<std::string> base = {"candidates", "--ontology", toy_,
                                         "--embed", "hashing:64", "--mentions",
                                         mentions_, "--method", "fixed"};
  const auto plain = Cli(base);
  ASSERT_EQ(plain.code, 0) << plain.err;
  auto seeded = base;
  seeded.insert(seeded.end(), {"--seed", "17", "--parallelism", "4"});
  EXPECT_EQ(Cli(seeded).out, plain.out);
  auto biencoder = base;
  biencoder[8] = "biencoder";
  EXPECT_EQ(Cli(biencoder).code, 0);
}

TEST_F(CliTest, EvalFromDatasetMatchesSlateEval) {
  const auto direct = Cli({"eval", "--ontology", toy_, "--mentions", mentions_,
                           "--method", "lexical", "--k", "10", "--label",
                           "slates", "--report", Path("r.tsv")});
  ASSERT_EQ(direct.code, 0) << direct.err;
  EXPECT_EQ(direct.out, "report=" + Path("r.tsv") + "\n");
  const std::string tsv = testing::ReadText(Path("r.tsv"));
  EXPECT_EQ(tsv.rfind("k\tcutoff\tsubset\tmentions\tinr_any\tinr_all\n", 0), 0u);

  ASSERT_EQ(Cli({"candidates", "--ontology", toy_, "--mentions", mentions_,
                 "--method", "lexical", "--out", Path("s.jsonl")})
                .code,
            0);
  const auto via_slates =
      Cli({"eval", "--slates", Path("s.jsonl"), "--report", Path("s.tsv")});
  ASSERT_EQ(via_slates.code, 0);
  // Same rows, the dataset form only adds the slate size column.
  std::istringstream a(tsv), b(testing::ReadText(Path("s.tsv")));
  std::string ra, rb;
  std::getline(a, ra);
  std::getline(b, rb);
  while (std::getline(b, rb)) {
    ASSERT_TRUE(std::getline(a, ra));
    EXPECT_EQ(ra, "10\t" + rb);
  }
}

TEST_F(CliTest, EmbedProviderPrecedence) {
  // Observable through the dimension of the written store.
  auto dim_of = [&](const std::string& store) {
    std::ifstream in(store);
    std::string header;
    std::getline(in, header);
    return header;
  };
  {
    std::ofstream cfg(Path("defaults.conf"));
    cfg << "# toy defaults\nembed = hashing:16\nkind = concepts\n";
  }
  const std::vector<std::string> base = {"embed-cache", "--ontology", toy_,
                                         "--config", Path("defaults.conf")};

  auto args = base;
  args.insert(args.end(), {"--out", Path("a.store")});
  auto r = Cli(args);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(dim_of(Path("a.store")), "dim=16");

  ::setenv("ONTOPLACE_EMBED_URL", "hashing:24", 1);
  args = base;
  args.insert(args.end(), {"--out", Path("b.store")});
  ASSERT_EQ(Cli(args).code, 0);
  EXPECT_EQ(dim_of(Path("b.store")), "dim=24");

  args = base;
  args.insert(args.end(), {"--out", Path("c.store"), "--embed", "hashing:8"});
  ASSERT_EQ(Cli(args).code, 0);
  EXPECT_EQ(dim_of(Path("c.store")), "dim=8");
}

TEST_F(CliTest, EmbedCacheExtendsInPlace) {
  const std::vector<std::string> args = {"embed-cache", "--ontology", toy_,
                                         "--embed", "hashing:16", "--kind",
                                         "concepts", "--out", Path("s.store")};
  const auto first = Cli(args);
  ASSERT_EQ(first.code, 0) << first.err;
  EXPECT_NE(first.out.find("texts=31 new=31 stored=31"), std::string::npos);
  const auto second = Cli(args);
  EXPECT_NE(second.out.find("texts=31 new=0 stored=31"), std::string::npos);
}

TEST_F(CliTest, TuneCorpusEmitsOneRecordPerSlate) {
  ASSERT_EQ(Cli({"candidates", "--ontology", toy_, "--mentions", mentions_,
                 "--out", Path("s.jsonl")})
                .code,
            0);
  const auto r = Cli({"tune-corpus", "--ontology", toy_, "--slates",
                      Path("s.jsonl"), "--out", Path("t.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "records=12 path=" + Path("t.jsonl") + "\n");
  std::istringstream lines(testing::ReadText(Path("t.jsonl")));
  std::string line;
  std::getline(lines, line);
  const json rec = json::parse(line);
  EXPECT_EQ(rec["id"], "m01");
}

TEST_F(CliTest, ExportReplaysDecisionLog) {
  std::ofstream log(Path("log.jsonl"));
  log << json{{"version", 1},
              {"mention_id", "m02"},
              {"concept", {{"id", "new:m02"}, {"label", "tertiary hyperparathyroidism"}}},
              {"edges", json::array({json::array({"D08", "NULL"})})},
              {"manual", true},
              {"who", "t"},
              {"timestamp", "2026-01-01T00:00:00Z"}}
             .dump()
      << '\n';
  log.close();
  const auto r = Cli({"export", "--ontology", toy_, "--log", Path("log.jsonl"),
                      "--out", Path("out")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "concepts=32 subsumptions=35 decisions=1 path=" +
                       Path("out") + "\n");
  const Ontology o = Ontology::LoadDirectory(Path("out"));
  EXPECT_EQ(o.parents("new:m02"), (std::set<ConceptId>{"D08"}));
}

TEST_F(CliTest, AdaptReleaseRecords) {
  {
    std::ofstream in(Path("release.jsonl"));
    in << R"({"mention": "CKD 4", "context_left": "a", "context_right": "b", )"
       << R"("parents_concept": "D02", "children_concept": "SCTID_NULL"})" << '\n';
  }
  const auto r = Cli({"adapt-mm", "--in", Path("release.jsonl"), "--out",
                      Path("data.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(testing::ReadText(Path("data.jsonl")));
  EXPECT_EQ(j["mention"], "CKD 4");
  EXPECT_EQ(j["gold_edges"], json::array({json::array({"D02", "NULL"})}));
}

TEST_F(CliTest, IndexQueryRanksByIdf) {
  const auto r = Cli({"index", "query", "--ontology", toy_, "--mention",
                      "viral pneumonia", "--top", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, 4), "D18\t");
}

}  // namespace
}  // namespace ontoplace
