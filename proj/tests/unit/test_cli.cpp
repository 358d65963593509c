#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "sledge/trec.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = SLEDGE_CLI;
const std::string kFixtures = SLEDGE_FIXTURES;
const std::string kEcho = SLEDGE_ECHO_SCORER;

struct Result {
  int code = -1;
  std::string out;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / ("sledge_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
    ASSERT_EQ(sledge("index --corpus " + kFixtures + "/corpus --out " + path("all.idx")).code, 0);
    ASSERT_EQ(sledge("index --corpus " + kFixtures + "/corpus --fields title,abstract --out " + path("ta.idx")).code, 0);
  }
  static void TearDownTestSuite() { fs::remove_all(dir_); }

  static std::string path(const std::string& name) { return (dir_ / name).string(); }

  static Result sledge(const std::string& args) {
    const auto log = dir_ / "stdout.txt";
    const auto cmd = kCli + " " + args + " > " + log.string() + " 2> " + (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(log)};
  }

  static std::string rerank_args(const std::string& preset, const std::string& scorer, const std::string& out) {
    const auto index = preset == "run1" ? path("all.idx") : path("ta.idx");
    return "rerank --preset " + preset + " --index " + index + " --topics " + kFixtures + "/topics.xml --corpus " +
           kFixtures + "/corpus --endpoint 'exec:" + kEcho + scorer + "' --out " + out;
  }

  static inline fs::path dir_;
};

}  // namespace

TEST_F(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(sledge("").code, 1);
  EXPECT_EQ(sledge("search --bogus").code, 1);
  EXPECT_EQ(sledge("search --preset run9").code, 1);
  EXPECT_EQ(sledge("search --index " + path("all.idx") + " --topics " + kFixtures + "/topics.xml --set bm25.k1=-1 --out " +
                   path("x.txt"))
                .code,
            1);
  EXPECT_EQ(sledge("eval --qrels " + kFixtures + "/qrels.txt --run a --deltas").code, 1);
  // Index built over title+abstract used with the full-text preset.
  EXPECT_EQ(sledge("search --preset run1 --index " + path("ta.idx") + " --topics " + kFixtures + "/topics.xml --out " +
                   path("x.txt"))
                .code,
            1);
  EXPECT_EQ(sledge("--help").code, 0);
}

TEST_F(Cli, DataErrorsExitTwo) {
  EXPECT_EQ(sledge("search --index " + path("missing.idx") + " --topics " + kFixtures + "/topics.xml --out " +
                   path("x.txt"))
                .code,
            2);
  EXPECT_EQ(sledge("eval --qrels " + kFixtures + "/topics.xml --run " + kFixtures + "/eval/run_a.txt").code, 2);
}

TEST_F(Cli, ScorerErrorsExitThree) {
  EXPECT_EQ(sledge(rerank_args("run2", " --mode error", path("e.txt"))).code, 3);
  EXPECT_EQ(sledge(rerank_args("run2", " --mode bad-handshake", path("e.txt"))).code, 3);
  EXPECT_EQ(sledge(rerank_args("run2", " --mode wrong-id", path("e.txt"))).code, 3);
  EXPECT_EQ(sledge(rerank_args("run2", " --mode hang", path("e.txt")) + " --timeout-ms 200 --set rerank.retries=0").code,
            3);
  EXPECT_FALSE(fs::exists(path("e.txt")));
}

TEST_F(Cli, SearchWritesARunFile) {
  ASSERT_EQ(sledge("search --preset run1 --index " + path("all.idx") + " --topics " + kFixtures + "/topics.xml --out " +
                   path("run1.txt"))
                .code,
            0);
  auto run = sledge::read_run(path("run1.txt"));
  EXPECT_EQ(run.tag, "run1");
  EXPECT_FALSE(run.topics.empty());
  auto adhoc = sledge("search --index " + path("all.idx") + " --query 'coronavirus transmission'");
  EXPECT_EQ(adhoc.code, 0);
  EXPECT_NE(adhoc.out.find('\t'), std::string::npos);
}

TEST_F(Cli, RerankIsDeterministic) {
  for (const char* preset : {"run1", "run2"}) {
    std::string first;
    for (int i = 0; i < 3; ++i) {
      auto out = path(std::string(preset) + "_" + std::to_string(i) + ".txt");
      ASSERT_EQ(sledge(rerank_args(preset, "", out)).code, 0);
      if (i == 0) first = slurp(out);
      EXPECT_EQ(slurp(out), first);
    }
    EXPECT_FALSE(first.empty());
  }
}

TEST_F(Cli, EvalOfTheIdealRunIsPerfect) {
  auto qrels = sledge::read_qrels(kFixtures + "/qrels.txt");
  std::ofstream ideal(path("ideal.txt"));
  for (const auto& [topic, grades] : qrels.by_topic()) {
    std::multimap<int, std::string, std::greater<>> by_grade;
    for (const auto& [doc, g] : grades) by_grade.emplace(g, doc);
    int rank = 0;
    for (const auto& [g, doc] : by_grade) {
      ++rank;
      ideal << topic << " Q0 " << doc << ' ' << rank << ' ' << 100 - rank << " ideal\n";
    }
  }
  ideal.close();
  auto r = sledge("eval --qrels " + kFixtures + "/qrels.txt --run " + path("ideal.txt") + " --metric ndcg@10");
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("ideal\t1.0000"), std::string::npos) << r.out;
}

TEST_F(Cli, FilterQueries) {
  std::ofstream(path("q.tsv")) << "1\tsymptoms of hypertension\n2\tbest pizza\n3\tnatural gas prices\n";
  ASSERT_EQ(sledge("filter-queries --queries " + path("q.tsv") + " --lexicon " + SLEDGE_DATA +
                   "/medsyn_fixture.txt --out " + path("kept.txt"))
                .code,
            0);
  EXPECT_EQ(slurp(path("kept.txt")), "1\n");
}
