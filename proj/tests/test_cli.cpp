#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args, const std::string& stdin_text = {}) {
  std::string cmd = std::string(TOPICSHIFT_CLI) + " " + args + " 2>/dev/null";
  if (!stdin_text.empty()) {
    const fs::path in = fs::temp_directory_path() / "topicshift_cli_stdin.txt";
    FILE* f = fopen(in.c_str(), "w");
    fputs(stdin_text.c_str(), f);
    fclose(f);
    cmd += " < " + in.string();
  }
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

const std::string kData = TOPICSHIFT_DATA_DIR;

}  // namespace

TEST(Cli, HelpAndUsage) {
  EXPECT_EQ(run("--help").code, 0);
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("frobnicate").code, 1);
  EXPECT_EQ(run("eval").code, 1);  // --fixtures is required
}

TEST(Cli, DataErrors) {
  EXPECT_EQ(run("eval --fixtures /nonexistent.jsonl").code, 2);
  EXPECT_EQ(run("respond --config /nonexistent.json < /dev/null").code, 2);
  EXPECT_EQ(run("eval --fixtures " + kData + "/eval/labeled.jsonl --methods bm25").code, 2);
}

TEST(Cli, RespondIntroducing) {
  const auto r = run("respond --config " + kData +
                     "/walle/config.json",
                     "human: Have you seen WALL-E?\ncomputer: WALL-E is my favorite Pixar movie\nErrr\n");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("\"mode\": \"introducing\""), std::string::npos) << r.out;
}

TEST(Cli, EvalWritesReports) {
  const fs::path out = fs::temp_directory_path() / "topicshift_cli_eval";
  fs::remove_all(out);
  const auto r = run("eval --fixtures " + kData + "/eval/labeled.jsonl --out-dir " + out.string());
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(fs::exists(out / "report.txt"));
  EXPECT_TRUE(fs::exists(out / "report.json"));
}

TEST(Cli, IndexThenRespondFromIndex) {
  const fs::path idx = fs::temp_directory_path() / "topicshift_cli_index.json";
  EXPECT_EQ(run("index --corpus " + kData + "/walle/corpus.tsv --out " + idx.string()).code, 0);
  const auto r = run("respond --index " + idx.string() + " --kg " + kData + "/walle/kg.tsv --patterns " + kData +
                     "/walle/patterns.txt",
                     "hello\n");
  EXPECT_EQ(r.code, 0) << r.out;
}

TEST(Cli, Rerank) {
  const fs::path dir = fs::temp_directory_path();
  {
    FILE* f = fopen((dir / "ts_ctx.txt").c_str(), "w");
    fputs("have you seen wall-e\nthe robot movie\n", f);
    fclose(f);
    f = fopen((dir / "ts_cand.txt").c_str(), "w");
    fputs("wall-e is a robot movie\nit is raining\nI like the robot\n", f);
    fclose(f);
  }
  const auto r = run("rerank --context " + (dir / "ts_ctx.txt").string() + " --candidates " +
                     (dir / "ts_cand.txt").string());
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("\"ranking\""), std::string::npos);
  EXPECT_EQ(run("rerank --context " + (dir / "ts_ctx.txt").string() + " --candidates " +
                (dir / "ts_cand.txt").string() + " --method nope")
                .code,
            2);
}
