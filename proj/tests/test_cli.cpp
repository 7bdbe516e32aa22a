#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "abrlab/evaluate.hpp"
#include "abrlab/io.hpp"
#include "commands.hpp"
#include "test_util.hpp"

namespace abrlab::cli {
namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "abrlab");
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::string strip_seconds(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
  return out;
}

class CliTest : public ::testing::Test {
 protected:
  testing::TempDir dir{"cli"};
  std::string path(const std::string& name) const { return (dir / name).string(); }

  void make_traces(const std::string& name, const std::string& kind, int count, int seed = 1,
                   const std::vector<std::string>& extra = {}) {
    std::vector<std::string> args{"synth-traces", "--kind", kind, "--count", std::to_string(count),
                                  "--seed", std::to_string(seed), "--out", path(name)};
    args.insert(args.end(), extra.begin(), extra.end());
    ASSERT_EQ(cli(args).code, 0);
  }

  void write_config(const std::string& name, const std::string& body) {
    std::ofstream(dir / name) << body;
  }
};

TEST_F(CliTest, SynthTracesWritesFiles) {
  make_traces("tr", "markov", 3);
  const auto traces = load_trace_dir(dir / "tr");
  ASSERT_EQ(traces.size(), 3u);
  EXPECT_EQ(traces[0].id(), "markov-1");
}

TEST_F(CliTest, SynthManifestRoundTrips) {
  ASSERT_EQ(cli({"synth-manifest", "--chunks", "5", "--jitter", "0.1", "--seed", "3", "--out",
                 path("m.json")}).code, 0);
  EXPECT_EQ(load_manifest(dir / "m.json"), synth_manifest(kDefaultLadderKbps, 5, 4.0, 0.1, 3));
}

TEST_F(CliTest, EvalBaselineRowsAndDecomposition) {
  make_traces("tr", "markov", 3);
  const auto r = cli({"eval", "--algo", "bb", "--traces", path("tr"), "--out", path("bb.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_csv(dir / "bb.csv");
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0].size(), 8u);
  EXPECT_EQ(rows[0][0], "trace_id");
  EXPECT_EQ(rows[4][0], "mean");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i][1], "bb");
    const double total = std::stod(rows[i][2]);
    const double identity = std::stod(rows[i][3]) - std::stod(rows[i][4]) - std::stod(rows[i][5]);
    EXPECT_NEAR(total, identity, 1e-9);
  }
}

TEST_F(CliTest, EvalMpcOnFastLink) {
  make_traces("fast", "constant", 1, 0, {"--level", "10"});
  const auto r = cli({"eval", "--algo", "mpc", "--traces", path("fast"), "--out", path("mpc.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_csv(dir / "mpc.csv");
  // One cold-start chunk at the lowest rate, the other 47 at the top.
  EXPECT_DOUBLE_EQ(std::stod(rows[1][6]), (300.0 + 47 * 4300.0) / 48.0);
  EXPECT_NEAR(std::stod(rows[1][7]), 0.03 + 0.12, 1e-12);
}

TEST_F(CliTest, EvalLearnedRequiresCheckpoint) {
  make_traces("tr", "markov", 1);
  const auto r = cli({"eval", "--algo", "ppo", "--traces", path("tr")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("checkpoint"), std::string::npos);
  EXPECT_EQ(cli({"eval", "--algo", "ppo", "--traces", path("tr"), "--checkpoint", path("none")}).code, 1);
}

TEST_F(CliTest, EvalRejectsIncompatibleCheckpoint) {
  make_traces("tr", "markov", 1);
  ASSERT_EQ(cli({"synth-manifest", "--bitrates", "300,1200,2850", "--out", path("m3.json")}).code, 0);
  write_config("c.json", R"({"trace_dir": "tr", "manifest": "m3.json", "out_dir": "run",
                             "total_epochs": 2, "n_actors": 2, "hidden": [8], "threads": 1})");
  ASSERT_EQ(cli({"train", path("c.json")}).code, 0);
  const auto r = cli({"eval", "--algo", "ppo", "--traces", path("tr"), "--checkpoint", path("run")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("incompatible"), std::string::npos);
  EXPECT_EQ(cli({"eval", "--algo", "ppo", "--traces", path("tr"), "--checkpoint", path("run"),
                 "--manifest", path("m3.json")}).code, 0);
}

TEST_F(CliTest, CompareMatchesEvalMeans) {
  make_traces("tr", "markov", 4);
  const auto r = cli({"compare", "--algos", "bb,rb", "--traces", path("tr"), "--qoe", "lin,log",
                      "--out", path("cmp.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_csv(dir / "cmp.csv");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"algo", "mean_qoe_lin", "mean_qoe_log"}));
  EXPECT_GE(std::stod(rows[1][1]), std::stod(rows[2][1]));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    for (const auto& [col, q] : {std::pair{1, "lin"}, std::pair{2, "log"}}) {
      ASSERT_EQ(cli({"eval", "--algo", rows[i][0], "--traces", path("tr"), "--qoe", q, "--out",
                     path("e.csv")}).code, 0);
      const auto eval_rows = read_csv(dir / "e.csv");
      double sum = 0.0;
      for (std::size_t k = 1; k + 1 < eval_rows.size(); ++k) sum += std::stod(eval_rows[k][2]);
      EXPECT_NEAR(std::stod(rows[i][col]), sum / 4.0, 1e-12);
    }
  }
  EXPECT_NE(r.out.find("QoE_lin"), std::string::npos);
}

TEST_F(CliTest, CompareEmptyTraceSetFails) {
  std::filesystem::create_directories(dir / "empty");
  EXPECT_NE(cli({"compare", "--algos", "bb", "--traces", path("empty")}).code, 0);
  EXPECT_NE(cli({"compare", "--algos", "bb", "--traces", path("missing")}).code, 0);
}

TEST_F(CliTest, TrainWritesArtifactsAndIsDeterministic) {
  make_traces("tr", "markov", 2);
  write_config("c.json", R"({"trace_dir": "tr", "total_epochs": 10, "n_actors": 2,
                             "hidden": [8], "threads": 1})");
  for (const char* out : {"a", "b"}) {
    const auto r = cli({"train", path("c.json"), "--seed", "42", "--out", path(out)});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("updates=10"), std::string::npos);
  }
  const auto rows = read_csv(dir / "a" / "learning_curve.csv");
  EXPECT_EQ(rows.size(), 11u);
  for (const char* f : {"best_actor.json", "best_critic.json", "last_actor.json", "last_critic.json"}) {
    EXPECT_EQ(read_file(dir / "a" / f), read_file(dir / "b" / f)) << f;
  }
  EXPECT_EQ(strip_seconds(read_file(dir / "a" / "learning_curve.csv")),
            strip_seconds(read_file(dir / "b" / "learning_curve.csv")));
}

TEST_F(CliTest, TrainA3cOverride) {
  make_traces("tr", "markov", 1);
  write_config("c.json", R"({"trace_dir": "tr", "out_dir": "o", "total_epochs": 3, "n_actors": 2,
                             "hidden": [8], "threads": 1})");
  const auto r = cli({"train", path("c.json"), "--algo", "a3c"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("trained a3c"), std::string::npos);
}

TEST_F(CliTest, TrainConfigErrors) {
  write_config("c.json", R"({"trace_dir": "nowhere", "out_dir": "o"})");
  auto r = cli({"train", path("c.json")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("nowhere"), std::string::npos);
  write_config("bad.json", R"({"trace_dir": "tr", "gama": 0.9})");
  EXPECT_EQ(cli({"train", path("bad.json")}).code, 1);
  write_config("broken.json", "{");
  EXPECT_EQ(cli({"train", path("broken.json")}).code, 1);
  make_traces("tr", "markov", 1);
  write_config("inv.json", R"({"trace_dir": "tr", "out_dir": "o", "gamma": 2.0})");
  EXPECT_NE(cli({"train", path("inv.json")}).code, 0);
  EXPECT_EQ(cli({"train", path("absent.json")}).code, 1);
}

TEST_F(CliTest, SeedFallsBackToEnvironment) {
  const auto base = dir.path();
  ::setenv("ABRLAB_SEED", "77", 1);
  const auto c = run_config_from_json(nlohmann::json::parse(R"({"trace_dir": "t"})"), base);
  EXPECT_EQ(c.train.seed, 77u);
  const auto explicit_seed =
      run_config_from_json(nlohmann::json::parse(R"({"seed": 5})"), base);
  EXPECT_EQ(explicit_seed.train.seed, 5u);
  ::setenv("ABRLAB_SEED", "x", 1);
  EXPECT_ANY_THROW(run_config_from_json(nlohmann::json::parse("{}"), base));
  ::unsetenv("ABRLAB_SEED");
  EXPECT_EQ(run_config_from_json(nlohmann::json::parse("{}"), base).train.seed, 42u);
  EXPECT_EQ(c.trace_dir, base / "t");
}

TEST_F(CliTest, ConfigRoundTripAndHash) {
  RunConfig c;
  c.train.lr_actor = 3e-4;
  c.trace_dir = "/x";
  const auto back = run_config_from_json(run_config_to_json(c), "/");
  EXPECT_EQ(run_config_to_json(back), run_config_to_json(c));
  auto moved = c;
  moved.trace_dir = "/y";
  moved.train.threads = 8;
  EXPECT_EQ(config_hash(moved), config_hash(c));
  moved.train.seed = 1;
  EXPECT_NE(config_hash(moved), config_hash(c));
}

TEST_F(CliTest, VerifySuites) {
  for (const char* suite : {"gradcheck", "envoracle", "mpcoracle", "all"}) {
    const auto r = cli({"verify", "--suite", suite});
    EXPECT_EQ(r.code, 0) << suite << "\n" << r.out;
    EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
    EXPECT_NE(r.out.find("PASS"), std::string::npos);
  }
  EXPECT_EQ(cli({"verify", "--suite", "everything"}).code, 1);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(cli({}).code, 1);
  EXPECT_EQ(cli({"frobnicate"}).code, 1);
  EXPECT_EQ(cli({"eval", "--algo", "bb"}).code, 1);
  make_traces("tr", "markov", 1);
  EXPECT_EQ(cli({"eval", "--algo", "dash", "--traces", path("tr")}).code, 1);
  EXPECT_EQ(cli({"eval", "--algo", "bb", "--traces", path("tr"), "--qoe", "exp"}).code, 1);
  EXPECT_EQ(cli({"--help"}).code, 0);
}

}  // namespace
}  // namespace abrlab::cli
