#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "condlaw/cli.hpp"
#include "condlaw/errors.hpp"

using namespace condlaw;
using namespace condlaw::cli;

namespace {

Config config_of(std::initializer_list<std::pair<const std::string, std::string>> kv) { return Config{kv}; }

std::string csv_of(const RunReport& r) {
  std::ostringstream out;
  write_csv(r, out);
  return out.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) out.push_back(line);
  return out;
}

struct Exec {
  int status;
  std::string err;
};

Exec run_binary(const std::string& args) {
  const std::string err_path = ::testing::TempDir() + "condlaw_stderr.txt";
  const std::string cmd = std::string(CONDLAW_BINARY) + " " + args + " > /dev/null 2> " + err_path;
  const int raw = std::system(cmd.c_str());
  std::ifstream in(err_path);
  std::stringstream buf;
  buf << in.rdbuf();
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, buf.str()};
}

}  // namespace

TEST(Enumerate, ThreeBallsInFourCells) {
  auto rep = run("enumerate", config_of({{"n", "3"}}));
  std::int64_t total = 0;
  for (const auto& row : rep.rows) total += std::get<std::int64_t>(row[1]);
  EXPECT_EQ(total, 64);
  EXPECT_EQ(rep.summary["max_displacement"].get<int>(), 3);
  EXPECT_EQ(rep.summary["sequences"].get<int>(), 64);
  EXPECT_TRUE(rep.passed());
}

TEST(HashingSim, WorkedExample) {
  auto rep = run("hashing-sim", config_of({{"m", "10"}, {"sequence", "6,9,1,9,9,6,2,5"}}));
  EXPECT_EQ(rep.summary["trials"][0]["total"].get<int>(), 6);
  const std::vector<std::int64_t> disp = {0, 0, 0, 1, 3, 1, 1, 0};
  ASSERT_EQ(rep.rows.size(), disp.size());
  for (std::size_t i = 0; i < disp.size(); ++i) EXPECT_EQ(std::get<std::int64_t>(rep.rows[i][4]), disp[i]);
  EXPECT_EQ(rep.summary["trials"][0]["block_lengths"], nlohmann::json({6, 4}));
  EXPECT_TRUE(rep.passed());
}

TEST(HashingSim, RandomTrialsAgreeWithFormula) {
  auto rep = run("hashing-sim", config_of({{"m", "40"}, {"balls", "39"}, {"trials", "25"}, {"seed", "5"}}));
  EXPECT_EQ(rep.rows.size(), 25u * 39u);
  EXPECT_TRUE(rep.passed());
}

TEST(Csv, FixedHeaders) {
  auto header = [](const std::string& exp, Config cfg) { return lines_of(csv_of(run(exp, cfg))).at(1); };
  EXPECT_EQ(header("berry-esseen", config_of({{"n_grid", ""}})), "N,samples,D,DsqrtN,ci");
  EXPECT_EQ(header("hashing-sim", {}), "trial,ball,address,cell,displacement,block_start");
  EXPECT_EQ(header("enumerate", config_of({{"n", "2"}})), "displacement,count,probability");
  EXPECT_EQ(header("tails", config_of({{"y_grid", ""}})), "y,count,samples,prob,normalized,ci_low,ci_high,lower,upper,verdict");
}

TEST(Csv, EmptyGridIsHeaderOnly) {
  auto rep = run("berry-esseen", config_of({{"n_grid", ""}}));
  auto lines = lines_of(csv_of(rep));
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0].rfind("# condlaw 0.1.0", 0), 0u);
  EXPECT_TRUE(rep.passed());
}

TEST(Csv, SeventeenDigits) {
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
  EXPECT_EQ(format_number(2.0), "2");
  auto csv = csv_of(run("enumerate", config_of({{"n", "3"}})));
  EXPECT_NE(csv.find("0,24,0.375\n"), std::string::npos);
}

TEST(Config, EveryOffendingFieldListed) {
  try {
    run("berry-esseen", config_of({{"bogus", "1"}, {"samples", "abc"}, {"family", "zzz"}, {"seed", "-3"}}));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.problems().size(), 4u);
    const std::string msg = e.what();
    for (const char* key : {"bogus", "samples", "family", "seed"}) EXPECT_NE(msg.find(key), std::string::npos) << key;
  }
}

TEST(Config, ExperimentMismatch) {
  EXPECT_THROW(run("enumerate", config_of({{"experiment", "tails"}})), ConfigError);
}

TEST(Config, IniSyntax) {
  auto cfg = parse_config("# comment\n[run]\nn = 4 ; trailing\nlambda=0.3\n\n");
  EXPECT_EQ(cfg.values.at("n"), "4");
  EXPECT_EQ(cfg.values.at("lambda"), "0.3");
  try {
    parse_ini("n = 1\nn = 2\nnot a pair\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.problems().size(), 2u);
  }
}

TEST(Config, JsonSyntax) {
  auto cfg = parse_config(R"({"n_grid": [100, 400], "lambda": 0.3, "moments": false, "family": "occupancy"})");
  EXPECT_EQ(cfg.values.at("n_grid"), "100,400");
  EXPECT_EQ(cfg.values.at("lambda"), "0.3");
  EXPECT_EQ(cfg.values.at("moments"), "false");
  EXPECT_THROW(parse_config(R"({"a": {"b": 1}})"), ConfigError);
  EXPECT_THROW(parse_config("{oops"), ConfigError);
}

TEST(Config, RangesExpand) {
  auto rep = run("exact-conditional", config_of({{"n", "3"}, {"k", "3"}}));
  EXPECT_TRUE(rep.passed());
  auto grid = run("tails", config_of({{"y_grid", "1:3:1, 10"}, {"budget", "1000"}}));
  ASSERT_EQ(grid.rows.size(), 4u);
  EXPECT_EQ(std::get<double>(grid.rows[3][0]), 10.0);
}

TEST(Config, HashIsFnv1a) {
  EXPECT_EQ(config_hash(Config{}), "08f44b07b5901a25");
  auto rep = run("enumerate", config_of({{"n", "3"}}));
  EXPECT_EQ(canonical_json(rep.config), R"({"experiment":"enumerate","n":"3","seed":"1"})");
  EXPECT_EQ(config_hash(rep.config), "74156dc189c545ab");
}

TEST(Json, RoundTripReproducesConfig) {
  auto rep = run("tails", config_of({{"lambda", "0.25"}, {"y_grid", "1,4"}, {"budget", "1e5"}, {"seed", "77"}}));
  std::ostringstream out;
  write_json(rep, out);
  const auto parsed = nlohmann::json::parse(out.str());
  for (const char* key : {"config", "results", "verdicts", "version", "config_hash", "wall_seconds"})
    EXPECT_TRUE(parsed.contains(key)) << key;
  const Config back = parse_json(out.str());
  EXPECT_EQ(canonical_json(back), canonical_json(rep.config));
  // the echoed config alone reruns to the same numbers
  EXPECT_EQ(csv_of(run("tails", back)), csv_of(rep));
}

TEST(Determinism, IdenticalCsvAcrossRunsAndWorkers) {
  const Config cfg = config_of({{"y_grid", "1,3,8"}, {"budget", "300000"}, {"seed", "9"}});
  const auto a = csv_of(run("tails", cfg, 1));
  EXPECT_EQ(a, csv_of(run("tails", cfg, 1)));
  EXPECT_EQ(a, csv_of(run("tails", cfg, 3)));
  const Config be = config_of({{"n_grid", "20,40"}, {"samples", "10000"}, {"seed", "3"}});
  EXPECT_EQ(csv_of(run("berry-esseen", be, 1)), csv_of(run("berry-esseen", be, 2)));
}

TEST(Binary, InvalidLambdaExitsOne) {
  auto r = run_binary("tails --set lambda=0.5");
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("domain error"), std::string::npos);
}

TEST(Binary, VerdictFailureExitsTwo) {
  auto r = run_binary("tails --set y_grid=2 --set budget=100000 --set tolerance=-3");
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.err.find("FAIL bracket"), std::string::npos);
}

TEST(Binary, ConfigErrorsExitOne) {
  auto r = run_binary("enumerate --set n=99 --set colour=blue");
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("n:"), std::string::npos);
  EXPECT_NE(r.err.find("colour:"), std::string::npos);
}

TEST(Binary, UnwritableOutputExitsOne) {
  auto r = run_binary("enumerate --out /nonexistent/dir/out.csv");
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("/nonexistent/dir/out.csv"), std::string::npos);
}

TEST(Binary, PassingRunExitsZero) { EXPECT_EQ(run_binary("enumerate --format json").status, 0); }
