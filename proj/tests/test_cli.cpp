#include "irkprec/cli.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace irkprec;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "irkprec");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(int(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> echoed_flags(const std::string& text) {
  std::vector<std::string> flags;
  std::istringstream is(text);
  std::string line;
  std::getline(is, line);  // "# irkprec <sub>"
  while (std::getline(is, line) && line.rfind("# --", 0) == 0) flags.push_back(line.substr(2));
  return flags;
}

}  // namespace

TEST(Cli, TableauPrintsAndValidates) {
  const auto r = run({"tableau", "--family", "gauss", "--stages", "2"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("# irkprec tableau"), std::string::npos);
  EXPECT_NE(r.out.find("A0[0]"), std::string::npos);
  EXPECT_NE(r.out.find("row_sums"), std::string::npos);
  const auto c = run({"tableau", "--family", "radau", "--stages", "3", "--csv"});
  EXPECT_EQ(c.code, 0);
  EXPECT_NE(c.out.find("order,5"), std::string::npos);
}

TEST(Cli, SpectrumListsFactors) {
  const auto r = run({"spectrum", "--family", "lobattoIIIC", "--stages", "5", "--csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("factor,kind,eta,beta,gamma_star,kappa_bound"), std::string::npos);
  EXPECT_NE(r.out.find(",2.42399548"), std::string::npos);
  EXPECT_NE(r.out.find("# char_poly ascending:"), std::string::npos);
  EXPECT_NE(r.out.find("# R[4] ascending:"), std::string::npos);
}

TEST(Cli, CondTightLobattoTwo) {
  const auto r = run({"cond", "--family", "lobattoIIIC", "--stages", "2", "--mode", "tight"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream is(r.out);
  std::string line, row;
  while (std::getline(is, line))
    if (line.rfind("0,", 0) == 0) row = line;
  ASSERT_FALSE(row.empty());
  std::vector<double> v;
  std::stringstream ss(row);
  std::string cell;
  while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
  ASSERT_EQ(v.size(), 6u);
  EXPECT_NEAR(v[4], std::sqrt(2.0), 1e-8);
  EXPECT_NEAR(v[5], std::sqrt(2.0), 1e-12);
}

TEST(Cli, CondOtherModes) {
  for (const char* m : {"random", "scan", "optimality"}) {
    const auto r = run({"cond", "--family", "gauss", "--stages", "3", "--mode", m, "--trials", "2",
                        "--n", "8"});
    EXPECT_EQ(r.code, 0) << m << ": " << r.err;
  }
  EXPECT_EQ(run({"cond", "--mode", "bogus"}).code, 2);
}

TEST(Cli, RunReportsOrders) {
  const auto r = run({"run", "--problem", "advdiff1d", "--grids", "16,32", "--tf", "0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find(kCsvHeader), std::string::npos);
  EXPECT_NE(r.out.find("# observed_order,16,32,linf="), std::string::npos);
}

TEST(Cli, NonConvergenceExitCode) {
  const auto r = run({"run", "--problem", "advdiff2d", "--nx", "16", "--tf", "0.5", "--inner",
                      "jacobi:1", "--max-iters", "1", "--dt-ratio", "8"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find(",0\n"), std::string::npos);  // converged column
}

TEST(Cli, BadArgumentsExitTwo) {
  EXPECT_EQ(run({"tableau", "--bogus"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"tableau", "--family", "nope"}).code, 2);
  EXPECT_EQ(run({"tableau", "--family", "gauss", "--stages", "9"}).code, 2);
  EXPECT_EQ(run({"run", "--problem", "burgers"}).code, 2);
  EXPECT_EQ(run({"run", "--problem", "advdiff1d", "--order-space", "3", "--nx", "16"}).code, 2);
  EXPECT_EQ(run({"run", "--inner", "gs:0"}).code, 2);
  EXPECT_EQ(run({"run", "--krylov", "bicg"}).code, 2);
  EXPECT_EQ(run({"run", "--gamma-mode", "zero"}).code, 2);
  EXPECT_EQ(run({"inner-sweep", "--relax", "sor"}).code, 2);
  EXPECT_EQ(run({"run", "--grids", "32,16"}).code, 2);
  const auto r = run({"cond", "--stages"});
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(r.err.empty());
}

TEST(Cli, EchoRoundTrips) {
  const std::vector<std::vector<std::string>> cases = {
      {"tableau", "--family", "radau", "--stages", "3", "--csv"},
      {"cond", "--mode", "random", "--trials", "3", "--n", "6", "--seed", "9"},
      {"run", "--problem", "advdiff1d", "--grids", "16,32", "--tf", "0.25", "--inner", "gs:2",
       "--gamma-mode", "eta", "--tol", "1e-10"},
      {"inner-sweep", "--problem", "advdiff1d", "--nx", "16", "--tf", "0.25", "--sweeps", "1,2"},
  };
  for (const auto& args : cases) {
    const auto first = run(args);
    ASSERT_EQ(first.code, 0) << args[0] << ": " << first.err;
    std::vector<std::string> again{args[0]};
    for (const auto& f : echoed_flags(first.out)) again.push_back(f);
    const auto second = run(again);
    ASSERT_EQ(second.code, 0) << args[0] << ": " << second.err;
    EXPECT_EQ(first.out, second.out) << args[0];
  }
}

TEST(Cli, OutputFile) {
  const auto path = std::filesystem::temp_directory_path() / "irkprec_cli_test.txt";
  const auto r = run({"spectrum", "--family", "gauss", "--stages", "2", "--output", path.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  EXPECT_NE(buf.str().find("gamma_star"), std::string::npos);
  std::filesystem::remove(path);
  EXPECT_EQ(run({"spectrum", "--output", "/nonexistent-dir/x.txt"}).code, 2);
}

TEST(Cli, CompareGammaAndBaseline) {
  const auto g = run({"compare-gamma", "--problem", "advect1d-upwind", "--family", "gauss",
                      "--stages", "3", "--nx", "32", "--tf", "0.25"});
  ASSERT_EQ(g.code, 0) << g.err;
  EXPECT_NE(g.out.find("# speedup,nx=32,factor=1,1\n"), std::string::npos);
  const auto b = run({"baseline", "--problem", "advdiff1d", "--nx", "16", "--tf", "0.25"});
  ASSERT_EQ(b.code, 0) << b.err;
  for (const char* label : {",irk,", ",gsl,", ",ld,", ",sdirk,"})
    EXPECT_NE(b.out.find(label), std::string::npos) << label;
}

TEST(Cli, HelpExitsZero) {
  const auto r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("compare-gamma"), std::string::npos);
}
