#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "fibid/serialize.hpp"

namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
};

// Runs the CLI with a shell-quoted argument string, capturing stdout and stderr.
CliRun cli(const std::string& args) {
  const std::string cmd = std::string("'") + FIBID_CLI_PATH + "' " + args + " 2>&1";
  CliRun r;
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, p)) r.out.append(buf, n);
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "fibid_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

}  // namespace

TEST(CliProve, ExitCodes) {
  EXPECT_EQ(cli("prove 'F[n]^2 - F[n+r]*F[n-r] = (-1)^(n-r)*F[r]^2' --vars n,r").code, 0);
  const CliRun bad = cli("prove 'F[n+1] = F[n]' --vars n");
  EXPECT_EQ(bad.code, 1);
  EXPECT_TRUE(contains(bad.out, "n=")) << bad.out;
  EXPECT_EQ(cli("prove 'F[0] = 0'").code, 0);
  EXPECT_EQ(cli("prove 'F[n] = F[n+1'").code, 2);
  EXPECT_EQ(cli("prove 'sum(k=0..n, F[n+k]) = 0' --vars n").code, 2);
  EXPECT_EQ(cli("prove").code, 2);
  EXPECT_EQ(cli("--help").code, 0);
}

TEST(CliProve, CounterexampleReevaluates) {
  const CliRun r = cli("--json prove 'F[n+1] = F[n]' --vars n");
  ASSERT_EQ(r.code, 1);
  const auto j = fibid::Json::parse(r.out);
  const auto& at = j.at("counterexample").at("assignment");
  const std::string n = at.at("n").is_string() ? at.at("n").template get<std::string>() : std::to_string(at.at("n").template get<long>());
  const CliRun lhs = cli("eval 'F[n+1]' --at n=" + n);
  const CliRun rhs = cli("eval 'F[n]' --at n=" + n);
  EXPECT_NE(lhs.out, rhs.out);
}

TEST(CliProve, CertificateReloadsAndChecks) {
  const fs::path cert = scratch("catalan.json");
  const CliRun r = cli("prove 'F[n]^2 - F[n+r]*F[n-r] = (-1)^(n-r)*F[r]^2' --vars n,r --certificate-out '" + cert.string() + "'");
  ASSERT_EQ(r.code, 0) << r.out;
  ASSERT_TRUE(fs::exists(cert));
  EXPECT_EQ(cli("check-certificate '" + cert.string() + "'").code, 0);

  // Tamper with a numeric base case inside the first nested certificate.
  std::ifstream in(cert);
  auto j = fibid::Json::parse(in);
  in.close();
  j["baseCases"][0]["certificate"]["baseCases"][0]["value"] = "12345";
  const fs::path bad = scratch("catalan_bad.json");
  std::ofstream(bad) << j.dump(2);
  EXPECT_EQ(cli("check-certificate '" + bad.string() + "'").code, 1);
  EXPECT_EQ(cli("check-certificate '" + scratch("missing.json").string() + "'").code, 2);
}

TEST(CliProve, RewriteAndMinimize) {
  EXPECT_EQ(cli("prove 'F[m]*F[n] = 1/5*(L[m+n] - (-1)^(n)*L[m-n])' --vars m,n --rewrite m=r-n").code, 0);
  const CliRun r = cli("prove 'F[n]^2 - F[n+r]*F[n-r] = (-1)^(n-r)*F[r]^2' --vars n,r --minimize");
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(contains(r.out, "minimized")) << r.out;
}

TEST(CliEval, Values) {
  const CliRun r = cli("eval 'F[n]^2 - F[n+r]*F[n-r]' --at n=7,r=3");
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(contains(r.out, "4")) << r.out;
  EXPECT_EQ(cli("eval 'F[n+1] = F[n]' --at n=2").code, 1);
  EXPECT_EQ(cli("eval 'F[n] = F[n]' --at n=2").code, 0);
  EXPECT_EQ(cli("eval 'F[n]'").code, 2);
}

TEST(CliDiscover, Examples) {
  const CliRun cube = cli("discover 'F[n]^3'");
  EXPECT_EQ(cube.code, 0);
  EXPECT_TRUE(contains(cube.out, "3*x(n+3) + 6*x(n+2) - 3*x(n+1) - x(n)")) << cube.out;
  const CliRun fl = cli("--json discover 'F[n]*L[n]'");
  ASSERT_EQ(fl.code, 0);
  const auto j = fibid::Json::parse(fl.out);
  EXPECT_EQ(j.at("order"), 2);
  EXPECT_EQ(j.at("descending"), (fibid::Json{"3", "-1"}));
  EXPECT_EQ(cli("discover '1'").code, 0);

  const fs::path terms = scratch("terms.txt");
  {
    std::ofstream f(terms);
    for (long n = 0, a = 0, b = 1; n < 20; ++n) {
      f << a * a << "\n";
      const long t = a + b;
      a = b;
      b = t;
    }
  }
  const CliRun t = cli("discover --terms '" + terms.string() + "'");
  EXPECT_EQ(t.code, 0);
  EXPECT_TRUE(contains(t.out, "2*x(n+2) + 2*x(n+1) - x(n)")) << t.out;
  EXPECT_EQ(cli("discover --terms '" + scratch("nope.txt").string() + "'").code, 2);
  {
    std::ofstream f(scratch("junk.txt"));
    f << "1\nfoo\n";
  }
  EXPECT_EQ(cli("discover --terms '" + scratch("junk.txt").string() + "'").code, 2);
  // F_n^4 needs order 5.
  EXPECT_EQ(cli("discover 'F[n]*F[n]*F[n]*F[n]' --max-order 3").code, 1);
}

TEST(CliConstruct, Examples) {
  const CliRun b4 = cli("construct 'F[3*n+3]' --basis 'F[n]*F[n+3]^2' --basis 'F[n-1]*F[n+2]^2' --basis 'F[n-2]*F[n+1]^2'");
  EXPECT_EQ(b4.code, 0) << b4.out;
  const CliRun d2 = cli("--json construct 'F[2*n+1]' --basis 'F[n+1]^2' --basis 'F[n]^2'");
  ASSERT_EQ(d2.code, 0);
  const auto j = fibid::Json::parse(d2.out);
  EXPECT_EQ(j.at("coefficients"), (fibid::Json{"1", "1"}));
  EXPECT_EQ(cli("construct 'F[n]' --basis 'L[n]'").code, 1);
  EXPECT_EQ(cli("construct 'sum(k=0..n, F[n+k])' --basis 'F[n]'").code, 2);
}

TEST(CliCorpus, RunsAndFilters) {
  const CliRun all = cli("--quiet corpus");
  EXPECT_EQ(all.code, 0) << all.out;
  const CliRun none = cli("corpus --filter no-such-entry");
  EXPECT_EQ(none.code, 0);
  const CliRun one = cli("--json corpus --filter product-via-lucas");
  ASSERT_EQ(one.code, 0);
  const auto j = fibid::Json::parse(one.out);
  ASSERT_EQ(j.at("entries").size(), 1u);
  EXPECT_EQ(j.at("entries")[0].at("verdict"), "proved");

  const fs::path extra = scratch("extra.txt");
  std::ofstream(extra) << "wrong | n | F[n+2] = F[n+1] | true\n";
  EXPECT_EQ(cli("corpus --filter wrong --file '" + extra.string() + "'").code, 1);
  EXPECT_EQ(cli("corpus --file '" + scratch("absent.txt").string() + "'").code, 2);
}

TEST(CliCorpus, CertificatesDirectoryReloads) {
  const fs::path dir = scratch("certs");
  fs::remove_all(dir);
  ASSERT_EQ(cli("--quiet corpus --filter melham --certificates '" + dir.string() + "'").code, 0);
  int files = 0;
  for (const auto& f : fs::directory_iterator(dir)) {
    ++files;
    EXPECT_EQ(cli("check-certificate '" + f.path().string() + "'").code, 0) << f.path();
  }
  EXPECT_GE(files, 5);
}

TEST(CliGraph, Examples) {
  const CliRun scan = cli("graph --terms 9 --scan");
  EXPECT_EQ(scan.code, 0) << scan.out;
  EXPECT_TRUE(contains(scan.out, "(-104,168,273)")) << scan.out;
  const CliRun seed = cli("--json graph --depth 0");
  ASSERT_EQ(seed.code, 0);
  const auto j = fibid::Json::parse(seed.out);
  EXPECT_EQ(j.at("graph").at("nodes").size(), 1u);
  EXPECT_EQ(cli("graph --seed '(1,1,0);(0,1,0);(0,0,1)'").code, 2);
  EXPECT_EQ(cli("graph --depth 17").code, 2);
  const CliRun dot = cli("graph --depth 1 --dot");
  EXPECT_EQ(dot.code, 0);
  EXPECT_TRUE(contains(dot.out, "graph {")) << dot.out;
  EXPECT_TRUE(contains(dot.out, " -- ")) << dot.out;
}
