#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string err;
};

Outcome cli(const std::string& args) {
  const auto err_path = fs::temp_directory_path() / "auditlab_cli_stderr.txt";
  const std::string cmd = std::string(AUDITLAB_CLI) + " " + args + " >/dev/null 2>" + err_path.string();
  const int status = std::system(cmd.c_str());
  Outcome o;
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(err_path);
  std::ostringstream ss;
  ss << in.rdbuf();
  o.err = ss.str();
  return o;
}

std::string out_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("auditlab_cli_" + name);
  fs::remove_all(p);
  return p.string();
}

}  // namespace

TEST(Cli, MissingCatalogExitsTwoNamingTheFlag) {
  const auto o = cli("design --seed 1 --out " + out_dir("cat") + " --catalog /nonexistent/catalog.conf");
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.err.find("--catalog"), std::string::npos) << o.err;
  EXPECT_NE(o.err.find("\"error\":\"config\""), std::string::npos) << o.err;
}

TEST(Cli, MissingSeedExitsTwo) {
  const auto o = cli("design --out " + out_dir("seed"));
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.err.find("--seed"), std::string::npos) << o.err;
}

TEST(Cli, UnknownFlagExitsTwo) {
  EXPECT_EQ(cli("design --seed 1 --bogus").code, 2);
  EXPECT_EQ(cli("").code, 2);
  EXPECT_EQ(cli("fit nonsense --out " + out_dir("fit")).code, 2);
}

TEST(Cli, UnknownConfigKeyExitsTwo) {
  const auto o = cli("design --seed 1 --out " + out_dir("key") + " --set design.typo=3");
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.err.find("design.typo"), std::string::npos);
}

TEST(Cli, MissingInputExitsOne) {
  const auto o = cli("ingest --out " + out_dir("input"));
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("\"error\":\"data\""), std::string::npos) << o.err;
}

TEST(Cli, DesignSucceedsAndVerifies) {
  const auto dir = out_dir("ok");
  EXPECT_EQ(cli("design --seed 3 --out " + dir + " --set design.n_investors=10 --n-profiles 8").code, 0);
  EXPECT_TRUE(fs::exists(fs::path(dir) / "profiles.csv"));
  EXPECT_EQ(cli("verify --out " + dir).code, 0);
  fs::remove_all(dir);
}

TEST(Cli, VersionAndHelp) {
  EXPECT_EQ(cli("--version").code, 0);
  EXPECT_EQ(cli("--help").code, 0);
}
