// End-to-end checks of the command-line tool: exit codes and byte-identical
// reruns. The binary path arrives via the QSPCAT_CLI_BIN environment variable
// set by ctest.

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sys/wait.h>
#include <unistd.h>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

std::string cli_bin() {
  const char* bin = std::getenv("QSPCAT_CLI_BIN");
  REQUIRE_MESSAGE(bin != nullptr, "QSPCAT_CLI_BIN must point at the CLI binary");
  return bin;
}

int run_cli(const std::string& args, const fs::path& dir) {
  const std::string cmd =
      "cd " + dir.string() + " && " + cli_bin() + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("qspcat_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

constexpr const char* kTau =
    R"({"num_vars":1,"ambient_dim":2,"terms":[
        {"exp":[0],"coeff":[[0.5,0],[0.5,0]]},
        {"exp":[1],"coeff":[[0.5,0],[-0.5,0]]}]})";

}  // namespace

TEST_CASE("synthesize then verify exits 0") {
  TempDir tmp;
  write(tmp.path / "tau.json", kTau);
  CHECK(run_cli("synthesize --target tau.json --out p.json", tmp.path) == 0);
  CHECK(run_cli("verify --protocol p.json --target tau.json --grid 257 --out v.csv",
                tmp.path) == 0);
  // CSV has a header and one row per grid point.
  std::istringstream csv(slurp(tmp.path / "v.csv"));
  std::string line;
  int rows = 0;
  REQUIRE(std::getline(csv, line));
  CHECK(line == "theta_1,error");
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 257);
}

TEST_CASE("malformed JSON exits 2") {
  TempDir tmp;
  write(tmp.path / "bad.json", "{this is not json");
  CHECK(run_cli("synthesize --target bad.json --out p.json", tmp.path) == 2);
  write(tmp.path / "missing_field.json", R"({"num_vars":1,"terms":[]})");
  CHECK(run_cli("synthesize --target missing_field.json --out p.json", tmp.path) == 2);
  CHECK(run_cli("frobnicate --target x.json", tmp.path) == 2);
}

TEST_CASE("corrupted protocol exits 1") {
  TempDir tmp;
  write(tmp.path / "tau.json", kTau);
  REQUIRE(run_cli("synthesize --target tau.json --out p.json", tmp.path) == 0);
  std::string text = slurp(tmp.path / "p.json");
  // Structural corruption that keeps the JSON valid and the operators
  // unitary: swap the layer symbols.
  auto pos = text.find("\"layers\":[[\"1\",\"z1\"]");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 21, "\"layers\":[[\"z1\",\"1\"]");
  write(tmp.path / "corrupt.json", text);
  CHECK(run_cli("verify --protocol corrupt.json --target tau.json --out v.csv",
                tmp.path) == 1);
}

TEST_CASE("byte-identical outputs across reruns with the same seed") {
  TempDir tmp;
  write(tmp.path / "z1z2.json",
        R"({"num_vars":2,"ambient_dim":1,"terms":[{"exp":[1,1],"coeff":[[1,0]]}]})");
  const std::string cmd =
      "mqsp-solve --target z1z2.json --window 2,2 --min-rank --out b.json "
      "--report r.json --set seed=42";
  REQUIRE(run_cli(cmd, tmp.path) == 0);
  const std::string first_blocks = slurp(tmp.path / "b.json");
  const std::string first_report = slurp(tmp.path / "r.json");
  REQUIRE(run_cli(cmd, tmp.path) == 0);
  CHECK(slurp(tmp.path / "b.json") == first_blocks);
  CHECK(slurp(tmp.path / "r.json") == first_report);

  write(tmp.path / "tau.json", kTau);
  REQUIRE(run_cli("synthesize --target tau.json --out p1.json", tmp.path) == 0);
  REQUIRE(run_cli("synthesize --target tau.json --out p2.json", tmp.path) == 0);
  CHECK(slurp(tmp.path / "p1.json") == slurp(tmp.path / "p2.json"));
}

TEST_CASE("QSPCAT_OUT_DIR redirects relative outputs") {
  TempDir tmp;
  write(tmp.path / "tau.json", kTau);
  fs::path outdir = tmp.path / "artifacts";
  const std::string cmd = "cd " + tmp.path.string() + " && QSPCAT_OUT_DIR=" +
                          outdir.string() + " " + cli_bin() +
                          " synthesize --target tau.json --out p.json >/dev/null 2>&1";
  CHECK(WEXITSTATUS(std::system(cmd.c_str())) == 0);
  CHECK(fs::exists(outdir / "p.json"));
}

TEST_CASE("simulate emits report plus CSV sidecar") {
  TempDir tmp;
  write(tmp.path / "z8.json",
        R"({"num_vars":1,"ambient_dim":1,"terms":[{"exp":[8],"coeff":[[1,0]]}]})");
  write(tmp.path / "inst.json",
        R"({"qsp":{"target":{"num_vars":1,"ambient_dim":1,
            "terms":[{"exp":[8],"coeff":[[1,0]]}]},"grid":17}})");
  REQUIRE(run_cli("catalyst --target z8.json --out cat.json", tmp.path) == 0);
  REQUIRE(run_cli("simulate --instance inst.json --catalyst cat.json "
                  "--epsilon 0.4 --epsilon 0.2 --out rep.json",
                  tmp.path) == 0);
  std::istringstream csv(slurp(tmp.path / "rep.csv"));
  std::string line;
  REQUIRE(std::getline(csv, line));
  CHECK(line == "T,max_error");
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 2);
}
