#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
};

Result oco(const std::string& args) {
  const fs::path log = fs::temp_directory_path() / "oco_cli_test.log";
  const std::string cmd = std::string("\"") + OCO_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  return nlohmann::json::parse(in);
}

}  // namespace

TEST_CASE("cli run writes the trace and summary") {
  const auto dir = fresh_dir("oco_cli_run");
  const auto r = oco("run --problem toy --algo clipped-ogd --T 200 --seed 3 --out " + dir.string());
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "trace.csv"));
  const auto j = read_json(dir / "summary.json");
  CHECK(j["T"] == 200);
  CHECK(j["seed"] == 3);
  CHECK(j["algo"] == "clipped-ogd");
}

TEST_CASE("cli usage errors exit with 2") {
  CHECK(oco("run --problem toy").code == 2);
  CHECK(oco("run --problem toy --T 10 --beta 1.5").code == 2);
  CHECK(oco("run --problem knapsack --T 10").code == 2);
  CHECK(oco("frobnicate").code == 2);
  CHECK(oco("run --problem toy --T 10 --config /nonexistent/oco.cfg").code == 2);
}

TEST_CASE("cli strong variant uses the problem modulus") {
  const auto dir = fresh_dir("oco_cli_strong");
  CHECK(oco("run --problem doubly-stochastic --algo strong --T 50 --out " + dir.string()).code == 0);
  CHECK(read_json(dir / "summary.json")["params"]["H1"] == 1.0);
  CHECK(oco("run --problem toy --algo strong --T 50 --out " + dir.string()).code == 2);
}

TEST_CASE("cli oracle cache") {
  const auto dir = fresh_dir("oco_cli_oracle");
  const auto first = oco("oracle --problem toy --seed 2 --T 300 --out " + dir.string());
  CHECK(first.code == 0);
  CHECK(first.out.find("computed") != std::string::npos);
  const auto second = oco("oracle --problem toy --seed 2 --T 300 --out " + dir.string());
  CHECK(second.code == 0);
  CHECK(second.out.find("cached") == 0);
  CHECK(second.out.find("\"cached\": true") != std::string::npos);
}

TEST_CASE("cli config file with command-line precedence") {
  const auto dir = fresh_dir("oco_cli_config");
  const auto cfg = dir / "run.cfg";
  std::ofstream(cfg) << "# defaults\nproblem = toy\nT = 120\nseed = 5\nalgo = a-ogd\n";
  CHECK(oco("run --config " + cfg.string() + " --out " + (dir / "a").string()).code == 0);
  const auto a = read_json(dir / "a" / "summary.json");
  CHECK(a["T"] == 120);
  CHECK(a["algo"] == "a-ogd");
  CHECK(oco("run --config " + cfg.string() + " --T 60 --out " + (dir / "b").string()).code == 0);
  const auto b = read_json(dir / "b" / "summary.json");
  CHECK(b["T"] == 60);
  CHECK(b["seed"] == 5);
}

TEST_CASE("cli sweep is independent of jobs") {
  const auto dir = fresh_dir("oco_cli_sweep");
  const std::string common = "sweep --problem toy --algos clipped-ogd,ogd --T 50,100,200 --seeds 3 ";
  CHECK(oco(common + "--jobs 1 --out " + (dir / "j1").string()).code == 0);
  CHECK(oco(common + "--jobs 3 --out " + (dir / "j3").string()).code == 0);
  std::ifstream a(dir / "j1" / "sweep.csv");
  std::ifstream b(dir / "j3" / "sweep.csv");
  std::stringstream sa;
  std::stringstream sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK(!sa.str().empty());
  CHECK(sa.str() == sb.str());
  CHECK(fs::exists(dir / "j1" / "fig_clipped_violation.csv"));
}

TEST_CASE("cli kernel selection") {
  const auto dir = fresh_dir("oco_cli_kernels");
  CHECK(oco("--kernels scalar run --problem toy --T 100 --out " + (dir / "s").string()).code == 0);
  CHECK(oco("--kernels auto run --problem toy --T 100 --out " + (dir / "a").string()).code == 0);
  CHECK(fs::exists(dir / "s" / "trace.csv"));
  CHECK(oco("--kernels sse9 run --problem toy --T 100").code == 2);
}

TEST_CASE("cli demand writer") {
  const auto dir = fresh_dir("oco_cli_demand");
  const auto path = dir / "d.csv";
  CHECK(oco("demand --steps 10 --out " + path.string()).code == 0);
  std::ifstream in(path);
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 11);
}
