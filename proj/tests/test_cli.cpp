/* Copyright 2026 The ppi-carbon Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

     http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const std::string kCli = PPI_CLI_PATH;
const std::string kTable1 = std::string(PPI_SOURCE_DIR) + "/configs/table1.toml";

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = fs::temp_directory_path() / ("ppi_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

int run(const std::string& args, const fs::path& log) {
  const std::string cmd = kCli + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("solve writes coefficient tables") {
  TempDir dir("solve");
  const auto out = dir / "o";
  REQUIRE(run("solve --config " + kTable1 + " --delta 1 --out " + out, dir / "log") == 0);
  const auto csv = slurp(out + "/solution_log.csv");
  CHECK(csv.rfind("t,f,g,h\n", 0) == 0);
  CHECK(csv.find("\n5,0,0,0\n") != std::string::npos);
  CHECK(fs::exists(out + "/filter_variance.csv"));

  REQUIRE(run("solve --config " + kTable1 + " --delta 3 --epsilon 1 --out " + out, dir / "log") == 0);
  CHECK(fs::exists(out + "/solution_full.csv"));
  CHECK(fs::exists(out + "/solution_partial.csv"));
}

TEST_CASE("invalid input exits with the validation code and writes nothing") {
  TempDir dir("bad");
  std::string text = slurp(kTable1);
  text.replace(text.find("sigma = [0.19"), 13, "sigma = [-0.19");
  std::ofstream(dir / "bad.toml") << text;
  const auto out = dir / "o";
  CHECK(run("simulate --config " + (dir / "bad.toml") + " --paths 10 --out " + out, dir / "log") == 2);
  CHECK(slurp(dir / "log").find("sigma must be positive") != std::string::npos);
  CHECK((!fs::exists(out) || fs::is_empty(out)));

  CHECK(run("simulate --config " + kTable1 + " --scenario S9 --out " + out, dir / "log") == 2);
  CHECK(run("simulate --config " + kTable1 + " --mode latent", dir / "log") == 2);
  CHECK(run("solve", dir / "log") == 2);
}

TEST_CASE("admissibility report is printed and saved as JSON") {
  TempDir dir("adm");
  const auto out = dir / "o";
  REQUIRE(run("admissibility --config " + kTable1 + " --delta 3 --epsilon 1 --out " + out,
              dir / "log") == 0);
  const auto j = nlohmann::json::parse(slurp(out + "/admissibility.json"));
  CHECK(j["delta"] == 3.0);
  CHECK(j["regime"] == "delta>1");
  CHECK(j["checks"].size() == 6);
  CHECK(slurp(dir / "log").find("\"overall\"") != std::string::npos);
}

TEST_CASE("simulation output does not depend on the worker count") {
  TempDir dir("sim");
  const std::string base = "simulate --config " + kTable1 + " --paths 300 --dt 0.02 --seed 5 ";
  REQUIRE(run(base + "--workers 1 --out " + (dir / "a"), dir / "log") == 0);
  REQUIRE(run(base + "--workers 4 --out " + (dir / "b"), dir / "log") == 0);
  const auto a = slurp(dir / "a/paths.csv");
  CHECK(a.size() > 0);
  CHECK(a == slurp(dir / "b/paths.csv"));
  CHECK(slurp(dir / "a/stats.json") == slurp(dir / "b/stats.json"));
  const auto stats = nlohmann::json::parse(slurp(dir / "a/stats.json"));
  CHECK(stats["config"]["paths"] == 300);
  CHECK(stats["config"]["seed"] == 5);
}

TEST_CASE("small reproductions write their tables") {
  TempDir dir("repro");
  const auto out = dir / "o";
  const std::string base = "reproduce --config " + kTable1 + " --paths 200 --dt 0.05 --out " + out;
  REQUIRE(run(base + " --table 3", dir / "log") == 0);
  const auto table = slurp(out + "/table3.csv");
  CHECK(table.rfind("delta,statistic,S1_eps0,S1_eps0_se", 0) == 0);
  // Five statistics for each of the three risk aversions, plus the header.
  CHECK(std::count(table.begin(), table.end(), '\n') == 16);

  for (int fig : {1, 6}) {
    REQUIRE(run(base + " --figure " + std::to_string(fig), dir / "log") == 0);
    const auto csv = slurp(out + "/figure" + std::to_string(fig) + ".csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') > 2);
  }
  CHECK(run(base + " --figure 9", dir / "log") == 2);
}
