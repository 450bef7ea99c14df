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

#include <string>

#include "ppi/config.hpp"
#include "ppi/errors.hpp"
#include "support/fixtures.hpp"

using namespace ppi;

namespace {

const std::string kTable1 = std::string(PPI_SOURCE_DIR) + "/configs/table1.toml";

const char* kMinimal = R"(
[model]
n_green = 1
a = [0.1, 0.2]
b = [0.02, 0.03]
sigma = [0.2, 0.3]
correlation = [[1.0, 0.0, 0.1], [0.0, 1.0, 0.2], [0.1, 0.2, 1.0]]
lambda = -0.4
beta = 0.2
sigma_y = 0.1
gamma0 = 0.5
p0 = 0.01
)";

std::string parse_message(const std::string& text) {
  try {
    parse_config(text, "cfg.toml");
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("shipped configuration reproduces the reference market") {
  const auto cfg = load_config(kTable1);
  const auto ref = ppi::testing::reference_model(2);
  CHECK(cfg.model.n == 4);
  CHECK(cfg.model.k == 2);
  CHECK(cfg.model.a == ref.a);
  CHECK(cfg.model.b == ref.b);
  CHECK(cfg.model.sigma == ref.sigma);
  CHECK(cfg.model.R == ref.R);
  CHECK(cfg.model.lambda == ref.lambda);
  CHECK(cfg.model.p0 == ref.p0);
  REQUIRE(cfg.scenarios.size() == 3);
  for (int s = 1; s <= 3; ++s) {
    CHECK(cfg.scenario_model("S" + std::to_string(s)).a == ppi::testing::reference_model(s).a);
  }
  CHECK_THROWS_WITH_AS(cfg.scenario_model("S4"), doctest::Contains("UnknownScenario"), ValidationError);
  CHECK(cfg.preferences.size() == 6);
  CHECK(cfg.simulation.dt == 0.004);
  CHECK(cfg.simulation.nPaths == 100000);
  CHECK(cfg.simulation.infoModes == std::vector<InfoMode>{InfoMode::Partial});
}

TEST_CASE("defaults fill optional keys") {
  const auto cfg = parse_config(kMinimal);
  CHECK(cfg.model.r == 0.01);
  CHECK(cfg.model.n == 2);
  CHECK(cfg.simulation == SimulationSettings{});
  CHECK(cfg.outputDir == "out");
}

TEST_CASE("invalid values name the broken invariant") {
  std::string text = kMinimal;
  text.replace(text.find("sigma = [0.2, 0.3]"), 18, "sigma = [-0.2, 0.3]");
  CHECK(parse_message(text).find("sigma must be positive") != std::string::npos);
}

TEST_CASE("unknown keys and syntax errors report their line") {
  const std::string unknown = std::string(kMinimal) + "colour = 3\n";
  const auto msg = parse_message(unknown);
  CHECK(msg.find("ParseError") != std::string::npos);
  INFO(msg);
  CHECK(msg.find("cfg.toml:13") != std::string::npos);
  CHECK(msg.find("colour") != std::string::npos);

  const auto bad = parse_message("[model]\nn_green = 1\na = [0.1,\n");
  CHECK(bad.find("ParseError") != std::string::npos);
  CHECK(bad.find("cfg.toml:") != std::string::npos);

  CHECK(parse_message(std::string(kMinimal) + "[simulation]\nseed = -1\n").find("seed") !=
        std::string::npos);
  CHECK_THROWS_AS(load_config("/nonexistent/ppi.toml"), Error);
}

TEST_CASE("configurations survive a write and parse round trip") {
  const auto cfg = load_config(kTable1);
  const auto back = parse_config(write_config(cfg));
  CHECK(back == cfg);
  auto other = back;
  other.simulation.seed += 1;
  CHECK_FALSE(other == cfg);
}

TEST_CASE("information mode names") {
  CHECK(parse_info_mode("full") == InfoMode::Full);
  CHECK(parse_info_mode("partial") == InfoMode::Partial);
  CHECK(info_mode_name(InfoMode::Partial) == "partial");
  CHECK_THROWS_AS(parse_info_mode("latent"), ValidationError);
}
